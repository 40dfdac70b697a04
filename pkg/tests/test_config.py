"""Units, parameter validation, scenario construction and serialization."""

import dataclasses
import json
import math

import numpy as np
import pytest

from isacsim import (CommUserParams, RadarTargetParams, RngStreams,
                     SystemConfig, build_scenario, load_scenario, make_config)
from isacsim.config import (STREAM_NAMES, complex_normal, config_to_dict,
                            db_to_linear, dbm_to_watt, initial_gain,
                            pathloss_db)


def test_unit_conversions():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == 10.0
    assert math.isclose(db_to_linear(3.0), 10.0 ** 0.3)
    assert math.isclose(dbm_to_watt(30.0), 1.0)
    assert math.isclose(dbm_to_watt(0.0), 1e-3)


def test_pathloss():
    assert math.isclose(pathloss_db(100.0), 106.42)
    assert pathloss_db(200.0) > pathloss_db(100.0)
    with pytest.raises(ValueError):
        pathloss_db(0.0)


def test_system_config_derived_quantities():
    cfg = SystemConfig()
    assert math.isclose(cfg.bandwidth, 64 * 156.25e3)
    assert math.isclose(cfg.sigma_user, dbm_to_watt(-174.0) * cfg.bandwidth)
    assert math.isclose(cfg.sigma_radar, dbm_to_watt(-174.0) * cfg.delta_f)
    assert math.isclose(cfg.delta_ul, cfg.sigma_user)
    assert math.isclose(cfg.frame_duration, 800 * 8e-6)
    cfg.validate()


@pytest.mark.parametrize("field,value", [
    ("t_slot", 9e-6),          # breaks the slot structure identity
    ("delta_f", 200e3),        # no longer the inverse symbol duration
    ("p_tx", 0.0),
    ("l_rx", 1),               # angle floor needs at least two elements
    ("n_subcarriers", 1),
    ("d_pilot", 0),
    ("omega_bar", 0.0),
    ("omega_bar", 1.5),
    ("omega", (1.0, 1.0)),
    ("omega", (1.0, -1.0, 1.0)),
    ("w_radar", -1.0),
    ("xi_c", 0.0),
])
def test_system_config_rejects(field, value):
    cfg = dataclasses.replace(SystemConfig(), **{field: value})
    with pytest.raises(ValueError):
        cfg.validate()


def test_user_params_rejects():
    good = dict(rho=0.9, beta_bar=1e-9, p_ul=1.0, sigma=1e-12,
                delta_ul=1e-12, varsigma0=1e-10)
    CommUserParams(**good).validate()
    for key, bad in (("rho", 1.2), ("rho", -0.1), ("beta_bar", 0.0),
                     ("p_ul", -1.0), ("sigma", 0.0), ("delta_ul", 0.0),
                     ("varsigma0", -1e-12)):
        with pytest.raises(ValueError):
            CommUserParams(**{**good, key: bad}).validate()


def test_target_params_rejects():
    good = dict(x0=np.array([0.5, 100.0, 10.0]), theta_bar=0.5 - math.pi,
                sigma_eps=np.array([1e-8, 1e-4, 1e-3]))
    RadarTargetParams(**good).validate()
    for key, bad in (("x0", np.zeros(2)),
                     ("x0", np.array([0.5, -1.0, 10.0])),
                     ("sigma_eps", np.array([1e-8, -1e-4, 1e-3])),
                     ("sigma_rcs", 0.0),
                     ("m0", np.eye(2))):
        with pytest.raises(ValueError):
            RadarTargetParams(**{**good, key: bad}).validate()


def test_rng_streams_are_deterministic_and_independent():
    a = RngStreams(123)
    b = RngStreams(123)
    for name in STREAM_NAMES:
        da = getattr(a, name).standard_normal(8)
        db = getattr(b, name).standard_normal(8)
        assert np.array_equal(da, db), name
    # distinct streams from the same seed must not repeat each other
    c = RngStreams(123)
    draws = [getattr(c, name).standard_normal(8) for name in STREAM_NAMES]
    for i in range(len(draws)):
        for j in range(i + 1, len(draws)):
            assert not np.array_equal(draws[i], draws[j])


def test_rng_streams_state_roundtrip():
    streams = RngStreams(7)
    streams.channel_evolution.standard_normal(5)
    state = streams.state()
    want = streams.measurement_noise.standard_normal(4)
    streams.set_state(state)
    got = streams.measurement_noise.standard_normal(4)
    assert np.array_equal(want, got)
    clone = RngStreams.from_state(state)
    assert np.array_equal(clone.measurement_noise.standard_normal(4), want)


def test_complex_normal_statistics():
    rng = np.random.default_rng(0)
    z = complex_normal(rng, 2.0, 200_000)
    power = np.mean(np.abs(z) ** 2)
    assert abs(power - 2.0) < 0.04
    assert abs(np.var(z.real) - 1.0) < 0.02
    assert abs(np.var(z.imag) - 1.0) < 0.02
    assert abs(np.mean(z)) < 0.02
    assert complex_normal(rng, 0.0, 3).tolist() == [0.0, 0.0, 0.0]


def test_make_config_presets():
    full = make_config("full")
    assert (full.l_tx, full.l_rx, full.n_frames) == (64, 32, 10000)
    desk = make_config("desk")
    assert (desk.l_tx, desk.l_rx, desk.n_frames) == (8, 8, 3000)
    assert desk.m_slots == full.m_slots == 800
    # longer pilot block at desk scale so skipping an update can pay off
    assert (full.d_pilot, desk.d_pilot) == (10, 40)
    with pytest.raises(ValueError):
        make_config("bench")


def test_build_scenario_desk():
    cfg = make_config("desk")
    users, targets = build_scenario(cfg, "desk")
    assert [u.rho for u in users] == [0.99, 0.9, 0.8]
    # one shared distance: the aging rate is the only asymmetry
    for u in users:
        assert math.isclose(u.beta_bar, db_to_linear(-pathloss_db(4000.0)))
        assert math.isclose(u.varsigma0, u.beta_bar / 2.0)
        assert math.isclose(u.sigma, cfg.sigma_user)
    assert len(targets) == 2
    for t in targets:
        assert math.isclose(t.theta_bar, t.x0[0] - math.pi)
        m0 = np.asarray(t.m0)
        assert m0.shape == (3, 3)
        assert np.all(np.diag(m0) > 0)
        assert np.array_equal(m0, np.diag(np.diag(m0)))
    # faster process noise for the second target
    assert np.all(np.asarray(targets[1].sigma_eps)
                  > np.asarray(targets[0].sigma_eps))


def test_initial_gain():
    cfg = make_config("desk")
    assert math.isclose(initial_gain(cfg, 2),
                        1.0 / (2.0 * 16 * 3002))


def test_scenario_roundtrip(tmp_path):
    cfg = make_config("desk")
    users, targets = build_scenario(cfg, "desk")
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(config_to_dict(cfg, users, targets)))
    cfg2, users2, targets2 = load_scenario(str(path))
    assert dataclasses.asdict(cfg2) == dataclasses.asdict(cfg)
    for a, b in zip(users, users2):
        assert dataclasses.asdict(a) == dataclasses.asdict(b)
    for a, b in zip(targets, targets2):
        assert np.allclose(a.x0, b.x0)
        assert math.isclose(a.theta_bar, b.theta_bar)
        assert np.allclose(a.sigma_eps, b.sigma_eps)
        assert np.allclose(a.m0, b.m0)


def test_scenario_shorthand_fields(tmp_path):
    raw = {
        "system": {"l_tx": 4, "l_rx": 4},
        "users": [{"rho": 0.9, "distance_m": 200.0}],
        "targets": [{"x0": [0.7, 150.0, 30.0], "rho_t": 1.0}],
    }
    path = tmp_path / "short.json"
    path.write_text(json.dumps(raw))
    cfg, users, targets = load_scenario(str(path))
    assert cfg.l_tx == 4
    assert math.isclose(users[0].beta_bar, db_to_linear(-pathloss_db(200.0)))
    assert math.isclose(users[0].varsigma0, users[0].beta_bar / 2.0)
    assert math.isclose(targets[0].theta_bar, 0.7 - math.pi)
    assert np.asarray(targets[0].m0).shape == (3, 3)


@pytest.mark.parametrize("raw", [
    {"bogus": {}},
    {"system": {"bogus": 1}},
    {"users": [{"rho": 0.9, "beta_bar": 1e-9, "bogus": 1}]},
    {"targets": [{"x0": [0.7, 150.0, 30.0], "rho_t": 1.0, "bogus": 1}]},
])
def test_scenario_rejects_unknown_fields(tmp_path, raw):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    with pytest.raises(ValueError):
        load_scenario(str(path))
