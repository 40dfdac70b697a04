"""Shared builders for the test suite."""

import numpy as np

from isacsim import build_scenario, init_world, make_config


def desk_setup(k=None, q=None):
    """Desk-scale (cfg, users, targets), optionally trimmed."""
    cfg = make_config("desk")
    users, targets = build_scenario(cfg, "desk")
    if k is not None:
        users = users[:k]
    if q is not None:
        targets = targets[:q]
    return cfg, users, targets


def small_world(seed=0, k=2, q=1):
    """A trimmed desk world for fast frame-level tests."""
    cfg, users, targets = desk_setup(k, q)
    return cfg, init_world(cfg, users, targets, seed)


def random_psd(rng, n=3, jitter=0.1):
    a = rng.standard_normal((n, n))
    return a @ a.T + jitter * np.eye(n)
