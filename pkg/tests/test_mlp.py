"""Dense network forward pass, loss gradient and the optimizer step."""

import math

import numpy as np
import pytest

from isacsim.mlp import (AdamState, Mlp, adam_step, bce_loss_and_grad,
                         LEAKY_SLOPE)


def test_constructor_rejects_short_size_lists():
    with pytest.raises(ValueError):
        Mlp((4,), np.random.default_rng(0))


def test_forward_single_matches_batch():
    rng = np.random.default_rng(0)
    net = Mlp((5, 7, 3), rng)
    x = rng.standard_normal((4, 5))
    batch = net.forward(x)
    assert batch.shape == (4, 3)
    assert np.all((batch > 0) & (batch < 1))
    for i in range(4):
        assert np.allclose(net.forward(x[i]), batch[i])


def test_forward_oracle_tiny_network():
    # one hidden unit with hand-set weights: x=0 -> z=-1 -> leaky -0.3
    # -> sigmoid(-0.3)
    net = Mlp((1, 1, 1), np.random.default_rng(0))
    net.layers = [(np.array([[1.0]]), np.array([-1.0])),
                  (np.array([[1.0]]), np.array([0.0]))]
    got = net.forward(np.array([0.0]))
    assert math.isclose(got[0], 0.425557483188341, rel_tol=1e-12)
    # positive side of the hidden unit passes through unscaled
    got_pos = net.forward(np.array([1.46]))
    assert math.isclose(got_pos[0], 0.6130141761393355, rel_tol=1e-12)


def test_leaky_slope_constant():
    assert LEAKY_SLOPE == 0.3


def test_init_is_seeded_and_scaled():
    a = Mlp((6, 4), np.random.default_rng(5))
    b = Mlp((6, 4), np.random.default_rng(5))
    for (wa, ba), (wb, bb) in zip(a.layers, b.layers):
        assert np.array_equal(wa, wb) and np.array_equal(ba, bb)
    bound = 1.0 / math.sqrt(6)
    assert np.all(np.abs(a.layers[0][0]) <= bound)
    assert np.all(np.abs(a.layers[0][1]) <= bound)


def test_state_dict_roundtrip():
    rng = np.random.default_rng(1)
    net = Mlp((4, 6, 2), rng)
    clone = Mlp.from_state_dict(net.state_dict())
    x = rng.standard_normal((3, 4))
    assert np.array_equal(net.forward(x), clone.forward(x))
    assert clone.sizes == net.sizes


def test_bce_loss_oracle():
    net = Mlp((2, 2), np.random.default_rng(2))
    # force the outputs to known probabilities through a saturating input
    x = np.array([[0.0, 0.0]])
    net.layers = [(np.zeros((2, 2)),
                   np.array([np.log(9.0), np.log(0.25)]))]  # p = 0.9, 0.2
    y = np.array([[1.0, 0.0]])
    loss, _ = bce_loss_and_grad(net, x, y)
    assert math.isclose(loss, 0.16425203348601802, rel_tol=1e-12)


def test_bce_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    net = Mlp((4, 5, 3, 2), rng)
    x = rng.standard_normal((8, 4))
    y = rng.integers(0, 2, (8, 2)).astype(float)
    _, grads = bce_loss_and_grad(net, x, y)
    worst = 0.0
    for li, (w, b) in enumerate(net.layers):
        for arr, g in ((w, grads[li][0]), (b, grads[li][1])):
            flat = arr.ravel()
            for idx in range(flat.size):
                eps = 1e-6 * max(1.0, abs(flat[idx]))
                orig = flat[idx]
                flat[idx] = orig + eps
                hi, _ = bce_loss_and_grad(net, x, y)
                flat[idx] = orig - eps
                lo, _ = bce_loss_and_grad(net, x, y)
                flat[idx] = orig
                fd = (hi - lo) / (2 * eps)
                worst = max(worst, abs(fd - g.ravel()[idx]))
    assert worst < 1e-7, worst


def test_adam_first_step_is_signed_learning_rate():
    net = Mlp((1, 1), np.random.default_rng(4))
    net.layers = [(np.array([[0.5]]), np.array([0.25]))]
    state = AdamState.for_net(net)
    grads = [(np.array([[2.0]]), np.array([-3.0]))]
    adam_step(net, grads, state, lr=1e-2)
    # bias correction makes the first update lr * sign(gradient)
    assert math.isclose(net.layers[0][0][0, 0], 0.5 - 1e-2, rel_tol=1e-7)
    assert math.isclose(net.layers[0][1][0], 0.25 + 1e-2, rel_tol=1e-7)
    assert state.t == 1


def test_adam_matches_reference_recursion():
    rng = np.random.default_rng(5)
    net = Mlp((2, 2), rng)
    state = AdamState.for_net(net)
    w0 = net.layers[0][0].copy()
    b0 = net.layers[0][1].copy()
    gw = rng.standard_normal((2, 2, 2))
    gb = rng.standard_normal((2, 2))

    m = [np.zeros_like(w0), np.zeros_like(b0)]
    v = [np.zeros_like(w0), np.zeros_like(b0)]
    ref = [w0.copy(), b0.copy()]
    for t in range(1, 3):
        adam_step(net, [(gw[t - 1], gb[t - 1])], state, lr=1e-3)
        for p, mm, vv, g in zip(ref, m, v, (gw[t - 1], gb[t - 1])):
            mm[:] = 0.9 * mm + 0.1 * g
            vv[:] = 0.999 * vv + 0.001 * g * g
            p -= 1e-3 * (mm / (1 - 0.9 ** t)) / (np.sqrt(vv / (1 - 0.999 ** t)) + 1e-8)
    assert np.allclose(net.layers[0][0], ref[0], rtol=1e-12)
    assert np.allclose(net.layers[0][1], ref[1], rtol=1e-12)


def test_training_reduces_loss_on_a_separable_task():
    rng = np.random.default_rng(6)
    net = Mlp((3, 16, 1), rng)
    state = AdamState.for_net(net)
    x = rng.standard_normal((200, 3))
    y = (x @ np.array([1.0, -2.0, 0.5]) > 0).astype(float)[:, None]
    first, _ = bce_loss_and_grad(net, x, y)
    for _ in range(300):
        loss, grads = bce_loss_and_grad(net, x, y)
        adam_step(net, grads, state, lr=1e-2)
    assert loss < 0.5 * first
