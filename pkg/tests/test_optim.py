import math

import numpy as np
import pytest

from priming_bench import autodiff as ad
from priming_bench.autodiff import Tape, Tensor, backward
from priming_bench.optim import AdamState, adam_step, zero_grads


def test_zero_gradient_leaves_parameter_unchanged():
    w = Tensor([1.0, -2.0], requires_grad=True)
    w.grad = np.zeros(2)
    adam_step({"w": w}, AdamState())
    np.testing.assert_array_equal(w.data, [1.0, -2.0])


def test_first_step_closed_form():
    lr, b1, b2, eps, g = 0.01, 0.9, 0.999, 1e-8, 0.3
    w = Tensor([0.5], requires_grad=True)
    w.grad = np.array([g])
    state = AdamState(lr, b1, b2, eps)
    adam_step({"w": w}, state)
    m_hat = (1 - b1) * g / (1 - b1)
    v_hat = (1 - b2) * g * g / (1 - b2)
    expected = 0.5 - lr * m_hat / (math.sqrt(v_hat) + eps)
    assert w.data[0] == pytest.approx(expected, abs=1e-15)
    # the first bias-corrected step is lr * sign(g), up to eps
    assert w.data[0] == pytest.approx(0.5 - lr, abs=1e-9)
    assert state.step_count == 1


def test_quadratic_converges():
    w = Tensor([1.0], requires_grad=True)
    state = AdamState(learning_rate=0.1)
    for _ in range(100):
        with Tape():
            backward(ad.sum_all(ad.mul(w, w)))
        adam_step({"w": w}, state)
        zero_grads({"w": w})
    assert abs(w.data[0]) < 0.1
    assert state.step_count == 100


def test_scalar_simulation_oracle():
    # independent re-implementation of the update rule on plain floats
    w_ref, m, v = 1.0, 0.0, 0.0
    w = Tensor([1.0], requires_grad=True)
    state = AdamState(learning_rate=0.05)
    for t in range(1, 21):
        g = 2 * w_ref
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        w_ref -= 0.05 * (m / (1 - 0.9**t)) / (math.sqrt(v / (1 - 0.999**t)) + 1e-8)
        w.grad = 2 * w.data.copy()
        adam_step({"w": w}, state)
    assert w.data[0] == pytest.approx(w_ref, abs=1e-12)


def test_missing_grad_is_an_error():
    w1 = Tensor([1.0], requires_grad=True)
    w1.grad = np.ones(1)
    with pytest.raises(ValueError, match="w2"):
        adam_step({"w1": w1, "w2": Tensor([1.0], requires_grad=True)}, AdamState())


def test_moments_match_parameter_shapes():
    params = {"a": Tensor(np.ones((2, 3)), requires_grad=True), "b": Tensor(np.ones(4), requires_grad=True)}
    for p in params.values():
        p.grad = np.ones_like(p.data)
    state = AdamState()
    adam_step(params, state)
    for name, p in params.items():
        assert state.first_moment[name].shape == p.shape
        assert state.second_moment[name].shape == p.shape


def test_grads_left_untouched():
    w = Tensor([1.0, 2.0], requires_grad=True)
    w.grad = np.array([0.1, -0.2])
    adam_step({"w": w}, AdamState())
    np.testing.assert_array_equal(w.grad, [0.1, -0.2])
