import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgdicp.errors import DivergedError, InvalidArgumentError
from sgdicp.optimizer import BatchSampler, OptimizerState, next_batch, step_adam, step_fixed


def test_full_pool_draw_is_permutation():
    s = BatchSampler(4, seed=0)
    assert sorted(next_batch(s, 4).tolist()) == [0, 1, 2, 3]


def test_two_draws_of_three_from_four():
    s = BatchSampler(4, seed=1)
    drawn = np.concatenate([s.next_batch(3), s.next_batch(3)])
    counts = np.bincount(drawn, minlength=4)
    assert len(drawn) == 6
    assert counts.min() >= 1 and counts.max() <= 2


def test_counts_after_seven_batches_of_160():
    s = BatchSampler(1000, seed=2)
    draws = np.concatenate([s.next_batch(160) for _ in range(math.ceil(1000 / 160))])
    assert len(draws) == 1120
    counts = np.bincount(draws, minlength=1000)
    assert set(np.unique(counts)) <= {1, 2}
    # first epoch is complete, 120 indices already drawn again from the second
    assert np.sum(counts == 2) == 120
    assert s.epoch == 1


def test_batch_larger_than_pool_rejected():
    with pytest.raises(InvalidArgumentError):
        BatchSampler(5).next_batch(6)
    with pytest.raises(InvalidArgumentError):
        BatchSampler(5).next_batch(0)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300), st.data())
def test_every_index_exactly_once_per_epoch(n, data):
    m = data.draw(st.integers(1, n))
    seed = data.draw(st.integers(0, 2**32 - 1))
    epochs = data.draw(st.integers(1, 4))
    s = BatchSampler(n, seed=seed)
    batches = [s.next_batch(m) for _ in range(math.ceil(epochs * n / m) + 1)]
    for b in batches:
        assert len(b) == m
        assert len(set(b.tolist())) == m
    stream = np.concatenate(batches)
    for e in range(len(stream) // n):
        assert sorted(stream[e * n:(e + 1) * n].tolist()) == list(range(n))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 200), st.data())
def test_window_counts_within_one_of_epoch_count(n, data):
    m = data.draw(st.integers(1, n))
    k = data.draw(st.integers(1, 5))
    s = BatchSampler(n, seed=data.draw(st.integers(0, 1000)))
    stream = np.concatenate([s.next_batch(m) for _ in range(math.ceil(k * n / m))])
    counts = np.bincount(stream, minlength=n)
    assert counts.min() >= k - 1 and counts.max() <= k + 1
    full = len(stream) // n
    assert np.all(np.bincount(stream[:full * n], minlength=n) == full)


def test_sampler_determinism():
    a, b = BatchSampler(97, seed=11), BatchSampler(97, seed=11)
    for _ in range(20):
        assert np.array_equal(a.next_batch(13), b.next_batch(13))
    c = BatchSampler(97, seed=12)
    assert not np.array_equal(BatchSampler(97, seed=11).next_batch(13), c.next_batch(13))


def test_step_fixed_zero_gradient():
    theta = np.array([1.0, -2, 3, 0.1, 0.2, 0.3])
    np.testing.assert_array_equal(step_fixed(theta, np.zeros(6), 2.0), theta)


def test_step_fixed_example():
    np.testing.assert_array_equal(step_fixed(np.zeros(6), [1, 0, 0, 0, 0, 0], 2.0), [-2, 0, 0, 0, 0, 0])


def test_step_fixed_matches_hand_formula():
    rng = np.random.default_rng(0)
    for _ in range(100):
        theta, grad, alpha = rng.normal(size=6), rng.normal(size=6), rng.uniform(0.01, 5)
        out = step_fixed(theta, grad, alpha)
        for k in range(6):
            assert out[k] == theta[k] - alpha * grad[k]


@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6), st.floats(-100, 100))
def test_step_fixed_linear_in_gradient(grad, c):
    grad = np.array(grad)
    d1 = step_fixed(np.zeros(6), grad, 2.0)
    dc = step_fixed(np.zeros(6), c * grad, 2.0)
    np.testing.assert_allclose(dc, c * d1, rtol=1e-12, atol=1e-9)


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_non_finite_gradient_diverges(bad):
    g = np.zeros(6)
    g[2] = bad
    with pytest.raises(DivergedError):
        step_fixed(np.zeros(6), g, 1.0)
    with pytest.raises(DivergedError):
        step_adam(OptimizerState(schedule="adam"), np.zeros(6), g)


def test_adam_zero_gradient_first_step():
    state = OptimizerState(schedule="adam", alpha=0.5)
    theta = np.arange(6.0)
    out, new = step_adam(state, theta, np.zeros(6))
    np.testing.assert_array_equal(out, theta)
    assert np.all(new.m == 0) and np.all(new.v == 0)
    assert new.step_count == 1 and state.step_count == 0


@pytest.mark.parametrize("g", [1e-3, 0.7, 250.0])
def test_adam_first_step_moves_by_alpha(g):
    out, _ = step_adam(OptimizerState(schedule="adam", alpha=0.3), np.zeros(6), [g, 0, 0, 0, 0, 0])
    assert out[0] == pytest.approx(-0.3, rel=1e-4)
    assert np.all(out[1:] == 0)


def scalar_adam(x0, grad_fn, alpha, steps, b1=0.9, b2=0.999, eps=1e-8):
    """Oracle: textbook ADAM on one scalar."""
    x, m, v, xs = x0, 0.0, 0.0, []
    for t in range(1, steps + 1):
        g = grad_fn(x)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        x = x - alpha * mh / (math.sqrt(vh) + eps)
        xs.append(x)
    return xs


def test_adam_trace_on_quadratic():
    curv = np.array([1.0, 2.0, 0.5, 3.0, 0.1, 10.0])
    centre = np.array([0.3, -0.2, 1.0, 0.0, -2.0, 0.7])
    state = OptimizerState(schedule="adam", alpha=0.05)
    theta = np.zeros(6)
    trace = []
    for _ in range(10):
        theta = state.step(theta, curv * (theta - centre))
        trace.append(theta.copy())
    for k in range(6):
        ref = scalar_adam(0.0, lambda x, k=k: curv[k] * (x - centre[k]), 0.05, 10)
        np.testing.assert_allclose([t[k] for t in trace], ref, rtol=0, atol=1e-12)
    assert state.step_count == 10


@settings(max_examples=50)
@given(st.lists(st.floats(1e-3, 1e6), min_size=6, max_size=6), st.integers(1, 30))
def test_adam_step_bounded_by_alpha_for_steady_gradients(g, steps):
    state = OptimizerState(schedule="adam", alpha=0.1)
    theta = np.zeros(6)
    for _ in range(steps):
        new = state.step(theta, g)
        assert np.all(np.abs(new - theta) <= 0.1 * (1 + 1e-6))
        theta = new


@settings(max_examples=50)
@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=6, max_size=6), min_size=1, max_size=40))
def test_adam_step_bounded_for_any_gradients(grads):
    # worst case: a large gradient after a run of tiny ones, |step| -> alpha (1 - b1) / sqrt(1 - b2)
    state = OptimizerState(schedule="adam", alpha=0.1)
    bound = 0.1 * (1 - state.beta1) / math.sqrt(1 - state.beta2) * (1 + 1e-6)
    theta = np.zeros(6)
    for g in grads:
        new = state.step(theta, g)
        assert np.all(np.abs(new - theta) <= bound)
        theta = new


def test_state_validation():
    with pytest.raises(InvalidArgumentError):
        OptimizerState(schedule="momentum")
    with pytest.raises(InvalidArgumentError):
        OptimizerState(alpha=0.0)
    with pytest.raises(InvalidArgumentError):
        OptimizerState(beta1=1.0)
