"""Moment and Laplace-transform oracles for the PG(1, c) sampler."""

import numpy as np
import pytest

from underlap.numerics import RngStream
from underlap.polya_gamma import sample_pg1, sample_pg1_batch

N = 200_000


def pg1_mean(c: float) -> float:
    """Analytic moment: E[PG(1, c)] = tanh(c/2) / (2c), limit 1/4 at 0."""
    if c == 0.0:
        return 0.25
    return float(np.tanh(c / 2.0) / (2.0 * c))


class TestMoments:
    @pytest.mark.parametrize("c", [0.0, 0.5, 2.0, 5.0, -3.0, 15.0])
    def test_mean_within_three_ses(self, c):
        draws = sample_pg1_batch(np.full(N, c), RngStream(101, int(abs(c) * 10)))
        se = draws.std(ddof=1) / np.sqrt(N)
        assert abs(draws.mean() - pg1_mean(c)) <= 3.0 * se

    def test_depends_on_c_only_through_magnitude(self):
        a = sample_pg1_batch(np.full(N, 2.0), RngStream(55, 0))
        b = sample_pg1_batch(np.full(N, -2.0), RngStream(56, 0))
        se = np.hypot(a.std(ddof=1), b.std(ddof=1)) / np.sqrt(N)
        assert abs(a.mean() - b.mean()) <= 3.0 * se


class TestLaplaceTransform:
    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_at_zero_tilt(self, t):
        # E[exp(-v t^2 / 2)] = 1 / cosh(t / 2) for PG(1, 0)
        draws = sample_pg1_batch(np.zeros(N), RngStream(202, int(t * 10)))
        vals = np.exp(-draws * t * t / 2.0)
        se = vals.std(ddof=1) / np.sqrt(N)
        assert abs(vals.mean() - 1.0 / np.cosh(t / 2.0)) <= 3.0 * se

    def test_at_nonzero_tilt(self):
        # E[exp(-v t^2/2)] for PG(1, c): cosh(c/2) / cosh(sqrt((c^2+t^2))/2)
        c, t = 1.5, 1.0
        draws = sample_pg1_batch(np.full(N, c), RngStream(203, 7))
        vals = np.exp(-draws * t * t / 2.0)
        truth = np.cosh(c / 2.0) / np.cosh(np.sqrt(c * c + t * t) / 2.0)
        se = vals.std(ddof=1) / np.sqrt(N)
        assert abs(vals.mean() - truth) <= 3.0 * se


class TestContract:
    def test_all_draws_positive(self):
        for c in (0.0, 1.0, 30.0):
            draws = sample_pg1_batch(np.full(5000, c), RngStream(9, int(c)))
            assert np.all(draws > 0.0)

    def test_deterministic_given_stream(self):
        a = sample_pg1_batch(np.linspace(-3, 3, 500), RngStream(4, 4))
        b = sample_pg1_batch(np.linspace(-3, 3, 500), RngStream(4, 4))
        np.testing.assert_array_equal(a, b)

    def test_scalar_wrapper(self):
        v = sample_pg1(1.3, RngStream(0, 0))
        assert isinstance(v, float) and v > 0.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            sample_pg1(float("nan"), RngStream(0, 0))
        with pytest.raises(ValueError):
            sample_pg1_batch([1.0, float("inf")], RngStream(0, 0))

    def test_mixed_batch_matches_marginals(self):
        c = np.concatenate([np.zeros(N // 2), np.full(N // 2, 2.0)])
        draws = sample_pg1_batch(c, RngStream(77, 0))
        for value, mask in ((0.0, c == 0.0), (2.0, c == 2.0)):
            part = draws[mask]
            se = part.std(ddof=1) / np.sqrt(part.size)
            assert abs(part.mean() - pg1_mean(value)) <= 3.5 * se
