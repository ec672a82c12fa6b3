"""Shared numerical kernels: evaluation grids, composite Simpson integration,
standard-normal pdf/cdf, and the seeded random-number stream used by every
sampler in the package.

All densities and distribution functions in this package are ultimately
evaluated on an :class:`EvaluationGrid` and integrated with :func:`simpson`,
so the conventions fixed here (odd point counts, equal spacing) propagate
everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EvaluationGrid",
    "RngStream",
    "make_grid",
    "default_grid",
    "simpson",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_logcdf",
]


@dataclass(frozen=True)
class EvaluationGrid:
    """Equally spaced abscissa with an odd number of points.

    The odd count makes the grid directly usable by composite Simpson
    integration.  ``points[0] == lower`` and ``points[-1] == upper``.
    """

    lower: float
    upper: float
    n_points: int
    points: np.ndarray = field(repr=False, compare=False)

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / (self.n_points - 1)

    def same_as(self, other: "EvaluationGrid") -> bool:
        return (
            self.lower == other.lower
            and self.upper == other.upper
            and self.n_points == other.n_points
        )


def make_grid(lower: float, upper: float, n_points: int) -> EvaluationGrid:
    """Build an equally spaced grid of ``n_points`` (odd, >= 3) points."""
    if not np.isfinite(lower) or not np.isfinite(upper) or lower >= upper:
        raise ValueError(f"grid bounds must satisfy lower < upper, got [{lower}, {upper}]")
    n_points = int(n_points)
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError(f"n_points must be odd and >= 3, got {n_points}")
    points = np.linspace(lower, upper, n_points)
    return EvaluationGrid(float(lower), float(upper), n_points, points)


def default_grid(
    values: np.ndarray,
    n_points: int = 501,
    pad: float = 0.15,
    include_negative: bool = False,
) -> EvaluationGrid:
    """Grid covering pooled outcomes, padded by ``pad`` times the data range.

    With ``include_negative=True`` the lower edge is pushed below zero
    (mixture-of-normal density estimates can put mass on negative values
    even when all observations are positive, and distribution functions
    need that mass to be integrated).
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two pooled values to set a grid range")
    lo, hi = float(values.min()), float(values.max())
    rng_width = hi - lo
    if rng_width <= 0:
        raise ValueError("pooled values are degenerate (zero range)")
    lower = lo - pad * rng_width
    upper = hi + pad * rng_width
    if include_negative and lower > -pad * rng_width:
        lower = -pad * rng_width
    return make_grid(lower, upper, n_points)


def simpson(values: np.ndarray, spacing: float) -> float:
    """Composite Simpson estimate of the integral of equally spaced samples.

    ``values`` must have odd length >= 3.  Exact for cubic polynomials.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise ValueError("simpson expects a 1-d array of samples")
    n = v.shape[0]
    if n < 3 or n % 2 == 0:
        raise ValueError(f"simpson needs an odd number of samples >= 3, got {n}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    return float(spacing / 3.0 * (v[0] + v[-1] + 4.0 * v[1:-1:2].sum() + 2.0 * v[2:-2:2].sum()))


_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
_SQRT_HALF = np.sqrt(0.5)

# Rational Chebyshev coefficients for erf/erfc (Cody 1969, as used in the
# classic CALERF routine); relative error below 1.2e-16 on each branch.
_ERF_A = np.array(
    [3.16112374387056560e0, 1.13864154151050156e2, 3.77485237685302021e2,
     3.20937758913846947e3, 1.85777706184603153e-1]
)
_ERF_B = np.array(
    [2.36012909523441209e1, 2.44024637934444173e2, 1.28261652607737228e3,
     2.84423683343917062e3]
)
_ERF_C = np.array(
    [5.64188496988670089e-1, 8.88314979438837594e0, 6.61191906371416295e1,
     2.98635138197400131e2, 8.81952221241769090e2, 1.71204761263407058e3,
     2.05107837782607147e3, 1.23033935479799725e3, 2.15311535474403846e-8]
)
_ERF_D = np.array(
    [1.57449261107098347e1, 1.17693950891312499e2, 5.37181101862009858e2,
     1.62138957456669019e3, 3.29079923573345963e3, 4.36261909014324716e3,
     3.43936767414372164e3, 1.23033935480374942e3]
)
_ERF_P = np.array(
    [3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
     1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2]
)
_ERF_Q = np.array(
    [2.56852019228982242e0, 1.87295284992346047e0, 5.27905102951428412e-1,
     6.05183413124413191e-2, 2.33520497626869185e-3]
)
_ONE_OVER_SQRT_PI = 5.6418958354775628695e-1


def _erfc(x: np.ndarray) -> np.ndarray:
    """Complementary error function via Cody's rational approximations."""
    x = np.asarray(x, dtype=float)
    y = np.abs(x)
    out = np.empty_like(y)

    # |x| <= 0.46875: erf via P/Q in x^2, then erfc = 1 - erf.
    small = y <= 0.46875
    if np.any(small):
        z = np.where(small, y * y, 0.0)
        num = _ERF_A[4] * z
        den = z
        for i in range(3):
            num = (num + _ERF_A[i]) * z
            den = (den + _ERF_B[i]) * z
        erf_small = y * (num + _ERF_A[3]) / (den + _ERF_B[3])
        out[small] = (1.0 - erf_small)[small]

    # 0.46875 < |x| <= 4.0
    mid = (~small) & (y <= 4.0)
    if np.any(mid):
        ym = np.where(mid, y, 1.0)
        num = _ERF_C[8] * ym
        den = ym
        for i in range(7):
            num = (num + _ERF_C[i]) * ym
            den = (den + _ERF_D[i]) * ym
        res = (num + _ERF_C[7]) / (den + _ERF_D[7])
        # split exp(-y^2) to avoid cancellation, per the reference routine
        ysq = np.floor(ym * 16.0) / 16.0
        delta = (ym - ysq) * (ym + ysq)
        out[mid] = (np.exp(-ysq * ysq) * np.exp(-delta) * res)[mid]

    # |x| > 4.0
    big = y > 4.0
    if np.any(big):
        yb = np.where(big, y, 5.0)
        z = 1.0 / (yb * yb)
        num = _ERF_P[5] * z
        den = z
        for i in range(4):
            num = (num + _ERF_P[i]) * z
            den = (den + _ERF_Q[i]) * z
        res = z * (num + _ERF_P[4]) / (den + _ERF_Q[4])
        res = (_ONE_OVER_SQRT_PI - res) / yb
        ysq = np.floor(yb * 16.0) / 16.0
        delta = (yb - ysq) * (yb + ysq)
        with np.errstate(under="ignore"):
            out[big] = (np.exp(-ysq * ysq) * np.exp(-delta) * res)[big]

    return np.where(x < 0.0, 2.0 - out, out)


def std_normal_pdf(x):
    """Standard normal density, vectorized."""
    x = np.asarray(x, dtype=float)
    with np.errstate(under="ignore"):
        result = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return result[()]


def std_normal_cdf(x):
    """Standard normal distribution function, absolute error below 1e-12.

    Computed as erfc(-x / sqrt(2)) / 2 with an in-package rational erfc.
    """
    x = np.asarray(x, dtype=float)
    result = 0.5 * _erfc(-x * _SQRT_HALF)
    return result[()]


def std_normal_logcdf(x):
    """log of the standard normal cdf, stable far into the lower tail.

    For x >= -8 this is log(cdf(x)); below, the first terms of the
    asymptotic expansion of Mills' ratio keep the value finite where the
    cdf itself underflows.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    hi = x >= -8.0
    if np.any(hi):
        out[hi] = np.log(std_normal_cdf(x[hi]))
    lo = ~hi
    if np.any(lo):
        xl = x[lo]
        z = xl * xl
        # Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6)
        series = 1.0 - 1.0 / z + 3.0 / z**2 - 15.0 / z**3
        out[lo] = -0.5 * z - 0.5 * np.log(2.0 * np.pi) - np.log(-xl) + np.log(series)
    return out[()]


class RngStream:
    """Seeded, splittable random stream.

    A stream is identified by ``(seed, stream_id)`` (plus the spawn path for
    children).  Identical identifiers reproduce identical draw sequences;
    distinct identifiers give statistically independent streams.  Backed by
    numpy's counter-based Philox bit generator keyed through SeedSequence,
    so child streams never overlap their parents.

    A stream must not be shared across concurrent tasks; spawn one child
    per task instead.
    """

    def __init__(self, seed: int, stream_id: int = 0, _spawn_path: tuple = ()):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._spawn_path = tuple(int(k) for k in _spawn_path)
        seq = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream_id, *self._spawn_path)
        )
        self.generator = np.random.Generator(np.random.Philox(seq))

    def child(self, k: int) -> "RngStream":
        """Independent stream derived from this one; deterministic in ``k``."""
        return RngStream(self.seed, self.stream_id, (*self._spawn_path, int(k)))

    def __repr__(self) -> str:  # pragma: no cover
        path = "".join(f"/{k}" for k in self._spawn_path)
        return f"RngStream(seed={self.seed}, stream={self.stream_id}{path})"
