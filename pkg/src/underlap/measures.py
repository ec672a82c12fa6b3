"""Discrimination measures computed from grid-evaluated densities and
distribution functions.

The underlap coefficient (integral of the pointwise maximum of the
per-group densities) is the central quantity: it ranges from 1 (complete
overlap, a single effective population of outcomes) to H (complete
separation into H effective populations) and requires no stochastic
ordering of the groups.  Alongside it live the two- and three-class
overlap coefficients, the three-class Youden index with its optimal
thresholds, the volume under the ROC surface, the trinormal closed forms,
and the classification of density intersection points into inner and
outer crossings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    EvaluationGrid,
    RngStream,
    make_grid,
    simpson,
    std_normal_cdf,
    std_normal_pdf,
)

__all__ = [
    "TAU_NORM_DEFAULT",
    "GriddedDensity",
    "GriddedCdf",
    "IntersectionPoint",
    "gridded_density",
    "gridded_cdf",
    "unl",
    "ovl2",
    "ovl3",
    "unl_from_ovl",
    "yi3",
    "vus_empirical",
    "vus_trinormal",
    "unl_trinormal",
    "classify_intersections",
]

# default tolerance on |integral - 1| when validating a gridded density
TAU_NORM_DEFAULT = 0.01


@dataclass(frozen=True)
class GriddedDensity:
    """A density evaluated on an :class:`EvaluationGrid`.

    Values must be nonnegative and integrate (composite Simpson) to 1
    within ``tau_norm``; a failed check usually means the grid does not
    cover the distribution's support.
    """

    grid: EvaluationGrid
    values: np.ndarray = field(repr=False)
    tau_norm: float = field(default=TAU_NORM_DEFAULT, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.n_points,):
            raise ValueError("density values must match the grid length")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("density values must be finite and nonnegative")
        total = simpson(vals, self.grid.spacing)
        if abs(total - 1.0) > self.tau_norm:
            raise ValueError(
                f"density integrates to {total:.6f}, outside 1 +/- {self.tau_norm}; "
                "the grid is probably too narrow"
            )


@dataclass(frozen=True)
class GriddedCdf:
    """A distribution function evaluated on an :class:`EvaluationGrid`.

    Must be nondecreasing with first value <= edge_tol and last value
    >= 1 - edge_tol (default 0.01), i.e. the grid has to cover essentially
    all of the distribution.  Posterior pipelines relax edge_tol slightly
    because mixture draws can put small prior-governed mass beyond any
    data-driven grid.
    """

    grid: EvaluationGrid
    values: np.ndarray = field(repr=False)
    edge_tol: float = field(default=0.01, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.n_points,):
            raise ValueError("cdf values must match the grid length")
        if not np.all(np.isfinite(vals)):
            raise ValueError("cdf values must be finite")
        if np.any(np.diff(vals) < -1e-12):
            raise ValueError("cdf values must be nondecreasing")
        if vals[0] > self.edge_tol or vals[-1] < 1.0 - self.edge_tol:
            raise ValueError(
                f"cdf spans [{vals[0]:.4f}, {vals[-1]:.4f}]; the grid does not "
                "cover the distribution"
            )


@dataclass(frozen=True)
class IntersectionPoint:
    """A crossing of two group densities.

    ``kind`` is "outer" when the remaining density lies below the shared
    height at the crossing (a change point of the argmax density) and
    "inner" when it lies above.  ``equal_pair`` holds the 1-based indices
    of the two crossing groups.
    """

    location: float
    kind: str
    equal_pair: tuple
    shared_height: float


def gridded_density(spec, grid: EvaluationGrid, tau_norm: float = TAU_NORM_DEFAULT) -> GriddedDensity:
    """Evaluate an analytic density spec on a grid."""
    from .densities import pdf_at

    return GriddedDensity(grid, pdf_at(spec, grid.points), tau_norm)


def gridded_cdf(spec, grid: EvaluationGrid) -> GriddedCdf:
    """Evaluate an analytic distribution function on a grid."""
    from .densities import cdf_at

    return GriddedCdf(grid, cdf_at(spec, grid.points))


def _require_shared_grid(gridded) -> EvaluationGrid:
    grid = gridded[0].grid
    for g in gridded[1:]:
        if not grid.same_as(g.grid):
            raise ValueError("all inputs must share one evaluation grid")
    return grid


def unl(densities) -> float:
    """Underlap coefficient of H >= 2 densities on a shared grid.

    Integral of the pointwise maximum; 1 = complete overlap, H = complete
    separation.
    """
    densities = list(densities)
    if len(densities) < 2:
        raise ValueError("underlap needs at least two densities")
    grid = _require_shared_grid(densities)
    stacked = np.vstack([d.values for d in densities])
    return simpson(stacked.max(axis=0), grid.spacing)


def ovl2(f: GriddedDensity, g: GriddedDensity) -> float:
    """Two-class overlap coefficient: integral of the pointwise minimum."""
    grid = _require_shared_grid([f, g])
    return simpson(np.minimum(f.values, g.values), grid.spacing)


def ovl3(f1: GriddedDensity, f2: GriddedDensity, f3: GriddedDensity) -> float:
    """Three-class overlap coefficient: integral of the three-way minimum."""
    grid = _require_shared_grid([f1, f2, f3])
    return simpson(np.minimum(np.minimum(f1.values, f2.values), f3.values), grid.spacing)


def unl_from_ovl(f1: GriddedDensity, f2: GriddedDensity, f3: GriddedDensity) -> float:
    """Underlap via the overlap identity:
    3 - OVL(f1,f2) - OVL(f1,f3) - OVL(f2,f3) + OVL(f1,f2,f3).

    Agrees with :func:`unl` to within integration roundoff.
    """
    return 3.0 - ovl2(f1, f2) - ovl2(f1, f3) - ovl2(f2, f3) + ovl3(f1, f2, f3)


def yi3(F1: GriddedCdf, F2: GriddedCdf, F3: GriddedCdf) -> tuple:
    """Three-class Youden index and its optimal thresholds.

    Maximizes F1(c1) + F2(c2) - F2(c1) - F3(c2) + 1 over grid pairs
    c1 < c2.  The objective separates into g1(c1) = F1(c1) - F2(c1) and
    g2(c2) = F2(c2) - F3(c2); the unconstrained argmaxes are used when
    they respect c1 < c2, otherwise an exhaustive scan over ordered pairs
    (via suffix maxima, still exact) is used.  Ties break toward the
    smallest thresholds.

    Returns ``(value, c1, c2)``.
    """
    grid = _require_shared_grid([F1, F2, F3])
    x = grid.points
    g1 = F1.values - F2.values
    g2 = F2.values - F3.values

    i1 = int(np.argmax(g1))  # first max wins ties -> smallest threshold
    i2 = int(np.argmax(g2))
    if i1 < i2:
        return float(g1[i1] + g2[i2] + 1.0), float(x[i1]), float(x[i2])

    # suffix maxima of g2, tracking the leftmost maximizer at or after j
    n = x.shape[0]
    suffix_val = np.empty(n)
    suffix_idx = np.empty(n, dtype=int)
    suffix_val[-1] = g2[-1]
    suffix_idx[-1] = n - 1
    for j in range(n - 2, -1, -1):
        if g2[j] >= suffix_val[j + 1]:
            suffix_val[j] = g2[j]
            suffix_idx[j] = j
        else:
            suffix_val[j] = suffix_val[j + 1]
            suffix_idx[j] = suffix_idx[j + 1]

    best = -np.inf
    best_pair = (0, 1)
    for i in range(n - 1):
        cand = g1[i] + suffix_val[i + 1]
        if cand > best + 1e-15:
            best = cand
            best_pair = (i, int(suffix_idx[i + 1]))
    return float(best + 1.0), float(x[best_pair[0]]), float(x[best_pair[1]])


def vus_empirical(
    s1,
    s2,
    s3,
    rng: RngStream | None = None,
    exact_limit: int = 10**7,
    mc_triples: int = 10**7,
) -> float:
    """Empirical volume under the ROC surface: Pr(Y1 < Y2 < Y3).

    Exact over all n1*n2*n3 ordered triples when that product does not
    exceed ``exact_limit`` (computed by rank counting, equivalent to full
    enumeration), otherwise estimated from ``mc_triples`` seeded
    Monte-Carlo triples.  Ties contribute 1/2 per tied adjacent pair and
    1/4 when all three tie.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    s3 = np.asarray(s3, dtype=float)
    n1, n2, n3 = s1.size, s2.size, s3.size
    if min(n1, n2, n3) == 0:
        raise ValueError("all three samples must be nonempty")

    if n1 * n2 * n3 <= exact_limit:
        a = np.sort(s1)
        c = np.sort(s3)
        lt = np.searchsorted(a, s2, side="left")
        le = np.searchsorted(a, s2, side="right")
        below = lt + 0.5 * (le - lt)
        gt = n3 - np.searchsorted(c, s2, side="right")
        ge = n3 - np.searchsorted(c, s2, side="left")
        above = gt + 0.5 * (ge - gt)
        return float(np.dot(below, above) / (n1 * n2 * n3))

    if rng is None:
        rng = RngStream(0, 0)
    g = rng.generator
    total = 0.0
    chunk = 10**6
    remaining = mc_triples
    while remaining > 0:
        m = min(chunk, remaining)
        y1 = s1[g.integers(0, n1, size=m)]
        y2 = s2[g.integers(0, n2, size=m)]
        y3 = s3[g.integers(0, n3, size=m)]
        lo = (y1 < y2) + 0.5 * (y1 == y2)
        hi = (y2 < y3) + 0.5 * (y2 == y3)
        total += float(np.sum(lo * hi))
        remaining -= m
    return total / mc_triples


def vus_trinormal(mu1: float, mu2: float, mu3: float, sigma: float, n_points: int = 1601) -> float:
    """VUS for three normals with common variance, by Simpson quadrature of
    the one-dimensional integral of Phi(y + (mu2-mu1)/sigma) *
    Phi(-y + (mu3-mu2)/sigma) * phi(y) over [-8, 8]."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    grid = make_grid(-8.0, 8.0, n_points)
    y = grid.points
    integrand = (
        std_normal_cdf(y + (mu2 - mu1) / sigma)
        * std_normal_cdf(-y + (mu3 - mu2) / sigma)
        * std_normal_pdf(y)
    )
    return simpson(integrand, grid.spacing)


def unl_trinormal(mu1: float, mu2: float, mu3: float, sigma: float) -> float:
    """Closed-form underlap for ordered equal-variance normals:
    2 Phi((mu3-mu2)/(2 sigma)) + 2 Phi((mu2-mu1)/(2 sigma)) - 1."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not (mu1 <= mu2 <= mu3):
        raise ValueError("means must be ordered mu1 <= mu2 <= mu3")
    return float(
        2.0 * std_normal_cdf((mu3 - mu2) / (2.0 * sigma))
        + 2.0 * std_normal_cdf((mu2 - mu1) / (2.0 * sigma))
        - 1.0
    )


def _interp(x, xs, ys):
    return float(np.interp(x, xs, ys))


def _bisect_crossing(xs, da, db, i, tol=1e-8):
    """Root of the piecewise-linear interpolant of (da - db) in cell i."""
    lo, hi = float(xs[i]), float(xs[i + 1])
    f = lambda x: _interp(x, xs, da) - _interp(x, xs, db)
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (flo < 0) == (fmid < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_intersections(
    f1: GriddedDensity, f2: GriddedDensity, f3: GriddedDensity
) -> list:
    """Locate and label pairwise density crossings.

    Sign changes of each pairwise difference on the grid are refined by
    bisection (on the linear interpolant, to 1e-8 in location).  Crossings
    of the same pair closer than one grid cell are merged; tangential
    contacts (no sign change) are not reported.  Each point is labeled
    outer or inner according to whether the remaining density lies below
    or above the shared height.  Identical densities produce no crossings
    (degenerate case, returns an empty list).
    """
    grid = _require_shared_grid([f1, f2, f3])
    xs = grid.points
    h = grid.spacing
    dens = [f1.values, f2.values, f3.values]
    points = []
    for a, b in ((0, 1), (0, 2), (1, 2)):
        other = 3 - a - b
        d = dens[a] - dens[b]
        sign = np.sign(d)
        locations = []
        for i in range(len(xs) - 1):
            s0, s1 = sign[i], sign[i + 1]
            if s0 == 0.0 and s1 == 0.0:
                continue  # flat contact, not a crossing
            if s0 * s1 < 0:
                locations.append(_bisect_crossing(xs, dens[a], dens[b], i))
            elif s0 == 0.0 and i > 0:
                if sign[i - 1] * s1 < 0:  # exact grid-node crossing
                    locations.append(float(xs[i]))
        merged = []
        for loc in sorted(locations):
            if merged and loc - merged[-1] < h:
                merged[-1] = 0.5 * (merged[-1] + loc)
            else:
                merged.append(loc)
        for loc in merged:
            height = 0.5 * (_interp(loc, xs, dens[a]) + _interp(loc, xs, dens[b]))
            third = _interp(loc, xs, dens[other])
            kind = "outer" if third < height else "inner"
            points.append(IntersectionPoint(loc, kind, (a + 1, b + 1), height))
    points.sort(key=lambda p: p.location)
    return points
