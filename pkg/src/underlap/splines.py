"""Cubic B-spline bases and design-matrix construction for covariate
effects entering the stick-breaking weights and the component means.

The clamped cubic Cox-de Boor basis over K interior knots has K + 4
functions summing to one.  Because every design vector already carries an
explicit intercept, the first basis column is dropped, leaving K + 3
columns that together with the intercept span the full cubic spline space
without collinearity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KnotVector",
    "CovariateEffect",
    "EffectSpec",
    "linear_effect",
    "categorical_effect",
    "bspline_effect",
    "product_effect",
    "knots_from_quantiles",
    "bspline_basis_full",
    "bspline_basis",
    "design_row",
    "design_matrix",
    "effect_dimension",
]

_DEGREE = 3


@dataclass(frozen=True)
class KnotVector:
    """Boundary pair plus K >= 0 strictly interior knots, strictly increasing."""

    lower: float
    upper: float
    interior: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "interior", tuple(float(k) for k in self.interior))
        seq = (self.lower, *self.interior, self.upper)
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ValueError(f"knots must be strictly increasing, got {seq}")

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    def extended(self) -> np.ndarray:
        """Clamped knot sequence (boundary knots repeated degree+1 times)."""
        return np.array(
            [self.lower] * (_DEGREE + 1) + list(self.interior) + [self.upper] * (_DEGREE + 1)
        )


def knots_from_quantiles(values, n_interior: int) -> KnotVector:
    """Boundary knots at the sample min/max, interior knots at equally
    spaced quantiles (one knot lands on the median)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two values to place knots")
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        raise ValueError("cannot place knots on a constant covariate")
    if n_interior < 0:
        raise ValueError("number of interior knots must be nonnegative")
    qs = np.arange(1, n_interior + 1) / (n_interior + 1)
    interior = tuple(float(q) for q in np.quantile(values, qs))
    if len(set(interior)) != len(interior) or any(not lo < k < hi for k in interior):
        raise ValueError("covariate quantiles produced degenerate interior knots")
    return KnotVector(lo, hi, interior)


def _check_range(x: np.ndarray, knots: KnotVector, clamp: bool) -> np.ndarray:
    outside = (x < knots.lower) | (x > knots.upper)
    if np.any(outside):
        if not clamp:
            raise ValueError(
                f"covariate value outside the knot range [{knots.lower}, {knots.upper}]"
            )
        warnings.warn(
            "covariate values outside the fitted range were clamped to the boundary",
            RuntimeWarning,
            stacklevel=3,
        )
        x = np.clip(x, knots.lower, knots.upper)
    return x


def bspline_basis_full(x, knots: KnotVector, clamp: bool = False) -> np.ndarray:
    """All K+4 clamped cubic basis functions at x (scalar or 1-d array).

    The returned rows form a partition of unity.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x = _check_range(x, knots, clamp)
    t = knots.extended()
    n_funcs = len(t) - 1
    basis = np.zeros((x.size, n_funcs))
    for j in range(n_funcs):
        if t[j] < t[j + 1]:
            basis[:, j] = (x >= t[j]) & (x < t[j + 1])
    # the right boundary belongs to the last non-degenerate interval
    last = max(j for j in range(n_funcs) if t[j] < t[j + 1])
    basis[x == t[-1], last] = 1.0
    for d in range(1, _DEGREE + 1):
        nxt = np.zeros((x.size, n_funcs - d))
        for j in range(n_funcs - d):
            left = t[j + d] - t[j]
            if left > 0:
                nxt[:, j] += (x - t[j]) / left * basis[:, j]
            right = t[j + d + 1] - t[j + 1]
            if right > 0:
                nxt[:, j] += (t[j + d + 1] - x) / right * basis[:, j + 1]
        basis = nxt
    return basis[0] if scalar else basis


def bspline_basis(x, knots: KnotVector, clamp: bool = False) -> np.ndarray:
    """The K+3 retained basis columns (full clamped basis minus its first
    column, which the intercept absorbs)."""
    full = bspline_basis_full(x, knots, clamp)
    return full[..., 1:]


@dataclass(frozen=True)
class CovariateEffect:
    """How one covariate (or product of two) enters a linear predictor."""

    name: str
    kind: str  # "linear" | "categorical" | "bspline" | "product"
    levels: tuple = ()  # categorical: all levels, first one is the reference
    n_interior: int | None = None  # bspline: knot count, resolved from data at fit time
    knots: KnotVector | None = None  # bspline: resolved knots
    partner: str | None = None  # product: the second covariate

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if self.kind not in ("linear", "categorical", "bspline", "product"):
            raise ValueError(f"unknown effect kind {self.kind!r}")
        if self.kind == "categorical" and self.levels and len(self.levels) < 2:
            raise ValueError(f"categorical effect {self.name!r} needs at least two levels")
        if self.kind == "bspline" and self.knots is None and self.n_interior is None:
            raise ValueError(f"bspline effect {self.name!r} needs knots or an interior count")
        if self.kind == "product" and not self.partner:
            raise ValueError(f"product effect {self.name!r} needs a partner covariate")

    def dimension(self) -> int:
        if self.kind == "linear" or self.kind == "product":
            return 1
        if self.kind == "categorical":
            if not self.levels:
                raise ValueError(f"categorical effect {self.name!r} has unresolved levels")
            return len(self.levels) - 1
        if self.knots is not None:
            return self.knots.n_interior + 3
        return self.n_interior + 3

    def with_knots(self, knots: KnotVector) -> "CovariateEffect":
        return CovariateEffect(self.name, self.kind, self.levels, knots.n_interior, knots, self.partner)

    def with_levels(self, levels) -> "CovariateEffect":
        return CovariateEffect(self.name, self.kind, tuple(levels), self.n_interior, self.knots, self.partner)


def linear_effect(name: str) -> CovariateEffect:
    return CovariateEffect(name, "linear")


def categorical_effect(name: str, levels) -> CovariateEffect:
    return CovariateEffect(name, "categorical", levels=tuple(levels))


def bspline_effect(name: str, n_interior: int = 0, knots: KnotVector | None = None) -> CovariateEffect:
    return CovariateEffect(name, "bspline", n_interior=n_interior, knots=knots)


def product_effect(name: str, partner: str) -> CovariateEffect:
    return CovariateEffect(name, "product", partner=partner)


@dataclass(frozen=True)
class EffectSpec:
    """Covariate effects for the weight predictor and the mean predictor.

    A spline expansion may appear on the weights or on the means, never on
    both in the same fit.
    """

    weight_effects: tuple = ()
    mean_effects: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weight_effects", tuple(self.weight_effects))
        object.__setattr__(self, "mean_effects", tuple(self.mean_effects))
        w_spline = any(e.kind == "bspline" for e in self.weight_effects)
        m_spline = any(e.kind == "bspline" for e in self.mean_effects)
        if w_spline and m_spline:
            raise ValueError("spline expansions may enter the weights or the means, not both")

    def effects_for(self, target: str) -> tuple:
        if target == "weights":
            return self.weight_effects
        if target == "means":
            return self.mean_effects
        raise ValueError(f"target must be 'weights' or 'means', got {target!r}")

    def covariate_names(self) -> tuple:
        names = []
        for e in (*self.weight_effects, *self.mean_effects):
            for nm in (e.name, e.partner):
                if nm and nm not in names:
                    names.append(nm)
        return tuple(names)

    def complexity(self) -> int:
        """Total design dimension; orders linear < bspline(0) < ... < bspline(4)."""
        return effect_dimension(self.weight_effects) + effect_dimension(self.mean_effects)


def effect_dimension(effects) -> int:
    """Design dimension: intercept plus the columns of every effect."""
    return 1 + sum(e.dimension() for e in effects)


def _effect_columns(effect: CovariateEffect, record, clamp: bool) -> np.ndarray:
    if effect.name not in record:
        raise ValueError(f"covariate {effect.name!r} missing from the record")
    if effect.kind == "linear":
        return np.array([float(record[effect.name])])
    if effect.kind == "product":
        if effect.partner not in record:
            raise ValueError(f"covariate {effect.partner!r} missing from the record")
        return np.array([float(record[effect.name]) * float(record[effect.partner])])
    if effect.kind == "categorical":
        level = record[effect.name]
        if level not in effect.levels:
            raise ValueError(
                f"unknown level {level!r} for covariate {effect.name!r}; "
                f"known levels: {list(effect.levels)}"
            )
        cols = np.zeros(len(effect.levels) - 1)
        idx = effect.levels.index(level)
        if idx > 0:
            cols[idx - 1] = 1.0
        return cols
    if effect.knots is None:
        raise ValueError(f"bspline effect {effect.name!r} has unresolved knots")
    return bspline_basis(float(record[effect.name]), effect.knots, clamp=clamp)


def design_row(record, spec: EffectSpec, target: str, clamp: bool = False) -> np.ndarray:
    """Design vector for one covariate record: leading intercept 1 followed
    by the columns of each declared effect, in declaration order."""
    effects = spec.effects_for(target)
    parts = [np.array([1.0])]
    parts.extend(_effect_columns(e, record, clamp) for e in effects)
    return np.concatenate(parts)


def design_matrix(records, spec: EffectSpec, target: str, clamp: bool = False) -> np.ndarray:
    """Stacked design rows for a sequence of covariate records."""
    records = list(records)
    if not records:
        raise ValueError("no covariate records given")
    return np.vstack([design_row(r, spec, target, clamp) for r in records])
