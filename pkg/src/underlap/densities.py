"""Analytic density catalog used by the simulation harness and by brute-force
test oracles: normal, gamma, skew-normal, and finite normal mixtures.

Each family supports pointwise density evaluation, the distribution
function, and seeded sampling.  This is deliberately not a general
distribution library; only the families needed by the simulation scenarios
are provided.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .numerics import RngStream, std_normal_cdf, std_normal_pdf

__all__ = [
    "Normal",
    "Gamma",
    "SkewNormal",
    "NormalMixture",
    "DensitySpec",
    "pdf_at",
    "cdf_at",
    "sample",
    "plausible_range",
]


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError(f"Normal sd must be positive, got {self.sd}")


@dataclass(frozen=True)
class Gamma:
    """Gamma in the (shape, rate) parameterization; mean = shape / rate."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError(f"Gamma shape and rate must be positive, got {self}")


@dataclass(frozen=True)
class SkewNormal:
    """Skew-normal with density 2/scale * phi(z) * Phi(shape * z),
    z = (y - location) / scale."""

    location: float
    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"SkewNormal scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class NormalMixture:
    weights: tuple
    means: tuple
    sds: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.means) or len(self.means) != len(self.sds):
            raise ValueError("mixture weights, means and sds must have equal length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if any(s <= 0 for s in self.sds):
            raise ValueError("mixture sds must be positive")


DensitySpec = Union[Normal, Gamma, SkewNormal, NormalMixture]


def pdf_at(spec: DensitySpec, y) -> np.ndarray:
    """Density of ``spec`` at ``y`` (scalar or array)."""
    y = np.asarray(y, dtype=float)
    if isinstance(spec, Normal):
        out = std_normal_pdf((y - spec.mean) / spec.sd) / spec.sd
    elif isinstance(spec, Gamma):
        out = np.zeros_like(y)
        pos = y > 0
        with np.errstate(under="ignore"):
            logpdf = (
                spec.shape * np.log(spec.rate)
                + (spec.shape - 1.0) * np.log(np.where(pos, y, 1.0))
                - spec.rate * y
                - special.gammaln(spec.shape)
            )
            out = np.where(pos, np.exp(logpdf), 0.0)
    elif isinstance(spec, SkewNormal):
        z = (y - spec.location) / spec.scale
        out = 2.0 / spec.scale * std_normal_pdf(z) * std_normal_cdf(spec.shape * z)
    elif isinstance(spec, NormalMixture):
        out = np.zeros_like(y)
        for w, m, s in zip(spec.weights, spec.means, spec.sds):
            out = out + w * std_normal_pdf((y - m) / s) / s
    else:
        raise TypeError(f"unknown density spec {type(spec).__name__}")
    return out[()] if isinstance(out, np.ndarray) else out


def cdf_at(spec: DensitySpec, y) -> np.ndarray:
    """Distribution function of ``spec`` at ``y`` (scalar or array)."""
    y = np.asarray(y, dtype=float)
    if isinstance(spec, Normal):
        out = std_normal_cdf((y - spec.mean) / spec.sd)
    elif isinstance(spec, Gamma):
        out = special.gammainc(spec.shape, np.maximum(spec.rate * y, 0.0))
    elif isinstance(spec, SkewNormal):
        z = (y - spec.location) / spec.scale
        out = std_normal_cdf(z) - 2.0 * special.owens_t(z, spec.shape)
    elif isinstance(spec, NormalMixture):
        out = np.zeros_like(y)
        for w, m, s in zip(spec.weights, spec.means, spec.sds):
            out = out + w * std_normal_cdf((y - m) / s)
    else:
        raise TypeError(f"unknown density spec {type(spec).__name__}")
    return out[()] if isinstance(out, np.ndarray) else out


def sample(spec: DensitySpec, n: int, rng: RngStream) -> np.ndarray:
    """Draw n i.i.d. values from ``spec``."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    g = rng.generator
    if isinstance(spec, Normal):
        return g.normal(spec.mean, spec.sd, size=n)
    if isinstance(spec, Gamma):
        # numpy's Generator implements Marsaglia-Tsang with the shape<1 boost
        return g.gamma(spec.shape, 1.0 / spec.rate, size=n)
    if isinstance(spec, SkewNormal):
        # exact rejection-free representation:
        # Y = loc + scale * (delta |Z0| + sqrt(1 - delta^2) Z1)
        delta = spec.shape / np.sqrt(1.0 + spec.shape**2)
        z0 = g.standard_normal(n)
        z1 = g.standard_normal(n)
        return spec.location + spec.scale * (delta * np.abs(z0) + np.sqrt(1.0 - delta**2) * z1)
    if isinstance(spec, NormalMixture):
        w = np.asarray(spec.weights, dtype=float)
        comp = g.choice(len(w), size=n, p=w / w.sum())
        means = np.asarray(spec.means, dtype=float)[comp]
        sds = np.asarray(spec.sds, dtype=float)[comp]
        return means + sds * g.standard_normal(n)
    raise TypeError(f"unknown density spec {type(spec).__name__}")


def plausible_range(spec: DensitySpec, k: float = 9.0) -> tuple:
    """Interval holding all but a negligible (~1e-9 at k=9) tail of the mass.

    Used to choose default evaluation grids for analytic specs.
    """
    if isinstance(spec, Normal):
        return (spec.mean - k * spec.sd, spec.mean + k * spec.sd)
    if isinstance(spec, Gamma):
        mean = spec.shape / spec.rate
        sd = np.sqrt(spec.shape) / spec.rate
        return (0.0, mean + (k + 3.0) * sd)
    if isinstance(spec, SkewNormal):
        return (spec.location - k * spec.scale, spec.location + k * spec.scale)
    if isinstance(spec, NormalMixture):
        los = [m - k * s for m, s in zip(spec.means, spec.sds)]
        his = [m + k * s for m, s in zip(spec.means, spec.sds)]
        return (min(los), max(his))
    raise TypeError(f"unknown density spec {type(spec).__name__}")
