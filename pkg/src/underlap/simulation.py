"""Simulation scenario catalog, dataset generation, ground-truth underlap
oracles, and the replicate/coverage study runner.

Unconditional scenarios (three parameter configurations each, producing
large/intermediate/small underlap values):

* U-I    normal outcomes in all three groups
* U-II   gamma and skew-normal outcomes (skewed groups)
* U-III  two-component normal mixtures in all three groups

Conditional scenarios (covariate x ~ Uniform(-1, 1)):

* C-I    homoscedastic linear regressions in all groups
* C-II   nonlinear means, covariate-dependent variance in group 2
* C-III  nonlinear means, a covariate-weighted mixture in group 2 and a
         covariate-indexed gamma in group 3

Ground truths: the unconditional truths are tabulated; the catalog also
re-derives every one of them by fine-grid integration of the analytic
densities (see ``scenario_truth``).  Conditional truths are always
computed by a fine-grid oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import GroupDataset
from .densities import DensitySpec, Gamma, Normal, NormalMixture, SkewNormal, pdf_at, sample
from .dpm import DpmHyper, estimation_grid, fit_dpm
from .numerics import RngStream, make_grid, simpson
from .posterior import (
    PIPELINE_TAU_NORM,
    covariate_unl_ensemble,
    summarize,
    summarize_curve,
    unl_ensemble,
)

__all__ = [
    "ScenarioSpec",
    "CoverageRow",
    "CoverageReport",
    "UNCONDITIONAL_SCENARIOS",
    "CONDITIONAL_SCENARIOS",
    "unconditional_specs",
    "conditional_spec_at",
    "scenario_truth",
    "conditional_truth",
    "generate",
    "run_replicates",
    "dpm_unl_estimator",
    "lsbp_unl_estimator",
]

# Unconditional catalog: (scenario id, configuration) -> (three density
# specs, tabulated underlap truth).
UNCONDITIONAL_SCENARIOS = {
    ("U-I", "high"): ((Normal(-3.25, 1.0), Normal(0.0, 1.0), Normal(3.25, 1.0)), 2.792),
    ("U-I", "mid"): ((Normal(-1.3, 1.0), Normal(0.0, 1.0), Normal(1.15, 1.0)), 1.919),
    ("U-I", "low"): ((Normal(-0.2, 1.0), Normal(0.0, 1.0), Normal(0.15, 1.0)), 1.139),
    ("U-II", "high"): ((Gamma(3.0, 1.0), SkewNormal(6.0, 2.0, 5.0), SkewNormal(8.0, 2.0, 5.0)), 2.527),
    ("U-II", "mid"): ((Gamma(3.0, 1.0), SkewNormal(2.0, 2.5, 5.0), SkewNormal(4.25, 2.0, 5.0)), 1.855),
    ("U-II", "low"): ((Gamma(1.5, 1.0), SkewNormal(0.1, 2.0, 5.0), SkewNormal(0.25, 2.0, 5.0)), 1.191),
    ("U-III", "high"): (
        (
            NormalMixture((0.5, 0.5), (-6.0, -3.0), (1.0, 1.0)),
            NormalMixture((0.5, 0.5), (0.5, 3.25), (1.0, 1.0)),
            NormalMixture((0.5, 0.5), (3.5, 6.25), (1.0, 1.0)),
        ),
        2.508,
    ),
    ("U-III", "mid"): (
        (
            NormalMixture((0.5, 0.5), (-2.25, 0.5), (1.0, 1.0)),
            NormalMixture((0.5, 0.5), (2.75, 5.5), (1.0, 1.0)),
            NormalMixture((0.5, 0.5), (3.0, 5.75), (1.0, 1.0)),
        ),
        1.933,
    ),
    ("U-III", "low"): (
        (
            NormalMixture((0.5, 0.5), (0.15, 2.75), (1.0, 1.0)),
            NormalMixture((0.5, 0.5), (0.5, 3.0), (1.0, 1.0)),
            NormalMixture((0.5, 0.5), (0.85, 3.15), (1.0, 1.0)),
        ),
        1.143,
    ),
}

CONDITIONAL_SCENARIOS = ("C-I", "C-II", "C-III")

_SAMPLE_SIZE_MENU = (
    (100, 100, 100),
    (200, 200, 200),
    (500, 500, 500),
    (1000, 1000, 1000),
    (100, 300, 500),
)


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation cell: scenario, parameter configuration (unconditional
    only), per-group sample sizes, replicate count and master seed."""

    scenario: str
    config: str | None = None
    n: tuple = (200, 200, 200)
    n_reps: int = 20
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        if self.scenario in CONDITIONAL_SCENARIOS:
            if self.config is not None:
                raise ValueError(f"conditional scenario {self.scenario} takes no config")
        elif (self.scenario, self.config) not in UNCONDITIONAL_SCENARIOS:
            raise ValueError(f"unknown scenario {(self.scenario, self.config)!r}")
        if len(self.n) != 3 or any(v < 1 for v in self.n):
            raise ValueError(f"sample sizes must be three positive integers, got {self.n}")
        if self.n_reps < 1:
            raise ValueError(f"replicate count must be >= 1, got {self.n_reps}")

    @property
    def conditional(self) -> bool:
        return self.scenario in CONDITIONAL_SCENARIOS


def unconditional_specs(scenario: str, config: str):
    """The three analytic density specs and the tabulated truth."""
    key = (scenario, config)
    if key not in UNCONDITIONAL_SCENARIOS:
        raise ValueError(f"unknown unconditional scenario {key!r}")
    return UNCONDITIONAL_SCENARIOS[key]


def conditional_spec_at(scenario: str, group: int, x: float) -> DensitySpec:
    """Analytic conditional density of one group at covariate value x.

    Groups are numbered 1..3.
    """
    if scenario == "C-I":
        if group == 1:
            return Normal(0.25 + x, 1.0)
        if group == 2:
            return Normal(1.0 + 1.5 * x, 1.5)
        if group == 3:
            return Normal(2.5 + 4.0 * x, 1.75)
    elif scenario == "C-II":
        if group == 1:
            return Normal(-0.75 + np.sin(np.pi * x + 1.25), 0.5)
        if group == 2:
            return Normal(0.75 + np.sin(np.pi * x), 1.25 + x * x)
        if group == 3:
            return Normal(2.35 + x * x, 1.0)
    elif scenario == "C-III":
        if group == 1:
            return Normal(-0.75 + np.sin(np.pi * x + 1.25), 1.0)
        if group == 2:
            w = 1.0 / (1.0 + np.exp(-x))
            return NormalMixture((w, 1.0 - w), (x, x * x), (0.5, 0.75))
        if group == 3:
            return Gamma(3.0 + x * x, 0.5 + np.exp(x))
    raise ValueError(f"unknown conditional scenario/group {(scenario, group)!r}")


def conditional_truth(scenario: str, x, n_points: int = 2001) -> np.ndarray:
    """Covariate-specific underlap of the analytic conditional densities,
    by Simpson integration on a fine grid spanning +/- 8 conditional
    standard deviations around the conditional means."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.size)
    for j, xv in enumerate(xs):
        specs = [conditional_spec_at(scenario, d, float(xv)) for d in (1, 2, 3)]
        lo, hi = np.inf, -np.inf
        for sp in specs:
            if isinstance(sp, Normal):
                lo = min(lo, sp.mean - 8.0 * sp.sd)
                hi = max(hi, sp.mean + 8.0 * sp.sd)
            elif isinstance(sp, NormalMixture):
                lo = min(lo, min(m - 8.0 * s for m, s in zip(sp.means, sp.sds)))
                hi = max(hi, max(m + 8.0 * s for m, s in zip(sp.means, sp.sds)))
            elif isinstance(sp, Gamma):
                mean = sp.shape / sp.rate
                sd = np.sqrt(sp.shape) / sp.rate
                lo = min(lo, 0.0)
                hi = max(hi, mean + 8.0 * sd)
        grid = make_grid(lo, hi, n_points)
        stacked = np.vstack([pdf_at(sp, grid.points) for sp in specs])
        out[j] = simpson(stacked.max(axis=0), grid.spacing)
    return out if out.size > 1 else float(out[0])


def scenario_truth(spec: ScenarioSpec, x=None, n_points: int = 2001):
    """Ground truth for a scenario: the tabulated value (unconditional) or
    the fine-grid conditional curve at the requested covariate values."""
    if spec.conditional:
        if x is None:
            x = np.linspace(-0.9, 0.9, 19)
        return conditional_truth(spec.scenario, x, n_points)
    return unconditional_specs(spec.scenario, spec.config)[1]


def _stream_for(spec: ScenarioSpec, replicate_index: int) -> RngStream:
    return RngStream(spec.seed, replicate_index)


def generate(spec: ScenarioSpec, replicate_index: int):
    """Three GroupDatasets for one replicate; deterministic given
    (seed, replicate_index), with independent streams per replicate."""
    stream = _stream_for(spec, replicate_index)
    datasets = []
    if not spec.conditional:
        group_specs, _ = unconditional_specs(spec.scenario, spec.config)
        for d, (gspec, n_d) in enumerate(zip(group_specs, spec.n), start=1):
            y = sample(gspec, n_d, stream.child(d))
            datasets.append(GroupDataset(str(d), y))
        return datasets

    for d, n_d in enumerate(spec.n, start=1):
        child = stream.child(d)
        g = child.generator
        x = g.uniform(-1.0, 1.0, size=n_d)
        if spec.scenario == "C-I":
            coef = {1: (0.25, 1.0, 1.0), 2: (1.0, 1.5, 1.5), 3: (2.5, 4.0, 1.75)}[d]
            y = coef[0] + coef[1] * x + coef[2] * g.standard_normal(n_d)
        elif spec.scenario == "C-II":
            if d == 1:
                y = -0.75 + np.sin(np.pi * x + 1.25) + 0.5 * g.standard_normal(n_d)
            elif d == 2:
                y = 0.75 + np.sin(np.pi * x) + (1.25 + x * x) * g.standard_normal(n_d)
            else:
                y = 2.35 + x * x + g.standard_normal(n_d)
        else:  # C-III
            if d == 1:
                y = -0.75 + np.sin(np.pi * x + 1.25) + g.standard_normal(n_d)
            elif d == 2:
                w = 1.0 / (1.0 + np.exp(-x))
                pick = g.uniform(size=n_d) < w
                y = np.where(pick, x + 0.5 * g.standard_normal(n_d), x * x + 0.75 * g.standard_normal(n_d))
            else:
                y = g.gamma(3.0 + x * x, 1.0 / (0.5 + np.exp(x)))
        datasets.append(GroupDataset(str(d), y, {"x": x}))
    return datasets


@dataclass(frozen=True)
class CoverageRow:
    scenario: str
    config: str
    n1: int
    n2: int
    n3: int
    x: float | None
    truth: float
    mean_posterior_median: float
    bias: float
    coverage: float
    mean_ci_width: float
    n_ok: int
    n_failed: int


@dataclass
class CoverageReport:
    spec: ScenarioSpec
    rows: list
    failures: list = field(default_factory=list)


def dpm_unl_estimator(
    hyper: DpmHyper = DpmHyper(),
    n_burn: int = 2000,
    n_save: int = 5000,
    grid_points: int = 501,
    grid_pad: float = 0.15,
    level: float = 0.95,
    tau_norm: float = PIPELINE_TAU_NORM,
):
    """Default unconditional estimator: independent DPM fits per group,
    underlap ensemble on a shared grid (pooled data range extended to the
    prior reach of component locations), median and central interval.

    Returns a callable (datasets, rng) -> (median, lower, upper).
    """

    def estimate(datasets, rng: RngStream):
        grid = estimation_grid(
            [ds.outcomes for ds in datasets], hyper.b2_mu, grid_points, grid_pad
        )
        fits = [
            fit_dpm(ds.outcomes, hyper, n_burn, n_save, rng.child(d))
            for d, ds in enumerate(datasets, start=1)
        ]
        ens = unl_ensemble(*fits, grid=grid, tau_norm=tau_norm)
        return summarize(ens, level)

    return estimate


def lsbp_unl_estimator(
    effect_spec,
    x_values,
    hyper=None,
    n_burn: int = 2000,
    n_save: int = 5000,
    grid_points: int = 501,
    grid_pad: float = 0.15,
    level: float = 0.95,
    tau_norm: float = PIPELINE_TAU_NORM,
):
    """Default conditional estimator: independent LSBP fits per group and
    a covariate-specific underlap curve over ``x_values``.

    Returns a callable (datasets, rng) ->
    (x_values, medians, lowers, uppers).
    """
    from .lsbp import LsbpHyper, fit_lsbp

    hyper = hyper if hyper is not None else LsbpHyper()
    x_values = np.asarray(x_values, dtype=float)

    def estimate(datasets, rng: RngStream):
        grid = estimation_grid(
            [ds.outcomes for ds in datasets], hyper.prior_scale, grid_points, grid_pad
        )
        fits = [
            fit_lsbp(ds, effect_spec, hyper, n_burn, n_save, rng.child(d))
            for d, ds in enumerate(datasets, start=1)
        ]
        records = [{"x": float(v)} for v in x_values]
        curve = covariate_unl_ensemble(fits, records, grid, tau_norm)
        med, lo, hi = summarize_curve(curve, level)
        return x_values, med, lo, hi

    return estimate


def _run_one(spec, rep, estimate_fn):
    datasets = generate(spec, rep)
    rng = _stream_for(spec, rep).child(0)
    return estimate_fn(datasets, rng)


def run_replicates(
    spec: ScenarioSpec,
    estimate_fn=None,
    n_jobs: int = 1,
    x_values=None,
) -> CoverageReport:
    """Fit every replicate, compare posterior medians and 95% intervals
    against the scenario ground truth, and aggregate.

    ``estimate_fn(datasets, rng)`` must return (median, lower, upper) for
    unconditional scenarios, or (x_values, medians, lowers, uppers) for
    conditional ones; the DPM/LSBP defaults are used when omitted.
    Replicate failures are recorded in the report, not raised.
    """
    if estimate_fn is None:
        if spec.conditional:
            raise ValueError("conditional runs need an explicit estimator (lsbp_unl_estimator)")
        estimate_fn = dpm_unl_estimator()

    tasks = list(range(spec.n_reps))
    if n_jobs != 1 and spec.n_reps > 1:
        from joblib import Parallel, delayed

        outcomes = Parallel(n_jobs=n_jobs)(
            delayed(_safe_run)(spec, rep, estimate_fn) for rep in tasks
        )
    else:
        outcomes = [_safe_run(spec, rep, estimate_fn) for rep in tasks]

    results = [r for r, err in outcomes if err is None]
    failures = [f"replicate {rep}: {err}" for rep, (_, err) in enumerate(outcomes) if err]

    rows = []
    cfg = spec.config or ""
    if not spec.conditional:
        truth = scenario_truth(spec)
        if results:
            med = np.array([r[0] for r in results])
            lo = np.array([r[1] for r in results])
            hi = np.array([r[2] for r in results])
            covered = float(np.mean((lo <= truth) & (truth <= hi)))
            rows.append(
                CoverageRow(
                    spec.scenario, cfg, *spec.n, None, truth,
                    float(med.mean()), float(med.mean() - truth), covered,
                    float((hi - lo).mean()), len(results), len(failures),
                )
            )
    else:
        if x_values is None:
            x_values = results[0][0] if results else np.linspace(-0.9, 0.9, 19)
        x_values = np.asarray(x_values, dtype=float)
        truths = np.atleast_1d(conditional_truth(spec.scenario, x_values))
        if results:
            meds = np.vstack([r[1] for r in results])
            los = np.vstack([r[2] for r in results])
            his = np.vstack([r[3] for r in results])
            for j, xv in enumerate(x_values):
                covered = float(np.mean((los[:, j] <= truths[j]) & (truths[j] <= his[:, j])))
                rows.append(
                    CoverageRow(
                        spec.scenario, cfg, *spec.n, float(xv), float(truths[j]),
                        float(meds[:, j].mean()), float(meds[:, j].mean() - truths[j]),
                        covered, float((his[:, j] - los[:, j]).mean()),
                        len(results), len(failures),
                    )
                )
    return CoverageReport(spec, rows, failures)


def _safe_run(spec, rep, estimate_fn):
    try:
        return _run_one(spec, rep, estimate_fn), None
    except Exception as exc:  # recorded per replicate, not fatal
        return None, f"{type(exc).__name__}: {exc}"
