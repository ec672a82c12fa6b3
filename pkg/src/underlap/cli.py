"""Command-line interface.

Subcommands:

* ``measures``  discrimination measures of analytic or gridded densities
* ``fit``       unconditional three-group DPM fit with UNL/YI3 ensembles
* ``fit-cov``   covariate-specific LSBP fit (optionally WAIC-guided design
                selection) with UNL(x) curve summaries
* ``simulate``  replicate/coverage study for a named scenario
* ``ppc``       posterior predictive skewness/kurtosis replicates
* ``compare``   posterior comparison probability of two UNL ensembles

Every output CSV starts with comment lines recording the tool version, the
seed and a hash of the effective configuration, and all floats carry 17
significant digits, so reruns with the same seed are byte-identical.
Configuration files are YAML; see demos/config_example.yaml for a fully
annotated example.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np
import yaml

from . import __version__
from .data import format_float, read_dataset, read_table, write_mixture_draws, write_table, write_conditional_draws
from .densities import Gamma, Normal, NormalMixture, SkewNormal, plausible_range, sample
from .dpm import DpmHyper, fit_dpm
from .lsbp import LsbpHyper, fit_lsbp, select_design, spline_candidates
from .measures import (
    GriddedCdf,
    GriddedDensity,
    classify_intersections,
    gridded_cdf,
    gridded_density,
    ovl2,
    ovl3,
    unl,
    unl_from_ovl,
    vus_empirical,
    yi3,
)
from .numerics import EvaluationGrid, RngStream, make_grid
from .posterior import (
    ScalarEnsemble,
    compare_prob,
    covariate_unl_ensemble,
    ess,
    geweke,
    posterior_predictive_stats,
    summarize,
    summarize_curve,
    unl_ensemble,
    yi3_ensemble,
)
from .simulation import ScenarioSpec, dpm_unl_estimator, lsbp_unl_estimator, run_replicates
from .splines import CovariateEffect, EffectSpec, bspline_effect, categorical_effect, linear_effect


class ConfigError(ValueError):
    """A configuration value violates a documented constraint."""


# ----------------------------------------------------------------------
# configuration


_DEFAULT_CONFIG = {
    "seed": 0,
    "grid": {"n_points": 501, "pad": 0.15, "include_negative": True},
    "mcmc": {"n_burn": 2000, "n_save": 5000},
    "dpm": {"a_mu": 0.0, "b2_mu": 10.0, "a_sig": 2.0, "b_sig": 0.5, "alpha": 1.0, "L": 20},
    "lsbp": {"prior_scale": 10.0, "a_sig": 2.0, "b_sig": 0.5, "L": 20},
    "effects": None,
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | None, overrides: dict | None = None) -> dict:
    cfg = _DEFAULT_CONFIG
    if path:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a mapping")
        cfg = _merge(cfg, user)
    cfg = _merge(cfg, overrides or {})
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    """Reject invariant violations with messages naming the field."""
    g = cfg["grid"]
    if g["n_points"] < 3 or g["n_points"] % 2 == 0:
        raise ConfigError(f"grid.n_points must be odd and >= 3, got {g['n_points']}")
    if g["pad"] < 0:
        raise ConfigError(f"grid.pad must be nonnegative, got {g['pad']}")
    m = cfg["mcmc"]
    for key in ("n_burn", "n_save"):
        if int(m[key]) < 1:
            raise ConfigError(f"mcmc.{key} must be >= 1, got {m[key]}")
    d = cfg["dpm"]
    for key in ("b2_mu", "a_sig", "b_sig", "alpha"):
        if not d[key] > 0:
            raise ConfigError(f"dpm.{key} must be positive, got {d[key]}")
    if int(d["L"]) < 1:
        raise ConfigError(f"dpm.L must be >= 1, got {d['L']}")
    c = cfg["lsbp"]
    for key in ("prior_scale", "a_sig", "b_sig"):
        if not c[key] > 0:
            raise ConfigError(f"lsbp.{key} must be positive, got {c[key]}")
    if int(c["L"]) < 1:
        raise ConfigError(f"lsbp.L must be >= 1, got {c['L']}")
    if cfg.get("effects") is not None:
        try:
            effects_from_config(cfg["effects"])
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"effects: {exc}") from None


def effects_from_config(block: dict) -> EffectSpec:
    def build(entries):
        out = []
        for e in entries or []:
            if "covariate" not in e or "kind" not in e:
                raise ConfigError("effects entries need 'covariate' and 'kind'")
            kind = e["kind"]
            name = e["covariate"]
            if kind == "linear":
                out.append(linear_effect(name))
            elif kind == "categorical":
                if e.get("levels"):
                    out.append(categorical_effect(name, e["levels"]))
                else:
                    out.append(CovariateEffect(name, "categorical"))  # levels resolved at fit
            elif kind == "bspline":
                out.append(bspline_effect(name, n_interior=int(e.get("interior_knots", 0))))
            else:
                raise ConfigError(f"effects kind must be linear/categorical/bspline, got {kind!r}")
        return tuple(out)

    try:
        return EffectSpec(build(block.get("weights")), build(block.get("means")))
    except ValueError as exc:
        raise ConfigError(f"effects: {exc}") from None


def config_hash(cfg: dict) -> str:
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode())
    return digest.hexdigest()[:12]


def _header(command: str, seed: int, cfg: dict) -> list:
    return [
        f"underlap {__version__}",
        f"command: {command}",
        f"seed: {seed}",
        f"config-hash: {config_hash(cfg)}",
    ]


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("UNDERLAP_THREADS", "")
    return int(env) if env.isdigit() and int(env) > 0 else 1


# ----------------------------------------------------------------------
# measures subcommand


_FAMILY_BUILDERS = {
    "normal": lambda e: Normal(float(e["mean"]), float(e["sd"])),
    "gamma": lambda e: Gamma(float(e["shape"]), float(e["rate"])),
    "skewnormal": lambda e: SkewNormal(float(e["location"]), float(e["scale"]), float(e["shape"])),
    "normalmixture": lambda e: NormalMixture(
        tuple(float(w) for w in e["weights"]),
        tuple(float(m) for m in e["means"]),
        tuple(float(s) for s in e["sds"]),
    ),
}


def density_spec_from_config(entry: dict):
    family = str(entry.get("family", "")).lower()
    if family not in _FAMILY_BUILDERS:
        raise ConfigError(
            f"density family must be one of {sorted(_FAMILY_BUILDERS)}, got {family!r}"
        )
    try:
        return _FAMILY_BUILDERS[family](entry)
    except KeyError as exc:
        raise ConfigError(f"density family {family!r} is missing parameter {exc}") from None


def _load_gridded(path: str):
    _, colnames, cols = read_table(path)
    for c in ("y", "f1", "f2", "f3"):
        if c not in colnames:
            raise ConfigError(f"gridded input needs columns y,f1,f2,f3; missing {c!r}")
    y = np.array([float(v) for v in cols["y"]])
    if y.size < 3 or y.size % 2 == 0:
        raise ConfigError("gridded input needs an odd number of rows >= 3")
    spacing = np.diff(y)
    if not np.allclose(spacing, spacing[0], rtol=1e-8, atol=1e-12):
        raise ConfigError("gridded input must be equally spaced in y")
    grid = make_grid(float(y[0]), float(y[-1]), y.size)
    dens = [
        GriddedDensity(grid, np.array([float(v) for v in cols[c]]))
        for c in ("f1", "f2", "f3")
    ]
    return grid, dens


def _cumulative_cdf(grid: EvaluationGrid, density: GriddedDensity) -> GriddedCdf:
    # trapezoid cumulative integral, normalized, for gridded input
    vals = density.values
    inc = 0.5 * (vals[1:] + vals[:-1]) * grid.spacing
    cdf = np.concatenate([[0.0], np.cumsum(inc)])
    cdf = np.clip(cdf / cdf[-1], 0.0, 1.0)
    return GriddedCdf(grid, cdf)


def cmd_measures(args) -> int:
    seed = args.seed
    if args.densities:
        with open(args.densities) as fh:
            cfg = yaml.safe_load(fh) or {}
        groups = cfg.get("groups")
        if not groups or len(groups) != 3:
            raise ConfigError("densities file must list exactly 3 groups")
        specs = [density_spec_from_config(e) for e in groups]
        gcfg = cfg.get("grid", {})
        lower = args.lower if args.lower is not None else gcfg.get("lower")
        upper = args.upper if args.upper is not None else gcfg.get("upper")
        n_points = args.points or int(gcfg.get("n_points", 501))
        if lower is None or upper is None:
            ranges = [plausible_range(s) for s in specs]
            lower = min(r[0] for r in ranges) if lower is None else lower
            upper = max(r[1] for r in ranges) if upper is None else upper
        grid = make_grid(float(lower), float(upper), n_points)
        dens = [gridded_density(s, grid) for s in specs]
        cdfs = [gridded_cdf(s, grid) for s in specs]
        stream = RngStream(seed, 0)
        samples = [sample(s, args.vus_samples, stream.child(d)) for d, s in enumerate(specs, 1)]
        vus = vus_empirical(*samples, rng=stream.child(9))
        cfg_for_hash = {"densities": cfg, "grid": [grid.lower, grid.upper, grid.n_points]}
    elif args.gridded:
        grid, dens = _load_gridded(args.gridded)
        cdfs = [_cumulative_cdf(grid, d) for d in dens]
        # Pr(Y1 < Y2 < Y3) for independent gridded groups
        from .numerics import simpson as _simpson

        vus = _simpson(dens[1].values * cdfs[0].values * (1.0 - cdfs[2].values), grid.spacing)
        cfg_for_hash = {"gridded": os.path.basename(args.gridded)}
    else:
        raise ConfigError("measures needs --densities or --gridded")

    unl_value = unl(dens)
    o12, o13, o23 = ovl2(dens[0], dens[1]), ovl2(dens[0], dens[2]), ovl2(dens[1], dens[2])
    o123 = ovl3(*dens)
    unl_identity = unl_from_ovl(*dens)
    yi3_value, c1, c2 = yi3(*cdfs)
    intersections = classify_intersections(*dens)

    names = ["unl", "unl_from_ovl", "ovl12", "ovl13", "ovl23", "ovl123", "yi3", "yi3_c1", "yi3_c2", "vus"]
    values = [unl_value, unl_identity, o12, o13, o23, o123, yi3_value, c1, c2, vus]
    for n, v in zip(names, values):
        print(f"{n:12s} {format_float(v)}")

    header = _header("measures", seed, cfg_for_hash)
    if args.out:
        write_table(args.out, header, ["measure", "value"], [names, values])
    if args.intersections:
        write_table(
            args.intersections,
            header,
            ["location", "kind", "group_a", "group_b", "shared_height"],
            [
                [p.location for p in intersections],
                [p.kind for p in intersections],
                [p.equal_pair[0] for p in intersections],
                [p.equal_pair[1] for p in intersections],
                [p.shared_height for p in intersections],
            ],
        )
    return 0


# ----------------------------------------------------------------------
# fit subcommand


def _read_three_groups(args) -> list:
    datasets = read_dataset(args.data, args.group_col, args.outcome_col, args.covariates or ())
    if len(datasets) != 3:
        raise ConfigError(f"expected exactly 3 groups in {args.data}, found {len(datasets)}")
    return datasets


def _pipeline_grid(datasets, cfg, location_prior_var: float) -> EvaluationGrid:
    from .dpm import estimation_grid

    return estimation_grid(
        [ds.outcomes for ds in datasets],
        location_prior_var,
        int(cfg["grid"]["n_points"]),
        float(cfg["grid"]["pad"]),
        bool(cfg["grid"]["include_negative"]),
    )


def cmd_fit(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed} if args.seed is not None else {})
    if args.burn:
        cfg["mcmc"]["n_burn"] = args.burn
    if args.save:
        cfg["mcmc"]["n_save"] = args.save
    seed = int(cfg["seed"])
    datasets = _read_three_groups(args)
    grid = _pipeline_grid(datasets, cfg, float(cfg["dpm"]["b2_mu"]))
    d = cfg["dpm"]
    hyper = DpmHyper(d["a_mu"], d["b2_mu"], d["a_sig"], d["b_sig"], d["alpha"], int(d["L"]))
    n_burn, n_save = int(cfg["mcmc"]["n_burn"]), int(cfg["mcmc"]["n_save"])

    stream = RngStream(seed, 0)
    jobs = _threads(args)
    tasks = [(ds, stream.child(i)) for i, ds in enumerate(datasets, start=1)]
    if jobs > 1:
        from joblib import Parallel, delayed

        fits = Parallel(n_jobs=min(jobs, 3))(
            delayed(fit_dpm)(ds.outcomes, hyper, n_burn, n_save, rng) for ds, rng in tasks
        )
    else:
        fits = [fit_dpm(ds.outcomes, hyper, n_burn, n_save, rng) for ds, rng in tasks]

    unl_ens = unl_ensemble(*fits, grid=grid)
    yi3_ens = yi3_ensemble(*fits, grid=grid)
    header = _header("fit", seed, cfg)
    prefix = args.out_prefix

    for ds, fit in zip(datasets, fits):
        write_mixture_draws(f"{prefix}_draws_{ds.label}.csv", fit, header)
    write_table(
        f"{prefix}_unl_ensemble.csv", header, ["iteration", "unl"],
        [list(range(unl_ens.size)), list(unl_ens.draws)],
    )
    rows = []
    for label, ens in (("unl", unl_ens), ("yi3", yi3_ens)):
        med, lo, hi = summarize(ens, args.level)
        rows.append((label, med, lo, hi))
        print(f"{label}: median {format_float(med)}  {args.level:.0%} CI [{format_float(lo)}, {format_float(hi)}]")
    write_table(
        f"{prefix}_unl_summary.csv", header, ["label", "median", "lower", "upper"],
        [[r[0] for r in rows[:1]], [r[1] for r in rows[:1]], [r[2] for r in rows[:1]], [r[3] for r in rows[:1]]],
    )
    write_table(
        f"{prefix}_yi3_summary.csv", header, ["label", "median", "lower", "upper"],
        [[r[0] for r in rows[1:]], [r[1] for r in rows[1:]], [r[2] for r in rows[1:]], [r[3] for r in rows[1:]]],
    )
    # chain diagnostics need at least 100 saved draws
    def _diag(draws):
        try:
            return geweke(draws), ess(draws)
        except ValueError:
            return float("nan"), float("nan")

    diag_rows = [("unl", *_diag(unl_ens.draws)), ("yi3", *_diag(yi3_ens.draws))]
    write_table(
        f"{prefix}_diagnostics.csv", header, ["chain", "geweke_z", "ess"],
        [[r[0] for r in diag_rows], [r[1] for r in diag_rows], [r[2] for r in diag_rows]],
    )
    return 0


# ----------------------------------------------------------------------
# fit-cov subcommand


def _default_effects(datasets, covariates) -> EffectSpec:
    effects = []
    for name in covariates:
        col = datasets[0].covariates[name]
        if np.issubdtype(np.asarray(col).dtype, np.number):
            effects.append(linear_effect(name))
        else:
            levels = sorted({str(v) for ds in datasets for v in ds.covariates[name]})
            effects.append(categorical_effect(name, levels))
    return EffectSpec(tuple(effects), tuple(effects))


def _parse_x_values(args, datasets) -> list:
    fixed = {}
    for item in args.fixed or []:
        if "=" not in item:
            raise ConfigError(f"--fixed expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            fixed[k] = float(v)
        except ValueError:
            fixed[k] = v
    if args.x_values:
        values = [float(v) for v in args.x_values.split(",")]
    else:
        col = np.asarray(datasets[0].covariates[args.x_covariate], dtype=float)
        values = list(np.linspace(col.min(), col.max(), 9))
    return [{args.x_covariate: v, **fixed} for v in values]


def cmd_fit_cov(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed} if args.seed is not None else {})
    if args.burn:
        cfg["mcmc"]["n_burn"] = args.burn
    if args.save:
        cfg["mcmc"]["n_save"] = args.save
    seed = int(cfg["seed"])
    if not args.covariates:
        raise ConfigError("fit-cov needs --covariates")
    datasets = _read_three_groups(args)
    grid = _pipeline_grid(datasets, cfg, float(cfg["lsbp"]["prior_scale"]))
    c = cfg["lsbp"]
    hyper = LsbpHyper(c["prior_scale"], c["a_sig"], c["b_sig"], int(c["L"]))
    n_burn, n_save = int(cfg["mcmc"]["n_burn"]), int(cfg["mcmc"]["n_save"])

    if cfg.get("effects"):
        base_spec = effects_from_config(cfg["effects"])
    else:
        base_spec = _default_effects(datasets, args.covariates)

    header = _header("fit-cov", seed, cfg)
    stream = RngStream(seed, 0)
    specs = [base_spec] * 3
    if args.select_design:
        specs = []
        sel_rows = []
        for i, ds in enumerate(datasets, start=1):
            candidates = spline_candidates(base_spec, args.select_design, "means", args.max_knots)
            candidates += spline_candidates(base_spec, args.select_design, "weights", args.max_knots)[1:]
            result = select_design(
                ds, candidates, hyper,
                max(n_burn // 4, 200), max(n_save // 5, 500),
                stream.child(100 + i), n_jobs=_threads(args),
            )
            specs.append(result.selected)
            for cand, w in zip(result.candidates, result.waics):
                sel_rows.append((ds.label, cand.label, cand.complexity(), w,
                                 "selected" if cand is result.selected else ""))
            print(f"group {ds.label}: selected {result.selected.label}")
        write_table(
            f"{args.out_prefix}_selection.csv", header,
            ["group", "candidate", "complexity", "waic", "status"],
            [[r[i] for r in sel_rows] for i in range(5)],
        )

    jobs = _threads(args)
    tasks = list(zip(datasets, specs, [stream.child(i) for i in range(1, 4)]))
    if jobs > 1:
        from joblib import Parallel, delayed

        fits = Parallel(n_jobs=min(jobs, 3))(
            delayed(fit_lsbp)(ds, sp, hyper, n_burn, n_save, rng) for ds, sp, rng in tasks
        )
    else:
        fits = [fit_lsbp(ds, sp, hyper, n_burn, n_save, rng) for ds, sp, rng in tasks]

    records = _parse_x_values(args, datasets)
    curve = covariate_unl_ensemble(fits, records, grid)
    med, lo, hi = summarize_curve(curve, args.level)

    x_cols = sorted({k for r in records for k in r})
    columns = [[r.get(k, "") for r in records] for k in x_cols]
    write_table(
        f"{args.out_prefix}_unl_curve.csv", header,
        [*x_cols, "median", "lower", "upper"],
        [*columns, list(med), list(lo), list(hi)],
    )
    for ds, fit in zip(datasets, fits):
        write_conditional_draws(f"{args.out_prefix}_draws_{ds.label}.csv", fit, header)
        print(f"group {ds.label}: waic {format_float(fit.waic)}")
    for r, m, l, h in zip(records, med, lo, hi):
        print(f"x={r}: median {format_float(m)} CI [{format_float(l)}, {format_float(h)}]")
    return 0


# ----------------------------------------------------------------------
# simulate subcommand


def cmd_simulate(args) -> int:
    n = tuple(int(v) for v in args.n.split(",")) if "," in args.n else (int(args.n),) * 3
    config = args.scenario_config
    spec = ScenarioSpec(args.scenario, config, n, args.reps, args.seed)
    cfg = {
        "scenario": spec.scenario, "config": spec.config, "n": list(spec.n),
        "reps": spec.n_reps, "seed": spec.seed,
        "mcmc": {"n_burn": args.burn, "n_save": args.save},
    }
    if spec.conditional:
        estimator = lsbp_unl_estimator(
            EffectSpec((linear_effect("x"),), (linear_effect("x"),)),
            np.linspace(-0.8, 0.8, 9),
            n_burn=args.burn, n_save=args.save,
        )
    else:
        estimator = dpm_unl_estimator(n_burn=args.burn, n_save=args.save)
    report = run_replicates(spec, estimator, n_jobs=_threads(args))
    header = _header("simulate", spec.seed, cfg)
    colnames = [
        "scenario", "config", "n1", "n2", "n3", "x", "truth",
        "mean_posterior_median", "bias", "coverage", "mean_ci_width", "n_ok", "n_failed",
    ]
    rows = report.rows
    write_table(
        args.out, header, colnames,
        [
            [r.scenario for r in rows], [r.config for r in rows],
            [r.n1 for r in rows], [r.n2 for r in rows], [r.n3 for r in rows],
            ["" if r.x is None else r.x for r in rows],
            [r.truth for r in rows], [r.mean_posterior_median for r in rows],
            [r.bias for r in rows], [r.coverage for r in rows],
            [r.mean_ci_width for r in rows], [r.n_ok for r in rows], [r.n_failed for r in rows],
        ],
    )
    for line in report.failures:
        print(f"warning: {line}", file=sys.stderr)
    for r in rows:
        loc = "" if r.x is None else f" x={format_float(r.x)}"
        print(
            f"{r.scenario}/{r.config or '-'}{loc}: truth {format_float(r.truth)} "
            f"mean-median {format_float(r.mean_posterior_median)} coverage {format_float(r.coverage)}"
        )
    return 0


# ----------------------------------------------------------------------
# ppc subcommand


def cmd_ppc(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed} if args.seed is not None else {})
    if args.burn:
        cfg["mcmc"]["n_burn"] = args.burn
    if args.save:
        cfg["mcmc"]["n_save"] = args.save
    seed = int(cfg["seed"])
    datasets = read_dataset(args.data, args.group_col, args.outcome_col, args.covariates or ())
    labels = [ds.label for ds in datasets]
    if args.group not in labels:
        raise ConfigError(f"group {args.group!r} not in data (found {labels})")
    ds = datasets[labels.index(args.group)]
    n_burn, n_save = int(cfg["mcmc"]["n_burn"]), int(cfg["mcmc"]["n_save"])
    stream = RngStream(seed, 0)
    if args.covariates:
        spec = effects_from_config(cfg["effects"]) if cfg.get("effects") else _default_effects([ds], args.covariates)
        c = cfg["lsbp"]
        hyper = LsbpHyper(c["prior_scale"], c["a_sig"], c["b_sig"], int(c["L"]))
        fit = fit_lsbp(ds, spec, hyper, n_burn, n_save, stream.child(1))
        reps, observed = posterior_predictive_stats(fit, ds, args.stat, args.n_rep, stream.child(2))
    else:
        d = cfg["dpm"]
        hyper = DpmHyper(d["a_mu"], d["b2_mu"], d["a_sig"], d["b_sig"], d["alpha"], int(d["L"]))
        draws = fit_dpm(ds.outcomes, hyper, n_burn, n_save, stream.child(1))
        reps, observed = posterior_predictive_stats(draws, ds.outcomes, args.stat, args.n_rep, stream.child(2))

    header = _header("ppc", seed, cfg) + [f"stat: {args.stat}", f"group: {args.group}"]
    kinds = ["observed"] + ["replicate"] * len(reps)
    indices = [0] + list(range(1, len(reps) + 1))
    values = [observed] + list(reps)
    write_table(args.out, header, ["kind", "index", "value"], [kinds, indices, values])
    frac = float(np.mean(reps >= observed))
    print(f"observed {args.stat} {format_float(observed)}; P(replicate >= observed) = {format_float(frac)}")
    return 0


# ----------------------------------------------------------------------
# compare subcommand


def _read_ensemble(path: str) -> ScalarEnsemble:
    _, colnames, cols = read_table(path)
    col = "unl" if "unl" in colnames else ("value" if "value" in colnames else None)
    if col is None:
        raise ConfigError(f"{path}: expected a column named 'unl' or 'value'")
    return ScalarEnsemble(np.array([float(v) for v in cols[col]]), label=path)


def cmd_compare(args) -> int:
    a = _read_ensemble(args.ensemble_a)
    b = _read_ensemble(args.ensemble_b)
    p = compare_prob(a, b)
    print(format_float(p))
    if args.out:
        header = _header("compare", 0, {"a": args.ensemble_a, "b": args.ensemble_b})
        write_table(args.out, header, ["quantity", "value"], [["p_a_exceeds_b"], [p]])
    return 0


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="underlap",
        description="Underlap-coefficient discrimination measures and Bayesian nonparametric estimators",
    )
    parser.add_argument("--version", action="version", version=f"underlap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measures", help="discrimination measures of analytic or gridded densities")
    p.add_argument("--densities", help="YAML file with three analytic density specs")
    p.add_argument("--gridded", help="CSV with columns y,f1,f2,f3 on an equally spaced grid")
    p.add_argument("--lower", type=float)
    p.add_argument("--upper", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--vus-samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--intersections")
    p.set_defaults(func=cmd_measures)

    for name, func, extra in (("fit", cmd_fit, False), ("fit-cov", cmd_fit_cov, True)):
        p = sub.add_parser(name, help=f"{name} estimator")
        p.add_argument("--data", required=True)
        p.add_argument("--group-col", default="group")
        p.add_argument("--outcome-col", default="y")
        p.add_argument("--covariates", nargs="*", default=None)
        p.add_argument("--config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--burn", type=int, default=None)
        p.add_argument("--save", type=int, default=None)
        p.add_argument("--level", type=float, default=0.95)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out-prefix", required=True)
        if extra:
            p.add_argument("--x-covariate", required=True)
            p.add_argument("--x-values", help="comma-separated covariate values")
            p.add_argument("--fixed", nargs="*", help="name=value pairs held fixed")
            p.add_argument("--select-design", metavar="COVARIATE",
                           help="run the WAIC loop for spline expansions of this covariate")
            p.add_argument("--max-knots", type=int, default=4)
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="replicate/coverage study")
    p.add_argument("scenario", choices=["U-I", "U-II", "U-III", "C-I", "C-II", "C-III"])
    p.add_argument("scenario_config", nargs="?", choices=["high", "mid", "low"])
    p.add_argument("--n", default="200")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn", type=int, default=2000)
    p.add_argument("--save", type=int, default=5000)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ppc", help="posterior predictive skewness/kurtosis check")
    p.add_argument("--data", required=True)
    p.add_argument("--group-col", default="group")
    p.add_argument("--outcome-col", default="y")
    p.add_argument("--covariates", nargs="*", default=None)
    p.add_argument("--group", required=True)
    p.add_argument("--stat", choices=["skewness", "kurtosis"], required=True)
    p.add_argument("--n-rep", type=int, default=500)
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--burn", type=int, default=None)
    p.add_argument("--save", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ppc)

    p = sub.add_parser("compare", help="P(UNL_a > UNL_b) from two ensemble files")
    p.add_argument("ensemble_a")
    p.add_argument("ensemble_b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
