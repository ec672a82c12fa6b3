"""Covariate-dependent mixture of normals with logit stick-breaking
weights, fitted by a Gibbs sampler with Polya-gamma augmentation.

Each of the L components has a Gaussian kernel whose mean is a linear
predictor u'beta_l in the covariates, and the stick proportions are
sequential logistic regressions logit(v_l(x)) = z'gamma_l (the last stick
is one).  The Polya-gamma trick makes every gamma_l full conditional
Gaussian, so the whole sampler is conjugate.

Outcomes and continuous covariates are standardized before fitting; draws
carry the standardization record so conditional densities are always
reported on the original scales.  WAIC (variance-form effective parameter
count) is computed from the saved draws for design comparison, with the
5-unit parsimony rule implemented in :func:`select_design`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .data import GroupDataset
from .measures import GriddedCdf, GriddedDensity, TAU_NORM_DEFAULT
from .numerics import EvaluationGrid, RngStream, std_normal_cdf
from .polya_gamma import sample_pg1_batch
from .splines import EffectSpec, design_matrix, design_row, knots_from_quantiles

__all__ = [
    "LsbpHyper",
    "ConditionalModel",
    "ConditionalMixtureDraw",
    "FitResult",
    "SelectionResult",
    "fit_lsbp",
    "waic",
    "select_design",
    "spline_candidates",
    "conditional_density_from_draw",
    "conditional_cdf_from_draw",
    "conditional_mixture_params",
]


@dataclass(frozen=True, eq=False)
class LsbpHyper:
    """Priors for the weight coefficients, mean coefficients and variances.

    By default both coefficient blocks get zero-mean normal priors with
    covariance ``prior_scale * I`` of whatever dimension the effect spec
    produces; explicit vectors/matrices may be supplied instead.
    """

    prior_scale: float = 10.0
    a_sig: float = 2.0
    b_sig: float = 0.5
    L: int = 20
    mu_gamma: np.ndarray | None = None
    sigma_gamma: np.ndarray | None = None
    mu_beta: np.ndarray | None = None
    sigma_beta: np.ndarray | None = None

    def __post_init__(self):
        if not (self.prior_scale > 0 and self.a_sig > 0 and self.b_sig > 0):
            raise ValueError(f"hyperparameters must be positive, got {self}")
        if self.L < 1:
            raise ValueError(f"truncation level must be >= 1, got {self.L}")

    def _prior(self, mu, sigma, dim: int, what: str):
        mu = np.zeros(dim) if mu is None else np.asarray(mu, dtype=float)
        sigma = self.prior_scale * np.eye(dim) if sigma is None else np.asarray(sigma, dtype=float)
        if mu.shape != (dim,) or sigma.shape != (dim, dim):
            raise ValueError(f"{what} prior dimensions do not match the design ({dim})")
        if not np.allclose(sigma, sigma.T):
            raise ValueError(f"{what} prior covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise ValueError(f"{what} prior covariance must be positive definite") from None
        return mu, sigma, chol

    def gamma_prior(self, dim: int):
        return self._prior(self.mu_gamma, self.sigma_gamma, dim, "gamma")

    def beta_prior(self, dim: int):
        return self._prior(self.mu_beta, self.sigma_beta, dim, "beta")


@dataclass(frozen=True)
class ConditionalModel:
    """Fitted-model context shared by all draws: resolved effects (knots
    and categorical levels fixed, in standardized covariate space) and the
    standardization records."""

    spec: EffectSpec
    x_standardizers: dict  # continuous covariate -> (mean, sd); sd == 0 marks a degenerate column
    y_mean: float
    y_sd: float

    def standardize_record(self, record) -> dict:
        out = {}
        for name in self.spec.covariate_names():
            if name not in record:
                raise ValueError(f"covariate {name!r} missing from the record")
            if name in self.x_standardizers:
                m, s = self.x_standardizers[name]
                out[name] = 0.0 if s == 0.0 else (float(record[name]) - m) / s
            else:
                out[name] = record[name]
        return out

    def rows_at(self, record, clamp: bool = True):
        rec = self.standardize_record(record)
        z = design_row(rec, self.spec, "weights", clamp=clamp)
        u = design_row(rec, self.spec, "means", clamp=clamp)
        return z, u


@dataclass(frozen=True, eq=False)
class ConditionalMixtureDraw:
    """One saved posterior realization (standardized scales; use the
    attached model context to evaluate on original scales)."""

    gamma: np.ndarray = field(repr=False)  # (L-1, Q_v)
    beta: np.ndarray = field(repr=False)  # (L, Q_mu)
    variances: np.ndarray = field(repr=False)  # (L,)
    model: ConditionalModel = field(repr=False)


@dataclass(eq=False)
class FitResult:
    draws: list
    model: ConditionalModel
    waic: float
    p_waic: float
    lppd: float
    loglik: np.ndarray = field(repr=False)  # (n_save, n) log predictive, original scale


def _log_weights(Z: np.ndarray, gamma: np.ndarray, L: int) -> np.ndarray:
    """log omega_l(x_i) for all observations and components, (n, L)."""
    n = Z.shape[0]
    if L == 1:
        return np.zeros((n, 1))
    eta = Z @ gamma.T  # (n, L-1)
    log_v = -np.logaddexp(0.0, -eta)
    log_1mv = -np.logaddexp(0.0, eta)
    cum = np.cumsum(log_1mv, axis=1)
    out = np.empty((n, L))
    out[:, 0] = log_v[:, 0]
    if L > 2:
        out[:, 1 : L - 1] = log_v[:, 1:] + cum[:, : L - 2]
    out[:, L - 1] = cum[:, L - 2]
    return out


def _weights_from_eta(eta: np.ndarray, L: int) -> np.ndarray:
    """Stick-breaking weights at one covariate value from its L-1 logits."""
    if L == 1:
        return np.ones(1)
    log_v = -np.logaddexp(0.0, -eta)
    log_1mv = -np.logaddexp(0.0, eta)
    cum = np.cumsum(log_1mv)
    logw = np.empty(L)
    logw[0] = log_v[0]
    if L > 2:
        logw[1 : L - 1] = log_v[1:] + cum[: L - 2]
    logw[L - 1] = cum[L - 2]
    return np.exp(logw)


def _mvn_from_precision(prec: np.ndarray, shift: np.ndarray, g: np.random.Generator) -> np.ndarray:
    """Draw from N(prec^{-1} shift, prec^{-1}) via the precision Cholesky."""
    chol = np.linalg.cholesky(prec)
    tmp = solve_triangular(chol, shift, lower=True)
    mean = solve_triangular(chol.T, tmp, lower=False)
    z = g.standard_normal(prec.shape[0])
    return mean + solve_triangular(chol.T, z, lower=False)


def _loglik_matrix(ys, mu_mat, variances):
    resid = ys[:, None] - mu_mat
    return -0.5 * (resid * resid / variances[None, :] + np.log(2.0 * np.pi * variances)[None, :])


def fit_lsbp(
    data: GroupDataset,
    spec: EffectSpec,
    hyper: LsbpHyper = LsbpHyper(),
    n_burn: int = 2000,
    n_save: int = 5000,
    rng: RngStream | None = None,
    thin: int = 1,
) -> FitResult:
    """Gibbs sampler for the conditional mixture (allocations, Polya-gamma
    weights update, mean coefficients, variances), deterministic given the
    stream.  Returns saved draws plus WAIC records."""
    if data.n < 10:
        raise ValueError(f"need at least 10 observations, got {data.n}")
    if n_burn < 1 or n_save < 1 or thin < 1:
        raise ValueError("n_burn, n_save and thin must be >= 1")
    if rng is None:
        raise ValueError("an explicit RngStream is required")

    y = data.outcomes
    y_mean = float(y.mean())
    y_sd = float(y.std())
    if y_sd * y_sd < 1e-12:
        raise ValueError("outcomes are degenerate (zero variance)")
    ys = (y - y_mean) / y_sd

    # standardize continuous covariates; resolve knots and categorical levels
    x_standardizers: dict = {}
    std_columns: dict = {}
    for name in spec.covariate_names():
        if name not in data.covariates:
            raise ValueError(f"covariate {name!r} missing from group {data.label!r}")
        col = data.covariates[name]
        if np.issubdtype(np.asarray(col).dtype, np.number):
            col = np.asarray(col, dtype=float)
            m, s = float(col.mean()), float(col.std())
            if s < 1e-12:
                warnings.warn(
                    f"covariate {name!r} is constant; it carries no information",
                    RuntimeWarning,
                    stacklevel=2,
                )
                x_standardizers[name] = (m, 0.0)
                std_columns[name] = np.zeros(data.n)
            else:
                x_standardizers[name] = (m, s)
                std_columns[name] = (col - m) / s
        else:
            std_columns[name] = col

    resolved_w = []
    resolved_m = []
    for effects, resolved in ((spec.weight_effects, resolved_w), (spec.mean_effects, resolved_m)):
        for e in effects:
            if e.kind == "bspline" and e.knots is None:
                resolved.append(e.with_knots(knots_from_quantiles(std_columns[e.name], e.n_interior)))
            elif e.kind == "categorical" and not e.levels:
                levels = tuple(sorted(set(np.asarray(std_columns[e.name]).tolist())))
                resolved.append(e.with_levels(levels))
            else:
                resolved.append(e)
    resolved_spec = EffectSpec(tuple(resolved_w), tuple(resolved_m), label=spec.label)
    model = ConditionalModel(resolved_spec, x_standardizers, y_mean, y_sd)

    records = [
        {name: std_columns[name][i] for name in resolved_spec.covariate_names()}
        for i in range(data.n)
    ]
    Z = design_matrix(records, resolved_spec, "weights", clamp=False)
    U = design_matrix(records, resolved_spec, "means", clamp=False)
    qv, qu = Z.shape[1], U.shape[1]

    mu_g, sigma_g, chol_g = hyper.gamma_prior(qv)
    mu_b, sigma_b, chol_b = hyper.beta_prior(qu)
    sg_inv = np.linalg.inv(sigma_g)
    sb_inv = np.linalg.inv(sigma_b)
    sg_inv_mu = sg_inv @ mu_g
    sb_inv_mu = sb_inv @ mu_b

    g = rng.generator
    L = hyper.L
    gamma = np.tile(mu_g, (max(L - 1, 0), 1)).reshape(max(L - 1, 0), qv)
    beta = np.tile(mu_b, (L, 1))
    variances = hyper.b_sig / g.gamma(hyper.a_sig, 1.0, size=L)
    alloc = g.integers(0, L, size=data.n)

    draws: list = []
    loglik_rows: list = []
    log_jacobian = -np.log(y_sd)
    total = n_burn + n_save * thin
    for it in range(total):
        # Step 1: component assignments
        logw = _log_weights(Z, gamma, L)
        mu_mat = U @ beta.T
        logits = logw + _loglik_matrix(ys, mu_mat, variances)
        alloc = np.argmax(logits + g.gumbel(size=logits.shape), axis=1)

        # Step 2: weight coefficients via Polya-gamma augmentation
        for l in range(L - 1):
            mask = alloc >= l
            if mask.any():
                Zl = Z[mask]
                zeta = sample_pg1_batch(Zl @ gamma[l], rng)
                kappa = (alloc[mask] == l).astype(float) - 0.5
                prec = Zl.T @ (zeta[:, None] * Zl) + sg_inv
                shift = Zl.T @ kappa + sg_inv_mu
                gamma[l] = _mvn_from_precision(prec, shift, g)
            else:
                gamma[l] = mu_g + chol_g @ g.standard_normal(qv)

        # Step 3: mean coefficients
        counts = np.bincount(alloc, minlength=L)
        for l in range(L):
            if counts[l]:
                mask = alloc == l
                Ul = U[mask]
                prec = (Ul.T @ Ul) / variances[l] + sb_inv
                shift = (Ul.T @ ys[mask]) / variances[l] + sb_inv_mu
                beta[l] = _mvn_from_precision(prec, shift, g)
            else:
                beta[l] = mu_b + chol_b @ g.standard_normal(qu)

        # Step 4: component variances
        fitted = np.einsum("ij,ij->i", U, beta[alloc])
        ss = np.bincount(alloc, weights=(ys - fitted) ** 2, minlength=L)
        variances = (hyper.b_sig + 0.5 * ss) / g.gamma(hyper.a_sig + 0.5 * counts, 1.0)

        if it >= n_burn and (it - n_burn) % thin == 0:
            draws.append(
                ConditionalMixtureDraw(gamma.copy(), beta.copy(), variances.copy(), model)
            )
            logw = _log_weights(Z, gamma, L)
            mu_mat = U @ beta.T
            lpred = logsumexp(logw + _loglik_matrix(ys, mu_mat, variances), axis=1)
            loglik_rows.append(lpred + log_jacobian)

    loglik = np.vstack(loglik_rows)
    w, p_waic, lppd = _waic_parts(loglik)
    return FitResult(draws, model, w, p_waic, lppd, loglik)


def _waic_parts(loglik: np.ndarray):
    S = loglik.shape[0]
    if S < 2:
        raise ValueError("WAIC needs at least two saved draws")
    if not np.all(np.isfinite(loglik)):
        raise ValueError("WAIC is not finite (non-finite log predictive densities)")
    lppd = float(np.sum(logsumexp(loglik, axis=0) - np.log(S)))
    p_waic = float(np.sum(np.var(loglik, axis=0, ddof=1)))
    value = -2.0 * (lppd - p_waic)
    if not np.isfinite(value):
        raise ValueError("WAIC is not finite (non-finite log predictive densities)")
    return value, p_waic, lppd


def waic(fit_or_loglik) -> float:
    """Watanabe-Akaike criterion, -2 (lppd - p_waic), lower is better.

    Accepts a FitResult or an (n_draws, n_observations) matrix of log
    predictive densities.
    """
    if isinstance(fit_or_loglik, FitResult):
        return fit_or_loglik.waic
    value, _, _ = _waic_parts(np.asarray(fit_or_loglik, dtype=float))
    return value


@dataclass
class SelectionResult:
    selected: EffectSpec
    selected_index: int
    candidates: list
    waics: list  # nan where the fit failed
    errors: list  # error strings, "" where the fit succeeded


def select_design(
    data: GroupDataset,
    candidates,
    hyper: LsbpHyper = LsbpHyper(),
    n_burn: int = 2000,
    n_save: int = 5000,
    rng: RngStream | None = None,
    n_jobs: int = 1,
    rule_units: float = 5.0,
) -> SelectionResult:
    """Fit every candidate effect spec and pick the simplest one whose WAIC
    is within ``rule_units`` of the best (parsimony rule).

    Complexity is the total design dimension, which orders a linear trend
    below spline expansions with increasing knot counts.  Failed fits are
    recorded and skipped; it is an error for all candidates to fail.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("need at least one candidate spec")
    if rng is None:
        raise ValueError("an explicit RngStream is required")

    def one(i_spec):
        i, cand = i_spec
        try:
            fit = fit_lsbp(data, cand, hyper, n_burn, n_save, rng.child(i))
            return fit.waic, ""
        except Exception as exc:  # recorded, not fatal
            return float("nan"), f"{type(exc).__name__}: {exc}"

    tasks = list(enumerate(candidates))
    if n_jobs != 1 and len(candidates) > 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_jobs)(delayed(one)(t) for t in tasks)
    else:
        results = [one(t) for t in tasks]

    waics = [r[0] for r in results]
    errors = [r[1] for r in results]
    ok = [i for i in range(len(candidates)) if not np.isnan(waics[i])]
    if not ok:
        raise RuntimeError("all candidate fits failed: " + "; ".join(errors))
    best = min(waics[i] for i in ok)
    eligible = [i for i in ok if waics[i] <= best + rule_units]
    selected_index = min(eligible, key=lambda i: (candidates[i].complexity(), i))
    return SelectionResult(candidates[selected_index], selected_index, candidates, waics, errors)


def spline_candidates(base: EffectSpec, covariate: str, target: str = "means", max_knots: int = 4) -> list:
    """Standard candidate menu: the base (linear) spec followed by spline
    expansions of one covariate on one side, with 0..max_knots interior
    knots.  Knots are resolved from the data at fit time."""
    from .splines import bspline_effect

    candidates = [EffectSpec(base.weight_effects, base.mean_effects, label="linear")]
    for k in range(max_knots + 1):
        effects = list(base.effects_for(target))
        replaced = False
        for j, e in enumerate(effects):
            if e.name == covariate:
                effects[j] = bspline_effect(covariate, n_interior=k)
                replaced = True
                break
        if not replaced:
            raise ValueError(f"covariate {covariate!r} not present in the base spec")
        if target == "means":
            cand = EffectSpec(base.weight_effects, tuple(effects), label=f"bspline(K={k}) means")
        else:
            cand = EffectSpec(tuple(effects), base.mean_effects, label=f"bspline(K={k}) weights")
        candidates.append(cand)
    return candidates


def conditional_mixture_params(draw: ConditionalMixtureDraw, z_row: np.ndarray, u_row: np.ndarray):
    """Mixture (weights, means, sds) on the original outcome scale for
    pre-built standardized design rows."""
    model = draw.model
    L = draw.variances.size
    eta = draw.gamma @ z_row if L > 1 else np.empty(0)
    weights = _weights_from_eta(eta, L)
    means = model.y_mean + model.y_sd * (draw.beta @ u_row)
    sds = model.y_sd * np.sqrt(draw.variances)
    return weights, means, sds


def conditional_density_from_draw(
    draw: ConditionalMixtureDraw,
    x_record,
    grid: EvaluationGrid,
    tau_norm: float = TAU_NORM_DEFAULT,
) -> GriddedDensity:
    """One draw's conditional density at covariate value ``x_record``,
    evaluated on a grid in original outcome units.  Covariate values
    outside the fitted spline range are clamped with a warning."""
    z, u = draw.model.rows_at(x_record, clamp=True)
    weights, means, sds = conditional_mixture_params(draw, z, u)
    x = grid.points[:, None]
    with np.errstate(under="ignore"):
        zscore = (x - means[None, :]) / sds[None, :]
        kernels = np.exp(-0.5 * zscore * zscore) / (np.sqrt(2.0 * np.pi) * sds[None, :])
    return GriddedDensity(grid, kernels @ weights, tau_norm)


def conditional_cdf_from_draw(
    draw: ConditionalMixtureDraw,
    x_record,
    grid: EvaluationGrid,
    edge_tol: float = 0.01,
) -> GriddedCdf:
    """One draw's conditional distribution function at ``x_record``,
    computed analytically from the mixture parameters."""
    z, u = draw.model.rows_at(x_record, clamp=True)
    weights, means, sds = conditional_mixture_params(draw, z, u)
    zscore = (grid.points[:, None] - means[None, :]) / sds[None, :]
    return GriddedCdf(grid, std_normal_cdf(zscore) @ weights, edge_tol)
