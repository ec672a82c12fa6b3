"""Underlap coefficient estimation for multi-class biomarker discrimination.

The underlap coefficient is the integral of the pointwise maximum of the
per-group outcome densities: 1 means one effective population (no
discrimination), H means H cleanly separated populations.  This package
provides the measure itself (plus overlap coefficients, the three-class
Youden index, VUS and trinormal closed forms), Bayesian nonparametric
estimators of the unconditional and covariate-specific underlap (Dirichlet
process mixture of normals; logit stick-breaking conditional mixture with
Polya-gamma augmented Gibbs sampling), simulation scenarios with ground
truths, and a CLI tying it all together.
"""

__version__ = "0.1.0"

from .data import GroupDataset, read_dataset, write_dataset
from .densities import Gamma, Normal, NormalMixture, SkewNormal, cdf_at, pdf_at, sample
from .dpm import DpmHyper, MixtureDraw, cdf_from_draw, density_from_draw, fit_dpm
from .lsbp import (
    EffectSpec,
    FitResult,
    LsbpHyper,
    conditional_density_from_draw,
    fit_lsbp,
    select_design,
    spline_candidates,
    waic,
)
from .measures import (
    GriddedCdf,
    GriddedDensity,
    IntersectionPoint,
    classify_intersections,
    gridded_cdf,
    gridded_density,
    ovl2,
    ovl3,
    unl,
    unl_from_ovl,
    unl_trinormal,
    vus_empirical,
    vus_trinormal,
    yi3,
)
from .numerics import EvaluationGrid, RngStream, default_grid, make_grid, simpson, std_normal_cdf, std_normal_pdf
from .polya_gamma import sample_pg1, sample_pg1_batch
from .posterior import (
    CurveEnsemble,
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
from .simulation import (
    CoverageReport,
    ScenarioSpec,
    conditional_truth,
    dpm_unl_estimator,
    generate,
    lsbp_unl_estimator,
    run_replicates,
    scenario_truth,
)
from .splines import (
    KnotVector,
    bspline_basis,
    bspline_basis_full,
    bspline_effect,
    categorical_effect,
    design_matrix,
    design_row,
    knots_from_quantiles,
    linear_effect,
    product_effect,
)
