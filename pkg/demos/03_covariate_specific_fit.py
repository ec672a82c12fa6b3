"""Covariate-specific underlap with the logit stick-breaking mixture.
====================================================================

When a covariate shifts the group densities, a single underlap number can
mislead: discrimination may be excellent for some patients and poor for
others.  This demo simulates three groups whose means move linearly with
x, fits a covariate-dependent mixture (stick proportions and component
means both depend on x through logistic and linear regressions, estimated
with Polya-gamma augmented Gibbs), and traces the underlap as a function
of x against the analytic truth.

Run:  python demos/03_covariate_specific_fit.py   (2-3 minutes)
"""

import numpy as np

import underlap as ul
from underlap.dpm import estimation_grid
from underlap.simulation import ScenarioSpec, conditional_truth, generate

spec = ScenarioSpec("C-I", n=(300, 300, 300), n_reps=1, seed=5)
datasets = generate(spec, 0)

effects = ul.EffectSpec(
    weight_effects=(ul.linear_effect("x"),),
    mean_effects=(ul.linear_effect("x"),),
)
hyper = ul.LsbpHyper()
stream = ul.RngStream(31, 0)
fits = [
    ul.fit_lsbp(ds, effects, hyper, n_burn=500, n_save=1500, rng=stream.child(d))
    for d, ds in enumerate(datasets, start=1)
]
for ds, fit in zip(datasets, fits):
    print(f"group {ds.label}: WAIC {fit.waic:.1f} (p_eff {fit.p_waic:.1f})")

xs = np.linspace(-0.8, 0.8, 9)
grid = estimation_grid([ds.outcomes for ds in datasets], hyper.prior_scale)
curve = ul.covariate_unl_ensemble(fits, [{"x": float(v)} for v in xs], grid)
med, lo, hi = ul.summarize_curve(curve, 0.95)
truth = conditional_truth("C-I", xs)

print("\n    x   truth   median   95% interval")
for xv, t, m, l, h in zip(xs, truth, med, lo, hi):
    print(f"{xv:+.2f}   {t:.3f}   {m:.3f}   [{l:.3f}, {h:.3f}]")

mae = np.mean(np.abs(med - truth))
print(f"\nmean absolute error of the posterior-median curve: {mae:.3f}")
print("note the U shape: the group means cross near x = 0, so the")
print("biomarker discriminates best at the edges of the covariate range.")
