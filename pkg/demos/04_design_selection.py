"""Choosing how a covariate enters the model: the WAIC 5-unit rule.
====================================================================

The covariate may act on the mixture linearly or through a cubic B-spline
expansion (on the component means or on the stick-breaking weights, never
both at once).  Candidates are compared by WAIC with a parsimony rule: a
more complex spec must beat a simpler one by more than 5 units to be
chosen.

Here the truth is a sine-shaped mean, so the spline expansion on the means
should win decisively; on linear data it should lose to the linear spec.

Run:  python demos/04_design_selection.py   (2-3 minutes)
"""

import numpy as np

import underlap as ul
from underlap.data import GroupDataset
from underlap.lsbp import select_design, spline_candidates

stream = ul.RngStream(88, 0)
g = stream.generator
n = 400
x = g.uniform(-1, 1, n)

base = ul.EffectSpec((ul.linear_effect("x"),), (ul.linear_effect("x"),))
candidates = spline_candidates(base, "x", target="means", max_knots=2)

for label, y in (
    ("sine mean", -0.75 + np.sin(np.pi * x + 1.25) + 0.5 * g.standard_normal(n)),
    ("linear mean", 0.25 + x + g.standard_normal(n)),
):
    data = GroupDataset("demo", y, {"x": x})
    result = select_design(
        data, candidates, ul.LsbpHyper(), n_burn=400, n_save=800,
        rng=stream.child(hash(label) % 1000),
    )
    print(f"== truth: {label} ==")
    for cand, w in zip(result.candidates, result.waics):
        mark = "  <- selected" if cand is result.selected else ""
        print(f"  {cand.label or 'linear':22s} complexity {cand.complexity()}  WAIC {w:9.1f}{mark}")
    print()
