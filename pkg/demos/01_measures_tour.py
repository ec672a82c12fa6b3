"""A tour of the discrimination measures on known densities.
====================================================================

Three disease groups, three analytic outcome densities.  The underlap
coefficient integrates the pointwise maximum of the densities: 1 means the
groups are indistinguishable, 3 means they are fully separated, and values
in between count the "effective" number of distinct outcome populations.

Run:  python demos/01_measures_tour.py
"""

import numpy as np

import underlap as ul
from underlap.densities import Normal

# --------------------------------------------------------------------
# Well-separated equal-variance normals: nearly three distinct groups.
specs = [Normal(-3.25, 1.0), Normal(0.0, 1.0), Normal(3.25, 1.0)]
grid = ul.make_grid(-12.0, 12.0, 2001)
dens = [ul.gridded_density(s, grid) for s in specs]
cdfs = [ul.gridded_cdf(s, grid) for s in specs]

print("== three nearly separated groups ==")
print(f"underlap (max integral)     {ul.unl(dens):.4f}")
print(f"underlap via overlaps       {ul.unl_from_ovl(*dens):.4f}")
print(f"closed form (equal var)     {ul.unl_trinormal(-3.25, 0.0, 3.25, 1.0):.4f}")

# The identity behind the second line: the underlap counts overlapping
# area only once,
#   UNL = 3 - OVL(1,2) - OVL(1,3) - OVL(2,3) + OVL(1,2,3).
print(f"pairwise overlaps           {ul.ovl2(dens[0], dens[1]):.4f} "
      f"{ul.ovl2(dens[0], dens[2]):.4f} {ul.ovl2(dens[1], dens[2]):.4f}")
print(f"three-way overlap           {ul.ovl3(*dens):.6f}")

# --------------------------------------------------------------------
# With a stochastic ordering and single crossings, the three-class Youden
# index equals the underlap and its argmax thresholds are the outer
# density crossings.
value, c1, c2 = ul.yi3(*cdfs)
print(f"three-class Youden index    {value:.4f} at thresholds ({c1:.3f}, {c2:.3f})")

for p in ul.classify_intersections(*dens):
    print(f"  crossing of groups {p.equal_pair} at {p.location:+.3f} "
          f"height {p.shared_height:.4f} -> {p.kind}")

# --------------------------------------------------------------------
# The volume under the ROC surface needs the ordering assumption; for
# equal-variance normals there is a one-dimensional integral for it.
stream = ul.RngStream(7, 0)
samples = [ul.sample(s, 100_000, stream.child(d)) for d, s in enumerate(specs)]
print(f"VUS (closed form)           {ul.vus_trinormal(-3.25, 0.0, 3.25, 1.0):.4f}")
print(f"VUS (empirical)             {ul.vus_empirical(*samples, rng=stream.child(9)):.4f}")

# --------------------------------------------------------------------
# Why not the three-class overlap alone?  Scale families break the Youden
# index: these nested densities cross many times, the ordering assumption
# fails, and YI3 understates what the biomarker can do.
print("\n== a scale family: ordering violated ==")
scale_specs = [Normal(0.0, 1.0), Normal(0.0, 3.0), Normal(0.0, 9.0)]
wide = ul.make_grid(-40.0, 40.0, 4001)
sdens = [ul.gridded_density(s, wide) for s in scale_specs]
scdfs = [ul.gridded_cdf(s, wide) for s in scale_specs]
yi3_value, _, _ = ul.yi3(*scdfs)
print(f"underlap  {ul.unl(sdens):.4f}   vs   YI3  {yi3_value:.4f}   (YI3 < UNL)")

# The underlap is invariant under strictly increasing transformations:
# here, measuring the biomarker on the exp scale changes nothing.
u = np.exp(grid.points)
transformed = np.vstack([ul.pdf_at(s, grid.points) / u for s in specs])
unl_exp_scale = ul.simpson(transformed.max(axis=0) * u, grid.spacing)
print(f"\nunderlap on the exp scale   {unl_exp_scale:.4f} (same by invariance)")
