"""Cubic B-spline basis and design-matrix construction."""

import numpy as np
import pytest

from underlap.splines import (
    CovariateEffect,
    EffectSpec,
    KnotVector,
    bspline_basis,
    bspline_basis_full,
    bspline_effect,
    categorical_effect,
    design_matrix,
    design_row,
    effect_dimension,
    knots_from_quantiles,
    linear_effect,
    product_effect,
)


def _random_knots(rng) -> KnotVector:
    k = int(rng.integers(0, 5))
    interior = np.sort(rng.uniform(-0.8, 0.8, size=k))
    while len(set(interior)) != k:
        interior = np.sort(rng.uniform(-0.8, 0.8, size=k))
    return KnotVector(-1.0, 1.0, tuple(interior))


class TestBasis:
    def test_left_endpoint_full_basis(self):
        kv = KnotVector(0.0, 1.0)
        np.testing.assert_allclose(bspline_basis_full(0.0, kv), [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(bspline_basis(0.0, kv), [0.0, 0.0, 0.0])

    def test_right_endpoint_full_basis(self):
        kv = KnotVector(0.0, 1.0)
        np.testing.assert_allclose(bspline_basis_full(1.0, kv), [0.0, 0.0, 0.0, 1.0])

    def test_partition_of_unity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            kv = _random_knots(rng)
            x = rng.uniform(-1.0, 1.0, size=1000)
            full = bspline_basis_full(x, kv)
            assert full.shape == (1000, kv.n_interior + 4)
            np.testing.assert_allclose(full.sum(axis=1), 1.0, atol=1e-12)
            assert np.all(full >= 0.0)

    def test_local_support(self):
        rng = np.random.default_rng(1)
        kv = knots_from_quantiles(rng.uniform(-1, 1, 500), 1)
        x = rng.uniform(-1.0, 1.0, size=200)
        full = bspline_basis_full(x, kv)
        assert np.all((full > 1e-12).sum(axis=1) <= 4)

    def test_matches_scipy_design_matrix(self):
        scipy_interp = pytest.importorskip("scipy.interpolate")
        rng = np.random.default_rng(2)
        for _ in range(10):
            kv = _random_knots(rng)
            x = rng.uniform(-1.0, 1.0, size=300)
            mine = bspline_basis_full(x, kv)
            ref = scipy_interp.BSpline.design_matrix(x, kv.extended(), 3).toarray()
            np.testing.assert_allclose(mine, ref, atol=1e-12)

    def test_out_of_range_raises_or_clamps(self):
        kv = KnotVector(0.0, 1.0)
        with pytest.raises(ValueError):
            bspline_basis(1.5, kv)
        with pytest.warns(RuntimeWarning):
            vals = bspline_basis(1.5, kv, clamp=True)
        np.testing.assert_allclose(vals, bspline_basis(1.0, kv))

    def test_knot_validation(self):
        with pytest.raises(ValueError):
            KnotVector(1.0, 0.0)
        with pytest.raises(ValueError):
            KnotVector(0.0, 1.0, (1.5,))
        with pytest.raises(ValueError):
            KnotVector(0.0, 1.0, (0.6, 0.4))

    def test_quantile_knots_single_is_median(self):
        x = np.arange(101.0)
        kv = knots_from_quantiles(x, 1)
        assert kv.interior == (50.0,)
        assert (kv.lower, kv.upper) == (0.0, 100.0)


class TestDesignRows:
    def test_linear_plus_binary(self):
        spec = EffectSpec(
            (linear_effect("age"), categorical_effect("gender", ("F", "M"))),
            (linear_effect("age"),),
        )
        row = design_row({"age": 1.7, "gender": "M"}, spec, "weights")
        np.testing.assert_allclose(row, [1.0, 1.7, 1.0])
        row = design_row({"age": 1.7, "gender": "F"}, spec, "weights")
        np.testing.assert_allclose(row, [1.0, 1.7, 0.0])
        assert row.shape == (3,)

    def test_one_interior_knot_dimension_five(self):
        kv = KnotVector(-1.0, 1.0, (0.0,))
        spec = EffectSpec((linear_effect("x"),), (bspline_effect("x", knots=kv),))
        row = design_row({"x": 0.3}, spec, "means")
        assert row.shape == (5,)  # intercept + (K + 3) with K = 1
        assert row[0] == 1.0

    def test_zero_knot_dimension_four(self):
        kv = KnotVector(-1.0, 1.0)
        spec = EffectSpec((), (bspline_effect("x", knots=kv),))
        assert design_row({"x": 0.3}, spec, "means").shape == (4,)

    def test_dimension_matches_declared(self):
        kv = KnotVector(-1.0, 1.0, (-0.3, 0.4))
        effects = (
            linear_effect("a"),
            categorical_effect("site", ("u", "v", "w")),
            bspline_effect("b", knots=kv),
            product_effect("a", "b"),
        )
        spec = EffectSpec((), effects)
        rng = np.random.default_rng(3)
        for _ in range(50):
            rec = {"a": rng.uniform(-1, 1), "b": rng.uniform(-1, 1), "site": "v"}
            row = design_row(rec, spec, "means")
            assert row.shape == (effect_dimension(effects),)

    def test_product_column(self):
        spec = EffectSpec((), (product_effect("a", "b"),))
        row = design_row({"a": 2.0, "b": -3.0}, spec, "means")
        np.testing.assert_allclose(row, [1.0, -6.0])

    def test_unknown_level_rejected(self):
        spec = EffectSpec((categorical_effect("g", ("F", "M")),), ())
        with pytest.raises(ValueError, match="unknown level"):
            design_row({"g": "X"}, spec, "weights")

    def test_missing_covariate_rejected(self):
        spec = EffectSpec((linear_effect("age"),), ())
        with pytest.raises(ValueError, match="missing"):
            design_row({}, spec, "weights")

    def test_design_matrix_stacks(self):
        spec = EffectSpec((linear_effect("x"),), (linear_effect("x"),))
        recs = [{"x": v} for v in (0.0, 1.0, 2.0)]
        m = design_matrix(recs, spec, "weights")
        np.testing.assert_allclose(m, [[1, 0], [1, 1], [1, 2]])


class TestEffectSpec:
    def test_spline_on_both_predictors_rejected(self):
        kv = KnotVector(-1.0, 1.0)
        with pytest.raises(ValueError, match="not both"):
            EffectSpec((bspline_effect("x", knots=kv),), (bspline_effect("x", knots=kv),))

    def test_spline_on_one_side_allowed(self):
        kv = KnotVector(-1.0, 1.0)
        EffectSpec((bspline_effect("x", knots=kv),), (linear_effect("x"),))
        EffectSpec((linear_effect("x"),), (bspline_effect("x", knots=kv),))

    def test_complexity_orders_candidates(self):
        base = EffectSpec((linear_effect("x"),), (linear_effect("x"),))
        specs = [base] + [
            EffectSpec((linear_effect("x"),), (bspline_effect("x", n_interior=k),))
            for k in range(5)
        ]
        complexities = [s.complexity() for s in specs]
        assert complexities == sorted(complexities)
        assert len(set(complexities)) == len(complexities)

    def test_unresolved_categorical_dimension_errors(self):
        e = CovariateEffect("g", "categorical")
        with pytest.raises(ValueError, match="unresolved"):
            e.dimension()
