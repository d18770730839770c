import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wristvat.errors import (
    ConstantInput,
    DegenerateDesign,
    FeatureMismatch,
    MissingCovariate,
    TooFewRows,
    WeightMismatch,
)
from wristvat.ingest import SubjectRecord
from wristvat.model import (
    DesignMatrix,
    covariate_vector,
    cross_validate,
    fuse_estimates,
    metrics,
    pearson,
    ridge_fit,
    ridge_predict,
    spearman,
    stratified_eval,
)
from wristvat.synth import oracle_ridge, oracle_spearman


def _design(seed=0, n=50, p=10, y=None):
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (n, p))
    if y is None:
        y = rng.normal(400, 100, n)
    return DesignMatrix([f"s{i}" for i in range(n)], [f"f{i}" for i in range(p)], X, y)


class TestCovariateVector:
    def test_table_means_row(self):
        s = SubjectRecord("m", 39.2, "male", 175.1, 87.3, 28.4, 98.4, 514.0)
        np.testing.assert_allclose(
            covariate_vector(s), [39.2, 0.0, 175.1, 87.3, 28.4, 98.4]
        )

    def test_missing_waist(self):
        s = SubjectRecord("m", 39.2, "male", 175.1, 87.3, 28.4, None, 514.0)
        with pytest.raises(MissingCovariate):
            covariate_vector(s)

    def test_gender_slot_only_difference(self):
        a = SubjectRecord("a", 30.0, "male", 170.0, 70.0, 24.2, 85.0, 300.0)
        b = SubjectRecord("b", 30.0, "female", 170.0, 70.0, 24.2, 85.0, 300.0)
        diff = covariate_vector(b) - covariate_vector(a)
        np.testing.assert_allclose(diff, [0, 1, 0, 0, 0, 0])


class TestRidgeFit:
    def test_huge_lambda_shrinks_to_mean(self):
        d = _design(0)
        model = ridge_fit(d, ridge_lambda=1e12)
        assert np.abs(model.weights).max() < 1e-6
        preds = ridge_predict(model, d.X, d.columns)
        np.testing.assert_allclose(preds, d.y.mean(), atol=1e-3)

    def test_scalar_closed_form(self):
        rng = np.random.default_rng(1)
        X = rng.normal(0, 2, (30, 1))
        y = rng.normal(0, 1, 30)
        d = DesignMatrix([str(i) for i in range(30)], ["a"], X, y)
        model = ridge_fit(d, ridge_lambda=0.1, lambda_scaling="n")
        z = (X[:, 0] - X.mean()) / X.std()
        expected = z @ (y - y.mean()) / (z @ z + 0.1 * 30)
        assert model.weights[0] == pytest.approx(expected, abs=1e-12)

    def test_matches_inversion_oracle(self):
        for seed in range(10):
            d = _design(seed)
            for scaling in ("n", "raw"):
                model = ridge_fit(d, 0.1, scaling)
                w, b = oracle_ridge(d.X, d.y, 0.1, scaling)
                np.testing.assert_allclose(model.weights, w, atol=1e-8)
                assert model.intercept == pytest.approx(b, abs=1e-12)

    def test_affine_rescaling_invariance(self):
        d = _design(2)
        base = ridge_predict(ridge_fit(d), d.X, d.columns)
        scales = np.random.default_rng(3).uniform(1e-3, 1e3, d.X.shape[1])
        offsets = np.random.default_rng(4).uniform(-5, 5, d.X.shape[1])
        X2 = d.X * scales + offsets
        d2 = DesignMatrix(d.subject_ids, d.columns, X2, d.y)
        preds = ridge_predict(ridge_fit(d2), X2, d.columns)
        np.testing.assert_allclose(preds, base, atol=1e-9)

    def test_shrinkage_monotonicity(self):
        d = _design(5)
        norms = [
            np.linalg.norm(ridge_fit(d, lam).weights)
            for lam in (0.01, 0.1, 1.0, 10.0)
        ]
        assert all(a >= b for a, b in zip(norms, norms[1:]))

    def test_zero_variance_column_dropped(self):
        d = _design(6)
        X = d.X.copy()
        X[:, 3] = 7.0
        d2 = DesignMatrix(d.subject_ids, d.columns, X, d.y)
        model = ridge_fit(d2)
        assert model.dropped_columns == ("f3",)
        assert len(model.weights) == 9
        preds = ridge_predict(model, X, d.columns)
        assert np.all(np.isfinite(preds))

    def test_all_columns_degenerate(self):
        X = np.ones((20, 3))
        d = DesignMatrix([str(i) for i in range(20)], ["a", "b", "c"], X, np.arange(20.0))
        with pytest.raises(DegenerateDesign):
            ridge_fit(d)


class TestRidgePredict:
    def test_train_mean_maps_to_intercept(self):
        d = _design(7)
        model = ridge_fit(d)
        pred = ridge_predict(model, d.X.mean(axis=0), d.columns)
        assert pred[0] == pytest.approx(d.y.mean(), abs=1e-9)

    def test_near_interpolation_with_tiny_lambda(self):
        # n-1 centered columns span the centered target space exactly.
        rng = np.random.default_rng(8)
        n = 12
        X = rng.normal(0, 1, (n, n - 1))
        y = rng.normal(0, 1, n)
        d = DesignMatrix([str(i) for i in range(n)], [f"c{i}" for i in range(n - 1)], X, y)
        model = ridge_fit(d, ridge_lambda=1e-12, lambda_scaling="raw")
        preds = ridge_predict(model, X, d.columns)
        np.testing.assert_allclose(preds, y, atol=1e-6)

    def test_feature_mismatch(self):
        d = _design(9)
        model = ridge_fit(d)
        with pytest.raises(FeatureMismatch):
            ridge_predict(model, d.X, list(reversed(d.columns)))


class TestCorrelations:
    def test_monotone_pairs(self):
        a = [1.0, 2.0, 5.0, 9.0]
        assert spearman(a, [10.0, 20.0, 21.0, 30.0]) == pytest.approx(1.0)
        assert spearman(a, [-1.0, -2.0, -3.0, -4.0]) == pytest.approx(-1.0)

    def test_ties_match_naive_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            a = rng.integers(0, 5, 10).astype(float)
            b = rng.integers(0, 5, 10).astype(float)
            if len(set(a)) < 2 or len(set(b)) < 2:
                continue
            assert spearman(a, b) == pytest.approx(oracle_spearman(a, b), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(0, 1, 20)
        b = rng.normal(0, 1, 20)
        assert spearman(np.exp(a), b) == pytest.approx(spearman(a, b), abs=1e-12)
        assert spearman(a, 3 * b + 2) == pytest.approx(spearman(a, b), abs=1e-12)

    def test_constant_input(self):
        with pytest.raises(ConstantInput):
            spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(ConstantInput):
            pearson([1.0, 2.0], [3.0, 3.0])


class TestMetrics:
    def test_perfect_prediction(self):
        y = np.array([1.0, 5.0, 2.0, 8.0])
        m = metrics(y, y)
        assert m == pytest.approx((1.0, 1.0, 0.0, 0.0))

    def test_constant_offset(self):
        y = np.array([1.0, 5.0, 2.0, 8.0])
        m = metrics(y, y + 10)
        assert m.spearman == pytest.approx(1.0)
        assert m.mae == pytest.approx(10.0)
        assert m.rmse == pytest.approx(10.0)

    def test_matches_direct_formulas(self):
        rng = np.random.default_rng(11)
        yt = rng.normal(400, 100, 40)
        yp = yt + rng.normal(0, 30, 40)
        m = metrics(yt, yp)
        assert m.mae == pytest.approx(np.abs(yp - yt).mean(), abs=1e-12)
        assert m.rmse == pytest.approx(np.sqrt(((yp - yt) ** 2).mean()), abs=1e-12)
        assert m.pearson == pytest.approx(np.corrcoef(yt, yp)[0, 1], abs=1e-12)
        assert m.spearman == pytest.approx(oracle_spearman(yt, yp), abs=1e-12)

    def test_mae_le_rmse(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            yt = rng.normal(0, 1, 30)
            yp = yt + rng.normal(0, 2, 30)
            m = metrics(yt, yp)
            assert m.mae <= m.rmse + 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            metrics([1.0, 2.0], [1.0])


class TestCrossValidate:
    def test_realizable_target(self):
        rng = np.random.default_rng(13)
        X = rng.normal(0, 1, (200, 20))
        y = X @ rng.normal(0, 1, 20) + 500.0
        d = DesignMatrix([f"s{i}" for i in range(200)], [f"f{i}" for i in range(20)], X, y)
        rep = cross_validate(d, n_repeats=10, seed=1, ridge_lambda=1e-9)
        assert rep.spearman_r.mean >= 0.999
        assert rep.mae_g.mean <= 1e-6 * y.std()
        assert min(rep.fold_spearman) >= 0.999

    def test_deterministic_under_seed(self):
        d = _design(14, n=60)
        a = cross_validate(d, n_repeats=5, seed=42)
        b = cross_validate(d, n_repeats=5, seed=42)
        assert a.to_dict() == b.to_dict()
        c = cross_validate(d, n_repeats=5, seed=43)
        assert a.fold_spearman != c.fold_spearman

    def test_noisy_data_has_spread(self):
        d = _design(15, n=80)
        rep = cross_validate(d, n_repeats=10, seed=0)
        assert rep.spearman_r.std > 0
        assert rep.mae_g.mean <= rep.rmse_g.mean

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            cross_validate(_design(16, n=9), seed=0)

    def test_report_fields(self):
        d = _design(17, n=40)
        bmi = np.random.default_rng(18).uniform(20, 40, 40)
        rep = cross_validate(d, n_repeats=6, seed=3, bmi=bmi)
        assert rep.n_subjects == 40
        assert len(rep.fold_mae) == 6
        assert -1 <= rep.spearman_r.mean <= 1
        assert set(rep.by_bmi_category) == {
            "all",
            "normal",
            "overweight",
            "obese",
            "overweight_or_obese",
        }
        assert len(rep.mean_test_predictions) + rep.n_subjects_never_tested == 40


class TestFuseEstimates:
    def test_identity_weight(self):
        a = np.array([1.0, 2.0, 3.0])
        b = np.array([9.0, 9.0, 9.0])
        np.testing.assert_allclose(fuse_estimates([a, b], [1.0, 0.0]), a)

    def test_third_two_thirds(self):
        a = np.full(4, 300.0)
        b = np.full(4, 600.0)
        np.testing.assert_allclose(fuse_estimates([a, b], [1 / 3, 2 / 3]), 500.0)

    def test_fusion_beats_worse_estimator(self):
        rng = np.random.default_rng(19)
        y = rng.normal(500, 100, 300)
        worse_rmses, fused_rmses = [], []
        for _ in range(30):
            e1 = y + rng.normal(0, 60, 300)
            e2 = y + rng.normal(0, 80, 300)
            fused = fuse_estimates([e1, e2], [0.5, 0.5])
            worse_rmses.append(metrics(y, e2).rmse)
            fused_rmses.append(metrics(y, fused).rmse)
        assert np.mean(fused_rmses) < np.mean(worse_rmses)

    def test_weight_errors(self):
        a = np.ones(3)
        with pytest.raises(WeightMismatch):
            fuse_estimates([a, a], [0.5, 0.6])
        with pytest.raises(WeightMismatch):
            fuse_estimates([a], [0.5, 0.5])
        with pytest.raises(WeightMismatch):
            fuse_estimates([a, np.ones(4)], [0.5, 0.5])


class TestStratifiedEval:
    def test_all_normal_other_categories_absent(self):
        rng = np.random.default_rng(20)
        y = rng.normal(300, 50, 30)
        p = y + rng.normal(0, 10, 30)
        out = stratified_eval(y, p, np.full(30, 22.0))
        assert out["normal"] is not None
        assert out["overweight"] is None
        assert out["obese"] is None
        assert out["overweight_or_obese"] is None
        assert out["all"] == pytest.approx(out["normal"])

    def test_matches_per_category_oracle(self):
        rng = np.random.default_rng(21)
        bmi = rng.uniform(18, 40, 200)
        y = rng.normal(400, 150, 200)
        noise = np.where(bmi >= 30, 120.0, 30.0)  # noisier in the obese class
        p = y + rng.normal(0, 1, 200) * noise
        out = stratified_eval(y, p, bmi)
        for name, mask in [
            ("normal", bmi < 25),
            ("overweight", (bmi >= 25) & (bmi < 30)),
            ("obese", bmi >= 30),
            ("overweight_or_obese", bmi >= 25),
        ]:
            assert out[name] == pytest.approx(
                oracle_spearman(y[mask], p[mask]), abs=1e-12
            )
        assert out["obese"] < out["normal"]

    def test_small_category_boundaries(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        p = np.array([1.0, 2.0, 3.0, 4.0])
        bmi = np.array([22.0, 22.0, 22.0, 31.0])  # one obese subject only
        out = stratified_eval(y, p, bmi)
        assert out["obese"] is None

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            stratified_eval([1.0, 2.0], [1.0, 2.0], [20.0])
