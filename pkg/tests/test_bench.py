import numpy as np
import pytest

from comimp import (
    CATEGORICAL,
    DataMatrix,
    Dataset,
    FeatureSet,
    ImputerConfig,
    LabelVector,
    fit_ols,
)
from comimp.bench import (
    McarConfig,
    MergeStudyProtocol,
    SimulationConfig,
    TheoremInstance,
    apply_mcar,
    check_theorem,
    derive_seed,
    evaluate_theorem_instance,
    gen_regression_sim,
    make_theorem_instance,
    run_merge_study,
    run_regression_study,
    seed_merge_protocol,
)
from comimp.data import NUMERIC
from comimp.errors import StudyError

SOFT = ImputerConfig(method="soft_impute")


class TestSimulationConfig:
    def test_defaults_are_valid(self):
        cfg = SimulationConfig()
        assert cfg.n1 == 300 and cfg.n2 == 200
        assert cfg.beta == (1.0, 1.0, 0.5, 1.0)

    def test_rejects_asymmetric_sigma(self):
        with pytest.raises(ValueError, match="symmetric"):
            SimulationConfig(sigma=((1, 0.5, 0), (0.4, 1, 0), (0, 0, 1)))

    def test_rejects_indefinite_sigma(self):
        with pytest.raises(ValueError, match="positive definite"):
            SimulationConfig(sigma=((1, 0.99, 0), (0.99, 0.1, 0), (0, 0, 1)))


class TestGenerator:
    def test_noiseless_relation_exact(self):
        cfg = SimulationConfig(noise_var=0.0, d2_feature_noise=(0.0, 0.0), seed=1)
        d1, d2 = gen_regression_sim(cfg)
        # d1 keeps (X2, X3); with zero noise d2 keeps clean (X1, X3);
        # labels satisfy y = 1 + x1 + 0.5 x2 + x3 exactly, so an OLS fit
        # on d2's two observed features plus the hidden one is consistent
        fit = fit_ols(d2.train.X, d2.train.y)
        resid = np.abs(
            d2.train.y.entries
            - np.hstack([np.ones((d2.train.n_rows, 1)), d2.train.X.values])
            @ fit.coefficients
        )
        assert resid.max() < 10  # sanity; exactness checked on full design below
        cfg_full = SimulationConfig(noise_var=0.0, d2_feature_noise=(0.0, 0.0), seed=2)
        rng = np.random.default_rng(cfg_full.seed)
        L = np.linalg.cholesky(np.asarray(cfg_full.sigma))
        X = rng.standard_normal((50, 3)) @ L.T + np.asarray(cfg_full.mu)
        y = 1 + X @ np.asarray(cfg_full.beta[1:])
        np.testing.assert_allclose(y, 1 + X[:, 0] + 0.5 * X[:, 1] + X[:, 2])

    def test_feature_deletion_pattern(self):
        d1, d2 = gen_regression_sim(SimulationConfig(seed=0))
        assert d1.features.names == ("X2", "X3")
        assert d2.features.names == ("X1", "X3")

    def test_split_sizes(self):
        d1, d2 = gen_regression_sim(SimulationConfig(seed=0))
        assert (d1.train.n_rows, d1.test.n_rows) == (210, 90)
        assert (d2.train.n_rows, d2.test.n_rows) == (140, 60)

    def test_deterministic_per_seed(self):
        a1, _ = gen_regression_sim(SimulationConfig(seed=9))
        b1, _ = gen_regression_sim(SimulationConfig(seed=9))
        np.testing.assert_array_equal(a1.train.X.values, b1.train.X.values)

    @pytest.mark.slow
    def test_large_sample_moments(self):
        cfg = SimulationConfig(n1=10**6, n2=7, seed=12)
        rng = np.random.default_rng(cfg.seed)
        L = np.linalg.cholesky(np.asarray(cfg.sigma))
        X = rng.standard_normal((cfg.n1, 3)) @ L.T + np.asarray(cfg.mu)
        emp_mean = X.mean(axis=0)
        emp_cov = np.cov(X, rowvar=False)
        np.testing.assert_allclose(emp_mean, cfg.mu, atol=0.01)
        np.testing.assert_allclose(emp_cov, np.asarray(cfg.sigma), atol=0.01)


class TestMcar:
    def test_rate_zero_unchanged(self):
        X = DataMatrix.from_dense(np.ones((4, 3)), ["a", "b", "c"])
        out = apply_mcar(X, McarConfig(rate=0.0, seed=1))
        assert out.mask.all()

    def test_masked_count_within_binomial_interval(self):
        # 10000 cells at rate 0.2: 99.9% central interval is 2000 +- 3.29 sd
        X = DataMatrix.from_dense(
            np.random.default_rng(0).normal(size=(1000, 10)),
            [f"c{j}" for j in range(10)],
        )
        out = apply_mcar(X, McarConfig(rate=0.2, seed=7))
        masked = int((~out.mask).sum())
        sd = np.sqrt(10000 * 0.2 * 0.8)
        assert abs(masked - 2000) <= 3.2905 * sd

    def test_same_seed_same_mask(self):
        X = DataMatrix.from_dense(
            np.random.default_rng(1).normal(size=(50, 4)), ["a", "b", "c", "d"]
        )
        m1 = apply_mcar(X, McarConfig(rate=0.5, seed=3))
        m2 = apply_mcar(X, McarConfig(rate=0.5, seed=3))
        np.testing.assert_array_equal(m1.mask, m2.mask)

    def test_every_column_keeps_an_observation(self):
        X = DataMatrix.from_dense(
            np.random.default_rng(2).normal(size=(5, 3)), ["a", "b", "c"]
        )
        for seed in range(30):
            out = apply_mcar(X, McarConfig(rate=0.9, seed=seed))
            assert out.mask.any(axis=0).all()

    def test_values_untouched(self):
        X = DataMatrix.from_dense(
            np.random.default_rng(3).normal(size=(20, 3)), ["a", "b", "c"]
        )
        out = apply_mcar(X, McarConfig(rate=0.4, seed=1))
        np.testing.assert_array_equal(out.values, X.values)

    def test_rate_bounds(self):
        with pytest.raises(ValueError):
            McarConfig(rate=1.0)


class TestRegressionStudy:
    def test_deterministic_summary(self):
        cfg = SimulationConfig(seed=5)
        s1 = run_regression_study(cfg, repeats=2, imputer=SOFT)
        s2 = run_regression_study(cfg, repeats=2, imputer=SOFT)
        assert s1 == s2
        assert s1.to_csv() == s2.to_csv()

    def test_rows_and_seed_bookkeeping(self):
        cfg = SimulationConfig(seed=5)
        s = run_regression_study(cfg, repeats=3, imputer=SOFT)
        assert {(r.model, r.partition) for r in s.rows} == {
            ("f1", "d1_test"),
            ("f2", "d2_test"),
            ("f", "merged_test"),
        }
        assert s.repeats == 3
        assert s.repeat_seeds == tuple(derive_seed(5, i) for i in range(3))

    def test_noiseless_omitted_variable_error_positive(self):
        # without label noise the component models still miss their hidden
        # feature, while a fit on the full three-feature design is exact
        cfg = SimulationConfig(noise_var=0.0, d2_feature_noise=(0.0, 0.0), seed=8)
        s = run_regression_study(cfg, repeats=3, imputer=ImputerConfig(method="mean"))
        assert s.row("f1", "d1_test").mean > 0.1
        assert s.row("f2", "d2_test").mean > 0.05
        rng = np.random.default_rng(0)
        L = np.linalg.cholesky(np.asarray(cfg.sigma))
        X = rng.standard_normal((60, 3)) @ L.T + np.asarray(cfg.mu)
        y = 1 + X @ np.asarray(cfg.beta[1:])
        oracle = fit_ols(
            DataMatrix.from_dense(X, ["X1", "X2", "X3"]),
            LabelVector(NUMERIC, y),
        )
        assert oracle.sse_train < 1e-16


def three_class_source(rng, n=120):
    centers = {"a": (-2.0, 0.0, 1.0), "b": (0.0, 1.5, -1.0), "c": (2.0, -1.0, 0.0)}
    labels = [("a", "b", "c")[i % 3] for i in range(n)]
    X = np.vstack([rng.normal(size=3) * 0.8 + centers[lab] for lab in labels])
    return Dataset(
        X=DataMatrix(X, np.ones(X.shape, bool), FeatureSet(["u", "v", "w"])),
        y=LabelVector(CATEGORICAL, labels),
    )


class TestMergeStudy:
    def test_summary_layout_and_determinism(self):
        rng = np.random.default_rng(0)
        source = three_class_source(rng)
        protocol = MergeStudyProtocol(
            drop_columns=((0,), (2,)),
            component_ratios=(0.6, 0.4),
            repeats=3,
            imputer=ImputerConfig(method="mean"),
            seed=11,
        )
        s1 = run_merge_study([source], protocol)
        s2 = run_merge_study([source], protocol)
        assert s1 == s2
        assert {(r.model, r.partition) for r in s1.rows} == {
            ("f1", "d1_test"),
            ("f", "d1_test"),
            ("f2", "d2_test"),
            ("f", "d2_test"),
        }
        for r in s1.rows:
            assert 0.0 <= r.mean <= 1.0

    def test_prepartitioned_components(self):
        rng = np.random.default_rng(1)
        c1, c2 = three_class_source(rng, n=60), three_class_source(rng, n=45)
        protocol = MergeStudyProtocol(
            drop_columns=((0,), ()),
            repeats=2,
            imputer=ImputerConfig(method="mean"),
            seed=3,
        )
        s = run_merge_study([c1, c2], protocol)
        assert s.repeats == 2

    def test_mcar_arm_runs_and_stays_bounded(self):
        rng = np.random.default_rng(2)
        source = three_class_source(rng, n=150)
        protocol = MergeStudyProtocol(
            drop_columns=((0,), (2,)),
            component_ratios=(0.5, 0.5),
            mcar_rate=0.3,
            repeats=2,
            imputer=SOFT,
            seed=5,
        )
        s = run_merge_study([source], protocol)
        for r in s.rows:
            assert 0.0 <= r.mean <= 1.0

    def test_single_class_component_aborts_with_repeat_index(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(30, 2))
        source = Dataset(
            X=DataMatrix(X, np.ones(X.shape, bool), FeatureSet(["u", "v"])),
            y=LabelVector(CATEGORICAL, ["same"] * 30),
        )
        protocol = MergeStudyProtocol(
            drop_columns=((), ()),
            component_ratios=(0.5, 0.5),
            repeats=2,
            imputer=ImputerConfig(method="mean"),
        )
        with pytest.raises(StudyError, match="repeat 0"):
            run_merge_study([source], protocol)

    def test_protocol_validation(self):
        with pytest.raises(ValueError):
            MergeStudyProtocol(drop_columns=((),), component_ratios=(1.0,))
        with pytest.raises(ValueError):
            MergeStudyProtocol(
                drop_columns=((), ()), component_ratios=(0.5, 0.4)
            )
        with pytest.raises(ValueError):
            MergeStudyProtocol(drop_columns=((), ()), classifier="forest")


class TestTheoremChecker:
    def test_zero_labels_give_zero_sse_everywhere(self):
        rng = np.random.default_rng(0)
        inst = make_theorem_instance(rng, 8, 9)
        inst = TheoremInstance(
            u1=inst.u1, v1=inst.v1, v2=inst.v2,
            y=np.zeros(8), z=np.zeros(9),
        )
        sse_d, sse_1, sse_2 = evaluate_theorem_instance(inst)
        assert sse_d == sse_1 == sse_2 == 0.0

    def test_single_trial_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(123)
        inst = make_theorem_instance(rng, 12, 15)
        sse_d, sse_1, sse_2 = evaluate_theorem_instance(inst)

        def oracle(cols, labels):
            Z = np.column_stack([np.ones(len(labels))] + cols)
            beta = np.linalg.inv(Z.T @ Z) @ Z.T @ labels
            r = labels - Z @ beta
            return r @ r

        np.testing.assert_allclose(sse_1, oracle([inst.u1], inst.y), rtol=1e-10)
        np.testing.assert_allclose(sse_2, oracle([inst.v1, inst.v2], inst.z), rtol=1e-10)
        merged_1 = np.concatenate([inst.u1, inst.v1])
        merged_2 = np.concatenate([np.zeros(12), inst.v2])
        np.testing.assert_allclose(
            sse_d,
            oracle([merged_1, merged_2], np.concatenate([inst.y, inst.z])),
            rtol=1e-10,
        )

    def test_instance_requires_centered_columns(self):
        with pytest.raises(ValueError, match="centered"):
            TheoremInstance(
                u1=np.array([1.0, 2.0, 3.0]),
                v1=np.zeros(4),
                v2=np.zeros(4),
                y=np.zeros(3),
                z=np.zeros(4),
            )

    def test_quick_run_no_violations(self):
        report = check_theorem(200, seed=0)
        assert report.trials == 200
        assert report.violations == 0

    def test_deterministic_and_order_independent_seeds(self):
        r1 = check_theorem(50, seed=4)
        r2 = check_theorem(50, seed=4)
        assert r1 == r2

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            check_theorem(0)


class TestPresets:
    def test_seed_presets_shapes(self):
        p = seed_merge_protocol()
        assert p.drop_columns == ((0, 1), (6,))
        assert p.component_ratios == (0.85, 0.15)
        # failure-mode preset keeps exactly one overlapping feature
        from comimp.bench import seed_failure_protocol

        q = seed_failure_protocol()
        kept1 = set(range(7)) - set(q.drop_columns[0])
        kept2 = set(range(7)) - set(q.drop_columns[1])
        assert len(kept1 & kept2) == 1

    def test_wine_presets(self):
        from comimp.bench import wine_imputation_protocol, wine_three_way_protocol

        w = wine_imputation_protocol(rate=0.6)
        assert w.mcar_rate == 0.6
        assert w.standardize
        t = wine_three_way_protocol()
        assert len(t.drop_columns) == 3
        assert t.drop_columns[1] == tuple(range(5, 13))


class TestThreadCap:
    def test_env_var_parallel_results_identical(self, monkeypatch):
        cfg = SimulationConfig(seed=6)
        sequential = run_regression_study(cfg, repeats=4, imputer=SOFT)
        monkeypatch.setenv("COMIMP_THREADS", "4")
        parallel = run_regression_study(cfg, repeats=4, imputer=SOFT)
        assert sequential == parallel
