import json

import numpy as np
import pytest
from sklearn.tree import DecisionTreeClassifier

from pumix.classifier import (
    CartTree,
    ClassifierConfig,
    ForestModel,
    cross_fit_scores,
    default_min_leaf,
    default_mtry,
    fit_forest,
    fit_logistic,
    oob_scores,
    split_scores,
    stratified_folds,
    train_forest,
    train_logistic,
)
from pumix.dataset import PuDataset, simulate_gaussian
from pumix.errors import DomainError


def separated_1d(m=20, n=30):
    return PuDataset(np.ones((m, 1)), np.zeros((n, 1)))


def auc(p1, p0):
    diff = p1[:, None] - p0[None, :]
    return np.mean(diff > 0) + 0.5 * np.mean(diff == 0)


def stump(left_value, right_value):
    return CartTree(
        np.array([0, -1, -1]),
        np.array([0.5, -2.0, -2.0]),
        np.array([1, -1, -1]),
        np.array([2, -1, -1]),
        np.array([0.5, left_value, right_value]),
    )


class TestForest:
    def test_separable_stump_every_tree(self):
        model = train_forest(separated_1d(), n_trees=25, min_leaf=1, seed=0)
        for tree in model.trees:
            np.testing.assert_array_equal(tree.predict(np.array([[1.0], [0.0]])), [1.0, 0.0])

    def test_zero_trees(self):
        with pytest.raises(DomainError):
            train_forest(separated_1d(), n_trees=0)

    def test_mtry_domain(self):
        with pytest.raises(DomainError):
            train_forest(separated_1d(), n_trees=2, mtry=2)

    def test_config_kind(self):
        with pytest.raises(DomainError):
            ClassifierConfig(kind="svm")

    def test_deterministic(self):
        data = simulate_gaussian(0.5, 60, 60, seed=1)
        a = train_forest(data, n_trees=10, seed=3)
        b = train_forest(data, n_trees=10, seed=3)
        assert a.to_dict() == b.to_dict()

    def test_parallel_matches_serial(self):
        data = simulate_gaussian(0.5, 60, 60, seed=1)
        a = train_forest(data, n_trees=8, seed=3, n_jobs=1)
        b = train_forest(data, n_trees=8, seed=3, n_jobs=2)
        assert a.to_dict() == b.to_dict()

    def test_defaults(self):
        assert default_mtry(21) == 5
        assert default_mtry(1) == 1
        assert default_min_leaf(10) == 5
        assert default_min_leaf(6000) == 78

    def test_bootstrap_size_and_oob_complement(self):
        data = simulate_gaussian(0.5, 40, 50, seed=2)
        model = train_forest(data, n_trees=12, seed=0)
        assert np.all(model.inbag.sum(axis=1) == data.m + data.n)
        for bag, oob in zip(model.inbag, model.oob_index_sets):
            np.testing.assert_array_equal(oob, np.flatnonzero(bag == 0))

    def test_leaf_values_in_unit_interval(self):
        model = train_forest(simulate_gaussian(0.5, 80, 80, seed=4), n_trees=10, seed=1)
        for tree in model.trees:
            assert np.all((tree.leaf_values >= 0) & (tree.leaf_values <= 1))

    def test_matches_sklearn_predict_proba(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((200, 3))
        y = (X[:, 0] + 0.5 * rng.standard_normal(200) > 0).astype(int)
        w = rng.integers(0, 3, 200).astype(float)
        est = DecisionTreeClassifier(min_samples_leaf=3, random_state=0).fit(X, y, sample_weight=w)
        Xt = rng.standard_normal((500, 3))
        np.testing.assert_allclose(CartTree.from_sklearn(est).predict(Xt), est.predict_proba(Xt)[:, 1])

    def test_json_round_trip(self, tmp_path):
        data = simulate_gaussian(0.3, 50, 50, seed=5)
        model = train_forest(data, n_trees=5, seed=2)
        model.save(tmp_path / "f.json")
        back = ForestModel.load(tmp_path / "f.json")
        X, _ = data.stacked()
        np.testing.assert_array_equal(back.score(X), model.score(X))
        assert json.loads((tmp_path / "f.json").read_text())["format"] == "pumix-forest"


class TestOob:
    def test_mean_of_oob_trees(self):
        # row 0 is out of bag for both trees, row 1 for neither
        model = ForestModel(
            (stump(0.2, 0.9), stump(0.6, 0.1)),
            1,
            1,
            0,
            np.array([[0, 2], [0, 2]], dtype=np.int32),
            np.ones(1),
            1,
        )
        data = PuDataset(np.array([[0.0]]), np.array([[1.0]]))
        scores = oob_scores(model, data)
        assert scores.p1[0] == pytest.approx(0.4)
        assert scores.p0[0] == pytest.approx(0.5)
        assert scores.diagnostics["no_oob_rows"] == 1

    def test_never_scored_by_inbag_tree(self):
        data = simulate_gaussian(0.5, 30, 30, seed=6)
        model = train_forest(data, n_trees=15, seed=1)
        X, _ = data.stacked()
        total, count = model.oob_predict(X)
        manual_total = np.zeros(X.shape[0])
        manual_count = np.zeros(X.shape[0])
        for i in range(X.shape[0]):
            for tree, bag in zip(model.trees, model.inbag):
                if bag[i] == 0:
                    manual_total[i] += tree.predict(X[i : i + 1])[0]
                    manual_count[i] += 1
        np.testing.assert_allclose(total, manual_total)
        np.testing.assert_array_equal(count, manual_count)

    def test_separable_gap(self):
        scores = oob_scores(train_forest(separated_1d(100, 100), n_trees=200, min_leaf=1, seed=0),
                            separated_1d(100, 100))
        assert scores.p1.mean() - scores.p0.mean() > 0.8

    def test_single_tree_oob_fraction(self):
        data = simulate_gaussian(0.5, 2000, 2000, seed=0)
        model = train_forest(data, n_trees=1, seed=7)
        frac = len(model.oob_index_sets[0]) / model.n_train
        assert abs(frac - (1 - 1 / 4000) ** 4000) < 0.02

    def test_scores_in_unit_interval(self):
        data = simulate_gaussian(0.5, 100, 100, seed=3)
        s = oob_scores(train_forest(data, n_trees=20, seed=0), data)
        both = np.concatenate([s.p1, s.p0])
        assert np.all((both >= 0) & (both <= 1)) and np.all(np.isfinite(both))


class TestLogistic:
    def test_identical_distributions_give_pi(self):
        rng = np.random.default_rng(0)
        data = PuDataset(rng.standard_normal((1000, 2)), rng.standard_normal((3000, 2)))
        model = train_logistic(data, l2=1e-2)
        X, _ = data.stacked()
        assert np.all(np.abs(model.score(X) - data.pi) <= 0.05)

    def test_separable_auc(self):
        rng = np.random.default_rng(1)
        data = PuDataset(rng.uniform(1, 2, (50, 1)), rng.uniform(-2, -1, (60, 1)))
        model = train_logistic(data, l2=1e-4)
        assert auc(model.score(data.positives), model.score(data.unlabeled)) == 1.0

    def test_huge_penalty_gives_intercept_only(self):
        data = simulate_gaussian(0.5, 30, 90, seed=2)
        model = train_logistic(data, l2=1e8)
        assert np.all(np.abs(model.coef) < 1e-6)
        X, _ = data.stacked()
        np.testing.assert_allclose(model.score(X), data.pi, atol=1e-6)

    def test_converges(self):
        model = train_logistic(simulate_gaussian(0.5, 100, 100, seed=3))
        assert model.converged

    def test_label_symmetry(self):
        data = simulate_gaussian(0.4, 80, 120, dim=3, seed=4)
        a = train_logistic(data)
        b = train_logistic(data.swapped())
        np.testing.assert_allclose(1 - b.score(data.unlabeled), a.score(data.unlabeled), atol=1e-12)
        np.testing.assert_allclose(1 - b.score(data.positives), a.score(data.positives), atol=1e-12)

    def test_negative_l2(self):
        with pytest.raises(DomainError):
            fit_logistic(np.zeros((2, 1)), [0, 1], l2=-1)


class TestCrossFit:
    def test_two_folds_opposite_model(self):
        data = simulate_gaussian(0.5, 40, 40, seed=5)
        cfg = ClassifierConfig(kind="logistic")
        X, y = data.stacked()
        ids = stratified_folds(y, 2, 0)
        scores = cross_fit_scores(data, cfg, folds=2, seed=0)
        for k in (0, 1):
            model = fit_logistic(X[ids != k], y[ids != k], cfg.l2, cfg.max_iter, cfg.tol)
            expect = model.score(X[ids == k])
            got = np.concatenate([scores.p1, scores.p0])[ids == k]
            np.testing.assert_allclose(got, expect)

    def test_stratified(self):
        y = np.array([1] * 10 + [0] * 23)
        ids = stratified_folds(y, 5, 1)
        for k in range(5):
            assert (y[ids == k] == 1).sum() == 2

    def test_permutation_equivariant(self):
        data = simulate_gaussian(0.5, 30, 50, seed=6)
        cfg = ClassifierConfig(kind="logistic")
        X, y = data.stacked()
        ids = stratified_folds(y, 3, 2)
        base = cross_fit_scores(data, cfg, folds=3, fold_ids=ids)
        pp = np.random.default_rng(0).permutation(data.m)
        pu = np.random.default_rng(1).permutation(data.n)
        perm = PuDataset(data.positives[pp], data.unlabeled[pu])
        ids_perm = np.concatenate([ids[: data.m][pp], ids[data.m :][pu]])
        out = cross_fit_scores(perm, cfg, folds=3, fold_ids=ids_perm)
        np.testing.assert_allclose(out.p1, base.p1[pp], atol=1e-12)
        np.testing.assert_allclose(out.p0, base.p0[pu], atol=1e-12)

    def test_separable_gap(self):
        data = simulate_gaussian(1.0, 200, 200, separation=8.0, seed=7)
        s = cross_fit_scores(data, ClassifierConfig(kind="logistic", l2=1e-4), folds=5)
        assert s.p1.mean() - s.p0.mean() > 0.8

    def test_fold_domain(self):
        data = simulate_gaussian(0.5, 3, 10, seed=0)
        with pytest.raises(DomainError):
            cross_fit_scores(data, ClassifierConfig(kind="logistic"), folds=4)
        with pytest.raises(DomainError):
            cross_fit_scores(data, ClassifierConfig(kind="logistic"), folds=1)

    def test_split_scores_partition(self):
        data = simulate_gaussian(0.5, 41, 59, seed=8)
        held, model = split_scores(data, ClassifierConfig(kind="logistic"))
        assert (held.m, held.n) == (20, 29)
