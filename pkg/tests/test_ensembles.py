"""Tests for the tree builder and the five ensembles."""
import numpy as np
import pytest
from scipy.special import expit

from src.config.settings import EnsembleConfig
from src.ensembles.boosting import adaboost_vote_weight, log_odds
from src.ensembles.ensemble import decision_margin, fit_ensemble, oob_error, predict_proba
from src.ensembles.serialization import (
    ENSEMBLE_VERSION,
    decode_tree,
    dumps_ensemble,
    encode_tree,
    ensemble_from_dict,
    ensemble_to_dict,
    load_ensemble,
)
from src.ensembles.tree import GiniCriterion, SecondOrderCriterion, TreeBuilder, predict_tree
from src.ensembles.types import EnsembleKind, EnsembleModel
from src.errors import DataError, NotFittedError

from conftest import gaussian_blobs, separable_1d

ALL_KINDS = list(EnsembleKind)


def _config(kind: EnsembleKind, **overrides) -> EnsembleConfig:
    return EnsembleConfig.for_kind(kind, **{"n_trees": 30, "seed": 5, **overrides})


def _accuracy(model, X, y) -> float:
    return float(np.mean((predict_proba(model, X) >= 0.5) == y))


def _walk(tree, x) -> float:
    node = tree
    while not node.is_leaf:
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node.value


class TestTreeBuilder:
    """Test single-tree growth."""

    def test_midpoint_threshold(self):
        """Test the split sits halfway between the classes."""
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        tree = TreeBuilder(GiniCriterion(np.array([0, 0, 1, 1]))).build(X)
        assert tree.feature_index == 0
        assert tree.threshold == 1.5
        assert tree.left.value == 0.0 and tree.right.value == 1.0

    def test_tie_goes_to_lowest_feature(self):
        """Test duplicated features split on the first copy."""
        x = np.array([0.1, 0.4, 0.6, 0.9])
        tree = TreeBuilder(GiniCriterion(np.array([0, 0, 1, 1]))).build(np.column_stack([x, x, x]))
        assert tree.feature_index == 0

    def test_depth_zero_is_leaf(self):
        """Test max_depth 0 gives a single leaf with the class-1 fraction."""
        X, y = separable_1d(40)
        tree = TreeBuilder(GiniCriterion(y), max_depth=0).build(X)
        assert tree.is_leaf
        assert tree.value == pytest.approx(y.mean())

    def test_constant_feature_stays_leaf(self):
        """Test a node whose features are all constant is not split."""
        tree = TreeBuilder(GiniCriterion(np.array([0, 1, 0, 1]))).build(np.ones((4, 2)))
        assert tree.is_leaf

    def test_fully_grown_tree_is_pure(self):
        """Test unlimited depth on distinct points fits the labels exactly."""
        rng = np.random.default_rng(0)
        X, y = rng.normal(size=(60, 3)), rng.integers(0, 2, size=60)
        tree = TreeBuilder(GiniCriterion(y)).build(X)
        np.testing.assert_array_equal(predict_tree(tree, X), y)

    def test_vectorised_traversal_matches_walk(self):
        """Test batch prediction equals a node-by-node walk."""
        X, y = gaussian_blobs(200, d=6)
        model = fit_ensemble(X, y, _config(EnsembleKind.ERT, n_trees=5))
        queries = np.random.default_rng(1).normal(size=(50, 6))
        for tree in model.trees:
            batch = predict_tree(tree, queries)
            assert list(batch) == [_walk(tree, q) for q in queries]

    def test_zero_gradient_similarity(self):
        """Test a node whose gradients cancel has zero similarity."""
        criterion = SecondOrderCriterion(np.array([0.5, -0.5]), np.array([0.25, 0.25]), reg_lambda=1.0)
        assert criterion.similarity(criterion.stats.sum(axis=0)) == 0.0
        assert criterion.leaf_value(criterion.stats.sum(axis=0)) == 0.0

    def test_tree_encoding_roundtrip(self):
        """Test preorder encoding rebuilds the same structure."""
        X, y = gaussian_blobs(100, d=4)
        tree = TreeBuilder(GiniCriterion(y), max_depth=4).build(X)
        rebuilt = decode_tree(encode_tree(tree))
        assert rebuilt.depth() == tree.depth()
        assert rebuilt.n_leaves() == tree.n_leaves()
        np.testing.assert_array_equal(predict_tree(rebuilt, X), predict_tree(tree, X))

    def test_truncated_encoding(self):
        """Test a preorder array missing a child raises DataError."""
        with pytest.raises(DataError):
            decode_tree({"feature": [0, -1], "threshold": [0.5, 0.0], "value": [0.5, 0.0]})

    def test_trailing_encoding(self):
        """Test extra entries after a complete tree raise DataError."""
        with pytest.raises(DataError):
            decode_tree({"feature": [-1, -1], "threshold": [0.0, 0.0], "value": [0.5, 0.0]})


class TestEnsembles:
    """Test fitting and prediction for every kind."""

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_separable_data(self, kind):
        """Test perfectly separable data is classified without error."""
        X, y = separable_1d(500, seed=0)
        X_test, y_test = separable_1d(200, seed=1)
        model = fit_ensemble(X, y, _config(kind))
        assert _accuracy(model, X_test, y_test) == 1.0

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_beats_majority_baseline(self, kind):
        """Test overlapping Gaussian classes are learned well above chance."""
        X, y = gaussian_blobs(600, shift=2.0, seed=0)
        X_test, y_test = gaussian_blobs(400, shift=2.0, seed=1)
        model = fit_ensemble(X, y, _config(kind))
        baseline = max(y_test.mean(), 1 - y_test.mean())
        assert _accuracy(model, X_test, y_test) > baseline + 0.15

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_probabilities_in_range(self, kind):
        """Test predicted probabilities lie in [0, 1]."""
        X, y = gaussian_blobs(200, d=8)
        probs = predict_proba(fit_ensemble(X, y, _config(kind, n_trees=10)), X)
        assert np.all((probs >= 0.0) & (probs <= 1.0))

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_deterministic(self, kind):
        """Test the same seed gives identical predictions."""
        X, y = gaussian_blobs(150, d=8)
        first = predict_proba(fit_ensemble(X, y, _config(kind, n_trees=10)), X)
        second = predict_proba(fit_ensemble(X, y, _config(kind, n_trees=10)), X)
        np.testing.assert_array_equal(first, second)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_file_roundtrip(self, kind, tmp_path):
        """Test a reloaded ensemble predicts identically."""
        X, y = gaussian_blobs(150, d=8)
        model = fit_ensemble(X, y, _config(kind, n_trees=10))
        path = tmp_path / "models" / f"e_coli.{kind.value}.json"
        path.parent.mkdir(parents=True)
        path.write_text(dumps_ensemble(model), encoding="utf-8")
        reloaded = load_ensemble(path)
        assert dumps_ensemble(reloaded) == dumps_ensemble(model)
        assert reloaded.kind is kind
        np.testing.assert_array_equal(predict_proba(reloaded, X), predict_proba(model, X))

    def test_feature_vectors_accepted(self):
        """Test objects with a values attribute are stacked into a matrix."""
        X, y = separable_1d(50)

        class Row:
            def __init__(self, values):
                self.values = values

        model = fit_ensemble([Row(x) for x in X], y, _config(EnsembleKind.RF, n_trees=3))
        assert model.n_features == 1

    def test_extra_trees_row_order_invariant(self):
        """Test permuting training rows leaves extra-trees predictions unchanged."""
        X, y = gaussian_blobs(200, d=8)
        order = np.random.default_rng(3).permutation(len(X))
        config = _config(EnsembleKind.ERT, n_trees=10)
        queries = gaussian_blobs(50, d=8, seed=4)[0]
        np.testing.assert_array_equal(
            predict_proba(fit_ensemble(X, y, config), queries),
            predict_proba(fit_ensemble(X[order], y[order], config), queries),
        )

    @pytest.mark.parametrize("kind,n_trees", [(EnsembleKind.RF, 300), (EnsembleKind.ERT, 100)])
    def test_unlimited_depth_memorizes_training_split(self, kind, n_trees):
        """Test unlimited-depth forests classify their own noisy training rows perfectly."""
        X, y = gaussian_blobs(200, d=64, shift=0.5)
        config = EnsembleConfig.for_kind(kind, n_trees=n_trees, seed=2)
        assert config.max_depth is None
        model = fit_ensemble(X, y, config)
        assert _accuracy(model, X, y) == 1.0
        held_out, held_labels = gaussian_blobs(200, d=64, shift=0.5, seed=9)
        assert _accuracy(model, held_out, held_labels) < 1.0


class TestRandomForest:
    """Test bagging and the out-of-bag estimate."""

    def test_single_tree_oob_coverage(self):
        """Test one bootstrap leaves about 1/e of the samples out of bag."""
        X, y = gaussian_blobs(2000, d=4)
        model = fit_ensemble(X, y, _config(EnsembleKind.RF, n_trees=1))
        assert model.oob_samples / len(X) == pytest.approx(np.exp(-1), abs=0.03)
        assert model.inbag.shape == (1, len(X))
        assert model.inbag.sum() == len(X)

    def test_oob_tracks_holdout(self):
        """Test the out-of-bag error is close to the holdout error."""
        X, y = gaussian_blobs(500, d=16, seed=0)
        X_test, y_test = gaussian_blobs(500, d=16, seed=1)
        model = fit_ensemble(X, y, _config(EnsembleKind.RF, n_trees=60))
        holdout = 1.0 - _accuracy(model, X_test, y_test)
        assert oob_error(model) == pytest.approx(holdout, abs=0.08)

    def test_unanimous_trees(self):
        """Test a point every tree calls positive gets probability 1."""
        X, y = separable_1d(200)
        model = fit_ensemble(X, y, _config(EnsembleKind.RF))
        assert predict_proba(model, np.array([[0.95]]))[0] == 1.0
        assert predict_proba(model, np.array([[-0.95]]))[0] == 0.0

    def test_oob_only_for_forest(self):
        """Test asking a booster for out-of-bag error raises ValueError."""
        X, y = separable_1d(50)
        with pytest.raises(ValueError):
            oob_error(fit_ensemble(X, y, _config(EnsembleKind.GB, n_trees=2)))

    def test_unfitted_forest(self):
        """Test a forest without trees raises NotFittedError."""
        model = EnsembleModel(EnsembleKind.RF, _config(EnsembleKind.RF), 1)
        with pytest.raises(NotFittedError):
            predict_proba(model, np.zeros((1, 1)))


class TestBoosting:
    """Test AdaBoost, gradient and second-order boosting."""

    def test_vote_weight(self):
        """Test alpha is zero at chance and grows as error shrinks."""
        assert adaboost_vote_weight(0.5) == 0.0
        assert adaboost_vote_weight(0.1) == pytest.approx(0.5 * np.log(9))
        assert np.isfinite(adaboost_vote_weight(0.0))

    def test_adaboost_perfect_stump_stops(self):
        """Test a weak learner with zero error ends boosting after one round."""
        X, y = separable_1d(100)
        model = fit_ensemble(X, y, _config(EnsembleKind.AB, max_depth=1))
        assert model.n_trees == 1
        assert model.tree_weights[0] > 0

    def test_adaboost_single_leaf_on_imbalance(self):
        """Test a stump that cannot split predicts the majority class everywhere."""
        X = np.ones((10, 1))
        y = np.array([1] * 7 + [0] * 3)
        model = fit_ensemble(X, y, _config(EnsembleKind.AB, max_depth=1))
        assert model.trees[0].is_leaf
        assert np.all(predict_proba(model, X) > 0.5)

    def test_adaboost_exponential_loss_decreases(self):
        """Test the training exponential loss never increases across rounds."""
        X, y = gaussian_blobs(300, d=8)
        model = fit_ensemble(X, y, _config(EnsembleKind.AB, n_trees=20, max_depth=1))
        signed = 2.0 * y - 1.0
        votes = np.zeros(len(X))
        losses = []
        for tree, alpha in zip(model.trees, model.tree_weights):
            votes += alpha * (2.0 * (predict_tree(tree, X) >= 0.5) - 1.0)
            losses.append(np.mean(np.exp(-signed * votes)))
        assert np.all(np.diff(losses) <= 1e-12)

    @pytest.mark.parametrize("kind", [EnsembleKind.GB, EnsembleKind.XGB])
    def test_log_loss_decreases(self, kind):
        """Test the training log-loss never increases across rounds."""
        X, y = gaussian_blobs(300, d=8)
        model = fit_ensemble(X, y, _config(kind, n_trees=25))
        margin = np.full(len(X), model.base_score)
        losses = []
        for tree in model.trees:
            margin += predict_tree(tree, X)
            p = expit(margin)
            losses.append(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
        assert np.all(np.diff(losses) <= 1e-12)

    @pytest.mark.parametrize("kind", [EnsembleKind.GB, EnsembleKind.XGB])
    def test_no_trees_predicts_base_rate(self, kind):
        """Test a booster with no trees predicts the training positive rate."""
        y = np.array([1, 0, 0, 0])
        model = EnsembleModel(kind, _config(kind), 2, base_score=log_odds(y))
        np.testing.assert_allclose(predict_proba(model, np.zeros((3, 2))), 0.25)

    def test_adaboost_margin_sign(self):
        """Test AdaBoost probabilities follow the sign of the weighted vote."""
        X, y = gaussian_blobs(200, d=8)
        model = fit_ensemble(X, y, _config(EnsembleKind.AB, n_trees=10))
        margin = decision_margin(model, X)
        np.testing.assert_array_equal(predict_proba(model, X) > 0.5, margin > 0)

    def test_booster_default_depth(self):
        """Test boosters default to depth 3 and forests to unlimited depth."""
        assert _config(EnsembleKind.XGB).max_depth == 3
        assert _config(EnsembleKind.RF).max_depth is None
        assert _config(EnsembleKind.GB, max_depth=5).max_depth == 5


class TestInputValidation:
    """Test fit and predict argument checks."""

    def test_empty(self):
        """Test empty features raise DataError."""
        with pytest.raises(DataError):
            fit_ensemble(np.zeros((0, 2)), [], _config(EnsembleKind.RF))

    def test_length_mismatch(self):
        """Test mismatched rows and labels raise DataError."""
        with pytest.raises(DataError):
            fit_ensemble(np.zeros((3, 2)), [0, 1], _config(EnsembleKind.RF))

    def test_single_class(self):
        """Test one-class labels raise DataError."""
        with pytest.raises(DataError):
            fit_ensemble(np.random.default_rng(0).normal(size=(5, 2)), [1] * 5, _config(EnsembleKind.GB))

    def test_non_binary_labels(self):
        """Test labels outside {0, 1} raise DataError."""
        with pytest.raises(DataError):
            fit_ensemble(np.zeros((3, 1)), [0, 1, 2], _config(EnsembleKind.RF))

    def test_non_finite(self):
        """Test NaN features raise DataError."""
        X = np.array([[0.0], [np.nan], [1.0]])
        with pytest.raises(DataError):
            fit_ensemble(X, [0, 1, 1], _config(EnsembleKind.ERT))

    def test_width_mismatch(self):
        """Test predicting with a different feature width raises DataError."""
        X, y = separable_1d(30)
        model = fit_ensemble(X, y, _config(EnsembleKind.RF, n_trees=2))
        with pytest.raises(DataError):
            predict_proba(model, np.zeros((2, 3)))


class TestEnsembleFile:
    """Test ensemble file validation."""

    def test_version_mismatch(self):
        """Test an unknown version raises DataError."""
        X, y = separable_1d(30)
        data = ensemble_to_dict(fit_ensemble(X, y, _config(EnsembleKind.GB, n_trees=2)))
        data["version"] = ENSEMBLE_VERSION + 1
        with pytest.raises(DataError):
            ensemble_from_dict(data)

    def test_weight_count_mismatch(self):
        """Test a file with fewer weights than trees raises DataError."""
        X, y = separable_1d(30)
        data = ensemble_to_dict(fit_ensemble(X, y, _config(EnsembleKind.RF, n_trees=3)))
        data["tree_weights"] = data["tree_weights"][:1]
        with pytest.raises(DataError):
            ensemble_from_dict(data)

    def test_missing_file(self, tmp_path):
        """Test a missing file raises DataError."""
        with pytest.raises(DataError):
            load_ensemble(tmp_path / "absent.json")
