import numpy as np
import pytest
from pydantic import ValidationError

from ensemble import (
    ClassWeights,
    FusionSpec,
    build_table,
    compute_class_weights,
    fuse,
    fused_scores,
    learn_fusion_regression,
    learn_regression,
    load_logs,
    rescale_logits,
)
from ensemble.regression import design_matrix, fit, targets
from evalcli.writers import write_prediction_log
from models.records import PredictionRecord
from utils.errors import ContractError, CoverageError

DYADIC = np.array([0.5, 0.25, 0.125])


def records_from(logits, labels=None, ids=None):
    ids = ids or [f"vid{v:03d}" for v in range(len(logits))]
    return [
        PredictionRecord.from_logits(ids[v], logits[v], label=None if labels is None else int(labels[v]))
        for v in range(len(logits))
    ]


def table_from(logits, labels=None, names=None):
    names = names or [f"m{m}" for m in range(len(logits))]
    return build_table({name: records_from(logits[m], labels) for m, name in enumerate(names)})


def random_logs(seed=0, models=3, videos=50):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(models, videos, 7)), rng.integers(0, 7, size=videos)


def brute_scores(logits, method, acc=None, class_weights=None, count_votes=False):
    models, videos, classes = logits.shape
    scores = np.zeros((videos, classes))
    for m in range(models):
        for v in range(videos):
            pred = int(np.argmax(logits[m, v]))
            for c in range(classes):
                if method == 1:
                    scores[v, c] += acc[m] * (pred == c)
                elif method == 2:
                    scores[v, c] += acc[m] * logits[m, v, c]
                elif method == 3:
                    scores[v, c] += (pred == c) if count_votes else logits[m, v, c]
                elif method == 4:
                    scores[v, c] += acc[m] * np.sqrt(class_weights[c]) * logits[m, v, c]
    return scores


CLASS_SUBSETS = ((0, 1, 2), (3, 4), (5, 6))


def complementary_logs(seed=0, per_class=20):
    """
    Модель m безошибочна (one-hot) на видео классов CLASS_SUBSETS[m],
    на остальных выдаёт равномерно случайную точку симплекса.
    """
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.repeat(np.arange(7), per_class))
    logits = np.zeros((len(CLASS_SUBSETS), labels.size, 7))
    for m, subset in enumerate(CLASS_SUBSETS):
        for v, label in enumerate(labels):
            if label in subset:
                logits[m, v, label] = 1.0
            else:
                logits[m, v] = rng.dirichlet(np.ones(7))
    return logits, labels


class TestLogs:
    def test_load_logs_aligns_by_video(self, tmp_path):
        logits, labels = random_logs(videos=10)
        first = records_from(logits[0], labels)
        second = records_from(logits[1], labels)[::-1]
        paths = [
            write_prediction_log(first, tmp_path / "a.log"),
            write_prediction_log(second, tmp_path / "b.log"),
        ]
        table = load_logs(paths)
        assert table.video_ids == [r.video_id for r in first]
        np.testing.assert_array_equal(table.logits(), logits[:2])
        assert table.labels() == list(labels)
        assert table.accuracies[str(paths[0])] == sum(r.correct for r in first) / 10

    def test_missing_and_extra_videos(self):
        logits, labels = random_logs(videos=5)
        full = records_from(logits[0], labels)
        with pytest.raises(CoverageError, match="missing"):
            build_table({"a": full, "b": full[:4]})
        extra = full + [PredictionRecord.from_logits("other", np.zeros(7), label=0)]
        with pytest.raises(CoverageError, match="extra"):
            build_table({"a": full, "b": extra})

    def test_label_disagreement(self):
        logits, labels = random_logs(videos=5)
        changed = labels.copy()
        changed[2] = (changed[2] + 1) % 7
        with pytest.raises(CoverageError, match="vid002"):
            build_table({"a": records_from(logits[0], labels), "b": records_from(logits[1], changed)})

    def test_same_log_twice(self, tmp_path):
        logits, labels = random_logs(videos=3)
        path = write_prediction_log(records_from(logits[0], labels), tmp_path / "a.log")
        with pytest.raises(ContractError):
            load_logs([path, path])

    def test_unlabelled_logs_have_no_accuracy(self):
        logits, _ = random_logs(videos=4)
        table = table_from(logits)
        assert table.accuracies == {"m0": None, "m1": None, "m2": None}
        with pytest.raises(ContractError):
            fuse(table, FusionSpec(method=2))


class TestClassWeights:
    def test_uniform_counts(self):
        weights = compute_class_weights([10] * 7)
        np.testing.assert_allclose(weights.array(), np.ones(7), atol=1e-12)
        assert ClassWeights.uniform().weights == (1.0,) * 7

    def test_inverse_frequency(self):
        weights = compute_class_weights([2, 1, 1, 1, 1, 1, 1]).array()
        assert weights[1] / weights[0] == pytest.approx(2.0, rel=1e-12)
        assert weights.sum() == pytest.approx(7.0, rel=1e-12)
        np.testing.assert_allclose(weights[1:], weights[1])

    def test_counts_by_word(self):
        counts = {"Angry": 3, "Disgust": 1, "Fear": 1, "Happy": 1, "Neutral": 1, "Sad": 1, "Surprise": 1}
        np.testing.assert_allclose(
            compute_class_weights(counts).array(), compute_class_weights([3, 1, 1, 1, 1, 1, 1]).array()
        )

    def test_empty_class(self):
        with pytest.raises(ContractError, match="Fear"):
            compute_class_weights([5, 5, 0, 5, 5, 5, 5])

    def test_invalid_weights(self):
        with pytest.raises(ValidationError):
            ClassWeights(weights=(1.0,) * 6)
        with pytest.raises(ValidationError):
            ClassWeights(weights=(1.0,) * 6 + (0.0,))


class TestMethodsAgainstBruteForce:
    @pytest.mark.parametrize("seed", range(3))
    @pytest.mark.parametrize("method", [1, 2, 3, 4])
    def test_scores_and_predictions(self, method, seed):
        logits, labels = random_logs(seed)
        class_weights = compute_class_weights([2, 1, 1, 1, 1, 1, 1])
        spec = FusionSpec(method=method, class_weights=class_weights)
        expected = brute_scores(logits, method, acc=DYADIC, class_weights=class_weights.array())

        scores = fused_scores(logits, spec, model_weights=DYADIC)
        np.testing.assert_allclose(scores, expected, atol=1e-12)

        records = fuse(table_from(logits, labels), spec, model_weights=DYADIC)
        assert [r.predicted for r in records] == list(np.argmax(expected, axis=1))
        assert [r.label for r in records] == list(labels)

    def test_method_one_is_exact(self):
        logits, _ = random_logs(4)
        scores = fused_scores(logits, FusionSpec(method=1), model_weights=DYADIC)
        np.testing.assert_array_equal(scores, brute_scores(logits, 1, acc=DYADIC))

    def test_count_votes(self):
        logits, _ = random_logs(5)
        scores = fused_scores(logits, FusionSpec(method=3, count_votes=True))
        np.testing.assert_array_equal(scores, brute_scores(logits, 3, count_votes=True))
        assert scores.sum(axis=1).tolist() == [3.0] * 50


class TestFusionProperties:
    def test_dominant_weight_decides_method_one(self):
        logits, labels = random_logs(6)
        weights = np.array([0.75, 0.125, 0.125])
        records = fuse(table_from(logits, labels), FusionSpec(method=1), model_weights=weights)
        assert [r.predicted for r in records] == list(np.argmax(logits[0], axis=1))

    def test_unanimous_models(self):
        rng = np.random.default_rng(7)
        base = rng.normal(size=(20, 7))
        logits = np.stack([base, base * 2.0 + 1.0, base * 0.5])
        agreed = np.argmax(base, axis=1)
        for spec in (FusionSpec(method=1), FusionSpec(method=3, count_votes=True)):
            scores = fused_scores(logits, spec, model_weights=DYADIC)
            np.testing.assert_array_equal(np.argmax(scores, axis=1), agreed)

    @pytest.mark.parametrize("method", [1, 2, 4])
    def test_scaling_model_weights(self, method):
        logits, _ = random_logs(8)
        spec = FusionSpec(method=method)
        base = fused_scores(logits, spec, model_weights=DYADIC)
        scaled = fused_scores(logits, spec, model_weights=DYADIC * 4.0)
        np.testing.assert_array_equal(scaled, base * 4.0)

    @pytest.mark.parametrize("method", [1, 2, 3, 4])
    def test_model_order_is_bit_exact(self, method):
        logits, labels = random_logs(9)
        order = [2, 0, 1]
        spec = FusionSpec(method=method, class_weights=compute_class_weights([3, 1, 2, 1, 1, 4, 1]))
        first = fused_scores(logits, spec, model_weights=DYADIC)
        permuted = fused_scores(logits[order], spec, model_weights=DYADIC[order])
        np.testing.assert_array_equal(first, permuted)

        a = fuse(table_from(logits, labels), spec, model_weights=DYADIC)
        b = fuse(table_from(logits[order], labels), spec, model_weights=DYADIC[order])
        assert a == b

    @pytest.mark.parametrize("method", [1, 2, 3, 4])
    def test_single_model_keeps_its_predictions(self, method):
        logits, labels = random_logs(10, models=1)
        table = table_from(logits, labels)
        records = fuse(table, FusionSpec(method=method), model_weights=np.array([0.8]))
        assert [r.predicted for r in records] == list(np.argmax(logits[0], axis=1))

    @pytest.mark.parametrize("seed", range(5))
    def test_complementary_models(self, seed):
        logits, labels = complementary_logs(seed)
        table = table_from(logits, labels)
        best_single = max(table.accuracies.values())
        assert 3 / 7 <= best_single < 0.7
        records = fuse(table, FusionSpec(method=2))
        fused = sum(r.correct for r in records) / len(records)
        assert fused >= best_single
        assert fused > 0.9

    def test_explicit_spec_weights(self):
        logits, labels = random_logs(11)
        table = table_from(logits, labels)
        records = fuse(table, FusionSpec(method=2, model_weights=tuple(DYADIC)))
        expected = np.argmax(brute_scores(logits, 2, acc=DYADIC), axis=1)
        assert [r.predicted for r in records] == list(expected)


class TestRescale:
    def test_range_and_argmax(self):
        logits, _ = random_logs(12)
        scaled = rescale_logits(logits)
        assert scaled.shape == logits.shape
        np.testing.assert_allclose(scaled.min(axis=2), 0.0, atol=1e-15)
        np.testing.assert_allclose(scaled.max(axis=2), 1.0, atol=1e-15)
        np.testing.assert_array_equal(np.argmax(scaled, axis=2), np.argmax(logits, axis=2))

    def test_rescale_changes_scores_not_votes(self):
        logits, _ = random_logs(13)
        logits[1] *= 100.0
        plain = fused_scores(logits, FusionSpec(method=1), model_weights=DYADIC)
        rescaled = fused_scores(logits, FusionSpec(method=1, rescale=True), model_weights=DYADIC)
        np.testing.assert_array_equal(plain, rescaled)
        assert not np.allclose(
            fused_scores(logits, FusionSpec(method=3)),
            fused_scores(logits, FusionSpec(method=3, rescale=True)),
        )


class TestSpecValidation:
    @pytest.mark.parametrize(
        "values",
        [
            {"method": 0},
            {"method": 6},
            {"method": 2, "model_weights": (0.5, -0.1)},
            {"method": 2, "model_weights": (0.0, 0.0)},
            {"method": 2, "colour": "red"},
        ],
    )
    def test_invalid_spec(self, values):
        with pytest.raises(ValidationError):
            FusionSpec(**values)

    def test_scores_need_weights(self):
        logits, _ = random_logs(14)
        with pytest.raises(ContractError):
            fused_scores(logits, FusionSpec(method=2))
        with pytest.raises(ContractError):
            fused_scores(logits, FusionSpec(method=4), model_weights=np.ones(2))
        with pytest.raises(ContractError):
            fused_scores(logits, FusionSpec(method=5))


class TestRegression:
    def test_least_squares_matches_pseudo_inverse(self):
        logits, labels = random_logs(15)
        beta, gamma = fit(logits, labels)
        theta = np.linalg.pinv(design_matrix(logits)) @ targets(labels)
        np.testing.assert_allclose(np.concatenate([beta, gamma]), theta, atol=1e-8)

    def test_design_matrix_layout(self):
        logits, _ = random_logs(16, models=2, videos=3)
        X = design_matrix(logits)
        assert X.shape == (21, 9)
        v, c = 2, 5
        row = X[v * 7 + c]
        np.testing.assert_array_equal(row[:2], logits[:, v, c])
        np.testing.assert_array_equal(row[2:], np.eye(7)[c])

    def test_perfect_model_cross_validates(self):
        rng = np.random.default_rng(17)
        labels = rng.integers(0, 7, size=50)
        logits = np.stack([np.eye(7)[labels], rng.normal(size=(50, 7))])
        weights = learn_regression(logits, labels, k=5)
        assert weights.cv_accuracy == 1.0
        assert weights.fold_accuracies == [1.0] * 5
        assert weights.beta[0] == pytest.approx(1.0, abs=1e-6)

    def test_method_five(self):
        logits, labels = random_logs(18)
        table = table_from(logits, labels)
        regression = learn_fusion_regression(table, k=5)
        records = fuse(table, FusionSpec(method=5), regression=regression)
        expected = np.tensordot(regression.beta, logits, axes=(0, 0)) + regression.gamma
        assert [r.predicted for r in records] == list(np.argmax(expected, axis=1))
        assert 0.0 <= regression.cv_accuracy <= 1.0

    def test_two_folds_on_four_videos(self):
        logits, labels = random_logs(19, models=2, videos=4)
        weights = learn_regression(logits, labels, k=2)
        assert len(weights.fold_accuracies) == 2

    def test_invalid_inputs(self):
        logits, labels = random_logs(20, videos=4)
        with pytest.raises(ContractError):
            learn_regression(logits, labels, k=1)
        with pytest.raises(ContractError):
            learn_regression(logits, labels, k=5)
        with pytest.raises(ContractError):
            learn_regression(logits, [0, 1, None, 2], k=2)
        regression = learn_regression(logits, labels, k=2)
        with pytest.raises(ContractError):
            regression.scores(logits[:2])
