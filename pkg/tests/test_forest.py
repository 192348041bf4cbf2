import numpy as np
import pytest

from helpers import optimal_stump

from neurof0.datagen import SynthConfig, generate_dataset
from neurof0.eeg import ActivationClass, EegFrame, LabeledDataset
from neurof0.errors import ModelFileError
from neurof0.forest import (
    LEAF,
    DecisionTree,
    ForestHyperparams,
    ForestModel,
    load_model,
    predict,
    predict_trajectory,
    save_model,
    train,
)


def frame_with(feature0: float, index: int = 0) -> EegFrame:
    values = np.zeros((10, 10))
    values[0, 0] = feature0
    return EegFrame(values=values, index=index)


def leaf_only_tree(class_index: int) -> DecisionTree:
    counts = np.zeros((1, 10), dtype=np.int64)
    counts[0, class_index - 1] = 1
    return DecisionTree(
        feature=np.array([LEAF], dtype=np.int32),
        threshold=np.zeros(1),
        left=np.zeros(1, dtype=np.int32),
        right=np.zeros(1, dtype=np.int32),
        class_counts=counts,
    )


class TestHyperparams:
    def test_defaults(self):
        hp = ForestHyperparams()
        assert (hp.n_estimators, hp.min_samples_leaf, hp.min_samples_split,
                hp.seed, hp.max_features) == (10, 1, 2, 42, 10)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_estimators": 0},
            {"min_samples_leaf": 0},
            {"min_samples_split": 1},
            {"max_features": 0},
            {"max_features": 101},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ForestHyperparams(**kwargs)


class TestTraining:
    def test_single_sample_gives_leaf_trees(self):
        ds = LabeledDataset(frames=[frame_with(1.0)], labels=[ActivationClass(3)])
        model = train(ds)
        for tree in model.trees:
            assert tree.n_nodes == 1
            assert tree.feature[0] == LEAF
        cls, votes = predict(model, frame_with(99.0))
        assert cls == ActivationClass(3)
        assert votes.sum() == 10

    def test_two_separable_samples(self):
        # class encoded entirely by feature 0: bootstraps containing both
        # classes must produce a depth-1 tree splitting feature 0 at the
        # midpoint; single-class bootstraps collapse to a leaf
        ds = LabeledDataset(
            frames=[frame_with(0.0, 0), frame_with(10.0, 1)],
            labels=[ActivationClass(1), ActivationClass(10)],
        )
        model = train(ds)
        mixed = 0
        for tree in model.trees:
            if tree.feature[0] == LEAF:
                assert tree.n_nodes == 1
                continue
            mixed += 1
            assert tree.n_nodes == 3
            assert tree.feature[0] == 0
            assert tree.threshold[0] == 5.0
        assert mixed >= 1
        assert predict(model, frame_with(0.0))[0] == ActivationClass(1)
        assert predict(model, frame_with(10.0))[0] == ActivationClass(10)

    def test_deterministic_serialization(self, tmp_path):
        ds = generate_dataset(SynthConfig(n_samples=80, snr_db=20.0, seed=5))
        p1, p2 = tmp_path / "a.nf0f", tmp_path / "b.nf0f"
        save_model(train(ds), p1)
        save_model(train(ds), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_memorizes_training_set(self):
        # noiseless, consistently-labeled data: training accuracy must be 100%
        ds = generate_dataset(SynthConfig(n_samples=300, snr_db=float("inf"), seed=6))
        model = train(ds)
        pred = predict_trajectory(model, ds.frames)
        assert pred == list(ds.labels)

    def test_empty_dataset(self):
        with pytest.raises(ValueError):
            train(LabeledDataset(frames=[], labels=[]))

    def test_tree_count_matches_estimators(self):
        ds = LabeledDataset(frames=[frame_with(1.0)], labels=[ActivationClass(2)])
        model = train(ds, ForestHyperparams(n_estimators=3))
        assert len(model.trees) == 3

    def test_adding_trees_keeps_earlier_ones_identical(self):
        # per-tree seed streams: growing the ensemble must not change
        # already-built trees (prerequisite for bit-identical parallel builds)
        ds = generate_dataset(SynthConfig(n_samples=100, snr_db=25.0, seed=4))
        small = train(ds, ForestHyperparams(n_estimators=3))
        large = train(ds, ForestHyperparams(n_estimators=8))
        for t_small, t_large in zip(small.trees, large.trees):
            np.testing.assert_array_equal(t_small.feature, t_large.feature)
            np.testing.assert_array_equal(t_small.threshold, t_large.threshold)
            np.testing.assert_array_equal(t_small.left, t_large.left)
            np.testing.assert_array_equal(t_small.right, t_large.right)
            np.testing.assert_array_equal(t_small.class_counts, t_large.class_counts)


class TestPrediction:
    def test_vote_tie_breaks_low(self):
        # 5 trees voting class 2 against 5 voting class 9: the tie goes low
        model = ForestModel(
            trees=[leaf_only_tree(2)] * 5 + [leaf_only_tree(9)] * 5,
            hyperparams=ForestHyperparams(n_estimators=10),
        )
        cls, votes = predict(model, frame_with(0.0))
        assert cls == ActivationClass(2)
        assert votes[1] == 5 and votes[8] == 5

    def test_high_snr_frame_predicts_its_class(self):
        cfg = SynthConfig(n_samples=500, snr_db=40.0, seed=12)
        ds = generate_dataset(cfg)
        model = train(ds)
        frame = next(f for f, lab in zip(ds.frames, ds.labels)
                     if lab == ActivationClass(7))
        assert predict(model, frame)[0] == ActivationClass(7)

    def test_votes_sum_to_estimators(self):
        ds = generate_dataset(SynthConfig(n_samples=100, snr_db=10.0, seed=8))
        model = train(ds)
        rng = np.random.default_rng(0)
        for _ in range(20):
            frame = EegFrame(values=rng.normal(size=(10, 10)))
            _, votes = predict(model, frame)
            assert votes.sum() == 10

    def test_predict_trajectory(self):
        ds = generate_dataset(SynthConfig(n_samples=50, snr_db=40.0, seed=2))
        model = train(ds)
        assert predict_trajectory(model, []) == []
        frame = ds.frames[0]
        out = predict_trajectory(model, [frame] * 5)
        assert out == [out[0]] * 5  # purity of predict

    def test_matches_optimal_stump_on_easy_1d_data(self):
        # two tight clusters on feature 0; forest must agree with an
        # exhaustively searched decision stump on and around the data
        rng = np.random.default_rng(31)
        for trial in range(20):
            n_lo = int(rng.integers(1, 5))
            n_hi = int(rng.integers(1, 5))
            lo = sorted(rng.uniform(0.0, 3.0, size=n_lo))
            hi = sorted(rng.uniform(7.0, 10.0, size=n_hi))
            xs = lo + hi
            labels = [ActivationClass(1)] * n_lo + [ActivationClass(10)] * n_hi
            ds = LabeledDataset(
                frames=[frame_with(x, i) for i, x in enumerate(xs)], labels=labels
            )
            model = train(ds, ForestHyperparams(seed=trial))
            stump = optimal_stump(xs, labels)
            probes = xs + [-1.0, 1.5, 8.5, 11.0]
            for x in probes:
                assert predict(model, frame_with(x))[0] == stump(x), (trial, x)


class TestSerialization:
    def make_model(self):
        ds = generate_dataset(SynthConfig(n_samples=60, snr_db=15.0, seed=14))
        return train(ds)

    def test_round_trip_predictions(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.nf0f"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.hyperparams == model.hyperparams
        rng = np.random.default_rng(3)
        for _ in range(100):
            frame = EegFrame(values=rng.normal(scale=30.0, size=(10, 10)))
            cls_loaded, votes_loaded = predict(loaded, frame)
            cls_orig, votes_orig = predict(model, frame)
            assert cls_loaded == cls_orig
            np.testing.assert_array_equal(votes_loaded, votes_orig)

    def test_round_trip_bytes(self, tmp_path):
        model = self.make_model()
        p1, p2 = tmp_path / "a.nf0f", tmp_path / "b.nf0f"
        save_model(model, p1)
        save_model(load_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.nf0f"
        save_model(model, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.nf0f"
        path.write_bytes(b"WAT?" + b"\x00" * 64)
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_unknown_version(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.nf0f"
        save_model(model, path)
        blob = bytearray(path.read_bytes())
        blob[4:6] = (99).to_bytes(2, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_trailing_garbage(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.nf0f"
        save_model(model, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(ModelFileError):
            load_model(path)
