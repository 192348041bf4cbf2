"""Deterministic random-forest classifier over 10 x 10 EEG frames.

Implemented from scratch so training is a pure function of the dataset
order and the seed: identical inputs give bit-identical models. Each tree
is grown on a bootstrap resample with CART-style binary splits chosen by
Gini impurity over a random feature subset per node; candidate thresholds
are midpoints between consecutive sorted unique feature values. The first
max_features entries of a per-node random feature permutation are
searched; if none of them admits a valid split the permutation is walked
further until one does, so a node only becomes a leaf when it is pure,
smaller than min_samples_split, or genuinely unsplittable under
min_samples_leaf. Ties are always broken toward the lower feature index /
lower threshold / lower class index so results do not depend on iteration
incidentals.

Per-tree randomness comes from independent splitmix64 streams seeded with
successive outputs of a master stream over the forest seed, so adding
trees never perturbs existing ones.

Feature layout: a frame's 10 x 10 matrix is flattened row-major
(channel-major) into 100 features.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .eeg import ActivationClass, EegFrame, LabeledDataset
from .errors import ModelFileError
from .rng import SplitMix64

N_FEATURES = 100
N_CLASSES = 10
LEAF = -1

MAGIC = b"NF0F"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestHyperparams:
    n_estimators: int = 10
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    seed: int = 42
    max_features: int = 10  # floor(sqrt(100))

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be at least 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if not 1 <= self.max_features <= N_FEATURES:
            raise ValueError(f"max_features must be in 1..{N_FEATURES}")


@dataclass(frozen=True)
class DecisionTree:
    """Flat preorder node arrays; feature == LEAF marks a leaf.

    class_counts holds the bootstrap-sample class histogram of every node
    (meaningful for prediction at leaves).
    """

    feature: np.ndarray       # int32, LEAF for leaves
    threshold: np.ndarray     # float64, 0.0 for leaves
    left: np.ndarray          # int32 child ids, 0 for leaves
    right: np.ndarray         # int32 child ids, 0 for leaves
    class_counts: np.ndarray  # int64, (n_nodes, N_CLASSES)

    def __post_init__(self):
        n = len(self.feature)
        for name in ("threshold", "left", "right"):
            if len(getattr(self, name)) != n:
                raise ValueError("node arrays must have equal length")
        if self.class_counts.shape != (n, N_CLASSES):
            raise ValueError("class_counts must be (n_nodes, 10)")
        if n == 0:
            raise ValueError("tree has no nodes")

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass(frozen=True)
class ForestModel:
    trees: Sequence[DecisionTree]
    hyperparams: ForestHyperparams = field(default_factory=ForestHyperparams)
    feature_layout: str = "row-major"

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if len(self.trees) != self.hyperparams.n_estimators:
            raise ValueError(
                f"{len(self.trees)} trees but n_estimators={self.hyperparams.n_estimators}"
            )


def _best_split(X, y_onehot, idx, feats, min_leaf):
    """Lowest-Gini (feature, threshold) over the candidate features, or None.

    Features are scanned in ascending index order and thresholds in
    ascending value order; only strictly better impurity replaces the
    incumbent, which fixes the tie-breaking.
    """
    n = len(idx)
    best = None  # (weighted impurity, feature, threshold)
    for f in feats:
        x = X[idx, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        left_counts = np.cumsum(y_onehot[idx[order]], axis=0)
        total = left_counts[-1]
        cut = np.nonzero(xs[:-1] < xs[1:])[0]  # split between cut and cut+1
        if cut.size == 0:
            continue
        n_left = cut + 1
        keep = (n_left >= min_leaf) & (n - n_left >= min_leaf)
        cut = cut[keep]
        if cut.size == 0:
            continue
        n_left = (cut + 1).astype(float)
        n_right = n - n_left
        lc = left_counts[cut]
        rc = total - lc
        gini_l = 1.0 - np.sum((lc / n_left[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((rc / n_right[:, None]) ** 2, axis=1)
        weighted = (n_left * gini_l + n_right * gini_r) / n
        i = int(np.argmin(weighted))  # first minimum: lowest threshold
        if best is None or weighted[i] < best[0]:
            thr = 0.5 * (xs[cut[i]] + xs[cut[i] + 1])
            best = (float(weighted[i]), f, thr)
    return best


def _grow_tree(X: np.ndarray, y: np.ndarray, hp: ForestHyperparams, rng: SplitMix64) -> DecisionTree:
    n = len(y)
    boot = np.fromiter((rng.below(n) for _ in range(n)), dtype=np.int64, count=n)
    y_onehot = np.zeros((n, N_CLASSES))
    y_onehot[np.arange(n), y] = 1.0

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[np.ndarray] = []

    # preorder build with an explicit stack; parent slots patched on allocation
    stack = [(boot, None, None)]  # (sample indices, parent id, "left"/"right")
    while stack:
        idx, parent, side = stack.pop()
        node_id = len(feature)
        if parent is not None:
            (left if side == "left" else right)[parent] = node_id
        node_counts = np.bincount(y[idx], minlength=N_CLASSES).astype(np.int64)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(0)
        right.append(0)
        counts.append(node_counts)

        if len(idx) < hp.min_samples_split or np.count_nonzero(node_counts) <= 1:
            continue
        # lazy partial Fisher-Yates: the first max_features of a feature
        # permutation, extended one at a time while no valid split exists
        pool = list(range(N_FEATURES))
        for i in range(hp.max_features):
            j = i + rng.below(N_FEATURES - i)
            pool[i], pool[j] = pool[j], pool[i]
        best = _best_split(X, y_onehot, idx, sorted(pool[:hp.max_features]),
                           hp.min_samples_leaf)
        drawn = hp.max_features
        while best is None and drawn < N_FEATURES:
            j = drawn + rng.below(N_FEATURES - drawn)
            pool[drawn], pool[j] = pool[j], pool[drawn]
            best = _best_split(X, y_onehot, idx, [pool[drawn]], hp.min_samples_leaf)
            drawn += 1
        if best is None:
            continue
        _, f, thr = best
        feature[node_id] = f
        threshold[node_id] = thr
        mask = X[idx, f] <= thr
        # right pushed first so the left subtree is built (and numbered) first
        stack.append((idx[~mask], node_id, "right"))
        stack.append((idx[mask], node_id, "left"))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        class_counts=np.array(counts, dtype=np.int64),
    )


def train(ds: LabeledDataset, hp: ForestHyperparams | None = None) -> ForestModel:
    """Fit the forest; deterministic given (dataset order, hp.seed)."""
    if hp is None:
        hp = ForestHyperparams()
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    X = np.array([f.features() for f in ds.frames])
    y = np.array([lab.index - 1 for lab in ds.labels], dtype=np.int64)
    seeder = SplitMix64(hp.seed)
    tree_seeds = [seeder.next_u64() for _ in range(hp.n_estimators)]
    trees = [_grow_tree(X, y, hp, SplitMix64(s)) for s in tree_seeds]
    return ForestModel(trees=trees, hyperparams=hp)


def _tree_vote(tree: DecisionTree, x: np.ndarray) -> int:
    node = 0
    while tree.feature[node] != LEAF:
        node = tree.left[node] if x[tree.feature[node]] <= tree.threshold[node] else tree.right[node]
    return int(np.argmax(tree.class_counts[node]))  # ties: lowest class index


def predict(model: ForestModel, frame: EegFrame) -> tuple[ActivationClass, np.ndarray]:
    """Plurality vote over the trees; returns (class, per-class vote counts).

    Each tree votes the majority class of its leaf; the forest returns the
    class with most votes, ties broken toward the lowest class index.
    """
    if len(model.trees) == 0:
        raise ValueError("model has no trees")
    x = frame.features()
    votes = np.zeros(N_CLASSES, dtype=np.int64)
    for tree in model.trees:
        votes[_tree_vote(tree, x)] += 1
    return ActivationClass(int(np.argmax(votes)) + 1), votes


def predict_trajectory(model: ForestModel, frames: Sequence[EegFrame]) -> list[ActivationClass]:
    """Elementwise predict, preserving order."""
    return [predict(model, f)[0] for f in frames]


# ---------------------------------------------------------------------------
# model file format, version 1 (all integers little-endian):
#   magic "NF0F" | u16 version
#   u32 n_estimators | u32 min_samples_leaf | u32 min_samples_split
#   i64 seed | u32 max_features | u32 n_trees
#   per tree: u32 n_nodes, then per node:
#     u8 kind (0 leaf, 1 internal)
#     leaf:     10 x u32 class counts
#     internal: u32 feature | f64 threshold | u32 left | u32 right
# ---------------------------------------------------------------------------

def save_model(model: ForestModel, path) -> None:
    hp = model.hyperparams
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<H", FORMAT_VERSION)
    blob += struct.pack(
        "<IIIqII",
        hp.n_estimators, hp.min_samples_leaf, hp.min_samples_split,
        hp.seed, hp.max_features, len(model.trees),
    )
    for tree in model.trees:
        blob += struct.pack("<I", tree.n_nodes)
        for i in range(tree.n_nodes):
            if tree.feature[i] == LEAF:
                blob += struct.pack("<B", 0)
                blob += struct.pack("<10I", *tree.class_counts[i])
            else:
                blob += struct.pack(
                    "<BIdII",
                    1, int(tree.feature[i]), float(tree.threshold[i]),
                    int(tree.left[i]), int(tree.right[i]),
                )
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.blob):
            raise ModelFileError("model file is truncated")
        out = struct.unpack_from(fmt, self.blob, self.pos)
        self.pos += size
        return out


def load_model(path) -> ForestModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    reader = _Reader(blob)
    (magic,) = reader.take("<4s")
    if magic != MAGIC:
        raise ModelFileError(f"not a forest model file (magic {magic!r})")
    (version,) = reader.take("<H")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format version {version}")
    n_est, min_leaf, min_split, seed, max_feat, n_trees = reader.take("<IIIqII")
    try:
        hp = ForestHyperparams(
            n_estimators=n_est, min_samples_leaf=min_leaf,
            min_samples_split=min_split, seed=seed, max_features=max_feat,
        )
    except ValueError as exc:
        raise ModelFileError(f"invalid hyperparameters in model file: {exc}") from None
    if n_trees != n_est:
        raise ModelFileError("tree count does not match n_estimators")

    trees = []
    for _ in range(n_trees):
        (n_nodes,) = reader.take("<I")
        if n_nodes == 0:
            raise ModelFileError("tree with zero nodes")
        feature = np.empty(n_nodes, dtype=np.int32)
        threshold = np.zeros(n_nodes, dtype=np.float64)
        left = np.zeros(n_nodes, dtype=np.int32)
        right = np.zeros(n_nodes, dtype=np.int32)
        counts = np.zeros((n_nodes, N_CLASSES), dtype=np.int64)
        for i in range(n_nodes):
            (kind,) = reader.take("<B")
            if kind == 0:
                feature[i] = LEAF
                counts[i] = reader.take("<10I")
            elif kind == 1:
                f, thr, l, r = reader.take("<IdII")
                if f >= N_FEATURES or l >= n_nodes or r >= n_nodes:
                    raise ModelFileError("node references out of range")
                feature[i], threshold[i], left[i], right[i] = f, thr, l, r
            else:
                raise ModelFileError(f"unknown node kind {kind}")
        trees.append(DecisionTree(feature=feature, threshold=threshold,
                                  left=left, right=right, class_counts=counts))
    if reader.pos != len(blob):
        raise ModelFileError("trailing data after model payload")
    return ForestModel(trees=trees, hyperparams=hp)
