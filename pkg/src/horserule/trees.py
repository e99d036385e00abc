"""CART fitting and the mixed bootstrap-forest / boosting tree generator.

Trees exist only to harvest split structure: sizes are drawn per tree as
2 + floor(Exponential(mean L - 2)) leaves, growth is best-first by
impurity improvement, and thresholds stay in original covariate units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _split
from .errors import DataError

__all__ = [
    "TreeNode",
    "TreeGenConfig",
    "Presort",
    "sample_tree_size",
    "fit_cart",
    "predict_tree",
    "n_leaves",
    "tree_nodes",
    "generate_rf_trees",
    "generate_gbm_trees",
    "generate_ensemble",
]


@dataclass(eq=True)
class TreeNode:
    prediction: float  # weighted mean of y over the node's training rows
    n_node: float  # weighted training row count
    col: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class TreeGenConfig:
    ntree: int = 1000
    L: float = 5.0  # mean leaves per tree
    n_min: int | None = None  # None: ceil(n^(1/3)) at generation time
    mix: float = 0.3  # fraction of trees from the bootstrap forest
    rf_mtry: int | None = None  # None: max(1, floor(p/3))
    gbm_shrinkage: float = 0.1
    gbm_subsample: float = 0.5

    def validate(self):
        if self.ntree < 1:
            raise DataError("ntree must be >= 1")
        if self.L < 2:
            raise DataError("L must be >= 2")
        if self.n_min is not None and self.n_min < 1:
            raise DataError("n_min must be >= 1")
        if not 0.0 <= self.mix <= 1.0:
            raise DataError("mix must be in [0, 1]")
        if self.rf_mtry is not None and self.rf_mtry < 1:
            raise DataError("rf_mtry must be >= 1")
        if not 0.0 < self.gbm_shrinkage <= 1.0:
            raise DataError("gbm_shrinkage must be in (0, 1]")
        if not 0.0 < self.gbm_subsample <= 1.0:
            raise DataError("gbm_subsample must be in (0, 1]")


def default_n_min(n: int) -> int:
    """ceil(n^(1/3)), exact at perfect cubes."""
    c = int(round(n ** (1.0 / 3.0)))
    return c if c**3 >= n else c + 1


class Presort:
    """Per-dataset structures shared across many tree fits."""

    def __init__(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError("X must be 2-dimensional")
        self.n, self.p = X.shape
        self.X = X
        self.XT = np.ascontiguousarray(X.T)
        self.orderT = np.ascontiguousarray(
            np.argsort(X, axis=0, kind="stable").T.astype(np.int32)
        )
        self.all_cols = np.arange(self.p, dtype=np.int64)


def sample_tree_size(L: float, rng) -> int:
    """Draw a leaf budget: 2 + floor(Exponential(mean L - 2))."""
    if L < 2:
        raise DataError("L must be >= 2")
    return 2 + int(math.floor(rng.exponential(L - 2.0)))


class _OpenLeaf:
    __slots__ = ("node", "memb", "col", "thr", "imp")

    def __init__(self, node, memb, col, thr, imp):
        self.node = node
        self.memb = memb
        self.col = col
        self.thr = thr
        self.imp = imp


def fit_cart(X, y, weights=None, *, budget, n_min=1, mtry=None, rng=None, presort=None):
    """Grow a weighted regression tree, best-first, to at most ``budget`` leaves.

    weights: None for unit weights, a float array of per-row weights, or an
    integer array of row indices (a bootstrap sample; converted to counts).
    mtry: number of columns sampled (without replacement) per node; None
    uses all columns and consumes no randomness.
    """
    pre = presort if presort is not None else Presort(X)
    n, p = pre.n, pre.p
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise DataError("y length does not match X rows")
    if budget < 1:
        raise DataError("leaf budget must be >= 1")
    if n_min < 1:
        raise DataError("n_min must be >= 1")

    if weights is None:
        w = np.ones(n)
    elif np.issubdtype(np.asarray(weights).dtype, np.integer):
        w = np.bincount(np.asarray(weights), minlength=n).astype(np.float64)
        if len(w) > n:
            raise DataError("bootstrap row index out of range")
    else:
        w = np.ascontiguousarray(weights, dtype=np.float64)
        if w.shape != (n,) or np.any(w < 0):
            raise DataError("weights must be nonnegative with one entry per row")

    if mtry is None or mtry >= p:
        mtry = None  # all columns, no rng consumption
    elif rng is None:
        raise DataError("rng is required when mtry < p")

    def evaluate(memb):
        if int(memb.sum()) < 2:
            return -1, 0.0, -np.inf
        if mtry is None:
            cols = pre.all_cols
        else:
            cols = np.sort(rng.choice(p, size=mtry, replace=False)).astype(np.int64)
        return _split.node_best_split(pre.orderT, pre.XT, y, w, memb, cols, float(n_min))

    def make_leaf(memb):
        wm = w[memb]
        W = float(np.sum(wm))
        if W <= 0:
            raise DataError("node with zero total weight")
        pred = float(np.sum(wm * y[memb]) / W)
        node = TreeNode(prediction=pred, n_node=W)
        col, thr, imp = evaluate(memb)
        return _OpenLeaf(node, memb, col, thr, imp)

    memb0 = w > 0
    if not memb0.any():
        raise DataError("all row weights are zero")
    root_open = make_leaf(memb0)
    root = root_open.node
    open_leaves = [root_open]
    leaves = 1

    while leaves < budget:
        # best-first: largest improvement wins, earlier-created leaf on ties
        best = None
        for leaf in open_leaves:
            if leaf.col >= 0 and (best is None or leaf.imp > best.imp):
                best = leaf
        if best is None:
            break
        open_leaves.remove(best)
        xcol = pre.XT[best.col]
        left_memb = best.memb & (xcol <= best.thr)
        right_memb = best.memb & ~ (xcol <= best.thr)
        lo = make_leaf(left_memb)
        ro = make_leaf(right_memb)
        best.node.col = best.col
        best.node.threshold = best.thr
        best.node.left = lo.node
        best.node.right = ro.node
        open_leaves.append(lo)
        open_leaves.append(ro)
        leaves += 1
    return root


def predict_tree(tree: TreeNode, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0])
    stack = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            out[idx] = node.prediction
        else:
            m = X[idx, node.col] <= node.threshold
            stack.append((node.left, idx[m]))
            stack.append((node.right, idx[~m]))
    return out


def n_leaves(tree: TreeNode) -> int:
    if tree.is_leaf:
        return 1
    return n_leaves(tree.left) + n_leaves(tree.right)


def tree_nodes(tree: TreeNode):
    """Preorder iterator over all nodes."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        if not node.is_leaf:
            stack.append(node.right)
            stack.append(node.left)


def _child_generators(rng, count):
    seeds = rng.integers(0, 2**63 - 1, size=count)
    return [np.random.Generator(np.random.PCG64(int(s))) for s in seeds]


def generate_rf_trees(X, y, count, cfg: TreeGenConfig, rng, presort=None):
    """Bootstrap trees: per tree, a size draw, a bootstrap resample, and
    mtry column sampling at every node."""
    pre = presort if presort is not None else Presort(X)
    n, p = pre.n, pre.p
    n_min = cfg.n_min if cfg.n_min is not None else default_n_min(n)
    mtry = cfg.rf_mtry if cfg.rf_mtry is not None else max(1, p // 3)
    trees = []
    for trng in _child_generators(rng, count):
        budget = sample_tree_size(cfg.L, trng)
        idx = trng.integers(0, n, size=n)
        w = np.bincount(idx, minlength=n).astype(np.float64)
        trees.append(
            fit_cart(pre.X, y, w, budget=budget, n_min=n_min, mtry=mtry, rng=trng, presort=pre)
        )
    return trees


def generate_gbm_trees(X, y, count, cfg: TreeGenConfig, rng, presort=None):
    """Boosted trees fit to running residuals with shrinkage and row
    subsampling. The running prediction starts at zero, so the first tree
    is a plain CART fit to y."""
    pre = presort if presort is not None else Presort(X)
    n = pre.n
    n_min = cfg.n_min if cfg.n_min is not None else default_n_min(n)
    y = np.ascontiguousarray(y, dtype=np.float64)
    resid = y.copy()
    trees = []
    for trng in _child_generators(rng, count):
        budget = sample_tree_size(cfg.L, trng)
        if cfg.gbm_subsample < 1.0:
            m = max(2, int(math.ceil(cfg.gbm_subsample * n)))
            rows = trng.choice(n, size=m, replace=False)
            w = np.zeros(n)
            w[rows] = 1.0
        else:
            w = None
        tree = fit_cart(pre.X, resid, w, budget=budget, n_min=n_min, mtry=None, rng=trng, presort=pre)
        trees.append(tree)
        resid -= cfg.gbm_shrinkage * predict_tree(tree, pre.X)
    return trees


def generate_ensemble(X, y, cfg: TreeGenConfig, seed: int):
    """Generate the mixed ensemble: round(mix * ntree) bootstrap trees
    followed by the boosted remainder. Returns a list of (source, tree)
    with source in {"rf", "gbm"}."""
    cfg.validate()
    pre = Presort(X)
    rf_count = int(round(cfg.mix * cfg.ntree))
    gbm_count = cfg.ntree - rf_count
    ss = np.random.SeedSequence(int(seed))
    rf_ss, gbm_ss = ss.spawn(2)
    out = []
    if rf_count:
        rng = np.random.Generator(np.random.PCG64(rf_ss))
        out += [("rf", t) for t in generate_rf_trees(X, y, rf_count, cfg, rng, presort=pre)]
    if gbm_count:
        rng = np.random.Generator(np.random.PCG64(gbm_ss))
        out += [("gbm", t) for t in generate_gbm_trees(X, y, gbm_count, cfg, rng, presort=pre)]
    return out
