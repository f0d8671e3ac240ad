"""Top-down decision trees minimizing the expected tempered Bayes risk.

A tree is grown from a single leaf by repeatedly expanding the heaviest
leaf (largest co-density mass) with the split that maximizes

    r_parent L_t(p_parent) - r_left L_t(p_left) - r_right L_t(p_right),

L_t the tempered Bayes risk; concavity of L_t makes the gain nonnegative.
Numeric split candidates are midpoints between consecutive observed
values, categorical candidates are the proper nonempty subsets of the
observed values up to complement.  When the candidate count exceeds the
cap, the best split is searched in a uniformly sampled subset instead.
Splits creating a pure leaf are inadmissible, which keeps every leaf
posterior strictly inside (0, 1) and every leaf prediction

    H = (q1^(1-t) / (1-t)) (p^(1-t) - (1-p)^(1-t)) / (p^(1-t) + (1-p)^(1-t))

finite (at t=1 the limit is the half log-odds ln(p/(1-p)) / 2).  Leaf
masses come from the booster's co-density weights, so at uniform weights
they reduce to example counts over m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .cpe_loss import bayes_risk
from .dataio import CATEGORICAL, NUMERIC, Dataset
from .talgebra import TemperConfig
from .weights import TemWeights, co_density

DEFAULT_SPLIT_CAP = 2000


@dataclass(frozen=True)
class NumericSplit:
    """Test x[feature] >= threshold; thresholds are observed-value midpoints."""

    feature: int
    threshold: float

    def evaluate(self, data: Dataset) -> np.ndarray:
        return data.columns[self.feature].values >= self.threshold

    def evaluate_row(self, row) -> bool:
        return float(row[self.feature]) >= self.threshold

    def sort_key(self):
        return (self.feature, self.threshold)


@dataclass(frozen=True)
class CategoricalSplit:
    """Test x[feature] in subset; the subset is a proper nonempty one."""

    feature: int
    subset: tuple

    def evaluate(self, data: Dataset) -> np.ndarray:
        return np.isin(data.columns[self.feature].values, self.subset)

    def evaluate_row(self, row) -> bool:
        return str(row[self.feature]) in self.subset

    def sort_key(self):
        return (self.feature, self.subset)


SplitPredicate = Union[NumericSplit, CategoricalSplit]


class LeafStats(NamedTuple):
    """Weighted class masses at a leaf (masses, not counts)."""

    m_pos: float
    m_neg: float

    @property
    def r(self) -> float:
        return self.m_pos + self.m_neg

    @property
    def p(self) -> float:
        return self.m_pos / (self.m_pos + self.m_neg)


class LeafNode:
    __slots__ = ("stats", "prediction", "rows")

    def __init__(self, stats: LeafStats, prediction: float, rows=None):
        self.stats = stats
        self.prediction = prediction
        self.rows = rows


class SplitNode:
    __slots__ = ("predicate", "left", "right")

    def __init__(self, predicate: SplitPredicate, left, right):
        self.predicate = predicate
        self.left = left
        self.right = right


@dataclass
class DecisionTree:
    """Binary tree; the false branch of each predicate goes left."""

    root: object
    cfg: TemperConfig
    n_nodes: int

    def predict(self, data: Dataset) -> np.ndarray:
        out = np.empty(data.m)
        self._fill(self.root, data, np.ones(data.m, dtype=bool), out)
        return out

    def _fill(self, node, data, mask, out):
        if isinstance(node, LeafNode):
            out[mask] = node.prediction
            return
        test = node.predicate.evaluate(data)
        self._fill(node.left, data, mask & ~test, out)
        self._fill(node.right, data, mask & test, out)

    def predict_row(self, row) -> float:
        node = self.root
        while isinstance(node, SplitNode):
            node = node.right if node.predicate.evaluate_row(row) else node.left
        return node.prediction

    def leaves(self) -> list:
        found = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, LeafNode):
                found.append(node)
            else:
                stack.extend((node.right, node.left))
        return found


def leaf_prediction(p: float, q1: float, cfg: TemperConfig) -> float:
    """Real prediction the boosting projection assigns to a leaf.

    ``q1`` is the initial uniform weight 1/m^(1/(2-t)); at t=1 the weight
    drops out and the prediction is the half log-odds.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("leaf posterior must lie strictly inside (0, 1)")
    if cfg.is_classic():
        return 0.5 * math.log(p / (1.0 - p))
    t = cfg.t
    a = p ** (1.0 - t)
    b = (1.0 - p) ** (1.0 - t)
    return q1 ** (1.0 - t) / (1.0 - t) * (a - b) / (a + b)


def split_gain(parent: LeafStats, left: LeafStats, right: LeafStats, cfg: TemperConfig) -> float:
    """Drop in expected tempered Bayes risk; -inf marks a rejected split.

    A split is rejected (not an error) when a child is empty or pure.
    """
    for child in (left, right):
        if child.r <= 0 or child.m_pos <= 0 or child.m_neg <= 0:
            return -math.inf
    parent_term = parent.r * bayes_risk(parent.p, cfg)
    left_term = left.r * bayes_risk(left.p, cfg)
    right_term = right.r * bayes_risk(right.p, cfg)
    return parent_term - left_term - right_term


class _Candidate(NamedTuple):
    gain: float
    predicate: SplitPredicate
    left: LeafStats
    right: LeafStats


def _better(a: Optional[_Candidate], b: _Candidate) -> bool:
    """True when b beats a: larger gain, ties to the smaller sort key."""
    if a is None:
        return True
    if b.gain != a.gain:
        return b.gain > a.gain
    return b.predicate.sort_key() < a.predicate.sort_key()


def _risk_term(m_pos, m_neg, cfg):
    mass = np.maximum(m_pos + m_neg, 0.0)
    p = np.divide(m_pos, mass, out=np.zeros_like(np.asarray(mass, dtype=float)), where=mass > 0)
    p = np.clip(p, 0.0, 1.0)  # cancellation noise in mass subtractions
    return mass * np.atleast_1d(bayes_risk(p, cfg))


def _numeric_candidates(values, wpos, wneg):
    """Sorted distinct-value boundaries with class masses on both sides.

    Suffix masses are accumulated directly rather than derived as
    total - prefix: sums of nonnegative terms cannot go negative, so a
    zero mass means a genuinely empty side and admissibility stays exact.
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    cp = np.cumsum(wpos[order])
    cn = np.cumsum(wneg[order])
    sp = np.cumsum(wpos[order][::-1])[::-1]
    sn = np.cumsum(wneg[order][::-1])[::-1]
    boundary = np.flatnonzero(v[:-1] < v[1:])
    thresholds = 0.5 * (v[boundary] + v[boundary + 1])
    return thresholds, cp[boundary], cn[boundary], sp[boundary + 1], sn[boundary + 1]


def _category_masses(values, wpos, wneg):
    cats = np.unique(values)
    pos = np.array([wpos[values == c].sum() for c in cats])
    neg = np.array([wneg[values == c].sum() for c in cats])
    return cats, pos, neg


def _subset_masks(k: int) -> np.ndarray:
    # Proper nonempty subsets up to complement: bitmasks containing bit 0.
    return np.arange(1, (1 << k) - 1, 2, dtype=np.int64)


def _masks_to_bits(masks: np.ndarray, k: int) -> np.ndarray:
    return (masks[:, None] >> np.arange(k)) & 1


def _best_split(data, rows, labels, weights, cfg, rng, split_cap, parent):
    """Best admissible split of one leaf, or None."""
    wpos = np.where(labels[rows] > 0, weights[rows], 0.0)
    wneg = np.where(labels[rows] < 0, weights[rows], 0.0)
    parent_term = parent.r * bayes_risk(parent.p, cfg)

    per_feature = []
    total = 0
    for j, column in enumerate(data.columns):
        values = column.values[rows]
        if column.kind == NUMERIC:
            payload = _numeric_candidates(values, wpos, wneg)
            count = int(payload[0].size)
            per_feature.append((j, NUMERIC, payload))
        else:
            cats, cat_pos, cat_neg = _category_masses(values, wpos, wneg)
            count = (1 << (len(cats) - 1)) - 1 if len(cats) > 1 else 0
            per_feature.append((j, CATEGORICAL, (cats, cat_pos, cat_neg)))
        total += count

    if total == 0:
        return None
    sampled = None
    if total > split_cap:
        sampled = _sample_candidates(per_feature, total, split_cap, rng)

    best: Optional[_Candidate] = None
    for j, kind, payload in per_feature:
        if kind == NUMERIC:
            thresholds, left_pos, left_neg, right_pos, right_neg = payload
            if thresholds.size == 0:
                continue
            if sampled is not None:
                keep = sampled.get(j)
                if keep is None:
                    continue
                thresholds = thresholds[keep]
                left_pos = left_pos[keep]
                left_neg = left_neg[keep]
                right_pos = right_pos[keep]
                right_neg = right_neg[keep]
            admissible = (
                (left_pos > 0) & (left_neg > 0) & (right_pos > 0) & (right_neg > 0)
            )
            if not np.any(admissible):
                continue
            gains = np.full(thresholds.shape, -math.inf)
            gains[admissible] = (
                parent_term
                - _risk_term(left_pos, left_neg, cfg)[admissible]
                - _risk_term(right_pos, right_neg, cfg)[admissible]
            )
            for i in np.flatnonzero(admissible):
                candidate = _Candidate(
                    float(gains[i]),
                    NumericSplit(j, float(thresholds[i])),
                    LeafStats(float(left_pos[i]), float(left_neg[i])),
                    LeafStats(float(right_pos[i]), float(right_neg[i])),
                )
                if _better(best, candidate):
                    best = candidate
        else:
            cats, cat_pos, cat_neg = payload
            k = len(cats)
            if k < 2:
                continue
            if sampled is not None:
                masks = sampled.get(j)
                if masks is None:
                    continue
            else:
                masks = _subset_masks(k)
            bits = _masks_to_bits(masks, k)
            in_pos = bits @ cat_pos
            in_neg = bits @ cat_neg
            out_pos = (1 - bits) @ cat_pos
            out_neg = (1 - bits) @ cat_neg
            admissible = (in_pos > 0) & (in_neg > 0) & (out_pos > 0) & (out_neg > 0)
            if not np.any(admissible):
                continue
            gains = np.full(masks.shape, -math.inf)
            gains[admissible] = (
                parent_term
                - _risk_term(in_pos, in_neg, cfg)[admissible]
                - _risk_term(out_pos, out_neg, cfg)[admissible]
            )
            for i in np.flatnonzero(admissible):
                subset = tuple(sorted(cats[bits[i].astype(bool)].tolist()))
                candidate = _Candidate(
                    float(gains[i]),
                    CategoricalSplit(j, subset),
                    LeafStats(float(out_pos[i]), float(out_neg[i])),
                    LeafStats(float(in_pos[i]), float(in_neg[i])),
                )
                if _better(best, candidate):
                    best = candidate
    return best


def _sample_candidates(per_feature, total, cap, rng):
    """Uniform sample of ``cap`` candidate splits across all features.

    Draws are with replacement over the (possibly astronomically large)
    candidate space and deduplicated, so a touch under ``cap`` distinct
    candidates can result.
    """
    counts = []
    for j, kind, payload in per_feature:
        if kind == NUMERIC:
            counts.append(payload[0].size)
        else:
            k = len(payload[0])
            counts.append((1 << (k - 1)) - 1 if k > 1 else 0)
    probs = np.array(counts, dtype=float) / float(total)
    draws = rng.choice(len(per_feature), size=cap, p=probs)
    chosen: dict = {}
    for slot in range(len(per_feature)):
        n = int(np.sum(draws == slot))
        if n == 0:
            continue
        j, kind, payload = per_feature[slot]
        if kind == NUMERIC:
            picks = rng.integers(0, counts[slot], size=n)
            chosen[j] = np.unique(picks)
        else:
            k = len(payload[0])
            full = (1 << k) - 1
            raw = rng.integers(1, full, size=n)  # proper nonempty subsets
            canonical = np.where(raw & 1, raw, full ^ raw)
            chosen[j] = np.unique(canonical.astype(np.int64))
    return chosen


def induce_tree(
    data: Dataset,
    weights,
    max_nodes: int,
    cfg: TemperConfig,
    rng,
    split_cap: int = DEFAULT_SPLIT_CAP,
) -> DecisionTree:
    """Grow a tree of at most ``max_nodes`` nodes (must be odd).

    ``weights`` is the booster's co-density over the training rows.  The
    heaviest live leaf is expanded first; a leaf none of whose splits is
    admissible is retired.  Ties among equal-gain splits break to the
    lowest feature index, then the lowest threshold or lexicographically
    smallest category subset; ties among equally heavy leaves break to the
    oldest.  Growth stops at the node budget or when no live leaf remains.
    """
    if max_nodes < 1 or max_nodes % 2 == 0:
        raise ValueError("max_nodes must be odd: a root plus child pairs")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (data.m,) or np.any(weights < 0):
        raise ValueError("need one nonnegative weight per example")
    if abs(weights.sum() - 1.0) > 1e-6:
        raise ValueError("weights must sum to 1 (a co-density)")
    if rng is None or not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    labels = data.labels

    q1 = data.m ** (-cfg.t_star)

    def make_leaf(rows):
        stats = LeafStats(
            float(np.where(labels[rows] > 0, weights[rows], 0.0).sum()),
            float(np.where(labels[rows] < 0, weights[rows], 0.0).sum()),
        )
        return LeafNode(stats, leaf_prediction(stats.p, q1, cfg), rows)

    root_rows = np.arange(data.m)
    root_pos = float(np.where(labels > 0, weights, 0.0).sum())
    root_neg = float(np.where(labels < 0, weights, 0.0).sum())
    if root_pos <= 0 or root_neg <= 0:
        raise ValueError("training rows must carry weighted mass of both classes")

    root = make_leaf(root_rows)
    n_nodes = 1
    live = [(root, None, None)]  # (leaf, parent, side)

    while n_nodes + 2 <= max_nodes and live:
        heaviest = max(range(len(live)), key=lambda i: live[i][0].stats.r)
        leaf, parent, side = live.pop(heaviest)
        found = _best_split(
            data, leaf.rows, labels, weights, cfg, rng, split_cap, leaf.stats
        )
        if found is None:
            continue  # retired: no admissible split on this leaf
        test = found.predicate.evaluate(data)
        left_rows = leaf.rows[~test[leaf.rows]]
        right_rows = leaf.rows[test[leaf.rows]]
        left = make_leaf(left_rows)
        right = make_leaf(right_rows)
        node = SplitNode(found.predicate, left, right)
        if parent is None:
            root = node
        elif side == "left":
            parent.left = node
        else:
            parent.right = node
        live.append((left, node, "left"))
        live.append((right, node, "right"))
        n_nodes += 2

    tree = DecisionTree(root, cfg, n_nodes)
    for leaf in tree.leaves():
        leaf.rows = None  # drop build-time row indices
    return tree


class TreeWeakLearner:
    """Adapter plugging tempered-loss trees into the boosting loop."""

    def __init__(self, max_nodes: int = 15, split_cap: int = DEFAULT_SPLIT_CAP, rng=None):
        self.max_nodes = max_nodes
        self.split_cap = split_cap
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def __call__(self, weights: TemWeights, data: Dataset) -> DecisionTree:
        p = co_density(weights).p
        return induce_tree(
            data, p, self.max_nodes, weights.cfg, self.rng, self.split_cap
        )
