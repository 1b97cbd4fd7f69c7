"""Complexity metrics over control trees.

The centrepiece is the perfect-tree similarity statistic: the fraction
of nodes whose label equals their parent's label.  A value of 1 on the
non-root nodes means the whole hierarchy shares one label ("perfect"
from a supervisor's point of view: nothing crosses a boundary).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInput, EmptyGroup, EmptyInput, LengthMismatch
from .snapshot import GroupTag, Snapshot
from .tree import ControlTree, LabelKind, out_degree_distribution, tree_depth


@dataclass(frozen=True)
class DescriptiveStats:
    """Size, label diversity and depth of one control tree."""

    n_nodes: int
    n_countries: int
    n_sic: int
    depth: int


def describe(tree: ControlTree) -> DescriptiveStats:
    countries = {ent.labels.country for ent in tree.entities.values()}
    sics = {ent.labels.sic for ent in tree.entities.values()}
    return DescriptiveStats(tree.node_count, len(countries), len(sics), tree_depth(tree))


@dataclass(frozen=True)
class GroupMeans:
    """Arithmetic means of the descriptive fields over one group."""

    group: GroupTag
    n_firms: int
    mean_nodes: float
    mean_countries: float
    mean_sic: float
    mean_depth: float


def group_summary(snapshot: Snapshot) -> dict[GroupTag, GroupMeans]:
    """Average descriptive stats per regulatory group present."""
    if not snapshot.firms:
        raise EmptyGroup()
    out: dict[GroupTag, GroupMeans] = {}
    for group in GroupTag:
        stats = [describe(f.tree) for f in snapshot.firms if f.group is group]
        if not stats:
            continue
        k = len(stats)
        out[group] = GroupMeans(
            group,
            k,
            sum(s.n_nodes for s in stats) / k,
            sum(s.n_countries for s in stats) / k,
            sum(s.n_sic for s in stats) / k,
            sum(s.depth for s in stats) / k,
        )
    return out


# ---------------------------------------------------------------------------
# perfect-tree similarity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerfectTreeResult:
    """Label-match counts for one tree and one label kind.

    ``t_total`` divides the matches by all nodes (the root can never
    match, so the ceiling is ``(n - 1) / n``); ``t_nonroot`` divides by
    the non-root count and reaches exactly 1 on single-label trees.
    """

    label_kind: LabelKind
    matched: int
    n_nodes: int
    degenerate: bool = False

    @property
    def t_total(self) -> float:
        return self.matched / self.n_nodes

    @property
    def t_nonroot(self) -> float:
        if self.n_nodes < 2:
            return 0.0
        return self.matched / (self.n_nodes - 1)


def perfect_tree_statistic(tree: ControlTree, kind: LabelKind) -> PerfectTreeResult:
    """Count non-root nodes whose label equals their parent's label."""
    matched = 0
    for ent in tree.entities.values():
        if ent.parent is None:
            continue
        if ent.labels.label(kind) == tree.entities[ent.parent].labels.label(kind):
            matched += 1
    return PerfectTreeResult(kind, matched, tree.node_count, tree.node_count < 2)


# ---------------------------------------------------------------------------
# degree concentration
# ---------------------------------------------------------------------------


def gini_coefficient(values: Sequence[float] | np.ndarray) -> float:
    """Mean absolute difference of all pairs, normalized by twice the mean.

    Equals ``sum_ij |x_i - x_j| / (2 n^2 mu)``; computed via the sorted
    form so large samples stay O(n log n).
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 2:
        raise DegenerateInput("need at least two values for a Gini coefficient")
    total = float(x.sum())
    if total <= 0:
        raise DegenerateInput("Gini coefficient undefined for zero-sum values")
    x = np.sort(x)
    i = np.arange(1, n + 1)
    return float(((2 * i - n - 1) * x).sum() / (n * total))


def gini_of_degrees(tree: ControlTree) -> float:
    """Concentration of control: Gini of out-degrees, leaves included."""
    return gini_coefficient(out_degree_distribution(tree).degrees())


# ---------------------------------------------------------------------------
# rank correlation
# ---------------------------------------------------------------------------


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman_rank_corr(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman correlation: Pearson correlation of the midranks."""
    ax = np.asarray(x, dtype=float)
    ay = np.asarray(y, dtype=float)
    if ax.size != ay.size:
        raise LengthMismatch(ax.size, ay.size)
    if ax.size < 3:
        raise DegenerateInput("need at least three observations")
    if np.all(ax == ax[0]) or np.all(ay == ay[0]):
        raise DegenerateInput("rank correlation undefined for a constant sequence")
    rx = _midranks(ax)
    ry = _midranks(ay)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx * ry).sum() / np.sqrt((rx * rx).sum() * (ry * ry).sum()))


# ---------------------------------------------------------------------------
# label transitions along control links
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionRow:
    label: str
    children: int
    same_label: int
    rank: int

    @property
    def p_in(self) -> float:
        return self.same_label / self.children


@dataclass(frozen=True)
class TransitionTable:
    """Per-label probability that a child stays inside the parent's label."""

    label_kind: LabelKind
    rows: tuple[TransitionRow, ...]

    def row(self, label: str) -> TransitionRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def transition_table(
    trees: Iterable[ControlTree], kind: LabelKind
) -> TransitionTable:
    """Pool parent-child edges across trees and tabulate P(same | parent label).

    Labels that never occur as the parent side of an edge do not get a
    row: with zero children the probability has no denominator.
    """
    children: dict[str, int] = {}
    same: dict[str, int] = {}
    for tree in trees:
        for ent in tree.entities.values():
            if ent.parent is None:
                continue
            parent_label = tree.entities[ent.parent].labels.label(kind)
            children[parent_label] = children.get(parent_label, 0) + 1
            if ent.labels.label(kind) == parent_label:
                same[parent_label] = same.get(parent_label, 0) + 1
    if not children:
        raise EmptyInput("parent-child edges")
    ordered = sorted(
        children, key=lambda lab: (-(same.get(lab, 0) / children[lab]), lab)
    )
    rows = tuple(
        TransitionRow(lab, children[lab], same.get(lab, 0), rank)
        for rank, lab in enumerate(ordered, start=1)
    )
    return TransitionTable(kind, rows)


# ---------------------------------------------------------------------------
# where the nodes sit: level occupancy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HierarchyTable:
    """Per-firm fractions of non-root nodes at each level below the root.

    Levels beyond ``bucket_cap`` are aggregated into one open-ended
    bucket, labelled ``>cap+1`` to match the convention that the bucket
    starts where the per-level columns stop.
    """

    bucket_cap: int
    labels: tuple[str, ...]
    rows: dict[str, tuple[float, ...]]
    avg: tuple[float, ...]


def hierarchy_fraction_table(
    trees: Iterable[ControlTree], bucket_cap: int = 9
) -> HierarchyTable:
    trees = list(trees)
    if not trees:
        raise EmptyInput("trees")
    if bucket_cap < 1:
        raise DegenerateInput("bucket_cap must be >= 1")
    labels = tuple(str(i) for i in range(1, bucket_cap + 1)) + (f">{bucket_cap + 1}",)

    rows: dict[str, tuple[float, ...]] = {}
    pooled = np.zeros(bucket_cap + 1)
    pooled_n = 0
    for tree in trees:
        counts = np.zeros(bucket_cap + 1)
        for lvl in tree.levels().values():
            if lvl == 0:
                continue
            counts[min(lvl, bucket_cap + 1) - 1] += 1
        n_nonroot = tree.node_count - 1
        pooled += counts
        pooled_n += n_nonroot
        if n_nonroot:
            rows[tree.firm_id] = tuple(counts / n_nonroot)
        else:
            rows[tree.firm_id] = tuple(counts)
    if pooled_n == 0:
        raise DegenerateInput("no non-root nodes in any tree")
    return HierarchyTable(bucket_cap, labels, rows, tuple(pooled / pooled_n))


def corpus_label_distribution(
    trees: Iterable[ControlTree], kind: LabelKind, top_k: int | None = None
) -> list[tuple[str, int]]:
    """Pooled node counts per label, most common first (ties by label)."""
    counts: dict[str, int] = {}
    for tree in trees:
        for ent in tree.entities.values():
            lab = ent.labels.label(kind)
            counts[lab] = counts.get(lab, 0) + 1
    if not counts:
        raise EmptyInput("trees")
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered if top_k is None else ordered[:top_k]
