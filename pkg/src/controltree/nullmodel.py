"""Bootstrap null model for the perfect-tree statistic.

The null keeps a firm's topology fixed and redraws the non-root labels
i.i.d. from the firm's own empirical label distribution (the root keeps
its actual label).  Comparing the observed statistic against the
resampled distribution asks: is this hierarchy more (or less) aligned
with its labels than chance relabeling would produce?
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.stats import norm

from .errors import AllTied, BadParameter, DegenerateInput
from .metrics import perfect_tree_statistic
from .tree import ControlTree, LabelKind, relabel_all


@dataclass(frozen=True)
class LabelDistribution:
    """Discrete distribution over label tokens of one kind."""

    label_kind: LabelKind
    weights: dict[str, float]

    def __post_init__(self) -> None:
        if not self.weights:
            raise DegenerateInput("label distribution has no support")
        if any(w <= 0 for w in self.weights.values()):
            raise DegenerateInput("label weights must be positive")
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise DegenerateInput(f"label weights sum to {total}, not 1")

    def support(self) -> list[str]:
        return sorted(self.weights)

    def probability(self, label: str) -> float:
        return self.weights.get(label, 0.0)


def empirical_label_distribution(tree: ControlTree, kind: LabelKind) -> LabelDistribution:
    """Label frequencies over all nodes of the tree, root included."""
    counts: dict[str, int] = {}
    for ent in tree.entities.values():
        lab = ent.labels.label(kind)
        counts[lab] = counts.get(lab, 0) + 1
    n = tree.node_count
    return LabelDistribution(kind, {lab: c / n for lab, c in counts.items()})


def _draw_codes(dist: LabelDistribution, u: np.ndarray) -> np.ndarray:
    """Map uniforms to indices into the sorted support."""
    support = dist.support()
    cumw = np.cumsum([dist.weights[lab] for lab in support])
    cumw[-1] = 1.0  # guard the last bin against float round-off
    return np.searchsorted(cumw, u, side="right")


def resample_labels(tree: ControlTree, dist: LabelDistribution, seed: int = 0) -> ControlTree:
    """One null draw: redraw every non-root label, keep the root's.

    Non-root entities receive draws in canonical (lexicographic id)
    order, so the result is a pure function of the tree content and the
    seed.  For the derived kinds SIC1/SIC2 the drawn prefix is stored as
    the entity's SIC code.
    """
    support = dist.support()
    nonroot = [eid for eid in tree.entity_ids if eid != tree.root]
    u = np.random.default_rng(seed).random(len(nonroot))
    codes = _draw_codes(dist, u)
    mapping = {eid: support[c] for eid, c in zip(nonroot, codes)}
    return relabel_all(tree, _storage_kind(dist.label_kind), mapping)


def _storage_kind(kind: LabelKind) -> LabelKind:
    return LabelKind.COUNTRY if kind is LabelKind.COUNTRY else LabelKind.SIC


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """Bootstrap distribution of t_total under label resampling."""

    label_kind: LabelKind
    replications: int
    seed: int
    actual: float
    values: np.ndarray = field(repr=False)
    mean: float
    stdev: float
    quantile: float


def bootstrap_perfect_tree(
    tree: ControlTree,
    kind: LabelKind,
    replications: int = 1000,
    seed: int = 0,
    fix_level_one: bool = False,
    permutation: bool = False,
) -> NullDistribution:
    """Resample labels ``replications`` times and place the actual t_total.

    The default null draws i.i.d. labels from the firm's empirical
    distribution.  ``permutation=True`` shuffles the observed non-root
    labels instead of drawing fresh ones (degree-exact null), and
    ``fix_level_one=True`` holds the root's immediate children at their
    actual labels, resampling only deeper nodes.

    All draws come from one seeded stream consumed in replication-major
    order, so results are a pure function of ``(tree, kind,
    replications, seed)`` regardless of how callers schedule firms.

    The reported ``quantile`` is the midrank placement of the actual
    value: ties between simulated and actual values count half.
    """
    if replications < 1:
        raise BadParameter(f"replications must be >= 1, got {replications}")
    n = tree.node_count
    ids = tree.entity_ids
    pos = {eid: i for i, eid in enumerate(ids)}
    levels = tree.levels()

    actual_result = perfect_tree_statistic(tree, kind)
    actual = actual_result.t_total
    dist = empirical_label_distribution(tree, kind)
    support = dist.support()
    code_of = {lab: i for i, lab in enumerate(support)}
    actual_codes = np.array(
        [code_of[tree.entities[eid].labels.label(kind)] for eid in ids], dtype=np.int64
    )

    nonroot_pos = np.array([pos[eid] for eid in ids if eid != tree.root], dtype=np.intp)
    parent_pos = np.array(
        [pos[tree.entities[eid].parent] for eid in ids if eid != tree.root], dtype=np.intp
    )
    if fix_level_one:
        resampled = np.array(
            [p for p in nonroot_pos if levels[ids[p]] > 1], dtype=np.intp
        )
    else:
        resampled = nonroot_pos

    rng = np.random.default_rng(seed)
    values = np.empty(replications, dtype=float)
    block = max(1, min(replications, 4_000_000 // max(1, n)))
    done = 0
    while done < replications:
        b = min(block, replications - done)
        full = np.tile(actual_codes, (b, 1))
        if resampled.size:
            if permutation:
                observed = actual_codes[resampled]
                order = np.argsort(rng.random((b, resampled.size)), axis=1)
                full[:, resampled] = observed[order]
            else:
                u = rng.random((b, resampled.size))
                full[:, resampled] = _draw_codes(dist, u)
        matched = (full[:, nonroot_pos] == full[:, parent_pos]).sum(axis=1)
        values[done : done + b] = matched / n
        done += b

    # identical values must yield exactly zero spread; values.std() can
    # return ~1e-17 there because the pairwise-summation mean is off by
    # one ulp, which would defeat the AllTied detection downstream
    tied = bool(values.min() == values.max())
    mean = float(values[0]) if tied else float(values.mean())
    stdev = 0.0 if tied or replications == 1 else float(values.std(ddof=1))
    quantile = float(((values < actual).sum() + 0.5 * (values == actual).sum()) / replications)
    return NullDistribution(
        kind, replications, seed, actual, values, mean, stdev, quantile
    )


@dataclass(frozen=True)
class SignificanceResult:
    """Two-sided z-tests of the actual statistic against 1 and against 0."""

    alpha: float
    critical: float
    z_vs_one: float
    z_vs_zero: float
    reject_perfect: bool
    reject_zero: bool


def significance_tests(null: NullDistribution, alpha: float = 0.05) -> SignificanceResult:
    """Test t_total = 1 and t_total = 0 using the bootstrap spread."""
    if not 0.0 < alpha < 1.0:
        raise BadParameter(f"alpha must be in (0, 1), got {alpha}")
    if null.stdev == 0.0:
        raise AllTied()
    critical = float(norm.ppf(1.0 - alpha / 2.0))
    z_one = (null.actual - 1.0) / null.stdev
    z_zero = null.actual / null.stdev
    return SignificanceResult(
        alpha, critical, z_one, z_zero, abs(z_one) > critical, abs(z_zero) > critical
    )
