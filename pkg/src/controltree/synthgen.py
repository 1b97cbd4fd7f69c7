"""Synthetic tree topologies and label assignment models.

These generators exist to exercise the metrics against structures with
known properties: complete k-ary trees, preferential attachment (heavy
degree tails), uniform random attachment (logarithmic depth), and label
processes whose match probabilities are analytically known.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import BadParameter
from .nullmodel import LabelDistribution
from .tree import ControlTree, Entity, EntityLabelSet, LabelKind, build_tree

_MAX_NODES = 10_000_000

#: Scaffold labels before an assignment model runs: a single country
#: token and no industry classification.
SCAFFOLD_COUNTRY = "X"


@dataclass(frozen=True)
class Regular:
    """Complete k-ary tree of the given depth (in edges)."""

    k: int
    depth: int


@dataclass(frozen=True)
class Preferential:
    """Growing tree; each new node attaches with weight outdegree + smoothing."""

    n: int
    smoothing: float = 1.0


@dataclass(frozen=True)
class Uniform:
    """Growing tree; each new node attaches to a uniformly random node."""

    n: int


TopologyModel = Regular | Preferential | Uniform


def gen_tree(model: TopologyModel, seed: int = 0, firm_id: str = "GEN") -> ControlTree:
    """Generate a tree topology; identical inputs give identical trees."""
    if isinstance(model, Regular):
        parents = _regular_parents(model)
    elif isinstance(model, Preferential):
        parents = _preferential_parents(model, seed)
    elif isinstance(model, Uniform):
        parents = _uniform_parents(model, seed)
    else:
        raise BadParameter(f"unknown topology model {model!r}")

    width = len(str(len(parents) - 1)) if len(parents) > 1 else 1
    ids = [f"N{i:0{width}d}" for i in range(len(parents))]
    rows = [
        (ids[i], ids[p] if p is not None else None, SCAFFOLD_COUNTRY, "NONE")
        for i, p in enumerate(parents)
    ]
    return build_tree(firm_id, rows)


def _regular_parents(model: Regular) -> list[int | None]:
    if model.k < 1 or model.depth < 0:
        raise BadParameter(f"need k >= 1 and depth >= 0, got {model}")
    parents: list[int | None] = [None]
    level_start, level_size = 0, 1
    for _ in range(model.depth):
        next_start = len(parents)
        for j in range(level_size * model.k):
            parents.append(level_start + j // model.k)
        if len(parents) > _MAX_NODES:
            raise BadParameter(f"regular tree exceeds {_MAX_NODES} nodes")
        level_start, level_size = next_start, level_size * model.k
    return parents


def _check_n(n: int) -> None:
    if n < 1 or n > _MAX_NODES:
        raise BadParameter(f"n must be in [1, {_MAX_NODES}], got {n}")


def _preferential_parents(model: Preferential, seed: int) -> list[int | None]:
    _check_n(model.n)
    if model.smoothing < 0:
        raise BadParameter(f"smoothing must be >= 0, got {model.smoothing}")
    a = float(model.smoothing)
    rng = np.random.default_rng(seed)
    parents: list[int | None] = [None]
    # one entry per edge, holding the parent endpoint: sampling from this
    # list is sampling proportional to out-degree
    edge_parents: list[int] = []
    for i in range(1, model.n):
        total = len(edge_parents) + a * i
        if total > 0 and float(rng.random()) * total < len(edge_parents):
            parent = edge_parents[int(rng.integers(len(edge_parents)))]
        else:
            parent = int(rng.integers(i))
        parents.append(parent)
        edge_parents.append(parent)
    return parents


def _uniform_parents(model: Uniform, seed: int) -> list[int | None]:
    _check_n(model.n)
    rng = np.random.default_rng(seed)
    parents: list[int | None] = [None]
    for i in range(1, model.n):
        parents.append(int(rng.integers(i)))
    return parents


# ---------------------------------------------------------------------------
# label models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerfectCopy:
    """Every node carries the same label as the root."""

    root_label: str


@dataclass(frozen=True)
class IID:
    """Every node drawn independently from one distribution."""

    dist: LabelDistribution


@dataclass(frozen=True)
class Markov:
    """Children copy their parent with probability ``stay``, else redraw.

    The root itself draws from ``base``.  Conditional on the parent's
    label ``a``, a child matches with probability
    ``stay + (1 - stay) * base(a)``: a copy always matches and a redraw
    matches only when it happens to hit ``a`` again.
    """

    stay: float
    base: LabelDistribution


LabelModel = PerfectCopy | IID | Markov


def assign_labels(
    tree: ControlTree, kind: LabelKind, model: LabelModel, seed: int = 0
) -> ControlTree:
    """Assign labels of one kind to every node; topology is untouched.

    Draws are consumed in breadth-first order from the root (children in
    id order) so that a parent's label exists before its children need
    it; identical inputs produce identical labelings.
    """
    if isinstance(model, PerfectCopy):
        labels = {eid: model.root_label for eid in tree.entity_ids}
        return _store(tree, kind, labels)

    rng = np.random.default_rng(seed)
    if isinstance(model, IID):
        _check_dist_kind(model.dist, kind)
        support = model.dist.support()
        cumw = np.cumsum([model.dist.weights[lab] for lab in support])
        cumw[-1] = 1.0
        codes = np.searchsorted(cumw, rng.random(tree.node_count), side="right")
        labels = {eid: support[c] for eid, c in zip(tree.entity_ids, codes)}
        return _store(tree, kind, labels)

    if isinstance(model, Markov):
        if not 0.0 <= model.stay <= 1.0:
            raise BadParameter(f"stay must be in [0, 1], got {model.stay}")
        _check_dist_kind(model.base, kind)
        support = model.base.support()
        cumw = np.cumsum([model.base.weights[lab] for lab in support])
        cumw[-1] = 1.0
        kids = tree.children_map()
        labels = {}
        labels[tree.root] = support[int(np.searchsorted(cumw, rng.random(), side="right"))]
        queue = deque([tree.root])
        while queue:
            node = queue.popleft()
            for child in kids[node]:
                if float(rng.random()) < model.stay:
                    labels[child] = labels[node]
                else:
                    labels[child] = support[
                        int(np.searchsorted(cumw, rng.random(), side="right"))
                    ]
                queue.append(child)
        return _store(tree, kind, labels)

    raise BadParameter(f"unknown label model {model!r}")


def _check_dist_kind(dist: LabelDistribution, kind: LabelKind) -> None:
    if dist.label_kind is not kind:
        raise BadParameter(
            f"distribution is over {dist.label_kind.value} labels, asked to assign {kind.value}"
        )


def _store(tree: ControlTree, kind: LabelKind, labels: dict[str, str]) -> ControlTree:
    entities: dict[str, Entity] = {}
    for eid, ent in tree.entities.items():
        if kind is LabelKind.COUNTRY:
            ls = EntityLabelSet(labels[eid], ent.labels.sic)
        else:
            ls = EntityLabelSet(ent.labels.country, labels[eid])
        entities[eid] = Entity(ent.parent, ls)
    return ControlTree(tree.firm_id, tree.root, entities)
