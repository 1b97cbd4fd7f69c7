"""Labeled rooted directed control trees.

A firm's control hierarchy is a rooted tree: the root is the ultimate
parent, edges point from controlling entity to controlled entity, and
every non-root entity has exactly one parent.  Entities carry a country
label and a SIC industry code; all metrics treat labels as opaque tokens.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    CannotSeverRoot,
    CycleDetected,
    DuplicateEntity,
    EmptyInput,
    InvalidCountry,
    InvalidSic,
    MissingRoot,
    MultipleRoots,
    UnknownEntity,
    UnknownParent,
)

_SIC_RE = re.compile(r"^\d{1,4}$")

#: Sentinel for entities with no industry classification.
SIC_NONE = "NONE"


class LabelKind(str, Enum):
    """Which label a metric reads from an entity."""

    COUNTRY = "country"
    SIC = "sic"
    SIC1 = "sic1"
    SIC2 = "sic2"


def sic_prefix(sic: str, digits: int) -> str:
    """Truncate a SIC code to its 1- or 2-digit industry area.

    ``NONE`` is preserved as its own class.  Codes shorter than the
    requested prefix are returned whole.
    """
    if digits not in (1, 2):
        raise ValueError(f"digits must be 1 or 2, got {digits}")
    if sic == SIC_NONE:
        return sic
    if not _SIC_RE.match(sic):
        raise InvalidSic(sic)
    return sic[:digits]


@dataclass(frozen=True)
class EntityLabelSet:
    """Country and industry labels attached to one entity."""

    country: str
    sic: str = SIC_NONE

    def __post_init__(self) -> None:
        if not self.country or self.country != self.country.strip():
            raise InvalidCountry(self.country)
        if self.sic != SIC_NONE and not _SIC_RE.match(self.sic):
            raise InvalidSic(self.sic)

    def label(self, kind: LabelKind) -> str:
        if kind is LabelKind.COUNTRY:
            return self.country
        if kind is LabelKind.SIC:
            return self.sic
        if kind is LabelKind.SIC1:
            return sic_prefix(self.sic, 1)
        return sic_prefix(self.sic, 2)


@dataclass(frozen=True)
class Entity:
    """One node of a control tree: its parent link and labels."""

    parent: str | None
    labels: EntityLabelSet


@dataclass(frozen=True)
class ControlTree:
    """Immutable rooted tree of controlled entities for one firm.

    ``entities`` maps entity id to :class:`Entity` and iterates in
    lexicographic id order; all operations that consume entities in
    sequence rely on that canonical order for determinism.
    """

    firm_id: str
    root: str
    entities: dict[str, Entity] = field(compare=True)

    @property
    def node_count(self) -> int:
        return len(self.entities)

    @property
    def entity_ids(self) -> list[str]:
        return list(self.entities)

    def label(self, entity_id: str, kind: LabelKind) -> str:
        return self.entities[entity_id].labels.label(kind)

    def children_map(self) -> dict[str, list[str]]:
        """Adjacency from parent to children, children in id order."""
        kids: dict[str, list[str]] = {eid: [] for eid in self.entities}
        for eid, ent in self.entities.items():
            if ent.parent is not None:
                kids[ent.parent].append(eid)
        return kids

    def levels(self) -> dict[str, int]:
        """Distance in edges from the root for every entity."""
        kids = self.children_map()
        out = {self.root: 0}
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            for child in kids[node]:
                out[child] = out[node] + 1
                queue.append(child)
        return out


def build_tree(
    firm_id: str,
    rows: Iterable[tuple[str, str | None, str, str]],
) -> ControlTree:
    """Construct and validate a control tree.

    Parameters
    ----------
    firm_id:
        Identifier of the firm the hierarchy belongs to.
    rows:
        ``(entity_id, parent_id, country, sic)`` tuples; ``parent_id``
        is ``None`` (or empty) for the root.

    Raises
    ------
    EmptyInput, DuplicateEntity, InvalidCountry, InvalidSic,
    MissingRoot, MultipleRoots, UnknownParent, CycleDetected
    """
    raw: dict[str, Entity] = {}
    for entity_id, parent_id, country, sic in rows:
        if not entity_id:
            raise EmptyInput("entity id")
        if entity_id in raw:
            raise DuplicateEntity(entity_id)
        parent = parent_id if parent_id else None
        raw[entity_id] = Entity(parent, EntityLabelSet(country, sic))
    if not raw:
        raise EmptyInput("entity rows")

    roots = [eid for eid, ent in raw.items() if ent.parent is None]
    if not roots:
        raise MissingRoot()
    if len(roots) > 1:
        raise MultipleRoots(roots)
    root = roots[0]

    for eid, ent in raw.items():
        if ent.parent is not None and ent.parent not in raw:
            raise UnknownParent(eid, ent.parent)

    entities = {eid: raw[eid] for eid in sorted(raw)}
    tree = ControlTree(firm_id, root, entities)
    reached = tree.levels()
    if len(reached) != len(entities):
        stranded = min(eid for eid in entities if eid not in reached)
        raise CycleDetected(_cycle_witness(raw, stranded))
    return tree


def _cycle_witness(raw: dict[str, Entity], start: str) -> list[str]:
    """Walk parent links from a stranded node until one repeats."""
    seen: dict[str, int] = {}
    path = [start]
    node = start
    while node not in seen:
        seen[node] = len(path) - 1
        node = raw[node].parent  # type: ignore[assignment]  # stranded nodes all have parents
        path.append(node)
    return path[seen[node]:]


def tree_rows(tree: ControlTree) -> list[tuple[str, str | None, str, str]]:
    """Entity rows in canonical id order; inverse of :func:`build_tree`."""
    return [
        (eid, ent.parent, ent.labels.country, ent.labels.sic)
        for eid, ent in tree.entities.items()
    ]


def tree_depth(tree: ControlTree) -> int:
    """Longest root-to-leaf path, counted in edges."""
    return max(tree.levels().values())


@dataclass(frozen=True)
class DepthHistogram:
    """Node counts per level; index 0 is the root's level."""

    counts: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.counts) - 1

    @property
    def n_nodes(self) -> int:
        return sum(self.counts)


def depth_histogram(tree: ControlTree) -> DepthHistogram:
    levels = tree.levels()
    counts = [0] * (max(levels.values()) + 1)
    for lvl in levels.values():
        counts[lvl] += 1
    return DepthHistogram(tuple(counts))


@dataclass(frozen=True)
class DegreeDistribution:
    """Multiset of out-degrees over all nodes (leaves contribute zero)."""

    counts: dict[int, int]
    n: int

    @property
    def fractions(self) -> dict[int, float]:
        return {deg: cnt / self.n for deg, cnt in self.counts.items()}

    def degrees(self) -> list[int]:
        """The degree multiset, expanded and sorted ascending."""
        out: list[int] = []
        for deg in sorted(self.counts):
            out.extend([deg] * self.counts[deg])
        return out


def out_degree_distribution(tree: ControlTree) -> DegreeDistribution:
    counts: dict[int, int] = {}
    for children in tree.children_map().values():
        deg = len(children)
        counts[deg] = counts.get(deg, 0) + 1
    return DegreeDistribution(counts, tree.node_count)


def subtree_size(tree: ControlTree, entity_id: str) -> int:
    """Number of nodes in the subtree rooted at ``entity_id`` (inclusive)."""
    return len(_subtree_ids(tree, entity_id))


def _subtree_ids(tree: ControlTree, entity_id: str) -> set[str]:
    if entity_id not in tree.entities:
        raise UnknownEntity(entity_id)
    kids = tree.children_map()
    out = {entity_id}
    queue = deque([entity_id])
    while queue:
        for child in kids[queue.popleft()]:
            out.add(child)
            queue.append(child)
    return out


def sever_subtree(tree: ControlTree, entity_id: str) -> ControlTree:
    """Remove an entity and every entity below it.

    Returns a new tree; the input tree is unchanged.  Severing the root
    is an error because the remainder would not be a tree.
    """
    if entity_id == tree.root:
        raise CannotSeverRoot(entity_id)
    gone = _subtree_ids(tree, entity_id)
    entities = {eid: ent for eid, ent in tree.entities.items() if eid not in gone}
    return ControlTree(tree.firm_id, tree.root, entities)


def relabel_entity(
    tree: ControlTree, entity_id: str, kind: LabelKind, new_label: str
) -> ControlTree:
    """Replace one entity's country or SIC label, returning a new tree."""
    if entity_id not in tree.entities:
        raise UnknownEntity(entity_id)
    if kind not in (LabelKind.COUNTRY, LabelKind.SIC):
        raise ValueError(f"can only relabel country or sic, not {kind.value}")
    old = tree.entities[entity_id]
    if kind is LabelKind.COUNTRY:
        labels = EntityLabelSet(new_label, old.labels.sic)
    else:
        labels = EntityLabelSet(old.labels.country, new_label)
    entities = dict(tree.entities)
    entities[entity_id] = Entity(old.parent, labels)
    return ControlTree(tree.firm_id, tree.root, entities)


def relabel_all(
    tree: ControlTree, kind: LabelKind, labels: Sequence[str] | dict[str, str]
) -> ControlTree:
    """Replace the labels of every entity at once.

    ``labels`` is either a mapping from entity id to label or a sequence
    aligned with canonical (lexicographic id) entity order.  For the
    derived kinds SIC1/SIC2 the new value is stored as the SIC code
    itself, which keeps the derived label readable back out.
    """
    if not isinstance(labels, dict):
        if len(labels) != tree.node_count:
            raise ValueError(
                f"expected {tree.node_count} labels, got {len(labels)}"
            )
        labels = dict(zip(tree.entity_ids, labels))
    entities: dict[str, Entity] = {}
    for eid, ent in tree.entities.items():
        text = labels.get(eid)
        if text is None:
            entities[eid] = ent
        elif kind is LabelKind.COUNTRY:
            entities[eid] = Entity(ent.parent, EntityLabelSet(text, ent.labels.sic))
        else:
            entities[eid] = Entity(ent.parent, EntityLabelSet(ent.labels.country, text))
    return ControlTree(tree.firm_id, tree.root, entities)
