"""Shared builders for the test suite."""
from __future__ import annotations

import itertools
import random
from datetime import date
from pathlib import Path

import numpy as np

from controltree import ControlTree, GroupTag, Snapshot, build_tree, snapshot_from_trees

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

COUNTRIES = ("US", "GB", "JP", "DE", "FR", "CH", "NL")
SICS = ("6021", "6022", "6211", "7372", "NONE")


def five_node_tree(
    countries: dict[str, str] | None = None, firm_id: str = "F1"
) -> ControlTree:
    """Five nodes: A at the root, B and C under A, D and E under C."""
    cc = countries or {"A": "JP", "B": "GB", "C": "JP", "D": "JP", "E": "US"}
    rows = [
        ("A", None, cc["A"], "6021"),
        ("B", "A", cc["B"], "6022"),
        ("C", "A", cc["C"], "6021"),
        ("D", "C", cc["D"], "6022"),
        ("E", "C", cc["E"], "6021"),
    ]
    return build_tree(firm_id, rows)


def random_tree(
    seed: int,
    n: int,
    firm_id: str = "RT",
    countries: tuple[str, ...] = COUNTRIES,
    sics: tuple[str, ...] = SICS,
) -> ControlTree:
    """Random recursive tree with labels drawn from small pools."""
    rng = random.Random(seed)
    width = len(str(n - 1)) if n > 1 else 1
    ids = [f"N{i:0{width}d}" for i in range(n)]
    rows = []
    for i in range(n):
        parent = None if i == 0 else ids[rng.randrange(i)]
        rows.append((ids[i], parent, rng.choice(countries), rng.choice(sics)))
    return build_tree(firm_id, rows)


def random_snapshot(seed: int, n_firms: int | None = None) -> Snapshot:
    """Snapshot of several random firms with mixed groups and sizes."""
    rng = random.Random(seed)
    n_firms = n_firms or rng.randint(1, 6)
    firms = []
    for i in range(n_firms):
        tree = random_tree(seed * 1000 + i, rng.randint(1, 60), firm_id=f"FIRM{i:02d}")
        group = rng.choice(list(GroupTag))
        size = round(rng.uniform(1.0, 500.0), 3) if rng.random() < 0.7 else None
        firms.append((tree, group, size))
    as_of = date(2011, 5, 26)
    return snapshot_from_trees(as_of, firms)


def leveled_tree(level_counts: list[int], firm_id: str = "LT") -> ControlTree:
    """Tree with an exact number of nodes per level, parents round-robin."""
    assert level_counts[0] == 1
    total = sum(level_counts)
    width = len(str(total - 1))
    rows = []
    prev: list[str] = []
    counter = 0
    for lvl, count in enumerate(level_counts):
        current = []
        for j in range(count):
            eid = f"N{counter:0{width}d}"
            counter += 1
            parent = None if lvl == 0 else prev[j % len(prev)]
            rows.append((eid, parent, "X", "NONE"))
            current.append(eid)
        prev = current
    return build_tree(firm_id, rows)


def enumerate_null(tree: ControlTree, kind) -> tuple[np.ndarray, np.ndarray]:
    """Exact null distribution of t_total by product-measure enumeration.

    Walks every assignment of labels to the non-root nodes (root label
    fixed), weighting each by the product of empirical probabilities.
    Returns (t values, probabilities); only feasible for tiny trees.
    """
    from controltree import empirical_label_distribution

    dist = empirical_label_distribution(tree, kind)
    support = dist.support()
    probs = [dist.probability(a) for a in support]
    ids = tree.entity_ids
    nonroot = [eid for eid in ids if eid != tree.root]
    parent = {eid: tree.entities[eid].parent for eid in nonroot}
    root_label = tree.entities[tree.root].labels.label(kind)
    n = tree.node_count
    t_values = []
    weights = []
    for combo in itertools.product(range(len(support)), repeat=len(nonroot)):
        lab = {tree.root: root_label}
        w = 1.0
        for eid, ci in zip(nonroot, combo):
            lab[eid] = support[ci]
            w *= probs[ci]
        matched = sum(1 for eid in nonroot if lab[eid] == lab[parent[eid]])
        t_values.append(matched / n)
        weights.append(w)
    return np.array(t_values), np.array(weights)


def iid_mean_formula(tree: ControlTree, kind) -> float:
    """Analytic mean of t_total under the i.i.d. label null.

    Level-1 nodes match with probability p(root label); deeper nodes
    match when two independent draws agree: sum of p(a)^2.
    """
    from controltree import empirical_label_distribution

    dist = empirical_label_distribution(tree, kind)
    levels = tree.levels()
    root_label = tree.entities[tree.root].labels.label(kind)
    n1 = sum(1 for eid, lv in levels.items() if lv == 1)
    n2 = sum(1 for eid, lv in levels.items() if lv >= 2)
    collision = sum(p * p for p in dist.weights.values())
    return (n1 * dist.probability(root_label) + n2 * collision) / tree.node_count
