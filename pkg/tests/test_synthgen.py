from __future__ import annotations

import numpy as np
import pytest

from controltree import (
    IID,
    LabelDistribution,
    LabelKind,
    Markov,
    PerfectCopy,
    Preferential,
    Regular,
    Uniform,
    assign_labels,
    fit_power_law,
    gen_tree,
    out_degree_distribution,
    perfect_tree_statistic,
    tree_depth,
    tree_rows,
)
from controltree.errors import BadParameter
from controltree.synthgen import SCAFFOLD_COUNTRY


def test_regular_binary_depth_two() -> None:
    tree = gen_tree(Regular(k=2, depth=2))
    assert tree.node_count == 7
    assert tree_depth(tree) == 2
    dd = out_degree_distribution(tree)
    assert dd.counts == {0: 4, 2: 3}


def test_regular_chain_and_single() -> None:
    chain = gen_tree(Regular(k=1, depth=5))
    assert chain.node_count == 6
    assert tree_depth(chain) == 5
    assert out_degree_distribution(chain).counts == {0: 1, 1: 5}
    single = gen_tree(Regular(k=3, depth=0))
    assert single.node_count == 1
    assert tree_depth(single) == 0


def test_regular_validation() -> None:
    with pytest.raises(BadParameter):
        gen_tree(Regular(k=0, depth=2))
    with pytest.raises(BadParameter):
        gen_tree(Regular(k=2, depth=-1))


def test_scaffold_labels() -> None:
    tree = gen_tree(Uniform(40), seed=1)
    for _, _, country, sic in tree_rows(tree):
        assert country == SCAFFOLD_COUNTRY
        assert sic == "NONE"


def test_topology_determinism() -> None:
    assert gen_tree(Preferential(300), seed=5) == gen_tree(Preferential(300), seed=5)
    assert gen_tree(Preferential(300), seed=5) != gen_tree(Preferential(300), seed=6)
    assert gen_tree(Uniform(300), seed=5) == gen_tree(Uniform(300), seed=5)


def test_growing_model_validation() -> None:
    with pytest.raises(BadParameter):
        gen_tree(Preferential(0))
    with pytest.raises(BadParameter):
        gen_tree(Uniform(0))
    with pytest.raises(BadParameter):
        gen_tree(Preferential(100, smoothing=-0.5))


def test_uniform_attachment_depth_is_logarithmic() -> None:
    # random recursive tree: expected max depth ~ e * ln(n) ~ 21 at n=2048
    for seed in (0, 1, 2):
        depth = tree_depth(gen_tree(Uniform(2048), seed=seed))
        assert 8 <= depth <= 35


def test_preferential_attachment_degree_tail() -> None:
    # attachment weight outdeg + 1 is classic preferential attachment;
    # the degree tail is power-law-like with exponent near 3 (finite-size
    # estimates come in lower)
    for seed in (0, 1, 2):
        tree = gen_tree(Preferential(10_000), seed=seed)
        fit = fit_power_law(out_degree_distribution(tree).degrees())
        assert 2.0 <= fit.exponent <= 3.5


def test_perfect_copy_statistic_is_one() -> None:
    for model in (Regular(3, 3), Preferential(200), Uniform(77)):
        tree = assign_labels(
            gen_tree(model, seed=2), LabelKind.COUNTRY, PerfectCopy("JP")
        )
        res = perfect_tree_statistic(tree, LabelKind.COUNTRY)
        assert res.t_nonroot == 1.0
        assert res.t_total == (tree.node_count - 1) / tree.node_count


def test_iid_label_frequencies() -> None:
    dist = LabelDistribution(LabelKind.COUNTRY, {"AA": 0.7, "BB": 0.3})
    tree = assign_labels(gen_tree(Uniform(20_000), seed=3), LabelKind.COUNTRY, IID(dist), seed=4)
    freq = np.mean([tree.entities[e].labels.country == "AA" for e in tree.entity_ids])
    assert abs(freq - 0.7) < 4 * np.sqrt(0.7 * 0.3 / 20_000)
    redo = assign_labels(gen_tree(Uniform(20_000), seed=3), LabelKind.COUNTRY, IID(dist), seed=4)
    assert redo == tree


def test_iid_sic_kind_stores_codes() -> None:
    dist = LabelDistribution(LabelKind.SIC, {"6021": 0.5, "7372": 0.5})
    tree = assign_labels(gen_tree(Uniform(50), seed=0), LabelKind.SIC, IID(dist), seed=1)
    for eid in tree.entity_ids:
        assert tree.entities[eid].labels.sic in {"6021", "7372"}
        assert tree.entities[eid].labels.country == SCAFFOLD_COUNTRY


def test_markov_stay_one_copies_root_everywhere() -> None:
    base = LabelDistribution(LabelKind.COUNTRY, {"US": 0.25, "GB": 0.75})
    tree = assign_labels(gen_tree(Preferential(500), seed=7), LabelKind.COUNTRY, Markov(1.0, base), seed=8)
    root_label = tree.entities[tree.root].labels.country
    assert root_label in {"US", "GB"}
    assert all(tree.entities[e].labels.country == root_label for e in tree.entity_ids)
    assert perfect_tree_statistic(tree, LabelKind.COUNTRY).t_nonroot == 1.0


def test_markov_match_probability() -> None:
    # match prob = stay + (1 - stay) * base(parent label); uniform base
    # over 4 labels at stay 0.8 gives 0.85 on every edge
    base = LabelDistribution(
        LabelKind.COUNTRY, {"US": 0.25, "GB": 0.25, "JP": 0.25, "DE": 0.25}
    )
    tree = assign_labels(gen_tree(Uniform(10_000), seed=9), LabelKind.COUNTRY, Markov(0.8, base), seed=10)
    res = perfect_tree_statistic(tree, LabelKind.COUNTRY)
    assert abs(res.t_nonroot - 0.85) < 4 * np.sqrt(0.85 * 0.15 / 9_999)


def test_markov_stay_zero_is_iid() -> None:
    base = LabelDistribution(LabelKind.COUNTRY, {"US": 0.9, "GB": 0.1})
    tree = assign_labels(gen_tree(Uniform(20_000), seed=11), LabelKind.COUNTRY, Markov(0.0, base), seed=12)
    # match prob on any edge = sum of base(a)^2 = 0.82
    res = perfect_tree_statistic(tree, LabelKind.COUNTRY)
    assert abs(res.t_nonroot - 0.82) < 4 * np.sqrt(0.82 * 0.18 / 19_999)


def test_label_model_validation() -> None:
    tree = gen_tree(Regular(2, 3))
    country_dist = LabelDistribution(LabelKind.COUNTRY, {"US": 1.0})
    with pytest.raises(BadParameter):
        assign_labels(tree, LabelKind.SIC, IID(country_dist))
    with pytest.raises(BadParameter):
        assign_labels(tree, LabelKind.COUNTRY, Markov(1.5, country_dist))
    with pytest.raises(BadParameter):
        assign_labels(tree, LabelKind.COUNTRY, Markov(-0.1, country_dist))
