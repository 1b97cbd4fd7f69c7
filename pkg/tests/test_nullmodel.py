from __future__ import annotations

import numpy as np
import pytest

from controltree import (
    LabelDistribution,
    LabelKind,
    bootstrap_perfect_tree,
    build_tree,
    empirical_label_distribution,
    perfect_tree_statistic,
    resample_labels,
    significance_tests,
)
from controltree.errors import AllTied, BadParameter, DegenerateInput

from helpers import enumerate_null, five_node_tree, iid_mean_formula, random_tree


def test_empirical_distribution_counts_all_nodes() -> None:
    tree = five_node_tree()  # JP, GB, JP, JP, US
    dist = empirical_label_distribution(tree, LabelKind.COUNTRY)
    assert dist.weights == {"JP": 3 / 5, "GB": 1 / 5, "US": 1 / 5}
    assert dist.support() == ["GB", "JP", "US"]
    assert dist.probability("JP") == 0.6
    assert dist.probability("ZZ") == 0.0


def test_empirical_distribution_derived_kind() -> None:
    tree = five_node_tree()  # sics: 6021, 6022, 6021, 6022, 6021
    dist = empirical_label_distribution(tree, LabelKind.SIC2)
    assert dist.weights == {"60": 1.0}


def test_label_distribution_validation() -> None:
    with pytest.raises(DegenerateInput):
        LabelDistribution(LabelKind.COUNTRY, {})
    with pytest.raises(DegenerateInput):
        LabelDistribution(LabelKind.COUNTRY, {"US": 0.5, "GB": 0.6})
    with pytest.raises(DegenerateInput):
        LabelDistribution(LabelKind.COUNTRY, {"US": 1.5, "GB": -0.5})


def test_resample_keeps_root_and_topology() -> None:
    tree = five_node_tree()
    dist = empirical_label_distribution(tree, LabelKind.COUNTRY)
    redrawn = resample_labels(tree, dist, seed=3)
    assert redrawn.entity_ids == tree.entity_ids
    assert {e: redrawn.entities[e].parent for e in redrawn.entity_ids} == {
        e: tree.entities[e].parent for e in tree.entity_ids
    }
    assert redrawn.entities["A"].labels.country == "JP"
    support = set(dist.support())
    for eid in redrawn.entity_ids:
        assert redrawn.entities[eid].labels.country in support
    assert resample_labels(tree, dist, seed=3) == redrawn


def test_resample_derived_kind_stores_prefix_as_sic() -> None:
    tree = five_node_tree()
    dist = empirical_label_distribution(tree, LabelKind.SIC1)
    redrawn = resample_labels(tree, dist, seed=0)
    assert redrawn.entities["A"].labels.sic == "6021"  # root untouched
    for eid in "BCDE":
        assert redrawn.entities[eid].labels.sic == "6"


def test_bootstrap_matches_exact_enumeration() -> None:
    tree = five_node_tree()
    t_exact, w = enumerate_null(tree, LabelKind.COUNTRY)
    mean_exact = float((t_exact * w).sum())
    var_exact = float(((t_exact - mean_exact) ** 2 * w).sum())
    actual = perfect_tree_statistic(tree, LabelKind.COUNTRY).t_total
    q_exact = float(w[t_exact < actual].sum() + 0.5 * w[t_exact == actual].sum())

    R = 40_000
    nd = bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=R, seed=5)
    assert nd.actual == actual
    assert abs(nd.mean - mean_exact) < 4 * np.sqrt(var_exact / R)
    mu4 = float(((t_exact - mean_exact) ** 4 * w).sum())
    se_var = np.sqrt(max(mu4 - var_exact**2, 0.0) / R)
    assert abs(nd.stdev**2 - var_exact) < 4 * se_var
    assert abs(nd.quantile - q_exact) < 4 * np.sqrt(q_exact * (1 - q_exact) / R) + 1e-9


def test_bootstrap_mean_matches_analytic_formula() -> None:
    tree = random_tree(2, 8)
    t_exact, w = enumerate_null(tree, LabelKind.SIC1)
    assert float((t_exact * w).sum()) == pytest.approx(
        iid_mean_formula(tree, LabelKind.SIC1), abs=1e-12
    )


def test_bootstrap_single_label_is_degenerate() -> None:
    tree = five_node_tree({k: "JP" for k in "ABCDE"})
    nd = bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=200, seed=0)
    assert nd.actual == 4 / 5
    assert np.all(nd.values == 4 / 5)
    assert nd.stdev == 0.0
    assert nd.quantile == 0.5
    with pytest.raises(AllTied):
        significance_tests(nd)


def test_bootstrap_deterministic_in_seed() -> None:
    tree = random_tree(7, 30)
    a = bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=500, seed=11)
    b = bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=500, seed=11)
    c = bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=500, seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_bootstrap_quantile_is_midrank_of_values() -> None:
    tree = random_tree(9, 25)
    nd = bootstrap_perfect_tree(tree, LabelKind.SIC, replications=777, seed=2)
    below = (nd.values < nd.actual).sum()
    tied = (nd.values == nd.actual).sum()
    assert nd.quantile == pytest.approx((below + 0.5 * tied) / 777, abs=1e-15)
    assert nd.mean == pytest.approx(nd.values.mean(), abs=1e-15)
    assert nd.stdev == pytest.approx(nd.values.std(ddof=1), abs=1e-15)


def test_bootstrap_single_replication() -> None:
    tree = five_node_tree()
    nd = bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=1, seed=0)
    assert nd.values.shape == (1,)
    assert nd.stdev == 0.0
    with pytest.raises(BadParameter):
        bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=0)


def test_fix_level_one_star_has_no_variation() -> None:
    # every non-root node is a child of the root, so holding level 1
    # fixed leaves nothing to resample
    rows = [("R", None, "JP", "6021")] + [
        (f"C{i}", "R", c, "6021") for i, c in enumerate(("GB", "US", "JP", "JP"))
    ]
    star = build_tree("STAR", rows)
    nd = bootstrap_perfect_tree(
        star, LabelKind.COUNTRY, replications=300, seed=4, fix_level_one=True
    )
    assert np.all(nd.values == nd.actual)
    assert nd.stdev == 0.0


def test_fix_level_one_resamples_deeper_nodes() -> None:
    tree = five_node_tree()
    nd = bootstrap_perfect_tree(
        tree, LabelKind.COUNTRY, replications=4000, seed=6, fix_level_one=True
    )
    # B and C stay JP-under-JP-root... C actual is JP so edge A->C always
    # matches, A->B never (GB vs JP); only D and E vary: each matches C's
    # JP with p(JP) = 0.6, so E[t] = (1 + 0.6 + 0.6) / 5
    assert nd.stdev > 0.0
    assert abs(nd.mean - 2.2 / 5) < 4 * nd.stdev / np.sqrt(4000)


def test_permutation_star_has_no_variation() -> None:
    # a star's t counts how many children share the root label; any
    # shuffle of the same child multiset leaves that count unchanged
    rows = [("R", None, "JP", "6021")] + [
        (f"C{i}", "R", c, "6021") for i, c in enumerate(("GB", "US", "JP", "FR"))
    ]
    star = build_tree("STAR", rows)
    nd = bootstrap_perfect_tree(
        star, LabelKind.COUNTRY, replications=300, seed=4, permutation=True
    )
    assert np.all(nd.values == nd.actual)
    assert nd.stdev == 0.0


def test_permutation_preserves_label_multiset() -> None:
    tree = five_node_tree()
    # t values live on matched/5 grid; exact permutation distribution of
    # the 4 non-root labels {GB, JP, JP, US} over slots B, C, D, E:
    # matched = [B==JP(root)] + [C==JP] + [D==C] + [E==C]
    import itertools

    t_all = []
    for perm in itertools.permutations(["GB", "JP", "JP", "US"]):
        b, c, d, e = perm
        matched = (b == "JP") + (c == "JP") + (d == c) + (e == c)
        t_all.append(matched / 5)
    t_all = np.array(t_all)
    R = 30_000
    nd = bootstrap_perfect_tree(
        tree, LabelKind.COUNTRY, replications=R, seed=8, permutation=True
    )
    assert set(np.round(nd.values * 5).astype(int)) <= set(
        np.round(t_all * 5).astype(int)
    )
    assert abs(nd.mean - t_all.mean()) < 4 * t_all.std() / np.sqrt(R)


def test_significance_z_scores() -> None:
    tree = random_tree(13, 40)
    nd = bootstrap_perfect_tree(tree, LabelKind.COUNTRY, replications=2000, seed=1)
    sig = significance_tests(nd, alpha=0.05)
    assert sig.critical == pytest.approx(1.959963984540054, abs=1e-12)
    assert sig.z_vs_one == pytest.approx((nd.actual - 1.0) / nd.stdev)
    assert sig.z_vs_zero == pytest.approx(nd.actual / nd.stdev)
    assert sig.reject_perfect == (abs(sig.z_vs_one) > sig.critical)
    assert sig.reject_zero == (abs(sig.z_vs_zero) > sig.critical)
    wide = significance_tests(nd, alpha=0.5)
    assert wide.critical < sig.critical
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(BadParameter):
            significance_tests(nd, alpha=bad)
