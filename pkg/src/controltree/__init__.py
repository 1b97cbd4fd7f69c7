"""Complexity metrics for corporate control hierarchies.

The package models a firm's control structure as a labeled rooted tree
and provides: descriptive statistics, a perfect-tree similarity
statistic with a bootstrap null model, discrete power-law fits of the
out-degree tail, label transition tables, level occupancy tables,
snapshot comparison, restructuring simulation, synthetic generators and
graph export.
"""
from .errors import ControlTreeError
from .graphexport import ColorBy, GraphFormat, export_graph
from .metrics import (
    DescriptiveStats,
    GroupMeans,
    HierarchyTable,
    PerfectTreeResult,
    TransitionTable,
    corpus_label_distribution,
    describe,
    gini_coefficient,
    gini_of_degrees,
    group_summary,
    hierarchy_fraction_table,
    perfect_tree_statistic,
    spearman_rank_corr,
    transition_table,
)
from .nullmodel import (
    LabelDistribution,
    NullDistribution,
    SignificanceResult,
    bootstrap_perfect_tree,
    empirical_label_distribution,
    resample_labels,
    significance_tests,
)
from .powerlaw import PowerLawFit, exponent_change, fit_power_law, sample_power_law
from .report import (
    CorrelationBlock,
    FirmDelta,
    PerfectSummary,
    Relabel,
    ReportBundle,
    ReportOptions,
    Sever,
    SnapshotDiff,
    TrajectoryPoint,
    build_report,
    bundle_to_jsonable,
    compare_snapshots,
    firm_seed,
    percent,
    render_csv_sections,
    render_json,
    render_table,
    simulate_restructure,
)
from .snapshot import (
    FirmRecord,
    GroupTag,
    Snapshot,
    SnapshotFormat,
    anonymize,
    guess_format,
    load_snapshot,
    load_snapshot_path,
    save_snapshot,
    snapshot_from_trees,
)
from .synthgen import (
    IID,
    Markov,
    PerfectCopy,
    Preferential,
    Regular,
    Uniform,
    assign_labels,
    gen_tree,
)
from .tree import (
    ControlTree,
    DegreeDistribution,
    DepthHistogram,
    EntityLabelSet,
    LabelKind,
    build_tree,
    depth_histogram,
    out_degree_distribution,
    relabel_entity,
    sever_subtree,
    sic_prefix,
    subtree_size,
    tree_depth,
    tree_rows,
)

__version__ = "0.1.0"
