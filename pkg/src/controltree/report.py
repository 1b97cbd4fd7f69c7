"""Full-snapshot reports, snapshot comparison and restructuring simulation.

A report bundle pulls every metric together for one snapshot: per-firm
descriptives, the perfect-tree statistic with its bootstrap null, degree
power-law fits, Gini concentration, pooled label transitions, level
occupancy, and (when firm sizes are present) rank correlations between
size and the other quantities.

Bundles serialize deterministically: identical inputs and seed produce
byte-identical JSON regardless of how many workers computed the firms.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from typing import Any, Sequence

from .errors import (
    AllTied,
    ControlTreeError,
    DegenerateInput,
    DegenerateSample,
    InsufficientData,
    NoCommonFirms,
    SimulationStepError,
)
from .metrics import (
    DescriptiveStats,
    GroupMeans,
    HierarchyTable,
    PerfectTreeResult,
    TransitionTable,
    describe,
    gini_of_degrees,
    group_summary,
    hierarchy_fraction_table,
    perfect_tree_statistic,
    spearman_rank_corr,
    transition_table,
)
from .nullmodel import NullDistribution, bootstrap_perfect_tree, significance_tests
from .powerlaw import PowerLawFit, exponent_change, fit_power_law
from .snapshot import GroupTag, Snapshot
from .tree import (
    ControlTree,
    LabelKind,
    out_degree_distribution,
    relabel_entity,
    sever_subtree,
)


def firm_seed(master_seed: int, token: str) -> int:
    """Stable per-firm substream seed, independent of scheduling order."""
    digest = hashlib.sha256(f"{master_seed}:{token}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class PerfectSummary:
    """Perfect-tree statistic of one firm with its bootstrap placement."""

    result: PerfectTreeResult
    null: NullDistribution
    z_vs_one: float | None
    z_vs_zero: float | None
    reject_perfect: bool | None
    reject_zero: bool | None

    @property
    def tied(self) -> bool:
        return self.z_vs_one is None


@dataclass(frozen=True)
class ReportOptions:
    label_kind: LabelKind = LabelKind.COUNTRY
    replications: int = 1000
    seed: int = 0
    alpha: float = 0.05
    bucket_cap: int = 9
    fix_level_one: bool = False
    permutation: bool = False


@dataclass(frozen=True)
class CorrelationBlock:
    """Spearman correlations of firm size against the other outputs."""

    n_firms: int
    size_vs_statistic: float | None
    size_vs_nodes: float | None


@dataclass(frozen=True)
class ReportBundle:
    as_of: date
    options: ReportOptions
    descriptive: dict[str, DescriptiveStats]
    group_means: dict[GroupTag, GroupMeans]
    perfect: dict[str, PerfectSummary]
    fits: dict[str, PowerLawFit | str]
    gini: dict[str, float | None]
    transitions: TransitionTable
    hierarchy: HierarchyTable
    correlations: CorrelationBlock | None

    @property
    def rejection_counts(self) -> tuple[int, int, int]:
        """(reject-perfect count, reject-zero count, tied count)."""
        rp = sum(1 for p in self.perfect.values() if p.reject_perfect)
        rz = sum(1 for p in self.perfect.values() if p.reject_zero)
        tied = sum(1 for p in self.perfect.values() if p.tied)
        return rp, rz, tied


def _firm_metrics(
    tree: ControlTree, opts: ReportOptions, master_seed: int, token: str
) -> tuple[DescriptiveStats, PerfectSummary, PowerLawFit | str, float | None]:
    stats = describe(tree)
    null = bootstrap_perfect_tree(
        tree,
        opts.label_kind,
        replications=opts.replications,
        seed=firm_seed(master_seed, token),
        fix_level_one=opts.fix_level_one,
        permutation=opts.permutation,
    )
    try:
        sig = significance_tests(null, opts.alpha)
        summary = PerfectSummary(
            perfect_tree_statistic(tree, opts.label_kind),
            null,
            sig.z_vs_one,
            sig.z_vs_zero,
            sig.reject_perfect,
            sig.reject_zero,
        )
    except AllTied:
        summary = PerfectSummary(
            perfect_tree_statistic(tree, opts.label_kind), null, None, None, None, None
        )
    try:
        fit: PowerLawFit | str = fit_power_law(out_degree_distribution(tree).degrees())
    except (InsufficientData, DegenerateSample) as exc:
        fit = str(exc)
    try:
        gini: float | None = gini_of_degrees(tree)
    except DegenerateInput:
        gini = None
    return stats, summary, fit, gini


def build_report(
    snapshot: Snapshot, options: ReportOptions | None = None, workers: int = 1
) -> ReportBundle:
    """Compute every metric for one snapshot.

    Firms are independent jobs; ``workers`` only sets how many run at
    once.  Each firm's bootstrap seed is derived from the master seed
    and the firm id, so the assembled bundle does not depend on
    scheduling.
    """
    opts = options or ReportOptions()
    trees = [f.tree for f in snapshot.firms]

    def job(tree: ControlTree):
        return _firm_metrics(tree, opts, opts.seed, tree.firm_id)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, trees))
    else:
        results = [job(t) for t in trees]

    descriptive = {t.firm_id: r[0] for t, r in zip(trees, results)}
    perfect = {t.firm_id: r[1] for t, r in zip(trees, results)}
    fits = {t.firm_id: r[2] for t, r in zip(trees, results)}
    gini = {t.firm_id: r[3] for t, r in zip(trees, results)}

    sized = [
        (f.size, perfect[f.firm_id].result.t_total, descriptive[f.firm_id].n_nodes)
        for f in snapshot.firms
        if f.size is not None
    ]
    correlations = None
    if len(sized) >= 3:
        sizes = [s[0] for s in sized]
        correlations = CorrelationBlock(
            len(sized),
            _safe_spearman(sizes, [s[1] for s in sized]),
            _safe_spearman(sizes, [s[2] for s in sized]),
        )

    return ReportBundle(
        as_of=snapshot.as_of,
        options=opts,
        descriptive=descriptive,
        group_means=group_summary(snapshot),
        perfect=perfect,
        fits=fits,
        gini=gini,
        transitions=transition_table(trees, opts.label_kind),
        hierarchy=hierarchy_fraction_table(trees, opts.bucket_cap),
        correlations=correlations,
    )


def _safe_spearman(x: Sequence[float], y: Sequence[float]) -> float | None:
    try:
        return spearman_rank_corr(x, y)
    except DegenerateInput:
        return None


# ---------------------------------------------------------------------------
# snapshot comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FirmDelta:
    """Changes in one firm's metrics between two snapshots."""

    firm_id: str
    d_nodes: int
    d_countries: int
    d_sic: int
    d_depth: int
    t_earlier: float
    t_later: float
    quantile_earlier: float
    quantile_later: float
    exponent_earlier: float | None
    exponent_later: float | None
    exponent_change: float | None

    @property
    def moved_toward_one(self) -> bool:
        return abs(1.0 - self.t_later) < abs(1.0 - self.t_earlier)

    @property
    def quantile_declined(self) -> bool:
        return self.quantile_later < self.quantile_earlier


@dataclass(frozen=True)
class SnapshotDiff:
    earlier: date
    later: date
    label_kind: LabelKind
    deltas: tuple[FirmDelta, ...]
    only_in_earlier: tuple[str, ...]
    only_in_later: tuple[str, ...]

    @property
    def n_moved_toward_one(self) -> int:
        return sum(1 for d in self.deltas if d.moved_toward_one)

    @property
    def n_quantile_declined(self) -> int:
        return sum(1 for d in self.deltas if d.quantile_declined)


def compare_snapshots(
    earlier: Snapshot,
    later: Snapshot,
    label_kind: LabelKind = LabelKind.COUNTRY,
    replications: int = 1000,
    seed: int = 0,
) -> SnapshotDiff:
    """Per-firm metric deltas for firms present in both snapshots.

    Bootstrap draws for the two dates use distinct substreams (derived
    from firm id and date), so the comparison does not reuse noise.
    """
    ids_e = set(earlier.firm_ids)
    ids_l = set(later.firm_ids)
    common = sorted(ids_e & ids_l)
    if not common:
        raise NoCommonFirms()

    deltas = []
    for fid in common:
        te = earlier.firm(fid).tree
        tl = later.firm(fid).tree
        de, dl = describe(te), describe(tl)
        ne = bootstrap_perfect_tree(
            te, label_kind, replications, firm_seed(seed, f"{fid}@{earlier.as_of}")
        )
        nl = bootstrap_perfect_tree(
            tl, label_kind, replications, firm_seed(seed, f"{fid}@{later.as_of}")
        )
        fe = _try_fit(te)
        fl = _try_fit(tl)
        deltas.append(
            FirmDelta(
                firm_id=fid,
                d_nodes=dl.n_nodes - de.n_nodes,
                d_countries=dl.n_countries - de.n_countries,
                d_sic=dl.n_sic - de.n_sic,
                d_depth=dl.depth - de.depth,
                t_earlier=ne.actual,
                t_later=nl.actual,
                quantile_earlier=ne.quantile,
                quantile_later=nl.quantile,
                exponent_earlier=None if fe is None else fe.exponent,
                exponent_later=None if fl is None else fl.exponent,
                exponent_change=None if fe is None or fl is None else exponent_change(fe, fl),
            )
        )
    return SnapshotDiff(
        earlier.as_of,
        later.as_of,
        label_kind,
        tuple(deltas),
        tuple(sorted(ids_e - ids_l)),
        tuple(sorted(ids_l - ids_e)),
    )


def _try_fit(tree: ControlTree) -> PowerLawFit | None:
    try:
        return fit_power_law(out_degree_distribution(tree).degrees())
    except (InsufficientData, DegenerateSample):
        return None


# ---------------------------------------------------------------------------
# restructuring simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sever:
    """Remove an entity and its whole subtree."""

    entity_id: str


@dataclass(frozen=True)
class Relabel:
    """Move an entity to a different country or industry."""

    entity_id: str
    kind: LabelKind
    label: str


Event = Sever | Relabel


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    event: Event | None
    tree: ControlTree
    stats: DescriptiveStats
    perfect: dict[LabelKind, PerfectTreeResult]


def simulate_restructure(
    tree: ControlTree, script: Sequence[Event]
) -> list[TrajectoryPoint]:
    """Apply events in order, measuring the tree after each one.

    The first trajectory point is the unmodified input; an empty script
    therefore yields exactly one point.  Event errors carry the failing
    step index.
    """

    def measure(step: int, event: Event | None, t: ControlTree) -> TrajectoryPoint:
        return TrajectoryPoint(
            step, event, t, describe(t),
            {kind: perfect_tree_statistic(t, kind) for kind in LabelKind},
        )

    points = [measure(0, None, tree)]
    current = tree
    for step, event in enumerate(script, start=1):
        try:
            if isinstance(event, Sever):
                current = sever_subtree(current, event.entity_id)
            elif isinstance(event, Relabel):
                current = relabel_entity(current, event.entity_id, event.kind, event.label)
            else:
                raise DegenerateInput(f"unknown event {event!r}")
        except (ControlTreeError, ValueError) as exc:
            # ValueError covers relabeling with a derived kind (sic1/sic2)
            raise SimulationStepError(step, exc) from exc
        points.append(measure(step, event, current))
    return points


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _num(value: Any) -> str:
    """Delimited-output number formatting: 12 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def percent(quantile: float) -> str:
    """Bootstrap placement as a percent string with two decimals."""
    return f"{quantile * 100:.2f}%"


def _perfect_row(fid: str, p: PerfectSummary) -> list[Any]:
    return [
        fid,
        p.result.n_nodes,
        p.result.matched,
        p.result.t_total,
        p.result.t_nonroot,
        p.null.mean,
        p.null.stdev,
        p.null.quantile,
        p.z_vs_one,
        p.z_vs_zero,
        p.reject_perfect,
        p.reject_zero,
        p.tied,
    ]


_PERFECT_HEADER = [
    "firm_id", "n_nodes", "matched", "t_total", "t_nonroot",
    "null_mean", "null_stdev", "quantile",
    "z_vs_one", "z_vs_zero", "reject_perfect", "reject_zero", "tied",
]


def render_csv_sections(bundle: ReportBundle) -> dict[str, str]:
    """One delimited table per report section, keyed by section name."""

    def table(header: list[str], rows: list[list[Any]]) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])
        return buf.getvalue()

    sections: dict[str, str] = {}
    sections["descriptive"] = table(
        ["firm_id", "n_nodes", "n_countries", "n_sic", "depth"],
        [
            [fid, s.n_nodes, s.n_countries, s.n_sic, s.depth]
            for fid, s in bundle.descriptive.items()
        ],
    )
    sections["group_means"] = table(
        ["group", "n_firms", "mean_nodes", "mean_countries", "mean_sic", "mean_depth"],
        [
            [g.value, m.n_firms, m.mean_nodes, m.mean_countries, m.mean_sic, m.mean_depth]
            for g, m in bundle.group_means.items()
        ],
    )
    sections["perfect_tree"] = table(
        _PERFECT_HEADER, [_perfect_row(fid, p) for fid, p in bundle.perfect.items()]
    )
    sections["powerlaw"] = table(
        ["firm_id", "exponent", "se", "xmin", "n_tail", "ks", "skipped"],
        [
            [fid, f.exponent, f.se, f.xmin, f.n_tail, f.ks, None]
            if isinstance(f, PowerLawFit)
            else [fid, None, None, None, None, None, f]
            for fid, f in bundle.fits.items()
        ],
    )
    sections["gini"] = table(
        ["firm_id", "gini"], [[fid, g] for fid, g in bundle.gini.items()]
    )
    sections["transitions"] = table(
        ["label", "children", "same_label", "p_in", "rank"],
        [[r.label, r.children, r.same_label, r.p_in, r.rank] for r in bundle.transitions.rows],
    )
    hier_rows = [[fid, *fracs] for fid, fracs in bundle.hierarchy.rows.items()]
    hier_rows.append(["avg", *bundle.hierarchy.avg])
    sections["hierarchy"] = table(["firm_id", *bundle.hierarchy.labels], hier_rows)
    if bundle.correlations is not None:
        c = bundle.correlations
        sections["correlations"] = table(
            ["n_firms", "size_vs_statistic", "size_vs_nodes"],
            [[c.n_firms, c.size_vs_statistic, c.size_vs_nodes]],
        )
    rp, rz, tied = bundle.rejection_counts
    sections["summary"] = table(
        ["n_firms", "reject_perfect", "reject_zero", "tied"],
        [[len(bundle.perfect), rp, rz, tied]],
    )
    return sections


def bundle_to_jsonable(bundle: ReportBundle) -> dict[str, Any]:
    opts = bundle.options
    firms: dict[str, Any] = {}
    for fid, stats in bundle.descriptive.items():
        p = bundle.perfect[fid]
        fit = bundle.fits[fid]
        firms[fid] = {
            "descriptive": {
                "n_nodes": stats.n_nodes,
                "n_countries": stats.n_countries,
                "n_sic": stats.n_sic,
                "depth": stats.depth,
            },
            "perfect_tree": {
                "matched": p.result.matched,
                "t_total": p.result.t_total,
                "t_nonroot": p.result.t_nonroot,
                "null_mean": p.null.mean,
                "null_stdev": p.null.stdev,
                "quantile": p.null.quantile,
                "z_vs_one": p.z_vs_one,
                "z_vs_zero": p.z_vs_zero,
                "reject_perfect": p.reject_perfect,
                "reject_zero": p.reject_zero,
                "tied": p.tied,
            },
            "powerlaw": (
                {
                    "exponent": fit.exponent,
                    "se": fit.se,
                    "xmin": fit.xmin,
                    "n_tail": fit.n_tail,
                    "ks": fit.ks,
                }
                if isinstance(fit, PowerLawFit)
                else {"skipped": fit}
            ),
            "gini": bundle.gini[fid],
        }
    rp, rz, tied = bundle.rejection_counts
    return {
        "as_of": bundle.as_of.isoformat(),
        "options": {
            "label_kind": opts.label_kind.value,
            "replications": opts.replications,
            "seed": opts.seed,
            "alpha": opts.alpha,
            "bucket_cap": opts.bucket_cap,
            "fix_level_one": opts.fix_level_one,
            "permutation": opts.permutation,
        },
        "firms": firms,
        "group_means": {
            g.value: {
                "n_firms": m.n_firms,
                "mean_nodes": m.mean_nodes,
                "mean_countries": m.mean_countries,
                "mean_sic": m.mean_sic,
                "mean_depth": m.mean_depth,
            }
            for g, m in bundle.group_means.items()
        },
        "transitions": [
            {
                "label": r.label,
                "children": r.children,
                "same_label": r.same_label,
                "p_in": r.p_in,
                "rank": r.rank,
            }
            for r in bundle.transitions.rows
        ],
        "hierarchy": {
            "bucket_cap": bundle.hierarchy.bucket_cap,
            "labels": list(bundle.hierarchy.labels),
            "rows": {fid: list(v) for fid, v in bundle.hierarchy.rows.items()},
            "avg": list(bundle.hierarchy.avg),
        },
        "correlations": (
            None
            if bundle.correlations is None
            else {
                "n_firms": bundle.correlations.n_firms,
                "size_vs_statistic": bundle.correlations.size_vs_statistic,
                "size_vs_nodes": bundle.correlations.size_vs_nodes,
            }
        ),
        "summary": {
            "n_firms": len(bundle.perfect),
            "reject_perfect": rp,
            "reject_zero": rz,
            "tied": tied,
        },
    }


def render_json(bundle: ReportBundle) -> str:
    return json.dumps(bundle_to_jsonable(bundle), indent=2, sort_keys=True) + "\n"


def _text_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(lines)


def render_table(bundle: ReportBundle) -> str:
    """Human-readable report with aligned columns."""

    def f3(v: float | None) -> str:
        return "" if v is None else f"{v:.3f}"

    parts = [f"snapshot {bundle.as_of.isoformat()}  label={bundle.options.label_kind.value}"]
    parts.append(
        _text_table(
            ["firm", "nodes", "countries", "sic", "depth", "gini"],
            [
                [
                    fid,
                    str(s.n_nodes),
                    str(s.n_countries),
                    str(s.n_sic),
                    str(s.depth),
                    f3(bundle.gini[fid]),
                ]
                for fid, s in bundle.descriptive.items()
            ],
        )
    )
    parts.append(
        _text_table(
            ["group", "firms", "nodes", "countries", "sic", "depth"],
            [
                [
                    g.value,
                    str(m.n_firms),
                    f"{m.mean_nodes:.1f}",
                    f"{m.mean_countries:.1f}",
                    f"{m.mean_sic:.1f}",
                    f"{m.mean_depth:.1f}",
                ]
                for g, m in bundle.group_means.items()
            ],
        )
    )
    parts.append(
        _text_table(
            ["firm", "t_total", "null mean", "null stdev", "quantile", "verdict"],
            [
                [
                    fid,
                    f3(p.result.t_total),
                    f3(p.null.mean),
                    f3(p.null.stdev),
                    percent(p.null.quantile),
                    (
                        "all tied"
                        if p.tied
                        else " ".join(
                            filter(
                                None,
                                [
                                    "rejects =1" if p.reject_perfect else "",
                                    "rejects =0" if p.reject_zero else "",
                                ],
                            )
                        )
                        or "neither"
                    ),
                ]
                for fid, p in bundle.perfect.items()
            ],
        )
    )
    fit_rows = []
    for fid, f in bundle.fits.items():
        if isinstance(f, PowerLawFit):
            fit_rows.append(
                [fid, f"{f.exponent:.2f}", f"{f.se:.3f}", str(f.xmin), str(f.n_tail)]
            )
        else:
            fit_rows.append([fid, "-", "-", "-", f"({f})"])
    parts.append(_text_table(["firm", "exponent", "se", "xmin", "n_tail"], fit_rows))
    parts.append(
        _text_table(
            ["label", "children", "same", "p_in", "rank"],
            [
                [r.label, str(r.children), str(r.same_label), f"{r.p_in:.2f}", str(r.rank)]
                for r in bundle.transitions.rows
            ],
        )
    )
    hier_rows = [
        [fid, *(f"{v:.3f}" for v in fracs)] for fid, fracs in bundle.hierarchy.rows.items()
    ]
    hier_rows.append(["avg", *(f"{v:.3f}" for v in bundle.hierarchy.avg)])
    parts.append(_text_table(["firm", *bundle.hierarchy.labels], hier_rows))
    if bundle.correlations is not None:
        c = bundle.correlations
        parts.append(
            _text_table(
                ["firms with size", "size vs statistic", "size vs nodes"],
                [[str(c.n_firms), f3(c.size_vs_statistic), f3(c.size_vs_nodes)]],
            )
        )
    rp, rz, tied = bundle.rejection_counts
    parts.append(
        f"{len(bundle.perfect)} firms: {rp} reject t=1, {rz} reject t=0, {tied} tied"
    )
    return "\n\n".join(parts) + "\n"
