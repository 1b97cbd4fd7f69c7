"""Command-line interface.

Exit codes: 0 success, 1 data or validation problem, 2 usage error.
Options may also be supplied through a JSON config file (``--config``);
explicit flags win over config values, which win over built-in defaults.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import date
from typing import Any, Sequence

from .errors import BadDate, ControlTreeError, ParseError
from .graphexport import ColorBy, GraphFormat, export_graph
from .metrics import describe, group_summary
from .nullmodel import LabelDistribution
from .powerlaw import PowerLawFit
from .report import (
    Relabel,
    ReportOptions,
    Sever,
    _text_table,
    build_report,
    compare_snapshots,
    percent,
    render_csv_sections,
    render_json,
    render_table,
    simulate_restructure,
)
from .snapshot import (
    GroupTag,
    SnapshotFormat,
    guess_format,
    load_snapshot_path,
    save_snapshot,
    snapshot_from_trees,
)
from .synthgen import IID, Markov, PerfectCopy, Preferential, Regular, Uniform, assign_labels, gen_tree
from .tree import LabelKind, out_degree_distribution

_DEFAULTS: dict[str, Any] = {
    "format": "table",
    "label": "country",
    "replications": 1000,
    "seed": 0,
    "alpha": 0.05,
    "bucket_cap": 9,
    "workers": 1,
    "fix_level_one": False,
    "permutation": False,
}


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file, then from defaults."""
    config: dict[str, Any] = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.config}:{exc.lineno}", exc.msg) from None
        if not isinstance(config, dict):
            raise ParseError(args.config, "config must be a JSON object")
    for key, default in _DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, config.get(key, default))
    return args


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sections_text(sections: dict[str, str]) -> str:
    parts = [f"# {name}\n{body}" for name, body in sections.items()]
    return "\n".join(parts)


def _csv_table(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    for path in args.files:
        snapshot = load_snapshot_path(path)
        n_entities = sum(f.tree.node_count for f in snapshot.firms)
        print(f"{path}: {len(snapshot.firms)} firms, {n_entities} entities, OK")
        for firm in snapshot.firms:
            print(f"  {firm.firm_id}: {firm.tree.node_count} entities, ok")
    return 0


def _cmd_describe(args: argparse.Namespace) -> int:
    snapshot = load_snapshot_path(args.file)
    stats = {f.firm_id: describe(f.tree) for f in snapshot.firms}
    means = group_summary(snapshot)
    if args.format == "json":
        doc = {
            "as_of": snapshot.as_of.isoformat(),
            "firms": {
                fid: {
                    "n_nodes": s.n_nodes,
                    "n_countries": s.n_countries,
                    "n_sic": s.n_sic,
                    "depth": s.depth,
                }
                for fid, s in stats.items()
            },
            "group_means": {
                g.value: {
                    "n_firms": m.n_firms,
                    "mean_nodes": m.mean_nodes,
                    "mean_countries": m.mean_countries,
                    "mean_sic": m.mean_sic,
                    "mean_depth": m.mean_depth,
                }
                for g, m in means.items()
            },
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    elif args.format == "csv":
        firm_csv = _csv_table(
            ["firm_id", "n_nodes", "n_countries", "n_sic", "depth"],
            [[fid, s.n_nodes, s.n_countries, s.n_sic, s.depth] for fid, s in stats.items()],
        )
        means_csv = _csv_table(
            ["group", "n_firms", "mean_nodes", "mean_countries", "mean_sic", "mean_depth"],
            [
                [g.value, m.n_firms, m.mean_nodes, m.mean_countries, m.mean_sic, m.mean_depth]
                for g, m in means.items()
            ],
        )
        _emit(_sections_text({"describe": firm_csv, "group_means": means_csv}), args.output)
    else:
        firm_table = _text_table(
            ["firm", "nodes", "countries", "sic", "depth"],
            [
                [fid, str(s.n_nodes), str(s.n_countries), str(s.n_sic), str(s.depth)]
                for fid, s in stats.items()
            ],
        )
        means_table = _text_table(
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
                for g, m in means.items()
            ],
        )
        _emit(f"as of {snapshot.as_of.isoformat()}\n{firm_table}\n\n{means_table}\n", args.output)
    return 0


def _report_options(args: argparse.Namespace) -> ReportOptions:
    return ReportOptions(
        label_kind=LabelKind(args.label),
        replications=int(args.replications),
        seed=int(args.seed),
        alpha=float(args.alpha),
        bucket_cap=int(args.bucket_cap),
        fix_level_one=bool(args.fix_level_one),
        permutation=bool(args.permutation),
    )


def _cmd_metrics(args: argparse.Namespace) -> int:
    snapshot = load_snapshot_path(args.file)
    bundle = build_report(snapshot, _report_options(args), workers=int(args.workers))
    if args.format == "json":
        _emit(render_json(bundle), args.output)
    elif args.format == "csv":
        _emit(_sections_text(render_csv_sections(bundle)), args.output)
    else:
        _emit(render_table(bundle), args.output)
    if args.emit_plotdata:
        from .plots import emit_plot_data

        written = emit_plot_data(snapshot, bundle, args.emit_plotdata)
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_powerlaw(args: argparse.Namespace) -> int:
    from .powerlaw import fit_power_law
    from .errors import DegenerateSample, InsufficientData

    snapshot = load_snapshot_path(args.file)
    fits: dict[str, PowerLawFit | str] = {}
    for firm in snapshot.firms:
        try:
            fits[firm.firm_id] = fit_power_law(
                out_degree_distribution(firm.tree).degrees()
            )
        except (InsufficientData, DegenerateSample) as exc:
            fits[firm.firm_id] = str(exc)
    if args.format == "json":
        doc = {
            fid: (
                {"exponent": f.exponent, "se": f.se, "xmin": f.xmin, "n_tail": f.n_tail, "ks": f.ks}
                if isinstance(f, PowerLawFit)
                else {"skipped": f}
            )
            for fid, f in fits.items()
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    elif args.format == "csv":
        rows = [
            [fid, f"{f.exponent:.12g}", f"{f.se:.12g}", f.xmin, f.n_tail, f"{f.ks:.12g}", ""]
            if isinstance(f, PowerLawFit)
            else [fid, "", "", "", "", "", f]
            for fid, f in fits.items()
        ]
        _emit(
            _csv_table(["firm_id", "exponent", "se", "xmin", "n_tail", "ks", "skipped"], rows),
            args.output,
        )
    else:
        rows = [
            [fid, f"{f.exponent:.2f}", f"{f.se:.3f}", str(f.xmin), str(f.n_tail)]
            if isinstance(f, PowerLawFit)
            else [fid, "-", "-", "-", f"({f})"]
            for fid, f in fits.items()
        ]
        _emit(_text_table(["firm", "exponent", "se", "xmin", "n_tail"], rows) + "\n", args.output)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    earlier = load_snapshot_path(args.earlier)
    later = load_snapshot_path(args.later)
    diff = compare_snapshots(
        earlier,
        later,
        LabelKind(args.label),
        replications=int(args.replications),
        seed=int(args.seed),
    )
    if args.format == "json":
        doc = {
            "earlier": diff.earlier.isoformat(),
            "later": diff.later.isoformat(),
            "label_kind": diff.label_kind.value,
            "firms": {
                d.firm_id: {
                    "d_nodes": d.d_nodes,
                    "d_countries": d.d_countries,
                    "d_sic": d.d_sic,
                    "d_depth": d.d_depth,
                    "t_earlier": d.t_earlier,
                    "t_later": d.t_later,
                    "quantile_earlier": d.quantile_earlier,
                    "quantile_later": d.quantile_later,
                    "exponent_earlier": d.exponent_earlier,
                    "exponent_later": d.exponent_later,
                    "exponent_change": d.exponent_change,
                    "moved_toward_one": d.moved_toward_one,
                    "quantile_declined": d.quantile_declined,
                }
                for d in diff.deltas
            },
            "only_in_earlier": list(diff.only_in_earlier),
            "only_in_later": list(diff.only_in_later),
            "summary": {
                "common_firms": len(diff.deltas),
                "moved_toward_one": diff.n_moved_toward_one,
                "quantile_declined": diff.n_quantile_declined,
            },
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    elif args.format == "csv":
        rows = [
            [
                d.firm_id, d.d_nodes, d.d_countries, d.d_sic, d.d_depth,
                f"{d.t_earlier:.12g}", f"{d.t_later:.12g}",
                f"{d.quantile_earlier:.12g}", f"{d.quantile_later:.12g}",
                "" if d.exponent_change is None else f"{d.exponent_change:.12g}",
                "true" if d.moved_toward_one else "false",
                "true" if d.quantile_declined else "false",
            ]
            for d in diff.deltas
        ]
        _emit(
            _csv_table(
                [
                    "firm_id", "d_nodes", "d_countries", "d_sic", "d_depth",
                    "t_earlier", "t_later", "quantile_earlier", "quantile_later",
                    "exponent_change", "moved_toward_one", "quantile_declined",
                ],
                rows,
            ),
            args.output,
        )
    else:
        rows = [
            [
                d.firm_id,
                f"{d.d_nodes:+d}", f"{d.d_countries:+d}", f"{d.d_sic:+d}", f"{d.d_depth:+d}",
                f"{d.t_earlier:.3f} -> {d.t_later:.3f}",
                f"{percent(d.quantile_earlier)} -> {percent(d.quantile_later)}",
                "-" if d.exponent_change is None else f"{d.exponent_change:+.2f}",
            ]
            for d in diff.deltas
        ]
        table = _text_table(
            ["firm", "nodes", "countries", "sic", "depth", "t_total", "quantile", "exp chg"],
            rows,
        )
        tail = (
            f"\n{len(diff.deltas)} common firms: "
            f"{diff.n_moved_toward_one} moved toward 1, "
            f"{diff.n_quantile_declined} quantile declined\n"
        )
        if diff.only_in_earlier:
            tail += f"only in earlier: {', '.join(diff.only_in_earlier)}\n"
        if diff.only_in_later:
            tail += f"only in later: {', '.join(diff.only_in_later)}\n"
        _emit(table + "\n" + tail, args.output)
    return 0


def _parse_script(path: str) -> list[Sever | Relabel]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{exc.lineno}", exc.msg) from None
    if not isinstance(doc, list):
        raise ParseError(path, "script must be a JSON list of events")
    events: list[Sever | Relabel] = []
    for i, obj in enumerate(doc):
        where = f"{path}[{i}]"
        if not isinstance(obj, dict) or "op" not in obj:
            raise ParseError(where, "event must be an object with an 'op' key")
        if obj["op"] == "sever":
            if "entity" not in obj:
                raise ParseError(where, "sever needs an 'entity' key")
            events.append(Sever(str(obj["entity"])))
        elif obj["op"] == "relabel":
            for key in ("entity", "kind", "label"):
                if key not in obj:
                    raise ParseError(where, f"relabel needs an {key!r} key")
            try:
                kind = LabelKind(str(obj["kind"]))
            except ValueError:
                raise ParseError(where, f"unknown label kind {obj['kind']!r}") from None
            events.append(Relabel(str(obj["entity"]), kind, str(obj["label"])))
        else:
            raise ParseError(where, f"unknown op {obj['op']!r}")
    return events


def _cmd_simulate(args: argparse.Namespace) -> int:
    snapshot = load_snapshot_path(args.file)
    tree = snapshot.firm(args.firm).tree
    trajectory = simulate_restructure(tree, _parse_script(args.script))

    def event_text(p) -> str:
        if p.event is None:
            return "initial"
        if isinstance(p.event, Sever):
            return f"sever {p.event.entity_id}"
        return f"relabel {p.event.entity_id} {p.event.kind.value}={p.event.label}"

    kinds = list(LabelKind)
    if args.format == "json":
        doc = [
            {
                "step": p.step,
                "event": event_text(p),
                "n_nodes": p.stats.n_nodes,
                "n_countries": p.stats.n_countries,
                "n_sic": p.stats.n_sic,
                "depth": p.stats.depth,
                "t_total": {k.value: p.perfect[k].t_total for k in kinds},
            }
            for p in trajectory
        ]
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    elif args.format == "csv":
        rows = [
            [
                p.step, event_text(p), p.stats.n_nodes, p.stats.n_countries,
                p.stats.n_sic, p.stats.depth,
                *(f"{p.perfect[k].t_total:.12g}" for k in kinds),
            ]
            for p in trajectory
        ]
        _emit(
            _csv_table(
                ["step", "event", "n_nodes", "n_countries", "n_sic", "depth",
                 *(f"t_{k.value}" for k in kinds)],
                rows,
            ),
            args.output,
        )
    else:
        rows = [
            [
                str(p.step), event_text(p), str(p.stats.n_nodes), str(p.stats.depth),
                *(f"{p.perfect[k].t_total:.3f}" for k in kinds),
            ]
            for p in trajectory
        ]
        _emit(
            _text_table(
                ["step", "event", "nodes", "depth", *(f"t_{k.value}" for k in kinds)], rows
            )
            + "\n",
            args.output,
        )
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    seed = int(args.seed)
    countries = [c.strip() for c in args.countries.split(",") if c.strip()]
    if not countries:
        raise ParseError("--countries", "need at least one country")
    sics = [s.strip() for s in args.sics.split(",") if s.strip()] if args.sics else []
    firms = []
    for i in range(args.firms):
        firm_id = f"G{i + 1:03d}"
        if args.topology == "regular":
            topo = gen_tree(Regular(args.k, args.tree_depth), firm_id=firm_id)
        elif args.topology == "uniform":
            topo = gen_tree(Uniform(args.nodes), seed=seed + i, firm_id=firm_id)
        else:
            topo = gen_tree(
                Preferential(args.nodes, args.smoothing), seed=seed + i, firm_id=firm_id
            )
        weights = {c: 1.0 / len(countries) for c in countries}
        dist = LabelDistribution(LabelKind.COUNTRY, weights)
        if args.label_model == "perfect":
            model: PerfectCopy | IID | Markov = PerfectCopy(countries[0])
        elif args.label_model == "markov":
            model = Markov(args.stay, dist)
        else:
            model = IID(dist)
        tree = assign_labels(topo, LabelKind.COUNTRY, model, seed=seed * 1000 + i)
        if sics:
            sic_dist = LabelDistribution(
                LabelKind.SIC, {s: 1.0 / len(sics) for s in sics}
            )
            tree = assign_labels(tree, LabelKind.SIC, IID(sic_dist), seed=seed * 2000 + i)
        firms.append((tree, GroupTag(args.group), None))
    try:
        as_of = date.fromisoformat(args.as_of)
    except ValueError:
        raise BadDate(args.as_of) from None
    snapshot = snapshot_from_trees(as_of, firms)
    payload = save_snapshot(snapshot, guess_format(args.output))
    with open(args.output, "wb") as fh:
        fh.write(payload)
    print(f"wrote {args.output}: {args.firms} firms", file=sys.stderr)
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    snapshot = load_snapshot_path(args.file)
    tree = snapshot.firm(args.firm).tree
    text = export_graph(tree, GraphFormat(args.graph_format), ColorBy(args.color_by))
    _emit(text, args.output)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, formats: bool = True) -> None:
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("--output", "-o", help="write output to this path instead of stdout")
    if formats:
        p.add_argument(
            "--format", choices=("table", "csv", "json"), default=None,
            help="output rendering (default table)",
        )


def _add_stat_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--label", choices=tuple(k.value for k in LabelKind), default=None,
                   help="label kind for similarity metrics (default country)")
    p.add_argument("--replications", type=int, default=None,
                   help="bootstrap replications (default 1000)")
    p.add_argument("--seed", type=int, default=None, help="master random seed (default 0)")
    p.add_argument("--alpha", type=float, default=None,
                   help="two-sided significance level (default 0.05)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="controltree",
        description="Complexity metrics for corporate control hierarchies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check snapshot files and report per-firm counts")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("describe", help="per-firm size, label diversity and depth")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(func=_cmd_describe)

    p = sub.add_parser("metrics", help="full metric report with bootstrap null model")
    p.add_argument("file")
    _add_common(p)
    _add_stat_options(p)
    p.add_argument("--bucket-cap", dest="bucket_cap", type=int, default=None,
                   help="deepest level with its own occupancy column (default 9)")
    p.add_argument("--workers", type=int, default=None,
                   help="concurrent firm computations (default 1; output is identical)")
    p.add_argument("--fix-level-one", dest="fix_level_one", action="store_true", default=None,
                   help="hold the root's immediate children fixed in the null model")
    p.add_argument("--permutation", action="store_true", default=None,
                   help="permute observed labels instead of i.i.d. redraws")
    p.add_argument("--emit-plotdata", metavar="DIR",
                   help="write per-figure CSV series and PNG figures into DIR")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("powerlaw", help="fit degree power laws per firm")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(func=_cmd_powerlaw)

    p = sub.add_parser("compare", help="metric deltas between two snapshots")
    p.add_argument("earlier")
    p.add_argument("later")
    _add_common(p)
    _add_stat_options(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("simulate", help="apply a restructuring script and track metrics")
    p.add_argument("file")
    p.add_argument("--firm", required=True)
    p.add_argument("--script", required=True, help="JSON list of sever/relabel events")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("generate", help="write a synthetic snapshot")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--firms", type=int, default=1)
    p.add_argument("--topology", choices=("regular", "preferential", "uniform"),
                   default="preferential")
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--tree-depth", dest="tree_depth", type=int, default=3)
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--label-model", dest="label_model",
                   choices=("perfect", "iid", "markov"), default="iid")
    p.add_argument("--stay", type=float, default=0.8)
    p.add_argument("--countries", default="US,GB,JP,DE,FR")
    p.add_argument("--sics", default="")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--group", choices=tuple(g.value for g in GroupTag), default="SIFI")
    p.add_argument("--as-of", dest="as_of", default="2011-05-26")
    p.add_argument("--config", help="JSON file with default option values")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("export", help="render one firm's tree as DOT or GraphML")
    p.add_argument("file")
    p.add_argument("--firm", required=True)
    p.add_argument("--graph-format", dest="graph_format", choices=("dot", "graphml"),
                   default="dot")
    p.add_argument("--color-by", dest="color_by",
                   choices=tuple(c.value for c in ColorBy), default="depth")
    _add_common(p, formats=False)
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args)
        return args.func(args)
    except ControlTreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
