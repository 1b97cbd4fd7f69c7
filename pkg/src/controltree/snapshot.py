"""Loading, saving and anonymizing multi-firm snapshots.

A snapshot is the set of control trees of many firms observed on one
date, each firm tagged with a regulatory group and an optional size.
Two interchange formats are supported: a flat delimited file (one row
per entity) and a nested JSON document.  Saving normalizes field order,
so load/save round trips are identity on the semantic content.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import IO, Any, Iterable

import numpy as np

from .errors import (
    BadDate,
    BadGroupTag,
    ControlTreeError,
    DuplicateFirm,
    EmptyInput,
    ParseError,
    UnknownEntity,
    ValidationError,
)
from .tree import ControlTree, build_tree, tree_rows

CSV_COLUMNS = (
    "firm_id",
    "entity_id",
    "parent_id",
    "country",
    "sic",
    "group",
    "as_of",
    "size",
)


class GroupTag(str, Enum):
    SIFI = "SIFI"
    BANK = "BANK"
    INSURER = "INSURER"

    @classmethod
    def parse(cls, text: str) -> "GroupTag":
        try:
            return cls(text)
        except ValueError:
            raise BadGroupTag(text) from None


class SnapshotFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class FirmRecord:
    """One firm in a snapshot: its tree, group tag and optional size."""

    tree: ControlTree
    group: GroupTag
    size: float | None = None

    @property
    def firm_id(self) -> str:
        return self.tree.firm_id


@dataclass(frozen=True)
class Snapshot:
    """All firms observed on one date, kept sorted by firm id."""

    as_of: date
    firms: tuple[FirmRecord, ...] = field(compare=True)

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.firms, key=lambda f: f.firm_id))
        seen: set[str] = set()
        for firm in ordered:
            if firm.firm_id in seen:
                raise DuplicateFirm(firm.firm_id)
            seen.add(firm.firm_id)
        object.__setattr__(self, "firms", ordered)

    @property
    def firm_ids(self) -> list[str]:
        return [f.firm_id for f in self.firms]

    def firm(self, firm_id: str) -> FirmRecord:
        for f in self.firms:
            if f.firm_id == firm_id:
                return f
        raise UnknownEntity(firm_id)


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise BadDate(text) from None


def _parse_size(text: str, where: str) -> float | None:
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(where, f"size {text!r} is not a number") from None
    if not np.isfinite(value) or value < 0:
        raise ParseError(where, f"size must be a finite non-negative number, got {text!r}")
    return value


def _as_text(source: bytes | str | IO[bytes]) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError("byte stream", f"not valid UTF-8: {exc}") from None


# ---------------------------------------------------------------------------
# delimited format
# ---------------------------------------------------------------------------


def _load_csv(text: str) -> Snapshot:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("snapshot file") from None

    positions: dict[str, int] = {}
    for idx, name in enumerate(header):
        if name in CSV_COLUMNS:
            if name in positions:
                raise ParseError("line 1", f"column {name!r} appears twice")
            positions[name] = idx
        else:
            warnings.warn(f"ignoring unknown column {name!r}", stacklevel=3)
    for name in CSV_COLUMNS:
        if name != "size" and name not in positions:
            raise ParseError("line 1", f"missing required column {name!r}")

    # first pass: group rows by firm and check cross-row consistency
    firm_rows: dict[str, list[tuple[str, str | None, str, str]]] = {}
    firm_group: dict[str, str] = {}
    firm_size: dict[str, str] = {}
    as_of_text: str | None = None
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        where = f"line {lineno}"
        if len(row) < len(header):
            raise ParseError(where, f"expected {len(header)} fields, got {len(row)}")

        def col(name: str) -> str:
            return row[positions[name]] if name in positions else ""

        firm_id = col("firm_id")
        if not firm_id:
            raise ParseError(where, "empty firm_id")
        this_date = col("as_of")
        if as_of_text is None:
            as_of_text = this_date
        elif this_date != as_of_text:
            raise ParseError(where, f"as_of {this_date!r} differs from {as_of_text!r}")
        if firm_id not in firm_rows:
            firm_rows[firm_id] = []
            firm_group[firm_id] = col("group")
            firm_size[firm_id] = col("size")
        else:
            if col("group") != firm_group[firm_id]:
                raise ParseError(where, f"group differs within firm {firm_id!r}")
            if col("size") != firm_size[firm_id]:
                raise ParseError(where, f"size differs within firm {firm_id!r}")
        firm_rows[firm_id].append(
            (col("entity_id"), col("parent_id") or None, col("country"), col("sic"))
        )

    if not firm_rows:
        raise EmptyInput("snapshot file")
    assert as_of_text is not None
    as_of = _parse_date(as_of_text)

    firms = []
    for firm_id, rows in firm_rows.items():
        group = GroupTag.parse(firm_group[firm_id])
        size = _parse_size(firm_size[firm_id], f"firm {firm_id!r}")
        try:
            tree = build_tree(firm_id, rows)
        except ControlTreeError as exc:
            raise ValidationError(firm_id, exc) from exc
        firms.append(FirmRecord(tree, group, size))
    return Snapshot(as_of, tuple(firms))


def _save_csv(snapshot: Snapshot) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    iso = snapshot.as_of.isoformat()
    for firm in snapshot.firms:
        size_text = "" if firm.size is None else repr(firm.size)
        for eid, parent, country, sic in tree_rows(firm.tree):
            writer.writerow(
                (firm.firm_id, eid, parent or "", country, sic, firm.group.value, iso, size_text)
            )
    return buf.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# JSON format
# ---------------------------------------------------------------------------


def _load_json(text: str) -> Snapshot:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError("$", "top-level value must be an object")
    for key in ("as_of", "firms"):
        if key not in doc:
            raise ParseError("$", f"missing key {key!r}")
    if not isinstance(doc["as_of"], str):
        raise ParseError("$.as_of", "must be a string date")
    as_of = _parse_date(doc["as_of"])
    if not isinstance(doc["firms"], list) or not doc["firms"]:
        raise EmptyInput("firms")

    firms = []
    seen: set[str] = set()
    for i, obj in enumerate(doc["firms"]):
        where = f"$.firms[{i}]"
        if not isinstance(obj, dict):
            raise ParseError(where, "firm must be an object")
        for key in ("firm_id", "group", "entities"):
            if key not in obj:
                raise ParseError(where, f"missing key {key!r}")
        firm_id = obj["firm_id"]
        if not isinstance(firm_id, str) or not firm_id:
            raise ParseError(where, "firm_id must be a non-empty string")
        if firm_id in seen:
            raise DuplicateFirm(firm_id)
        seen.add(firm_id)
        group = GroupTag.parse(str(obj["group"]))
        size: float | None = None
        if obj.get("size") is not None:
            raw_size = obj["size"]
            if not isinstance(raw_size, (int, float)) or isinstance(raw_size, bool):
                raise ParseError(where, "size must be a number")
            size = _parse_size(repr(float(raw_size)), where)
        if not isinstance(obj["entities"], list):
            raise ParseError(where, "entities must be a list")
        rows = []
        for j, ent in enumerate(obj["entities"]):
            ewhere = f"{where}.entities[{j}]"
            if not isinstance(ent, dict):
                raise ParseError(ewhere, "entity must be an object")
            for key in ("id", "country", "sic"):
                if key not in ent:
                    raise ParseError(ewhere, f"missing key {key!r}")
            rows.append(
                (str(ent["id"]), ent.get("parent"), str(ent["country"]), str(ent["sic"]))
            )
        try:
            tree = build_tree(firm_id, rows)
        except ControlTreeError as exc:
            raise ValidationError(firm_id, exc) from exc
        firms.append(FirmRecord(tree, group, size))
    return Snapshot(as_of, tuple(firms))


def _save_json(snapshot: Snapshot) -> bytes:
    doc: dict[str, Any] = {"as_of": snapshot.as_of.isoformat(), "firms": []}
    for firm in snapshot.firms:
        entry: dict[str, Any] = {"firm_id": firm.firm_id, "group": firm.group.value}
        if firm.size is not None:
            entry["size"] = firm.size
        entities = []
        for eid, parent, country, sic in tree_rows(firm.tree):
            ent: dict[str, Any] = {"id": eid}
            if parent is not None:
                ent["parent"] = parent
            ent["country"] = country
            ent["sic"] = sic
            entities.append(ent)
        entry["entities"] = entities
        doc["firms"].append(entry)
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def load_snapshot(
    source: bytes | str | IO[bytes], fmt: SnapshotFormat | str
) -> Snapshot:
    """Parse a snapshot from delimited or JSON content."""
    text = _as_text(source)
    fmt = SnapshotFormat(fmt)
    return _load_csv(text) if fmt is SnapshotFormat.CSV else _load_json(text)


def save_snapshot(snapshot: Snapshot, fmt: SnapshotFormat | str) -> bytes:
    """Serialize a snapshot; inverse of :func:`load_snapshot`."""
    fmt = SnapshotFormat(fmt)
    return _save_csv(snapshot) if fmt is SnapshotFormat.CSV else _save_json(snapshot)


def guess_format(path: str) -> SnapshotFormat:
    return SnapshotFormat.JSON if path.lower().endswith(".json") else SnapshotFormat.CSV


def load_snapshot_path(path: str) -> Snapshot:
    with open(path, "rb") as fh:
        return load_snapshot(fh, guess_format(path))


# ---------------------------------------------------------------------------
# anonymization
# ---------------------------------------------------------------------------

_GROUP_PREFIX = {GroupTag.SIFI: "S", GroupTag.BANK: "B", GroupTag.INSURER: "I"}


def anonymize(snapshot: Snapshot, seed: int = 0) -> Snapshot:
    """Replace firm and entity identifiers with neutral tokens.

    Firms are renamed to group-prefixed ordinals (``S1``, ``B2``, ...)
    in a seeded shuffled order, so the mapping cannot be read off the
    original sort order.  Entity ids become zero-padded ordinals of the
    original lexicographic order within each firm; because the renaming
    preserves relative id order, every metric -- including seeded
    bootstrap draws, which consume entities in id order -- is unchanged.
    """
    rng = np.random.default_rng(seed)
    renamed: list[FirmRecord] = []
    for group in GroupTag:
        members = [f for f in snapshot.firms if f.group is group]
        perm = rng.permutation(len(members))
        for new_idx, old_idx in enumerate(perm, start=1):
            firm = members[old_idx]
            new_id = f"{_GROUP_PREFIX[group]}{new_idx}"
            renamed.append(FirmRecord(_rename_entities(firm.tree, new_id), firm.group, firm.size))
    return Snapshot(snapshot.as_of, tuple(renamed))


def _rename_entities(tree: ControlTree, new_firm_id: str) -> ControlTree:
    width = len(str(tree.node_count))
    mapping = {
        eid: f"E{rank:0{width}d}"
        for rank, eid in enumerate(tree.entity_ids, start=1)
    }
    rows = [
        (mapping[eid], mapping[parent] if parent else None, country, sic)
        for eid, parent, country, sic in tree_rows(tree)
    ]
    return build_tree(new_firm_id, rows)


def snapshot_from_trees(
    as_of: date,
    firms: Iterable[tuple[ControlTree, GroupTag | str, float | None]],
) -> Snapshot:
    """Convenience assembler used by generators and tests."""
    records = tuple(
        FirmRecord(tree, GroupTag(group), size) for tree, group, size in firms
    )
    return Snapshot(as_of, records)
