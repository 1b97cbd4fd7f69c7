"""Exception types raised by the controltree package.

Every error carries enough context (entity ids, labels, line numbers) to
identify the offending part of the input without re-running validation.
"""
from __future__ import annotations


class ControlTreeError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# tree construction / manipulation
# ---------------------------------------------------------------------------


class DuplicateEntity(ControlTreeError):
    def __init__(self, entity_id: str):
        self.entity_id = entity_id
        super().__init__(f"duplicate entity id {entity_id!r}")


class MultipleRoots(ControlTreeError):
    def __init__(self, roots: list[str]):
        self.roots = sorted(roots)
        super().__init__(f"multiple root entities: {', '.join(self.roots)}")


class MissingRoot(ControlTreeError):
    def __init__(self) -> None:
        super().__init__("no root entity (every entity has a parent)")


class UnknownParent(ControlTreeError):
    def __init__(self, entity_id: str, parent_id: str):
        self.entity_id = entity_id
        self.parent_id = parent_id
        super().__init__(f"entity {entity_id!r} names unknown parent {parent_id!r}")


class CycleDetected(ControlTreeError):
    def __init__(self, witness: list[str]):
        self.witness = witness
        path = " -> ".join(witness)
        super().__init__(f"control links contain a cycle: {path}")


class EmptyInput(ControlTreeError):
    def __init__(self, what: str = "input"):
        super().__init__(f"empty {what}")


class UnknownEntity(ControlTreeError):
    def __init__(self, entity_id: str):
        self.entity_id = entity_id
        super().__init__(f"unknown entity id {entity_id!r}")


class CannotSeverRoot(ControlTreeError):
    def __init__(self, entity_id: str):
        self.entity_id = entity_id
        super().__init__(f"cannot sever the root entity {entity_id!r}")


class InvalidSic(ControlTreeError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"invalid SIC code {text!r} (expected 1-4 digits or 'NONE')")


class InvalidCountry(ControlTreeError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"invalid country label {text!r} (must be non-empty)")


# ---------------------------------------------------------------------------
# snapshot ingest / export
# ---------------------------------------------------------------------------


class ParseError(ControlTreeError):
    def __init__(self, where: str, reason: str):
        self.where = where
        self.reason = reason
        super().__init__(f"{where}: {reason}")


class ValidationError(ControlTreeError):
    """Wraps a tree-construction error with the firm it occurred in."""

    def __init__(self, firm_id: str, cause: ControlTreeError):
        self.firm_id = firm_id
        self.cause = cause
        super().__init__(f"firm {firm_id!r}: {cause}")


class DuplicateFirm(ControlTreeError):
    def __init__(self, firm_id: str):
        self.firm_id = firm_id
        super().__init__(f"duplicate firm id {firm_id!r}")


class BadDate(ControlTreeError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"bad as_of date {text!r} (expected ISO-8601 YYYY-MM-DD)")


class BadGroupTag(ControlTreeError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"unknown group tag {text!r} (expected SIFI, BANK or INSURER)")


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


class DegenerateInput(ControlTreeError):
    def __init__(self, reason: str):
        super().__init__(reason)


class LengthMismatch(ControlTreeError):
    def __init__(self, n_x: int, n_y: int):
        self.n_x = n_x
        self.n_y = n_y
        super().__init__(f"length mismatch: {n_x} vs {n_y}")


class EmptyGroup(ControlTreeError):
    def __init__(self, what: str = "snapshot"):
        super().__init__(f"no firms to summarise in {what}")


# ---------------------------------------------------------------------------
# power-law fitting / sampling
# ---------------------------------------------------------------------------


class InsufficientData(ControlTreeError):
    def __init__(self, n: int, needed: int):
        self.n = n
        self.needed = needed
        super().__init__(f"insufficient data: {n} positive values, need >= {needed}")


class DegenerateSample(ControlTreeError):
    def __init__(self, reason: str):
        super().__init__(reason)


class BadExponent(ControlTreeError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"exponent must be > 1, got {value}")


class BadParameter(ControlTreeError):
    def __init__(self, reason: str):
        super().__init__(reason)


# ---------------------------------------------------------------------------
# null model / comparison
# ---------------------------------------------------------------------------


class AllTied(ControlTreeError):
    def __init__(self) -> None:
        super().__init__("null distribution has zero spread; z-scores undefined")


class NoCommonFirms(ControlTreeError):
    def __init__(self) -> None:
        super().__init__("snapshots share no firm ids")


class SimulationStepError(ControlTreeError):
    """Wraps an error raised while applying a restructuring event."""

    def __init__(self, step: int, cause: ControlTreeError):
        self.step = step
        self.cause = cause
        super().__init__(f"event {step}: {cause}")
