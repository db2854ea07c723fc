"""Collapse-free branch tracking for the two-photon experiment.

Nothing ever collapses here. A measurement is a local event: within every
branch it splits the measuring observer's world according to that observer's
possible outcomes, sets that observer's own record, and leaves the distant
observer's record (and branch count, as seen locally) untouched. Only a
later communication event -- located at the recipient's station -- lets an
observer distinguish branches by the other station's result.

Branches carry signed real amplitudes. The squared amplitude is the branch
weight; summed per joint outcome it reproduces the collapse interpretation's
joint distribution exactly, which is what makes the two accounts
statistically indistinguishable.

Branch pair states are stored as polarization-axis labels rather than raw
amplitude vectors. Axis arithmetic with exact degree trigonometry makes
impossible outcomes come out at exactly 0.0 amplitude, so zero-weight
branches are pruned without any tolerance: an equal-angle run produces two
branches, never four.

Event locations are the abstract labels ``source``, ``station1``,
``station2``; the locality audit needs only "which station", not geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .angles import cos_deg, sin_deg
from .polarization import (
    Outcome,
    TwoPhotonState,
    expand_in_basis,
    product_state,
    twin_state,
)

__all__ = [
    "AlreadyMeasured",
    "SenderHasNotMeasured",
    "NotFullyMeasured",
    "ObserverRecord",
    "Branch",
    "LogEntry",
    "BranchState",
    "LocalityReport",
    "initial_state",
    "local_measure",
    "communicate",
    "distinguishable_records",
    "locality_audit",
    "branch_statistics",
    "per_branch_expansion",
    "export_trace",
]


class AlreadyMeasured(RuntimeError):
    """The observer has already measured in some branch."""


class SenderHasNotMeasured(RuntimeError):
    """Cannot communicate a result that does not exist yet."""


class NotFullyMeasured(RuntimeError):
    """The operation needs both outcomes to be definite."""


@dataclass(frozen=True)
class ObserverRecord:
    """What one experimenter has written down: own result, other's result.

    ``None`` stands for not-yet-known.
    """

    own: Outcome | None = None
    other: Outcome | None = None


@dataclass(frozen=True)
class Branch:
    """One component of the uncollapsed superposition.

    ``axis1_deg``/``axis2_deg`` are the photons' polarization axes once
    definite (None before any measurement, when the pair is still the twin
    state). The observer's own outcome lives in its record; the axes encode
    the same fact plus the filter orientation that produced it.
    """

    amplitude: float
    axis1_deg: float | None
    axis2_deg: float | None
    record1: ObserverRecord
    record2: ObserverRecord

    def __post_init__(self) -> None:
        if self.amplitude == 0.0:
            raise ValueError("zero-amplitude branches must be pruned, not stored")

    @property
    def photon_state(self) -> TwoPhotonState:
        if self.axis1_deg is None:
            return twin_state()
        return product_state(self.axis1_deg, self.axis2_deg)

    def record(self, observer: int) -> ObserverRecord:
        return self.record1 if observer == 1 else self.record2

    def _key(self) -> tuple:
        return (self.axis1_deg, self.axis2_deg, self.record1, self.record2)


@dataclass(frozen=True)
class LogEntry:
    """One event plus the record-count bookkeeping right after it."""

    kind: str       # "source" | "measure" | "communicate"
    location: str   # "source" | "station1" | "station2"
    params: dict
    records1: int
    records2: int


@dataclass(frozen=True)
class LocalityReport:
    passed: bool
    violating_event_index: int | None = None
    detail: str = ""


@dataclass(frozen=True)
class BranchState:
    """Immutable snapshot: the branch set and the causally ordered event log."""

    branches: tuple[Branch, ...]
    event_log: tuple[LogEntry, ...]

    def __post_init__(self) -> None:
        total = sum(b.amplitude * b.amplitude for b in self.branches)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"branch weights sum to {total!r}, not 1")
        keys = [b._key() for b in self.branches]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate branches (same pair state and records)")


def _station(observer: int) -> str:
    if observer not in (1, 2):
        raise ValueError(f"observer must be 1 or 2, got {observer!r}")
    return f"station{observer}"


def _counts(branches: Iterable[Branch], observer: int) -> int:
    return len({b.record(observer) for b in branches})


def _append(
    branches: Sequence[Branch],
    log: tuple[LogEntry, ...],
    kind: str,
    location: str,
    params: dict,
) -> BranchState:
    entry = LogEntry(
        kind=kind,
        location=location,
        params=params,
        records1=_counts(branches, 1),
        records2=_counts(branches, 2),
    )
    return BranchState(tuple(branches), log + (entry,))


def initial_state() -> BranchState:
    """Single branch holding the twin pair, produced at one source point."""
    root = Branch(
        amplitude=1.0,
        axis1_deg=None,
        axis2_deg=None,
        record1=ObserverRecord(),
        record2=ObserverRecord(),
    )
    return _append([root], (), "source", "source", {})


def local_measure(bs: BranchState, observer: int, theta_deg: float) -> BranchState:
    """Observer ``observer`` measures at ``theta_deg``; branching is local.

    Every branch splits into the local outcomes of nonzero amplitude. The
    child amplitude is the parent amplitude times the conditional amplitude
    of that outcome in the branch's pair state. Only the measuring
    observer's record changes.
    """
    station = _station(observer)
    if any(b.record(observer).own is not None for b in bs.branches):
        raise AlreadyMeasured(f"observer {observer} has already measured")

    children: list[Branch] = []
    for b in bs.branches:
        for outcome, factor, axis in _local_outcomes(b, observer, theta_deg):
            if factor == 0.0:
                continue  # exact zero: the outcome cannot occur in this branch
            rec = ObserverRecord(own=outcome, other=b.record(observer).other)
            if observer == 1:
                axes = (axis, axis if b.axis2_deg is None else b.axis2_deg)
                recs = (rec, b.record2)
            else:
                axes = (axis if b.axis1_deg is None else b.axis1_deg, axis)
                recs = (b.record1, rec)
            children.append(
                Branch(b.amplitude * factor, axes[0], axes[1], recs[0], recs[1])
            )
    return _append(
        children, bs.event_log, "measure", station,
        {"observer": observer, "theta_deg": float(theta_deg)},
    )


def _local_outcomes(
    b: Branch, observer: int, theta_deg: float
) -> list[tuple[Outcome, float, float]]:
    """(outcome, amplitude factor, new axis for the measured photon)."""
    own_axis = b.axis1_deg if observer == 1 else b.axis2_deg
    if own_axis is None:
        # Twin pair: both outcomes weigh 1/sqrt(2); either way the partner
        # photon's axis is fixed to the same direction at the source's behest.
        r = 1.0 / math.sqrt(2.0)
        return [
            (Outcome.TRANSMITTED, r, float(theta_deg)),
            (Outcome.ABSORBED, r, float(theta_deg) + 90.0),
        ]
    delta = own_axis - theta_deg
    return [
        (Outcome.TRANSMITTED, cos_deg(delta), float(theta_deg)),
        (Outcome.ABSORBED, sin_deg(delta), float(theta_deg) + 90.0),
    ]


def communicate(bs: BranchState, from_observer: int, to_observer: int) -> BranchState:
    """Deliver the sender's result to the recipient, branch by branch.

    The event happens where the message lands: at the recipient's station.
    Branch count and amplitudes are untouched; only the recipient's "other"
    record field fills in, which may let the recipient distinguish more
    branches.
    """
    _station(from_observer)
    station = _station(to_observer)
    if from_observer == to_observer:
        raise ValueError("sender and recipient must differ")
    if any(b.record(from_observer).own is None for b in bs.branches):
        raise SenderHasNotMeasured(f"observer {from_observer} has not measured yet")

    children = []
    for b in bs.branches:
        sent = b.record(from_observer).own
        rec = ObserverRecord(own=b.record(to_observer).own, other=sent)
        if to_observer == 1:
            children.append(Branch(b.amplitude, b.axis1_deg, b.axis2_deg, rec, b.record2))
        else:
            children.append(Branch(b.amplitude, b.axis1_deg, b.axis2_deg, b.record1, rec))
    return _append(
        children, bs.event_log, "communicate", station,
        {"from_observer": from_observer, "to_observer": to_observer},
    )


def distinguishable_records(bs: BranchState, observer: int) -> int:
    """How many distinct record values the observer is split across."""
    _station(observer)
    return _counts(bs.branches, observer)


def locality_audit(bs: BranchState | Sequence[LogEntry]) -> LocalityReport:
    """Check that record counts only ever changed at the event's own station.

    Replays the logged history: for every event after the first, a change in
    observer ``o``'s distinguishable-record count demands that the event be
    located at station ``o``. Accepts a BranchState (whose final counts are
    also cross-checked against its branches) or a bare event log.
    """
    if isinstance(bs, BranchState):
        entries: Sequence[LogEntry] = bs.event_log
        final = bs.branches
    else:
        entries, final = bs, None

    prev: LogEntry | None = None
    for i, entry in enumerate(entries):
        if prev is not None:
            for observer, before, after in (
                (1, prev.records1, entry.records1),
                (2, prev.records2, entry.records2),
            ):
                if after != before and entry.location != _station(observer):
                    return LocalityReport(
                        passed=False,
                        violating_event_index=i,
                        detail=(
                            f"event {i} ({entry.kind}@{entry.location}) changed "
                            f"observer {observer}'s records {before} -> {after}"
                        ),
                    )
        prev = entry

    if final is not None and entries:
        last = entries[-1]
        got = (_counts(final, 1), _counts(final, 2))
        if got != (last.records1, last.records2):
            return LocalityReport(
                passed=False,
                violating_event_index=len(entries) - 1,
                detail=f"log claims record counts {(last.records1, last.records2)}, "
                       f"branches show {got}",
            )
    return LocalityReport(passed=True)


def branch_statistics(bs: BranchState) -> dict[tuple[Outcome, Outcome], float]:
    """Total weight (squared amplitude) per joint outcome pair."""
    stats: dict[tuple[Outcome, Outcome], float] = {}
    for b in bs.branches:
        o1, o2 = b.record1.own, b.record2.own
        if o1 is None or o2 is None:
            raise NotFullyMeasured("both observers must measure first")
        key = (o1, o2)
        stats[key] = stats.get(key, 0.0) + b.amplitude * b.amplitude
    return stats


def per_branch_expansion(branch: Branch, basis_deg: float) -> np.ndarray:
    """Expand the branch's post-measurement product state in a rotated basis.

    Within a single branch the pair is *not* the twin state any more: at a
    generic basis the expansion puts nonzero weight on mismatched components,
    i.e. the branch carries no perfect correlation to be counterfactually
    definite about.
    """
    if branch.record1.own is None or branch.record2.own is None:
        raise NotFullyMeasured("branch must have both outcomes definite")
    return expand_in_basis(branch.photon_state, basis_deg)


def export_trace(bs: BranchState) -> dict:
    """JSON-ready trace: ``{"events": [...], "branches": [...]}``, stable order."""
    events = [
        {
            "kind": e.kind,
            "location": e.location,
            "params": e.params,
            "records1": e.records1,
            "records2": e.records2,
        }
        for e in bs.event_log
    ]
    branches = [
        {
            "amplitude": b.amplitude,
            "outcomes": [
                None if b.record1.own is None else b.record1.own.value,
                None if b.record2.own is None else b.record2.own.value,
            ],
            "record1": _record_obj(b.record1),
            "record2": _record_obj(b.record2),
        }
        for b in bs.branches
    ]
    return {"events": events, "branches": branches}


def _record_obj(rec: ObserverRecord) -> dict:
    return {
        "own": None if rec.own is None else rec.own.value,
        "other": None if rec.other is None else rec.other.value,
    }
