"""The SNARE cycle of one vesicle as a guarded state machine.

States are immutable; ``apply_event`` is a pure function of
(state, event, mode), memoised because the reachable state space is tiny.
``enumerate_paths`` does a bounded exhaustive search that the property
checks run over.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from .errors import IllegalTransition


class Phase(enum.Enum):
    CisComplex = "CisComplex"
    Particle20S = "Particle20S"
    UnfoldedTransitional = "UnfoldedTransitional"
    MasterBound = "MasterBound"
    RabEngaged = "RabEngaged"
    Docked = "Docked"
    CalciumTriggered = "CalciumTriggered"
    SytDetached = "SytDetached"
    FusedPoreOpen = "FusedPoreOpen"
    PoreDilated = "PoreDilated"
    KissAndRunClosed = "KissAndRunClosed"
    RecycledCis = "RecycledCis"


class EventKind(enum.Enum):
    NsfAtpBind = "NsfAtpBind"
    AtpHydrolysis = "AtpHydrolysis"
    MasterBind = "MasterBind"
    RabGtpBind = "RabGtpBind"
    Dock = "Dock"
    GtpHydrolysis = "GtpHydrolysis"
    CaInflux = "CaInflux"
    GateFire = "GateFire"
    GateBlock = "GateBlock"
    Fuse = "Fuse"
    PoreDilate = "PoreDilate"
    PoreClose = "PoreClose"
    Recycle = "Recycle"


class Mode(enum.Enum):
    Regulated = "Regulated"
    Constitutive = "Constitutive"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    payload: Optional[float] = None


@dataclass(frozen=True)
class SnareState:
    phase: Phase
    ca_bound: bool = False
    atp_hydrolyzed: bool = False
    rab_gtp: bool = False
    syt_clamped: bool = False

    @property
    def primed(self) -> bool:
        """Docked with GTP hydrolysed, i.e. the ternary complex is assembled."""
        return self.phase is Phase.Docked and not self.rab_gtp


EventLike = Union[EventKind, Event, str]

_PRE_DOCK = (Phase.CisComplex, Phase.Particle20S, Phase.UnfoldedTransitional, Phase.MasterBound, Phase.RabEngaged)
_POST_FUSION = (Phase.FusedPoreOpen, Phase.PoreDilated, Phase.KissAndRunClosed)

REGULATED_HAPPY_PATH = tuple(
    EventKind[k]
    for k in (
        "NsfAtpBind AtpHydrolysis MasterBind RabGtpBind Dock GtpHydrolysis CaInflux GateFire Fuse PoreDilate Recycle"
    ).split()
)
PRIMING = REGULATED_HAPPY_PATH[:6]


def initial_state(mode: Mode = Mode.Regulated) -> SnareState:
    return SnareState(Phase.CisComplex)


def _kind(e: EventLike) -> EventKind:
    if isinstance(e, Event):
        return e.kind
    if isinstance(e, str):
        return EventKind(e)
    return e


@lru_cache(maxsize=None)
def _successor(state: SnareState, kind: EventKind, mode: Mode) -> Optional[SnareState]:
    P, E = Phase, EventKind
    ph = state.phase
    regulated = mode is Mode.Regulated
    if kind is E.NsfAtpBind and ph in (P.CisComplex, P.RecycledCis):
        return SnareState(P.Particle20S)
    if kind is E.AtpHydrolysis and ph is P.Particle20S:
        return replace(state, phase=P.UnfoldedTransitional, atp_hydrolyzed=True)
    if kind is E.MasterBind and ph is P.UnfoldedTransitional:
        return replace(state, phase=P.MasterBound)
    if kind is E.RabGtpBind and ph is P.MasterBound:
        return replace(state, phase=P.RabEngaged, rab_gtp=True)
    if kind is E.Dock and ph is P.RabEngaged:
        return replace(state, phase=P.Docked, syt_clamped=True)
    if ph is P.Docked:
        if not regulated:
            if kind is E.Fuse:
                return replace(state, phase=P.FusedPoreOpen, syt_clamped=False, rab_gtp=False)
            return None
        if kind is E.GtpHydrolysis and state.rab_gtp:
            return replace(state, rab_gtp=False)
        if kind is E.CaInflux and not state.rab_gtp:
            return replace(state, phase=P.CalciumTriggered, ca_bound=True)
        return None
    if ph is P.CalciumTriggered and regulated:
        if kind is E.GateFire:
            return replace(state, phase=P.SytDetached, syt_clamped=False)
        if kind is E.GateBlock:
            # refractory reset: clamp re-engages and the bound Ca2+ is cleared
            return replace(state, phase=P.Docked, syt_clamped=True, ca_bound=False)
        return None
    if kind is E.Fuse and ph is P.SytDetached:
        return replace(state, phase=P.FusedPoreOpen)
    if ph is P.FusedPoreOpen:
        if kind is E.PoreDilate:
            return replace(state, phase=P.PoreDilated)
        if kind is E.PoreClose:
            return replace(state, phase=P.KissAndRunClosed)
        return None
    if kind is E.Recycle and ph in (P.PoreDilated, P.KissAndRunClosed):
        return SnareState(P.RecycledCis)
    return None


def legal_events(state: SnareState, mode: Mode = Mode.Regulated) -> frozenset[EventKind]:
    return frozenset(k for k in EventKind if _successor(state, k, mode) is not None)


def apply_event(state: SnareState, e: EventLike, mode: Mode = Mode.Regulated) -> SnareState:
    nxt = _successor(state, _kind(e), mode)
    if nxt is None:
        raise IllegalTransition(state, _kind(e).value)
    return nxt


def consistency_violations(state: SnareState) -> list[str]:
    """Phase/flag combinations the machine must never produce."""
    P = Phase
    ph = state.phase
    bad = []
    if ph is P.Docked and not (state.syt_clamped and not state.ca_bound):
        bad.append("Docked requires syt_clamped and no bound Ca2+")
    if ph is P.CalciumTriggered and not (state.ca_bound and state.syt_clamped):
        bad.append("CalciumTriggered requires ca_bound and syt_clamped")
    if ph is P.SytDetached and not (state.ca_bound and not state.syt_clamped):
        bad.append("SytDetached requires ca_bound and released clamp")
    if ph in _PRE_DOCK + (P.RecycledCis,) and (state.syt_clamped or state.ca_bound):
        bad.append("clamp or Ca2+ set before docking")
    if ph in _POST_FUSION and state.syt_clamped:
        bad.append("clamp engaged after fusion")
    if state.rab_gtp and ph not in (P.RabEngaged, P.Docked):
        bad.append("rab-GTP outside RabEngaged/Docked")
    if ph in (P.CisComplex, P.Particle20S, P.RecycledCis) and state.atp_hydrolyzed:
        bad.append("ATP hydrolysed before 20S disassembly")
    if ph not in (P.CisComplex, P.Particle20S, P.RecycledCis) and not state.atp_hydrolyzed:
        bad.append("assembly past 20S without ATP hydrolysis")
    return bad


@dataclass(frozen=True)
class TraceResult:
    final: SnareState
    visited: tuple[SnareState, ...]


def run_trace(events: Iterable[EventLike], mode: Mode = Mode.Regulated, start: Optional[SnareState] = None) -> TraceResult:
    """Fold ``apply_event`` over ``events``; IllegalTransition carries the failing index."""
    state = initial_state(mode) if start is None else start
    visited = [state]
    for i, e in enumerate(events):
        nxt = _successor(state, _kind(e), mode)
        if nxt is None:
            raise IllegalTransition(state, _kind(e).value, index=i)
        state = nxt
        visited.append(state)
    return TraceResult(state, tuple(visited))


def read_trace(text: str) -> list[EventKind]:
    """One event identifier per line; blank lines and ``#`` comments skipped."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(EventKind(line))
        except ValueError:
            raise ValueError(f"line {lineno}: unknown event {line!r}") from None
    return out


def write_trace(events: Sequence[EventLike]) -> str:
    return "".join(_kind(e).value + "\n" for e in events)


@dataclass(frozen=True)
class Path:
    events: tuple[EventKind, ...]
    states: tuple[SnareState, ...]

    @property
    def terminal(self) -> Phase:
        return self.states[-1].phase


@dataclass(frozen=True)
class PathReport:
    mode: Mode
    max_len: int
    paths: tuple[Path, ...]
    reachable: dict  # Phase -> (depth, witness events)

    def format(self) -> str:
        lines = [f"mode: {self.mode.value}", f"max_len: {self.max_len}", f"sequences: {len(self.paths)}"]
        for ph in Phase:
            if ph in self.reachable:
                depth, witness = self.reachable[ph]
                lines.append(f"{ph.value}\t{depth}\t{' '.join(e.value for e in witness) or '-'}")
            else:
                lines.append(f"{ph.value}\tunreachable\t-")
        return "\n".join(lines) + "\n"


def enumerate_paths(max_len: int, mode: Mode = Mode.Regulated) -> PathReport:
    """Every legal event sequence of length <= ``max_len`` from the initial state, breadth first."""
    if not 0 <= max_len <= 16:
        raise ValueError("max_len must lie in [0, 16]")
    start = Path((), (initial_state(mode),))
    paths = [start]
    reachable = {start.terminal: (0, ())}
    queue = deque([start])
    while queue:
        path = queue.popleft()
        if len(path.events) == max_len:
            continue
        state = path.states[-1]
        for kind in sorted(legal_events(state, mode), key=lambda k: k.value):
            nxt = _successor(state, kind, mode)
            child = Path(path.events + (kind,), path.states + (nxt,))
            paths.append(child)
            reachable.setdefault(nxt.phase, (len(child.events), child.events))
            queue.append(child)
    return PathReport(mode, max_len, tuple(paths), reachable)


def _cycles(path: Path):
    """Split a path into cycle iterations, each ending at a Recycle event."""
    start = 0
    for i, e in enumerate(path.events):
        if e is EventKind.Recycle:
            yield path.events[start : i + 1], path.states[start : i + 2]
            start = i + 1
    yield path.events[start:], path.states[start:]


def _ordered(events: Sequence[EventKind], first: EventKind, then: EventKind) -> bool:
    seen = False
    for e in events:
        if e is first:
            seen = True
        elif e is then and seen:
            return True
    return False


def fusion_requires_gate(report: PathReport) -> bool:
    """Each fusion is preceded, within its cycle, by CaInflux then GateFire."""
    for path in report.paths:
        for events, states in _cycles(path):
            for i, e in enumerate(events):
                if e is EventKind.Fuse and not _ordered(events[:i], EventKind.CaInflux, EventKind.GateFire):
                    return False
    return True


def ungated_fusion_witness(report: PathReport) -> Optional[Path]:
    for path in report.paths:
        if path.terminal is Phase.FusedPoreOpen and EventKind.CaInflux not in path.events:
            return path
    return None


def deadlock_free(report: PathReport) -> bool:
    return all(legal_events(s, report.mode) for p in report.paths for s in p.states)


def clamp_consistent(report: PathReport) -> bool:
    for p in report.paths:
        for s in p.states:
            if consistency_violations(s):
                return False
            if s.phase is Phase.Docked and not s.syt_clamped:
                return False
            if s.phase is Phase.SytDetached and s.syt_clamped:
                return False
    return True


def cycle_closes(report: PathReport) -> bool:
    return all(
        EventKind.NsfAtpBind in legal_events(s, report.mode)
        for p in report.paths
        for s in p.states
        if s.phase is Phase.RecycledCis
    )


def pore_outcomes_exclusive(report: PathReport) -> bool:
    for p in report.paths:
        for _, states in _cycles(p):
            phases = {s.phase for s in states[1:]}
            if Phase.PoreDilated in phases and Phase.KissAndRunClosed in phases:
                return False
    return True


def check_properties(max_len: int = 16) -> dict[str, bool]:
    """Run every model-checking property over both modes."""
    reg = enumerate_paths(max_len, Mode.Regulated)
    con = enumerate_paths(max_len, Mode.Constitutive)
    return {
        "regulated_fusion_requires_CaInflux_then_GateFire": fusion_requires_gate(reg),
        "constitutive_fusion_without_CaInflux_exists": ungated_fusion_witness(con) is not None,
        "no_deadlocks_regulated": deadlock_free(reg),
        "no_deadlocks_constitutive": deadlock_free(con),
        "clamp_flags_consistent_regulated": clamp_consistent(reg),
        "clamp_flags_consistent_constitutive": clamp_consistent(con),
        "cycle_closes": cycle_closes(reg) and cycle_closes(con),
        "pore_outcomes_exclusive": pore_outcomes_exclusive(reg) and pore_outcomes_exclusive(con),
    }
