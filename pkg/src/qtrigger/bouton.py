"""Monte Carlo release statistics for a presynaptic bouton.

Randomness comes from numpy's counter-based Philox generator keyed by the
64-bit seed. Impulse ``i`` always consumes counter block ``i`` (four 64-bit
words), so any sharding of the impulse range reproduces the sequential
draws exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import bisect
from scipy.stats import norm

from .constants import M_H
from .errors import NumericError, Unreachable
from .potentials import Potential1D
from .snare import PRIMING, EventKind, Mode, Phase, SnareState, apply_event, run_trace
from .tunneling1d import WkbParams, wkb_rate

TAU_RANGE = (10e-12, 15e-12)
DEFAULT_TAU = 12.5e-12
_U53 = 2.0**-53

RELEASE_EVENTS = (EventKind.CaInflux, EventKind.GateFire, EventKind.Fuse)
BLOCK_EVENTS = (EventKind.CaInflux, EventKind.GateBlock)
RECYCLE_EVENTS = (EventKind.PoreDilate, EventKind.Recycle)


def priming(mode: Mode) -> tuple[EventKind, ...]:
    """Events from the cis complex to a release-ready Docked vesicle.

    Constitutive vesicles fuse straight from Docked, without GTP hydrolysis.
    """
    return PRIMING if mode is Mode.Regulated else PRIMING[:5]


@dataclass(frozen=True)
class GateModel:
    """Tunnelling gate: rate ``rate_k`` acting over the coherence window ``tau``."""

    rate_k: float
    tau: float = DEFAULT_TAU
    bias: float = 1.0
    override_tau: bool = False

    def __post_init__(self):
        if not (self.rate_k >= 0 and math.isfinite(self.rate_k)):
            raise ValueError("rate_k must be finite and non-negative")
        if not self.bias >= 0:
            raise ValueError("bias must be non-negative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        lo, hi = TAU_RANGE
        if not self.override_tau and not (lo <= self.tau <= hi):
            raise ValueError(f"tau={self.tau:g} s outside the 10-15 ps coherence window")

    @property
    def p_gate(self) -> float:
        return gate_probability(self)


def gate_probability(g: GateModel) -> float:
    """Probability ``1 - exp(-k * bias * tau)`` that the gate fires in one window."""
    return -math.expm1(-g.rate_k * g.bias * g.tau)


@dataclass(frozen=True)
class BoutonConfig:
    gate: GateModel
    n_vesicles: int = 40
    seed: int = 0
    mode: Mode = Mode.Regulated

    def __post_init__(self):
        if self.n_vesicles < 1:
            raise ValueError("need at least one vesicle")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ImpulseOutcome:
    index: int
    released: bool
    vesicle: Optional[int]
    p_gate: float
    bias: float
    n_fused: int

    @property
    def label(self) -> str:
        return "Released" if self.released else "Silent"


@dataclass(frozen=True)
class ReleaseStats:
    impulses: int
    releases: int
    multi_release_violations: int
    outcomes: Optional[tuple[ImpulseOutcome, ...]] = field(default=None, repr=False, compare=False)

    @property
    def p_hat(self) -> float:
        return self.releases / self.impulses

    @property
    def ci95(self) -> float:
        return wilson_half_width(self.releases, self.impulses)

    def summary(self) -> dict:
        return {
            "impulses": self.impulses,
            "releases": self.releases,
            "p_hat": self.p_hat,
            "ci95": self.ci95,
            "multi_release_violations": self.multi_release_violations,
        }


def wilson_half_width(successes: int, n: int, confidence: float = 0.95) -> float:
    z = float(norm.ppf(0.5 + 0.5 * confidence))
    p = successes / n
    return z / (1.0 + z * z / n) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))


def primed_grid(n: int, mode: Mode = Mode.Regulated) -> list[SnareState]:
    return [run_trace(priming(mode), mode).final] * n


def _chain(state: SnareState, events, mode: Mode) -> SnareState:
    for e in events:
        state = apply_event(state, e, mode)
    return state


def _ready(s: SnareState, mode: Mode) -> bool:
    return s.primed if mode is Mode.Regulated else s.phase is Phase.Docked


def _impulse(
    vesicles: list[SnareState], mode: Mode, p: float, u_gate: float, u_select: float, logs=None, histories=None
) -> tuple[Optional[int], int]:
    """Advance the grid through one impulse in place; returns (winner, fused count).

    ``logs`` maps vesicle index to the events it has seen since priming
    began; completed cycles are moved into ``histories``.
    """
    # grid states are shared immutable instances: memoise by identity
    ready = {}
    docked = []
    for i, s in enumerate(vesicles):
        r = ready.get(id(s))
        if r is None:
            r = ready[id(s)] = _ready(s, mode)
        if r:
            docked.append(i)
    if not docked:
        return None, 0
    if mode is Mode.Constitutive:
        # no Ca2+ trigger or gate: one docked vesicle fuses per impulse
        fire, win_events, lose_events = True, (EventKind.Fuse,), ()
    else:
        fire, win_events, lose_events = u_gate < p, RELEASE_EVENTS, BLOCK_EVENTS
    winner = docked[min(int(u_select * len(docked)), len(docked) - 1)] if fire else None

    memo = {}
    for i in docked:
        s = vesicles[i]
        if i == winner:
            vesicles[i] = _chain(s, win_events, mode)
            if logs is not None:
                logs[i].extend(win_events)
        elif lose_events:
            nxt = memo.get(id(s))
            if nxt is None:
                nxt = memo[id(s)] = _chain(s, lose_events, mode)
            vesicles[i] = nxt
            if logs is not None:
                logs[i].extend(lose_events)
    fused = [i for i in docked if vesicles[i].phase is Phase.FusedPoreOpen]
    for i in fused:
        # recycling completes before the next impulse
        vesicles[i] = _chain(vesicles[i], RECYCLE_EVENTS + priming(mode), mode)
        if logs is not None:
            histories.append(tuple(logs[i]) + RECYCLE_EVENTS)
            logs[i] = list(priming(mode))
    return winner, len(fused)


def simulate_impulse(
    cfg: BoutonConfig, vesicles: list[SnareState], rng: np.random.Generator, bias: float = 1.0
) -> ImpulseOutcome:
    """One impulse on ``vesicles`` (mutated in place), drawing two uniforms from ``rng``."""
    u_gate, u_select = rng.random(2)
    p = gate_probability(replace(cfg.gate, bias=bias))
    winner, n_fused = _impulse(vesicles, cfg.mode, p, float(u_gate), float(u_select))
    return ImpulseOutcome(-1, winner is not None, winner, p, bias, n_fused)


def impulse_uniforms(seed: int, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """(u_gate, u_select) for impulses [start, stop): counter block i per impulse."""
    bg = np.random.Philox(key=seed)
    bg.advance(start)
    raw = bg.random_raw(4 * (stop - start)).reshape(-1, 4)
    return (raw[:, 0] >> np.uint64(11)) * _U53, (raw[:, 1] >> np.uint64(11)) * _U53


def _run_shard(cfg: BoutonConfig, start: int, stop: int, biases, record: bool, histories: bool):
    u_gate, u_select = impulse_uniforms(cfg.seed, start, stop)
    vesicles = primed_grid(cfg.n_vesicles, cfg.mode)
    p_cache = {}
    releases = violations = 0
    outcomes = [] if record else None
    hist = [] if histories else None
    logs = {i: list(priming(cfg.mode)) for i in range(cfg.n_vesicles)} if histories else None
    for k in range(stop - start):
        b = 1.0 if biases is None else float(biases[start + k])
        if b not in p_cache:
            p_cache[b] = gate_probability(replace(cfg.gate, bias=b))
        p = p_cache[b]
        winner, n_fused = _impulse(vesicles, cfg.mode, p, u_gate[k], u_select[k], logs, hist)
        releases += winner is not None
        violations += n_fused > 1
        if record:
            outcomes.append(ImpulseOutcome(start + k, winner is not None, winner, p, b, n_fused))
    return releases, violations, outcomes, hist


def run_trials(
    cfg: BoutonConfig,
    n_impulses: int,
    *,
    biases: Optional[Sequence[float]] = None,
    workers: int = 1,
    record: bool = False,
    histories: Optional[list] = None,
) -> ReleaseStats:
    """Repeat impulses on one bouton and collect release statistics.

    ``workers > 1`` shards the impulse range over processes; the merged
    counts equal the sequential run for the same seed.
    """
    if n_impulses < 1:
        raise ValueError("n_impulses must be >= 1")
    if biases is not None and len(biases) < n_impulses:
        raise ValueError("need one bias per impulse")
    want_hist = histories is not None
    if workers <= 1:
        parts = [_run_shard(cfg, 0, n_impulses, biases, record, want_hist)]
    else:
        bounds = np.linspace(0, n_impulses, workers + 1).astype(int)
        b = None if biases is None else list(biases[:n_impulses])
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [
                ex.submit(_run_shard, cfg, int(lo), int(hi), b, record, want_hist)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            parts = [f.result() for f in futs]
    releases = sum(p[0] for p in parts)
    violations = sum(p[1] for p in parts)
    outcomes = tuple(o for p in parts for o in p[2]) if record else None
    if want_hist:
        for p in parts:
            histories.extend(p[3])
    return ReleaseStats(n_impulses, releases, violations, outcomes)


@dataclass(frozen=True)
class Calibration:
    parameter: float
    p: float
    action: float
    rate: float
    potential: Potential1D


def _gate_for(template, x, M, E0, tau, bias):
    res = wkb_rate(WkbParams(template(x), E0, M))
    return gate_probability(GateModel(res.k, tau, bias)), res


def calibrate_gate(
    target_p: float,
    template: Callable[[float], Potential1D],
    bracket: tuple[float, float],
    *,
    M: float = M_H,
    E0: float,
    tau: float = DEFAULT_TAU,
    bias: float = 1.0,
) -> Calibration:
    """Bisect the template's free parameter until the gate probability hits ``target_p``.

    The parameter must move the action monotonically across ``bracket``.
    """
    if not 0.0 < target_p < 1.0:
        raise Unreachable(f"target probability {target_p} outside (0, 1)")
    lo, hi = bracket

    def f(x):
        return _gate_for(template, x, M, E0, tau, bias)[0] - target_p

    f_lo, f_hi = f(lo), f(hi)
    if f_lo * f_hi > 0:
        p_lo, p_hi = f_lo + target_p, f_hi + target_p
        raise Unreachable(f"target {target_p} outside attainable range [{min(p_lo, p_hi):.6g}, {max(p_lo, p_hi):.6g}]")
    x = bisect(f, lo, hi, xtol=1e-15 * max(abs(lo), abs(hi)), rtol=1e-13, maxiter=500)
    p, res = _gate_for(template, x, M, E0, tau, bias)
    if abs(p - target_p) >= 1e-4:
        raise NumericError(f"calibration missed target: {p:.6g} vs {target_p:.6g}")
    return Calibration(float(x), p, res.action_integral, res.k, template(x))


@dataclass(frozen=True)
class NetworkPattern:
    n_boutons: int
    active: np.ndarray = field(repr=False)

    @property
    def fraction_active(self) -> float:
        return float(np.mean(self.active))


def network_pattern(n_boutons: int, p_active: float = 0.25, seed: int = 0) -> NetworkPattern:
    if n_boutons < 1:
        raise ValueError("need at least one bouton")
    if not 0.0 <= p_active <= 1.0:
        raise ValueError("p_active must be a probability")
    rng = np.random.Generator(np.random.Philox(key=seed))
    return NetworkPattern(n_boutons, rng.random(n_boutons) < p_active)


def soliton_bias_hook(
    arrival,
    impulse_time: float,
    window: float,
    *,
    boost: float = 4.0,
    suppress: float = 0.25,
    inhibitory: bool = False,
) -> float:
    """Bias multiplier for an impulse given soliton arrival time(s) in seconds.

    An arrival inside ``[impulse_time - window, impulse_time]`` modulates
    the gate: ``boost`` for a facilitating soliton, ``suppress`` for an
    inhibitory one. Otherwise the bias is 1.
    """
    if not window > 0:
        raise ValueError("window must be positive")
    if arrival is None:
        return 1.0
    arrivals = np.atleast_1d(np.asarray(arrival, dtype=float))
    hit = np.any((arrivals >= impulse_time - window) & (arrivals <= impulse_time))
    if not hit:
        return 1.0
    return suppress if inhibitory else boost


def biases_for_impulses(arrivals: Sequence[float], n_impulses: int, period: float, window: float, **kw) -> np.ndarray:
    """Bias per impulse for impulses fired at ``i * period``."""
    arr = np.sort(np.asarray(arrivals, dtype=float))
    out = np.ones(n_impulses)
    for i in range(n_impulses):
        t = i * period
        j = np.searchsorted(arr, t - window, side="left")
        out[i] = soliton_bias_hook(arr[j : j + 1] if j < len(arr) else None, t, window, **kw)
    return out


def read_arrivals(text: str) -> list[float]:
    return [float(line) for line in text.split() if line.strip()]


def write_arrivals(times: Sequence[float]) -> str:
    return "".join(f"{t:.16e}\n" for t in times)
