"""Named experiments: each turns a validated config into CSV/text outputs and a manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .bouton import (
    BoutonConfig,
    GateModel,
    biases_for_impulses,
    calibrate_gate,
    network_pattern,
    run_trials,
    write_arrivals,
)
from .config import ExperimentConfig
from .errors import InvariantViolation
from .potentials import DoubleWell, Harmonic, InvertedParabola, RectangularBarrier, Tabulated, natural_model
from .snare import Mode, check_properties, enumerate_paths, read_trace, run_trace as snare_run_trace
from .soliton import UnitScale, arrival_times, init_kink, measure_velocity, run_trace, to_physical
from .tunneling1d import ArrheniusParams, WkbParams, solve_spectrum_1d, temperature_scan, wkb_rate, wkb_vs_exact_report
from .tunneling2d import classify_regions, excitation_effect, scan_grid, solve_spectrum_2d

MANIFEST = "manifest.json"


def fmt(x) -> str:
    """Round-trip decimal text for floats; plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


@dataclass(frozen=True)
class RunManifest:
    experiment: str
    config_hash: str
    version: str
    seed: int
    wall_time_s: float
    outputs: tuple[tuple[str, str], ...]  # (file name, sha256)
    summary: dict

    def to_json(self) -> str:
        d = asdict(self)
        d["outputs"] = [{"file": f, "sha256": h} for f, h in self.outputs]
        return json.dumps(d, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    return str(x)


class Outputs:
    """Collects output files as ``.partial`` and renames them on commit."""

    def __init__(self, directory: str | os.PathLike):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def text(self, name: str, content: str):
        with open(self.dir / (name + ".partial"), "w", newline="") as fh:
            fh.write(content)
        self.files.append(name)

    def csv(self, name: str, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
        self.text(name, buf.getvalue())

    def commit(self) -> tuple[tuple[str, str], ...]:
        out = []
        for name in self.files:
            final = self.dir / name
            os.replace(self.dir / (name + ".partial"), final)
            out.append((name, hashlib.sha256(final.read_bytes()).hexdigest()))
        return tuple(out)


# -- builders ---------------------------------------------------------------


def build_potential(sec: dict):
    kind = sec["kind"]
    if kind == "double_well":
        return DoubleWell.from_height(sec["height"], sec["a"])
    if kind == "rectangular":
        return RectangularBarrier(sec["V0"], sec["L"])
    if kind == "harmonic":
        return Harmonic(sec["M"], sec["omega"])
    if kind == "inverted_parabola":
        w = sec["half_width"]
        return InvertedParabola(sec["V0"], 2.0 * sec["V0"] / (w * w))
    if kind == "tabulated":
        return Tabulated(tuple(sec["q"]), tuple(sec["V"]))
    raise ValueError(f"unknown potential kind {kind!r}")


def build_model(sec: dict):
    return natural_model(sec["kind"], sec["g"], sec["s"], barrier=sec["barrier"], omega_t=sec["omega_t"], a=sec["a"], mass=sec["M"])


def _template(sec: dict) -> Callable:
    if sec["template"] == "rectangular_width":
        V0 = sec["V0"]
        return lambda L: RectangularBarrier(V0, L)
    L = sec["L"]
    return lambda V0: RectangularBarrier(V0, L)


def _calibrate(cal: dict, gate: dict, bias: float = 1.0):
    return calibrate_gate(
        cal["target_p"], _template(cal), (cal["lo"], cal["hi"]), M=cal["M"], E0=cal["E0"], tau=gate["tau"], bias=bias
    )


def _gate(p: dict, out_summary: dict) -> GateModel:
    gate, cal = p["gate"], p.get("calibration")
    if cal:
        c = _calibrate(cal, gate)
        out_summary["calibration"] = {"parameter": c.parameter, "p_gate": c.p, "action": c.action, "rate_per_s": c.rate}
        return GateModel(c.rate, gate["tau"], gate["bias"])
    if gate["rate_k"] is None:
        raise ValueError("[gate] rate_k is required without a [calibration] section")
    return GateModel(gate["rate_k"], gate["tau"], gate["bias"])


# -- experiments ------------------------------------------------------------


def exp_rates(cfg: ExperimentConfig, out: Outputs) -> dict:
    r = cfg.parameters["rates"]
    if r["T"] is not None:
        temps = list(r["T"])
    else:
        n = int(math.floor((r["T_stop"] - r["T_start"]) / r["T_step"] + 1e-9)) + 1
        temps = [r["T_start"] + i * r["T_step"] for i in range(n)]
    pot = build_potential(cfg.parameters["barrier"])
    rows = temperature_scan(ArrheniusParams(r["V_C"], r["E_A"], temps[0]), WkbParams(pot, r["E0"], r["M"]), temps)
    out.csv("rates.csv", ("T_K", "k_thermal_per_s", "k_tunnel_per_s"), ((x.T, x.k_thermal, x.k_tunnel) for x in rows))
    res = wkb_rate(WkbParams(pot, r["E0"], r["M"]))
    return {"rows": len(rows), "k_tunnel_per_s": res.k, "action": res.action_integral}


def exp_spectrum1d(cfg: ExperimentConfig, out: Outputs) -> dict:
    s = cfg.parameters["spectrum1d"]
    pot = build_potential(cfg.parameters["potential"])
    lo, hi = pot.domain
    lo = lo if s["extent_min"] is None else s["extent_min"]
    hi = hi if s["extent_max"] is None else s["extent_max"]
    spec = solve_spectrum_1d(pot, s["M"], ((lo, hi), s["points"]), s["n_states"])
    out.csv("spectrum.csv", ("n", "energy_J"), enumerate(spec.energies.tolist()))
    summary = {"energies_J": spec.energies.tolist()}
    if isinstance(pot, DoubleWell):
        w = wkb_vs_exact_report(pot, s["M"], ((lo, hi), s["points"]))
        summary["wkb_comparison"] = asdict(w)
    return summary


def _spectrum2d(cfg):
    g = cfg.parameters["spectrum2d"]
    m = build_model(cfg.parameters["model"])
    return m, solve_spectrum_2d(m, g["points"], g["n_states"])


def exp_spectrum2d(cfg: ExperimentConfig, out: Outputs) -> dict:
    _, spec = _spectrum2d(cfg)
    rows = []
    for i, lv in enumerate(spec.levels):
        lab = lv.label
        rows.append(
            (i, lv.energy, *(("", "", "") if lab is None else (lab.n_t, lab.d, "+" if lab.parity > 0 else "-")), lv.overlap)
        )
    out.csv("levels.csv", ("index", "energy_J", "n_t", "d", "parity", "overlap"), rows)
    out.csv("splittings.csv", ("n_t", "delta_E_J"), enumerate(spec.splitting_series))
    return {"splitting_series_J": list(spec.splitting_series), "ambiguous_levels": sum(lv.ambiguous for lv in spec.levels)}


def exp_regions(cfg: ExperimentConfig, out: Outputs) -> dict:
    r = cfg.parameters["regions"]
    m, spec = _spectrum2d(cfg)
    level = spec.find(r["n_t"], r["d"], 1 if r["parity"] == "+" else -1)
    rm = classify_regions(m, level, cfg.parameters["spectrum2d"]["points"])
    out.csv(
        "regions.csv",
        ("i", "j", "xi", "eta", "class"),
        rm.rows(),
    )
    return {"level_energy_J": rm.energy, "counts": {c.name: n for c, n in rm.counts().items()}}


def exp_excitation(cfg: ExperimentConfig, out: Outputs) -> dict:
    e = cfg.parameters["excitation"]
    g = cfg.parameters["spectrum2d"]
    if not e["scan"]:
        m = build_model(cfg.parameters["model"])
        eff = excitation_effect(m, e["n_levels"], e["tol"], points=g["points"], n_states=g["n_states"])
        out.csv(
            "excitation.csv",
            ("n_t", "delta_E_J", "verdict"),
            ((n, d, eff.verdict.value) for n, d in enumerate(eff.series)),
        )
        return {"verdict": eff.verdict.value, "series_J": list(eff.series)}
    base = cfg.parameters["model"]
    rows, verdicts = [], []
    for kind, gg, ss in scan_grid():
        m = natural_model(kind, gg, ss, barrier=base["barrier"], omega_t=base["omega_t"], a=base["a"], mass=base["M"])
        eff = excitation_effect(m, e["n_levels"], e["tol"], points=g["points"], n_states=g["n_states"])
        verdicts.append({"kind": kind.value, "g": gg, "s": ss, "verdict": eff.verdict.value})
        rows.extend((kind.value, gg, ss, n, d, eff.verdict.value) for n, d in enumerate(eff.series))
    out.csv("excitation_scan.csv", ("kind", "g", "s", "n_t", "delta_E_J", "verdict"), rows)
    return {"scan": verdicts}


def _scale(s: dict) -> UnitScale:
    return UnitScale.from_speed(s["length_unit"], s["c_star"])


def exp_soliton(cfg: ExperimentConfig, out: Outputs) -> dict:
    s = cfg.parameters["soliton"]
    state = init_kink(s["v"], (s["N"], s["dx"]), s["x0"])
    dt = 0.5 * s["dx"] if s["dt"] is None else s["dt"]
    _, trace = run_trace(state, dt, s["steps"], s["stride"])
    out.csv("trace.csv", ("t", "center", "energy"), ((p.t, p.center, p.energy) for p in trace))
    fit = measure_velocity([(p.t, p.center) for p in trace], s["dx"])
    e0 = trace[0].energy
    drift = max(abs(p.energy - e0) for p in trace) / e0
    return {
        "velocity": fit.velocity,
        "residual_rms": fit.residual_rms,
        "velocity_m_per_s": to_physical(fit.velocity, _scale(s)),
        "energy": e0,
        "relative_energy_drift": drift,
    }


def exp_snare_trace(cfg: ExperimentConfig, out: Outputs) -> dict:
    s = cfg.parameters["snare"]
    mode = Mode(s["mode"])
    events = read_trace(Path(s["trace_file"]).read_text())
    res = snare_run_trace(events, mode)
    rows = []
    for i, st in enumerate(res.visited):
        ev = "" if i == 0 else events[i - 1].value
        rows.append((i, ev, st.phase.value, st.ca_bound, st.atp_hydrolyzed, st.rab_gtp, st.syt_clamped))
    out.csv("states.csv", ("step", "event", "phase", "ca_bound", "atp_hydrolyzed", "rab_gtp", "syt_clamped"), rows)
    return {"events": len(events), "final_phase": res.final.phase.value}


def exp_snare_check(cfg: ExperimentConfig, out: Outputs) -> dict:
    depth = cfg.parameters["snare"]["depth"]
    props = check_properties(depth)
    report = "".join(enumerate_paths(depth, m).format() + "\n" for m in Mode)
    report += "".join(f"{k}\t{'holds' if v else 'FAILS'}\n" for k, v in props.items())
    out.text("snare_report.txt", report)
    failed = [k for k, v in props.items() if not v]
    if failed:
        raise InvariantViolation(f"properties failed at depth {depth}: {', '.join(failed)}")
    return {"depth": depth, "properties": props}


def _bouton_csv(out: Outputs, stats):
    out.csv(
        "bouton.csv",
        ("impulse", "outcome", "vesicle", "p_gate", "bias"),
        ((o.index, o.label, o.vesicle, o.p_gate, o.bias) for o in stats.outcomes),
    )


def _check_release(stats):
    if stats.multi_release_violations:
        raise InvariantViolation(f"{stats.multi_release_violations} impulses released more than one vesicle")


def _bouton_run(cfg, gate, biases=None):
    b = cfg.parameters["bouton"]
    bc = BoutonConfig(gate, b["n_vesicles"], cfg.seed, Mode(b["mode"]))
    return run_trials(bc, b["impulses"], biases=biases, workers=b["workers"], record=True)


def _band(summary, cfg, stats):
    b = cfg.parameters["bouton"]
    summary["band"] = [b["band_lo"], b["band_hi"]]
    summary["in_band"] = b["band_lo"] <= stats.p_hat <= b["band_hi"]


def exp_bouton(cfg: ExperimentConfig, out: Outputs) -> dict:
    summary: dict = {}
    gate = _gate(cfg.parameters, summary)
    stats = _bouton_run(cfg, gate)
    _bouton_csv(out, stats)
    summary.update(stats.summary(), p_gate=gate.p_gate)
    _band(summary, cfg, stats)
    _check_release(stats)
    return summary


def exp_calibrate(cfg: ExperimentConfig, out: Outputs) -> dict:
    c = _calibrate(cfg.parameters["calibration"], cfg.parameters["gate"])
    out.csv(
        "calibration.csv",
        ("template", "parameter", "p_gate", "action", "rate_per_s"),
        [(cfg.parameters["calibration"]["template"], c.parameter, c.p, c.action, c.rate)],
    )
    return {"parameter": c.parameter, "p_gate": c.p, "action": c.action, "rate_per_s": c.rate}


def exp_network(cfg: ExperimentConfig, out: Outputs) -> dict:
    n = cfg.parameters["network"]
    pat = network_pattern(n["n_boutons"], n["p_active"], cfg.seed)
    out.csv("network.csv", ("bouton", "active"), ((i, int(a)) for i, a in enumerate(pat.active)))
    return {"n_boutons": pat.n_boutons, "fraction_active": pat.fraction_active}


def exp_pipeline(cfg: ExperimentConfig, out: Outputs) -> dict:
    s, pl = cfg.parameters["soliton"], cfg.parameters["pipeline"]
    n_imp = cfg.parameters["bouton"]["impulses"]
    horizon = n_imp * pl["period"]
    starts = np.arange(0.0, horizon, pl["launch_period"])
    arrivals = arrival_times(starts, pl["distance"], s["v"], _scale(s), (s["N"], s["dx"]))
    out.text("arrivals.txt", write_arrivals(arrivals))
    biases = biases_for_impulses(
        arrivals, n_imp, pl["period"], pl["window"], boost=pl["boost"], suppress=pl["suppress"], inhibitory=pl["inhibitory"]
    )
    summary: dict = {}
    gate = _gate(cfg.parameters, summary)
    stats = _bouton_run(cfg, gate, biases)
    _bouton_csv(out, stats)
    summary.update(stats.summary(), arrivals=len(arrivals), modulated_impulses=int(np.count_nonzero(biases != 1.0)))
    _band(summary, cfg, stats)
    _check_release(stats)
    return summary


EXPERIMENT_RUNNERS: dict[str, Callable[[ExperimentConfig, Outputs], dict]] = {
    "rates": exp_rates,
    "spectrum1d": exp_spectrum1d,
    "spectrum2d": exp_spectrum2d,
    "regions": exp_regions,
    "excitation": exp_excitation,
    "soliton": exp_soliton,
    "snare_trace": exp_snare_trace,
    "snare_check": exp_snare_check,
    "bouton": exp_bouton,
    "calibrate": exp_calibrate,
    "network": exp_network,
    "pipeline": exp_pipeline,
}


def run(cfg: ExperimentConfig, output_dir: Optional[str | os.PathLike] = None) -> RunManifest:
    """Execute ``cfg`` and write its outputs plus ``manifest.json``.

    On any error the data files stay as ``*.partial`` and no manifest is written.
    """
    directory = Path(output_dir if output_dir is not None else cfg.output_dir)
    out = Outputs(directory)
    manifest_path = directory / MANIFEST
    if manifest_path.exists():
        manifest_path.unlink()
    t0 = time.perf_counter()
    summary = EXPERIMENT_RUNNERS[cfg.experiment](cfg, out)
    files = out.commit()
    man = RunManifest(cfg.experiment, cfg.digest(), __version__, cfg.seed, time.perf_counter() - t0, files, summary)
    tmp = directory / (MANIFEST + ".partial")
    tmp.write_text(man.to_json())
    os.replace(tmp, manifest_path)
    return man


__all__ = ["RunManifest", "Outputs", "run", "EXPERIMENT_RUNNERS", "build_potential", "build_model"]
