"""Experiment config files: INI-style ``key = value`` sections with strict units.

Every physical quantity must carry a unit suffix (``E_A = 0.5 eV``);
dimensionless values must not. All problems in a file are collected and
reported together.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .constants import ANGSTROM, M_H
from .errors import ConfigError, ParseError, UnitError, UnknownKey
from .units import UNITS, parse_number, parse_quantity

REQUIRED = object()

EXPERIMENTS = (
    "rates",
    "spectrum1d",
    "spectrum2d",
    "regions",
    "excitation",
    "soliton",
    "snare_trace",
    "snare_check",
    "bouton",
    "calibrate",
    "network",
    "pipeline",
)


@dataclass(frozen=True)
class Param:
    kind: str
    default: Any = REQUIRED
    choices: tuple = ()
    many: bool = False


def _p(kind, default=REQUIRED, *choices, many=False):
    return Param(kind, default, tuple(choices), many)


RUN = {
    "experiment": _p("choice", REQUIRED, *EXPERIMENTS),
    "seed": _p("int", 0),
    "output_dir": _p("str", "out"),
}

POTENTIAL_KINDS = {
    "double_well": {"height": _p("energy"), "a": _p("length")},
    "rectangular": {"V0": _p("energy"), "L": _p("length")},
    "harmonic": {"omega": _p("angular_frequency"), "M": _p("mass", M_H)},
    "inverted_parabola": {"V0": _p("energy"), "half_width": _p("length")},
    "tabulated": {"q": _p("length", many=True), "V": _p("energy", many=True)},
}

MODEL = {
    "kind": _p("choice", REQUIRED, "smc", "asmc", "squeezed"),
    "barrier": _p("float", 12.0),
    "omega_t": _p("float", 4.0),
    "g": _p("float", 0.0),
    "s": _p("float", 0.0),
    "a": _p("length", 0.3 * ANGSTROM),
    "M": _p("mass", M_H),
}
GRID2D = {"points": _p("int", 128), "n_states": _p("int", 24)}
SOLITON = {
    "v": _p("float", 0.5),
    "N": _p("int", 2048),
    "dx": _p("float", 0.1),
    "dt": _p("float", None),
    "steps": _p("int", 2000),
    "stride": _p("int", 100),
    "x0": _p("float", None),
    "length_unit": _p("length", 8e-9),
    "c_star": _p("speed", 280.0),
}
BOUTON = {
    "n_vesicles": _p("int", 40),
    "impulses": _p("int", 100000),
    "mode": _p("choice", "Regulated", "Regulated", "Constitutive"),
    "workers": _p("int", 1),
    "band_lo": _p("float", 0.16),
    "band_hi": _p("float", 0.30),
}
GATE = {"rate_k": _p("rate", None), "tau": _p("time", 12.5e-12), "bias": _p("float", 1.0)}
CALIBRATION = {
    "target_p": _p("float"),
    "template": _p("choice", "rectangular_width", "rectangular_width", "rectangular_height"),
    "V0": _p("energy", None),
    "L": _p("length", None),
    "E0": _p("energy"),
    "M": _p("mass", M_H),
    "lo": _p("bracket"),
    "hi": _p("bracket"),
}

SCHEMAS: dict[str, dict[str, Any]] = {
    "rates": {
        "rates": {
            "V_C": _p("rate"),
            "E_A": _p("energy"),
            "T": _p("temperature", None, many=True),
            "T_start": _p("temperature", None),
            "T_stop": _p("temperature", None),
            "T_step": _p("temperature", None),
            "E0": _p("energy"),
            "M": _p("mass", M_H),
        },
        "barrier": "potential",
    },
    "spectrum1d": {
        "spectrum1d": {
            "M": _p("mass", M_H),
            "points": _p("int", 2048),
            "n_states": _p("int", 6),
            "extent_min": _p("length", None),
            "extent_max": _p("length", None),
        },
        "potential": "potential",
    },
    "spectrum2d": {"model": MODEL, "spectrum2d": GRID2D},
    "regions": {
        "model": MODEL,
        "spectrum2d": GRID2D,
        "regions": {"n_t": _p("int", 0), "d": _p("int", 0), "parity": _p("choice", "+", "+", "-")},
    },
    "excitation": {
        "model": MODEL,
        "spectrum2d": GRID2D,
        "excitation": {"n_levels": _p("int", 3), "tol": _p("float", 1e-2), "scan": _p("bool", False)},
    },
    "soliton": {"soliton": SOLITON},
    "snare_trace": {"snare": {"mode": _p("choice", "Regulated", "Regulated", "Constitutive"), "trace_file": _p("str")}},
    "snare_check": {"snare": {"depth": _p("int", 16)}},
    "bouton": {"bouton": BOUTON, "gate": GATE, "calibration": ("optional", CALIBRATION)},
    "calibrate": {"calibration": CALIBRATION, "gate": GATE},
    "network": {"network": {"n_boutons": _p("int", 10000), "p_active": _p("float", 0.25)}},
    "pipeline": {
        "soliton": SOLITON,
        "pipeline": {
            "distance": _p("float", 10.0),
            "impulses": _p("int", 100000),
            "period": _p("time", 1e-9),
            "launch_period": _p("time", 4e-9),
            "window": _p("time", 1e-9),
            "boost": _p("float", 4.0),
            "suppress": _p("float", 0.25),
            "inhibitory": _p("bool", False),
        },
        "bouton": BOUTON,
        "gate": GATE,
        "calibration": CALIBRATION,
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict
    output_dir: str
    seed: int
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    def section(self, name: str) -> Optional[dict]:
        return self.parameters.get(name)

    def digest(self) -> str:
        """SHA-256 of the resolved parameters, experiment and seed."""
        blob = json.dumps(
            {"experiment": self.experiment, "seed": self.seed, "parameters": self.parameters},
            sort_keys=True,
            default=repr,
        )
        return hashlib.sha256(blob.encode()).hexdigest()


def _line_index(text: str) -> dict:
    """(section, key) -> 1-based line number, for error messages."""
    out, section = {}, None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]$", s)
        if m:
            section = m.group(1).strip()
            out[(section, None)] = n
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None:
            out[(section, m.group(1).strip())] = n
    return out


class _Collector:
    def __init__(self, lines):
        self.lines = lines
        self.items: list[tuple[type, str]] = []

    def add(self, cls, section, key, msg):
        ln = self.lines.get((section, key))
        where = f"[{section}]" + (f" {key}" if key else "") + (f" (line {ln})" if ln else "")
        self.items.append((cls, f"{where}: {msg}"))

    def raise_if_any(self):
        if not self.items:
            return
        # the most specific problem names the exception; every message is kept
        classes = {c for c, _ in self.items}
        cls = next((c for c in (UnknownKey, UnitError, ParseError) if c in classes), ConfigError)
        raise cls([m for _, m in self.items])


def _convert(param: Param, text: str, dimension: Optional[str] = None):
    kind = dimension or param.kind
    if param.many:
        return [_convert(Param(kind), t.strip()) for t in text.split(",") if t.strip()]
    if kind in UNITS:
        return parse_quantity(text, kind)
    if kind == "float":
        return parse_number(text)
    if kind == "int":
        t = text.strip()
        if re.fullmatch(r"[-+]?\d+", t):
            return int(t)  # exact, seeds use all 64 bits
        v = parse_number(t)
        if v != int(v):
            raise ValueError(f"{text!r} is not an integer")
        return int(v)
    if kind == "bool":
        low = text.strip().lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError(f"{text!r} is not a boolean")
        return low in ("true", "yes", "1")
    if kind == "choice":
        t = text.strip()
        if t not in param.choices:
            raise ValueError(f"{t!r} not one of {', '.join(param.choices)}")
        return t
    return text.strip()


def _validate_section(col: _Collector, name: str, schema: dict, raw: dict, dims: Optional[dict] = None) -> dict:
    out = {}
    for key in raw:
        if key not in schema:
            col.add(UnknownKey, name, key, f"unknown key {key!r}")
    for key, param in schema.items():
        if key not in raw:
            if param.default is REQUIRED:
                col.add(ConfigError, name, key, "missing required key")
            else:
                out[key] = param.default
            continue
        dim = (dims or {}).get(key)
        try:
            out[key] = _convert(param, raw[key], dim)
        except UnitError as exc:
            col.add(UnitError, name, key, str(exc))
        except ValueError as exc:
            col.add(ParseError, name, key, str(exc))
    return out


def _validate_potential(col: _Collector, name: str, raw: dict) -> dict:
    raw = dict(raw)
    kind = raw.pop("kind", None)
    if kind is None:
        col.add(ConfigError, name, "kind", "missing potential kind")
        return {}
    if kind not in POTENTIAL_KINDS:
        col.add(ParseError, name, "kind", f"unknown potential kind {kind!r} ({', '.join(POTENTIAL_KINDS)})")
        return {}
    out = _validate_section(col, name, POTENTIAL_KINDS[kind], raw)
    out["kind"] = kind
    return out


def read_sections(text: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        raise ParseError([f"line {n}: cannot parse {line.strip()}" for n, line in exc.errors]) from None
    except configparser.Error as exc:
        where = f"line {exc.lineno}: " if hasattr(exc, "lineno") else ""
        raise ParseError([where + exc.message.splitlines()[0]]) from None
    return {s: dict(cp.items(s)) for s in cp.sections()}


def apply_overrides(sections: dict, overrides: Sequence[str]) -> dict:
    """Apply ``section.key=value`` overrides (command-line flags win over the file)."""
    out = {s: dict(kv) for s, kv in sections.items()}
    for item in overrides:
        m = re.match(r"^\s*([^.=\s]+)\.([^=\s]+)\s*=(.*)$", item)
        if not m:
            raise ParseError([f"override {item!r} is not section.key=value"])
        sec, key, val = m.groups()
        out.setdefault(sec, {})[key] = val.strip()
    return out


def parse_config(text: str, overrides: Sequence[str] = ()) -> ExperimentConfig:
    sections = apply_overrides(read_sections(text), overrides)
    return validate(sections, _line_index(text))


def validate(sections: dict, lines: Optional[dict] = None) -> ExperimentConfig:
    col = _Collector(lines or {})
    run = _validate_section(col, "run", RUN, sections.get("run", {}))
    col.raise_if_any()
    exp = run["experiment"]
    schema = SCHEMAS[exp]
    params = {}
    for sec in sections:
        if sec != "run" and sec not in schema:
            col.add(UnknownKey, sec, None, f"unknown section {sec!r} for experiment {exp!r}")
    for sec, spec in schema.items():
        optional = isinstance(spec, tuple)
        if optional:
            spec = spec[1]
            if sec not in sections:
                params[sec] = None
                continue
        raw = sections.get(sec, {})
        if spec == "potential":
            params[sec] = _validate_potential(col, sec, raw)
        elif spec is CALIBRATION:
            template = raw.get("template", "rectangular_width").strip()
            dim = "length" if template == "rectangular_width" else "energy"
            params[sec] = _validate_section(col, sec, spec, raw, {"lo": dim, "hi": dim})
        else:
            params[sec] = _validate_section(col, sec, spec, raw)
    if exp == "rates" and "rates" in params:
        r = params["rates"]
        if r.get("T") is None and None in (r.get("T_start"), r.get("T_stop"), r.get("T_step")):
            col.add(ConfigError, "rates", "T", "give T or all of T_start, T_stop, T_step")
    if "calibration" in params and params["calibration"]:
        c = params["calibration"]
        need = "V0" if c.get("template") == "rectangular_width" else "L"
        if c.get(need) is None and "template" in c:
            col.add(ConfigError, "calibration", need, f"template {c['template']} needs {need}")
    col.raise_if_any()
    return ExperimentConfig(exp, params, run["output_dir"], run["seed"], sections)


def default_config(experiment: str, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """A config from defaults plus overrides, for subcommands run without a file."""
    sections = apply_overrides({"run": {"experiment": experiment}}, overrides)
    return validate(sections)
