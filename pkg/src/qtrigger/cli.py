"""Command line: ``qtrigger run CONFIG`` or ``qtrigger <experiment> [--config FILE] [--set sec.key=val]``.

Exit status: 0 success, 2 config error, 3 numeric failure, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import EXPERIMENTS, ExperimentConfig, default_config, parse_config
from .errors import ConfigError, DomainError, InvariantViolation, NumericError
from .experiments import run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qtrigger", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        if config_required:
            p.add_argument("config", help="config file")
        else:
            p.add_argument("--config", help="config file (defaults are used without one)")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir")
        p.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")

    common(sub.add_parser("run", help="run the experiment named in a config file"), config_required=True)
    for name in EXPERIMENTS:
        common(sub.add_parser(name, help=f"run the {name} experiment"))
    return ap


def load(args) -> ExperimentConfig:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    if args.output_dir is not None:
        overrides.append(f"run.output_dir={args.output_dir}")
    path = args.config
    if args.command != "run":
        overrides.insert(0, f"run.experiment={args.command}")
    if path is None:
        return default_config(args.command, overrides)
    text = Path(path).read_text()
    cfg = parse_config(text, overrides)
    if args.command != "run" and cfg.experiment != args.command:
        raise ConfigError([f"config names experiment {cfg.experiment!r}, not {args.command!r}"])
    return cfg


def _fail(code: int, context: str, exc: BaseException) -> int:
    lines = getattr(exc, "errors", None) or [str(exc)]
    print(f"qtrigger: {context}: {type(exc).__name__}", file=sys.stderr)
    for line in lines:
        print(f"  {line}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except OSError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    ctx = f"experiment {cfg.experiment}"
    try:
        man = run(cfg)
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, ctx, exc)
    except (NumericError, DomainError) as exc:
        return _fail(EXIT_NUMERIC, ctx, exc)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        return _fail(EXIT_CONFIG, ctx, exc)
    if not args.quiet:
        print(json.dumps({"experiment": man.experiment, "output_dir": str(cfg.output_dir), **man.summary}, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
