"""Run every shipped config through the CLI into out/<name>/ and report exit codes.

    python3 scripts/run_all_configs.py [--out out]
"""

import argparse
import sys
from pathlib import Path

from qtrigger.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "out"))
    args = ap.parse_args()

    failed = 0
    for cfg in sorted((ROOT / "configs").glob("*.ini")):
        code = cli(["run", str(cfg), "--output-dir", str(Path(args.out) / cfg.stem), "--quiet"])
        print(f"{cfg.name:20s} exit {code}")
        failed += code != 0
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
