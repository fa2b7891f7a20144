#!/usr/bin/env python3
"""Run the full CLI verification battery for every family; exit 1 on failure.

Usage: python scripts/verify_families.py [outdir]
"""

import sys
from pathlib import Path

from fkdv.cli import main as cli_main

OUTDIR = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("verify_out")


def main() -> int:
    OUTDIR.mkdir(parents=True, exist_ok=True)
    worst = 0
    for family in ("fifth-soliton", "kdv-soliton", "kdv-cnoidal", "fifth-cnoidal"):
        print(f"=== {family} ===")
        code = cli_main(["verify", "--family", family,
                         "--out", str(OUTDIR / family.replace("-", "_"))])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
