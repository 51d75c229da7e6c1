#!/usr/bin/env python3
"""Run every acceptance suite, print a timing table and save the reports."""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from growthlab.suites import SUITES, SuiteConfig, run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("suites", nargs="*", default=list(SUITES))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--out", type=Path, default=Path("reports"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    cfg = SuiteConfig(args.seed, args.scale)
    failed = 0
    for name in args.suites:
        start = time.perf_counter()
        report = run_suite(name, cfg)
        elapsed = time.perf_counter() - start
        (args.out / f"{name}.json").write_text(
            json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        checks = sum(c["instances"] for c in report["checks"])
        print(f"{name:<16} {report['status']:<5} {checks:>9} instances {elapsed:7.1f}s")
        failed += report["status"] != "pass"
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
