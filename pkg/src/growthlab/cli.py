"""Command-line front end.

    growthlab run SCENARIO.json [--seed N] [--budget N] [--out PATH] [--format json|table]
    growthlab verify SUITE... | all [--seed N] [--scale X]
    growthlab describe [KIND]

Exit codes: 0 all checks pass, 1 some check fails, 2 nothing fails but
some check is unknown, 3 usage or schema error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, schemas
from .runner import FAIL, PASS, UNKNOWN, UsageError, overall, run_scenario
from .suites import SUITES, SuiteConfig, run_suite

EXIT = {PASS: 0, FAIL: 1, UNKNOWN: 2}
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    common.add_argument("--budget", type=int, default=None,
                        help="search-guard budget (sets GROWTHLAB_BUDGET)")
    common.add_argument("--out", type=Path, default=None, help="write the report here")
    common.add_argument("--format", choices=("json", "table"), default="json")

    p = _Parser(prog="growthlab", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"growthlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="execute a scenario file")
    run.add_argument("scenario", type=Path)

    ver = sub.add_parser("verify", parents=[common], help="run named acceptance suites")
    ver.add_argument("suites", nargs="+", metavar="SUITE",
                     help=f"one of {', '.join(SUITES)} or 'all'")
    ver.add_argument("--scale", type=float, default=1.0,
                     help="fraction of the default instance counts")

    desc = sub.add_parser("describe", parents=[common], help="print the scenario schemas")
    desc.add_argument("kind", nargs="?", choices=schemas.KINDS)
    return p


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, ensure_ascii=False)
    return str(v)


def _table(header: list[str], rows: list[list]) -> str:
    cells = [[_cell(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    line = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    return "\n".join([line(header), line(["-" * w for w in widths])] + [line(r) for r in cells]) + "\n"


SUMMARY_KEYS = ("measure", "joint", "density", "infinite", "n", "value", "N", "bound", "holds",
                "biconditional", "gap", "exact", "kappa", "error")


def render_table(report: dict) -> str:
    if "payloads" in report:
        rows = [[k, ", ".join(sorted(schemas.OPS[k]))] for k in report["payloads"]]
        return _table(["kind", "ops"], rows) + f"suites: {', '.join(report['suites'])}\n"
    if "verdicts" in report:
        rows = []
        for v in report["verdicts"]:
            summary = {k: v[k] for k in SUMMARY_KEYS if k in v}
            rows.append([v["task"], v.get("name", v["op"]), v["status"], summary])
        body = _table(["task", "check", "status", "values"], rows)
    else:
        rows = [[s["suite"], c["name"], c["instances"], c["failed"], c["status"]]
                for s in report["suites"] for c in s["checks"]]
        body = _table(["suite", "check", "instances", "failed", "status"], rows)
    return body + f"status: {report['status']}\n"


def _emit(report: dict, args) -> None:
    text = render_table(report) if args.format == "table" else dumps(report)
    if args.out is not None:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _load(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(str(path), exc.strerror or str(exc)) from None
    try:
        return json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise UsageError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _reject_float(text: str):
    raise UsageError("$", f"float literal {text} is not allowed; write rationals as \"p/q\" strings")


def cmd_run(args) -> dict:
    report = run_scenario(_load(args.scenario), args.seed)
    return {"tool": "growthlab", "version": __version__, "scenario": args.scenario.name, **report}


def cmd_verify(args) -> dict:
    names = list(SUITES) if args.suites == ["all"] else args.suites
    for name in names:
        if name not in SUITES:
            raise UsageError("suites", f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    if not args.scale > 0:
        raise UsageError("--scale", "must be positive")
    cfg = SuiteConfig(seed=0 if args.seed is None else args.seed, scale=args.scale)
    reports = [run_suite(n, cfg) for n in names]
    return {"tool": "growthlab", "version": __version__, "suites": reports,
            "status": overall(r["status"] for r in reports)}


def cmd_describe(args) -> dict:
    out = schemas.all_schemas()
    if args.kind:
        out["payloads"] = {args.kind: out["payloads"][args.kind]}
    out["suites"] = list(SUITES)
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.budget is not None and args.budget < 1:
        print("growthlab: error: --budget must be positive", file=sys.stderr)
        return EXIT_USAGE
    command = {"run": cmd_run, "verify": cmd_verify, "describe": cmd_describe}[args.command]
    saved = os.environ.get("GROWTHLAB_BUDGET")
    try:
        if args.budget is not None:
            os.environ["GROWTHLAB_BUDGET"] = str(args.budget)
        report = command(args)
    except UsageError as exc:
        print(f"growthlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        # the flag only applies to this invocation
        if saved is None:
            os.environ.pop("GROWTHLAB_BUDGET", None)
        else:
            os.environ["GROWTHLAB_BUDGET"] = saved
    _emit(report, args)
    return EXIT.get(report.get("status", PASS), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
