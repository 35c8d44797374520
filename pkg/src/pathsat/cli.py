"""Command-line entry point: ``pathsat {run,explore,oracle,predict,suite,report}``.

Exit codes: 0 success, 1 usage/configuration error, 2 subject could not be
loaded (missing file, parse, semantic or schema error), 3 campaign, oracle or
interpreter failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import campaign, oracle, suite
from .dsl import FrontendError
from .interp import ExecutionError
from .schema import SchemaError, check_input
from .subject import load_subject

EXIT_OK, EXIT_USAGE, EXIT_SUBJECT, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_max_size(text: str):
    if "=" not in text:
        return int(text)
    out = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        out[name.strip()] = int(value)
    return out


def _parse_json_arg(text: str):
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    return json.loads(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pathsat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute one input and print its path string")
    run.add_argument("subject")
    run.add_argument("--input", required=True, help="JSON object, or @file.json")
    run.add_argument("--schema", help="schema JSON (default: sidecar next to the subject)")
    run.add_argument("--budget", type=int, default=10 ** 7, help="interpreter step budget")
    run.add_argument("--outputs", action="store_true", help="also print final values as JSON")

    ex = sub.add_parser("explore", help="run a campaign; write report CSV and suite JSON")
    ex.add_argument("subject")
    ex.add_argument("--schema")
    ex.add_argument("--config", help="campaign config JSON; flags override its values")
    ex.add_argument("--max-size", type=_parse_max_size, help="N, or name=N,... per size parameter")
    ex.add_argument("--domain", type=int, help="elements are drawn from [0, DOMAIN)")
    ex.add_argument("--max-k", type=int, dest="k_max")
    ex.add_argument("--batch", type=int)
    ex.add_argument("--seed", type=int)
    ex.add_argument("--window", type=int)
    ex.add_argument("--stop", choices=campaign.STOP_TYPES)
    ex.add_argument("--shape-mode", choices=campaign.SHAPE_MODES)
    ex.add_argument("--fixed-shape", type=_parse_max_size, help="name=N,... for --shape-mode fixed")
    ex.add_argument("--workers", type=int, default=1)
    ex.add_argument("--stable-time", action="store_true", help="write etime_ms as 0")
    ex.add_argument("--store", help="heuristic table JSON to upsert the measured entry into")
    ex.add_argument("-o", "--out", default=".", help="output directory")

    orc = sub.add_parser("oracle", help="enumerate every feasible path over a tiny domain")
    orc.add_argument("subject")
    orc.add_argument("--schema")
    orc.add_argument("--max-size", type=_parse_max_size, required=True)
    orc.add_argument("--domain", type=int, default=3)
    orc.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    orc.add_argument("-o", "--out", help="write suite-format JSON here (default: stdout)")

    pr = sub.add_parser("predict", help="closed-form k_L, k_S, l_max for a construct")
    pr.add_argument("construct", choices=oracle.CONSTRUCTS)
    pr.add_argument("--dims", required=True, help="n, or m,n,q for matrix")
    pr.add_argument("--store", help="heuristic table JSON to upsert the prediction into")
    pr.add_argument("--json", action="store_true")

    st = sub.add_parser("suite", help="replay a suite JSON against its subject")
    st.add_argument("subject")
    st.add_argument("suite_file")
    st.add_argument("--schema")
    st.add_argument("-o", "--out", help="rewrite the validated suite here")

    rp = sub.add_parser("report", help="merge report CSVs and emit plot-ready CSVs")
    rp.add_argument("reports", nargs="+")
    rp.add_argument("-o", "--out", default=".")
    return p


def _config_from_args(args) -> campaign.CampaignConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    for name in ("max_size", "domain", "k_max", "batch", "seed", "shape_mode", "fixed_shape"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    rule = data.get("stop_rule", {})
    rule = {"type": rule} if isinstance(rule, str) else dict(rule)
    if args.stop:
        rule["type"] = args.stop
    if args.window is not None:
        rule["window"] = args.window
    if rule:
        data["stop_rule"] = rule
    cfg = campaign.CampaignConfig.from_dict(data)
    cfg.validate()
    return cfg


def _dims_from_caps(subject, max_size) -> tuple:
    free = subject.schema.free_sizes
    caps = [max_size[n] if isinstance(max_size, dict) else max_size for n in free]
    if subject.construct == "merge" and len(set(caps)) == 1:
        return (caps[0],)
    return tuple(caps)


def _load_store(path: Path) -> suite.HeuristicTable:
    if path.exists():
        return suite.import_(path.read_bytes(), "heuristics")
    return suite.HeuristicTable()


def cmd_run(args) -> int:
    subject = load_subject(args.subject, args.schema)
    inp = _parse_json_arg(args.input)
    check_input(subject.schema, inp)
    try:
        trace, outputs = subject.executable.run(inp, args.budget)
    except ExecutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.trace is not None:
            print(f"partial path: {subject.executable.render(exc.trace)}", file=sys.stderr)
        return EXIT_RUNTIME
    print(subject.executable.render(trace))
    if args.outputs:
        print(json.dumps(outputs))
    return EXIT_OK


def cmd_explore(args) -> int:
    subject = load_subject(args.subject, args.schema)
    cfg = _config_from_args(args)
    report, paths = campaign.run_campaign(subject, cfg, workers=args.workers,
                                          stable_time=args.stable_time)
    test_suite = suite.extract_suite(paths, subject, cfg.to_dict())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_bytes(suite.export(report, "csv"))
    (out / "suite.json").write_bytes(suite.export(test_suite, "json"))
    summary = {"subject": subject.name, "k_l": report.k_longest, "k_s": report.k_saturation,
               "l_max": report.l_max, "ufp": len(paths), "skipped": report.skipped,
               "stop_reason": report.stop_reason}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    if args.store and subject.construct:
        store_path = Path(args.store)
        table = _load_store(store_path)
        table.upsert(oracle.measured_entry(report, subject.construct,
                                           _dims_from_caps(subject, cfg.max_size)), "measured")
        store_path.write_bytes(suite.export(table, "json"))

    def fmt(v):
        return "not-reached" if v is None else v
    print(f"k_L={fmt(report.k_longest)} k_S={fmt(report.k_saturation)} "
          f"l_max={report.l_max} ufp={len(paths)}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    subject = load_subject(args.subject, args.schema)
    paths = oracle.enumerate_shape_space(subject, args.max_size, args.domain, cap=args.cap)
    config = {"domain": args.domain, "max_size": args.max_size}
    data = suite.export(suite.extract_suite(paths, subject, config), "json")
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    print(f"{len(paths)} feasible paths", file=sys.stderr)
    return EXIT_OK


def cmd_predict(args) -> int:
    dims = tuple(int(x) for x in args.dims.split(","))
    entry = oracle.predict(args.construct, dims)
    if args.store:
        store_path = Path(args.store)
        table = _load_store(store_path)
        table.upsert(entry, "predicted")
        store_path.write_bytes(suite.export(table, "json"))
    if args.json:
        print(json.dumps(entry.to_dict()))
    else:
        k_s = "stochastic" if entry.k_s is None else entry.k_s
        print(f"k_L={entry.k_l} k_S={k_s} l_max={entry.l_max}")
    return EXIT_OK


def cmd_suite(args) -> int:
    subject = load_subject(args.subject, args.schema)
    test_suite = suite.import_(Path(args.suite_file).read_bytes(), "suite")
    suite.verify_suite(subject, test_suite)
    if args.out:
        Path(args.out).write_bytes(suite.export(test_suite, "json"))
    print(f"ok: {len(test_suite.entries)} entries replay")
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    merged = []
    for path in args.reports:
        rep = suite.read_report_csv(Path(path).read_text(encoding="utf-8"))
        merged += [(Path(path).stem,) + r.astuple()[:-1] + (suite.format_ms(r.etime_ms),)
                   for r in rep.rows]
    with open(out / "merged.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("source",) + suite.REPORT_COLUMNS)
        w.writerows(merged)
    for column, idx in (("ufp", 3), ("nfp", 4)):
        with open(out / f"k_vs_{column}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("source", "k", column))
            w.writerows((r[0], r[1], r[idx]) for r in merged)
    print(f"{len(merged)} rows from {len(args.reports)} report(s)")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "explore": cmd_explore,
    "oracle": cmd_oracle,
    "predict": cmd_predict,
    "suite": cmd_suite,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (FileNotFoundError, FrontendError) as exc:
        if args.command == "report" or (args.command == "suite" and not Path(args.suite_file).exists()):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"subject error: {exc}", file=sys.stderr)
        return EXIT_SUBJECT
    except SchemaError as exc:
        if args.command == "run":
            print(f"bad input: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SUBJECT
    except (campaign.ConfigError, json.JSONDecodeError, ValueError, TypeError) as exc:
        if isinstance(exc, oracle.OracleTooLarge):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ExecutionError, suite.ReplayMismatch, oracle.OracleTooLarge, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
