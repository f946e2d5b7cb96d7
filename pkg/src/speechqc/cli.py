"""Command line interface.

Subcommands: ``run`` (full evaluation), ``split`` (assign manifest splits),
``audit-leakage`` (scan assignment files), ``report`` (re-render a report).
Exit codes: 0 success, 1 audit findings, 2 validation error, 3 judge failure
rate above the configured threshold.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import TaskKind
from .dataset import (
    ManifestError,
    PolicyTable,
    assign_splits,
    check_leakage,
    load_assignment,
    load_manifest,
    write_assignment,
)
from .harness import EvalReport, HarnessError, RunConfig, render_report, run_eval

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_VALIDATION = 2
EXIT_JUDGE_FAILURES = 3


def _cmd_run(args) -> int:
    config = RunConfig.load(args.config)
    report = run_eval(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    for fmt, name in (("json", "report.json"), ("csv", "report.csv"), ("text", "report.txt")):
        (config.output_dir / name).write_bytes(render_report(report, fmt))
    sys.stdout.write(render_report(report, "text").decode("utf-8"))
    print(f"report written to {config.output_dir}")
    if report.judge_calls and report.judge_failure_rate > config.judge_failure_threshold:
        print(
            f"judge failure rate {report.judge_failure_rate:.2%} exceeds "
            f"threshold {config.judge_failure_threshold:.2%}",
            file=sys.stderr,
        )
        return EXIT_JUDGE_FAILURES
    return EXIT_OK


def _cmd_split(args) -> int:
    samples, _ = load_manifest(args.manifest)
    policies = PolicyTable.load(args.policies) if args.policies else PolicyTable()
    task = TaskKind(args.task)
    grouped = task.is_generative if args.grouped is None else args.grouped
    assignment = assign_splits(samples, policies, seed=args.seed, grouped=grouped)
    write_assignment(args.out, assignment, task)
    counts = assignment.counts()
    print(
        f"assigned {len(assignment.assignments)} samples: "
        + ", ".join(f"{split.value}={counts[split]}" for split in counts)
    )
    for issue in assignment.issues:
        print(f"issue: {issue}", file=sys.stderr)
    return EXIT_VALIDATION if assignment.issues else EXIT_OK


def _cmd_audit(args) -> int:
    records = []
    for path in args.assignments:
        records.extend(load_assignment(path))
    samples = None
    policies = None
    if args.manifest:
        samples, _ = load_manifest(args.manifest)
    if args.policies:
        policies = PolicyTable.load(args.policies)
    report = check_leakage(records, samples=samples, policies=policies)
    if report.clean:
        print(f"no leakage across {len(records)} assignment records")
        return EXIT_OK
    for finding in report.findings:
        print(f"{finding.kind}: {finding.detail}")
    print(f"{len(report.findings)} finding(s)")
    return EXIT_FINDINGS


def _cmd_report(args) -> int:
    import json

    with open(args.report, encoding="utf-8") as handle:
        report = EvalReport.from_dict(json.load(handle))
    rendered = render_report(report, args.format)
    if args.out:
        Path(args.out).write_bytes(rendered)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(rendered.decode("utf-8"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eval", description="speech quality evaluation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a full evaluation from a config file")
    run.add_argument("--config", required=True)
    run.set_defaults(func=_cmd_run)

    split = sub.add_parser("split", help="assign manifest samples to train/val/test")
    split.add_argument("--manifest", required=True)
    split.add_argument("--policies", default=None, help="JSON policy table")
    split.add_argument("--seed", type=int, required=True)
    split.add_argument("--task", default=TaskKind.DETECTION.value,
                       choices=[t.value for t in TaskKind])
    group = split.add_mutually_exclusive_group()
    group.add_argument("--grouped", dest="grouped", action="store_true", default=None,
                       help="force speaker/system/text grouping")
    group.add_argument("--item-level", dest="grouped", action="store_false",
                       help="force item-level assignment")
    split.add_argument("--out", required=True, help="assignment JSONL output path")
    split.set_defaults(func=_cmd_split)

    audit = sub.add_parser("audit-leakage", help="scan assignment files for leakage")
    audit.add_argument("--assignments", nargs="+", required=True)
    audit.add_argument("--manifest", default=None)
    audit.add_argument("--policies", default=None)
    audit.set_defaults(func=_cmd_audit)

    report = sub.add_parser("report", help="render a stored report")
    report.add_argument("--report", required=True, help="report.json path")
    report.add_argument("--format", default="csv", choices=["json", "csv", "text"])
    report.add_argument("--out", default=None)
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HarnessError, ManifestError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
