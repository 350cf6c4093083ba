"""Command-line entry point: evaluate, simulate, generate.

Exit codes: 0 success, 1 input/data errors, 2 argument errors,
3 internal self-check failure (a written report would have violated the
SG + RH = hazard_f identity).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import generators, simulator
from .core_metrics import MetricsReport, compute_report, decomposition_residual, normalize_report
from .schemes import SchemeParams, triples_for_scheme
from .traces import SCHEMES, TraceError, load_traces, save_traces

SELF_CHECK_LIMIT = 1e-9


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monitoreval",
        description="Safety Gain / Residual Hazard / Availability Cost evaluation "
        "over recorded prediction and monitor traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="aggregate a trace file into the three metrics")
    ev.add_argument("input", help="trace file (or directory of trace files, e.g. a simulate output)")
    ev.add_argument("--scheme", required=True, choices=SCHEMES)
    ev.add_argument("--iou-threshold", type=float, default=0.5)
    ev.add_argument("--score-threshold", type=float, default=0.5)
    ev.add_argument("--kappa", type=float, default=0.5)
    ev.add_argument("--default-action-score", type=float, default=None)
    ev.add_argument("--normalize-safety", type=float, default=None, metavar="R")
    ev.add_argument("--normalize-mission", type=float, default=None, metavar="R")
    ev.add_argument("--out", type=Path, default=None, help="write the report object here")

    sim = sub.add_parser("simulate", help="run a braking scenario suite and write episode traces")
    sim.add_argument("--out", type=Path, required=True, help="output directory for trace files")
    sim.add_argument("--config", type=Path, default=None, help="suite config file")
    sim.add_argument(
        "--suite", choices=("default", "desk"), default="default",
        help="built-in suite when no config file is given",
    )
    sim.add_argument("--seed", type=int, default=0, help="base seed for the built-in default suite")

    gen = sub.add_parser("generate", help="write an exact-count synthetic trace file")
    gen_sub = gen.add_subparsers(dest="generator", required=True)

    g_table = gen_sub.add_parser("table1", help="1000-record error-detection consistency fixture")
    g_table.add_argument("--out", type=Path, required=True)

    g_clf = gen_sub.add_parser("classification", help="exact-count error-detection records")
    g_clf.add_argument("--n", type=int, required=True)
    g_clf.add_argument("--errors", type=int, required=True)
    g_clf.add_argument("--true-alarms", type=int, required=True)
    g_clf.add_argument("--false-alarms", type=int, required=True)
    g_clf.add_argument("--out", type=Path, required=True)

    g_thr = gen_sub.add_parser("threat", help="exact-count threat-detection records")
    g_thr.add_argument("--n", type=int, required=True)
    g_thr.add_argument("--threats", type=int, required=True)
    g_thr.add_argument("--detected", type=int, required=True)
    g_thr.add_argument("--false-alarms", type=int, required=True)
    g_thr.add_argument("--out", type=Path, required=True)

    return parser


def _fmt_real(x: float) -> str:
    return format(float(x), ".12g")


def render_report(report: MetricsReport, params_echo: dict, residual: float) -> str:
    """Fixed field order, reals at 12 significant digits; stable bytes."""
    params = ", ".join(f"{json.dumps(k)}: {_fmt_real(v)}" for k, v in params_echo.items())
    parts = [
        f'"scheme": {json.dumps(report.scheme_name)}',
        f'"n": {report.n}',
        f'"sg": {_fmt_real(report.sg)}',
        f'"rh": {_fmt_real(report.rh)}',
        f'"ac": {_fmt_real(report.ac)}',
        f'"hazard_f": {_fmt_real(report.hazard_f)}',
        '"params_echo": {' + params + "}",
        f'"decomposition_residual": {_fmt_real(residual)}',
    ]
    return "{" + ", ".join(parts) + "}\n"


def _load_input(path: Path, scheme: str):
    if path.is_dir():
        files = sorted(path.glob("*.jsonl"))
        if not files:
            raise TraceError(f"no .jsonl trace files in directory {path}")
        records = []
        for f in files:
            records.extend(load_traces(f, scheme))
        return records
    return load_traces(path, scheme)


def cmd_evaluate(args: argparse.Namespace) -> int:
    params = SchemeParams(
        iou_threshold=args.iou_threshold,
        score_threshold=args.score_threshold,
        kappa=args.kappa,
        default_action_score=args.default_action_score,
    )
    records = _load_input(Path(args.input), args.scheme)
    triples = triples_for_scheme(args.scheme, records, params)
    report = compute_report(triples, args.scheme, params)

    residual = decomposition_residual(report)
    if residual > SELF_CHECK_LIMIT:
        print(
            f"internal error: SG + RH - hazard_f = {residual:.3e} exceeds {SELF_CHECK_LIMIT:.0e}",
            file=sys.stderr,
        )
        return 3

    r_s = args.normalize_safety
    r_m = args.normalize_mission
    if r_s is not None or r_m is not None:
        report = normalize_report(report, r_s if r_s is not None else 1.0, r_m if r_m is not None else 1.0)
        residual = decomposition_residual(report)

    print(f"scheme: {report.scheme_name}  records: {report.n}  hazard_f: {report.hazard_f:.3f}")
    print("SG RH AC")
    print(f"{report.sg:.3f} {report.rh:.3f} {report.ac:.3f}")

    if args.out is not None:
        params_echo = {
            "iou_threshold": params.iou_threshold,
            "score_threshold": params.score_threshold,
            "kappa": params.kappa,
            "default_action_score": params.default_action_score,
            "normalize_safety": r_s if r_s is not None else 1.0,
            "normalize_mission": r_m if r_m is not None else 1.0,
        }
        args.out.write_text(render_report(report, params_echo, residual), encoding="utf-8")
        print(f"report written to {args.out}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.config is not None:
        configs, detector, monitor = simulator.suite_from_json(args.config)
    elif args.suite == "desk":
        configs, detector, monitor = simulator.desk_suite()
    else:
        configs, detector, monitor = simulator.default_suite(base_seed=args.seed)
    summary = simulator.run_suite(configs, detector, monitor, args.out)
    n = summary.n_scenarios
    print(f"wrote {len(summary.trace_paths)} trace files to {args.out} "
          f"({n} scenarios x 3 variants = {3 * n} traces)")
    for variant, path in summary.trace_paths.items():
        print(
            f"  {variant}: collisions {summary.collisions[variant]}, "
            f"brakes {summary.brakes[variant]} -> {path.name}"
        )
    return 0


def cmd_generate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        if args.generator == "table1":
            records = generators.table1_reconstruction()
            scheme = "clf-error"
        elif args.generator == "classification":
            records = generators.synth_classification(
                args.n, args.errors, args.true_alarms, args.false_alarms
            )
            scheme = "clf-error"
        else:
            records = generators.synth_threat(
                args.n, args.threats, args.detected, args.false_alarms
            )
            scheme = "clf-threat"
    except ValueError as exc:
        parser.error(str(exc))
    save_traces(records, args.out, scheme)
    print(f"wrote {len(records)} records to {args.out} (scheme {scheme})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_generate(args, parser)
    except (TraceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
