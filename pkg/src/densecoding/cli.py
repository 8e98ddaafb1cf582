"""Command-line front end.

Commands: ``sweep``, ``regress``, ``qec-test``, ``purify-opt``, ``protocol``.
Reports go to stdout as ``key=value`` lines. Exit status is 0 on success,
1 on bad input and 2 when an internal invariant fails.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import experiments, qec
from .channels import NoiseParams
from .errors import InvariantViolation
from .protocol import ALL_MESSAGES, Message, ProtocolConfig, run_protocol
from .purification import (
    NoiseEstimate,
    build_metric_table,
    estimate_noise,
    identity_baseline,
    optimize_angles,
)

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; route through UsageError instead
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _unit(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(v) and 0.0 <= v <= 1.0):
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _nonneg(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(v) and v >= 0.0):
        raise argparse.ArgumentTypeError(f"{text} must be a non-negative number")
    return v


def _int_at_least(lo: int):
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"{v} must be at least {lo}")
        return v
    return conv


def _message(text: str) -> str:
    if text != "all":
        try:
            Message.parse(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return text


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="seed for all sampling (default 42)")
    parser = _Parser(prog="densecoding", description="Noisy superdense-coding simulator.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    s = sub.add_parser("sweep", parents=[common], help="evaluate the (p, q) noise grid and write a CSV")
    s.add_argument("--p-steps", type=_int_at_least(2), default=experiments.DEFAULT_STEPS)
    s.add_argument("--q-steps", type=_int_at_least(2), default=experiments.DEFAULT_STEPS)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--discord-reference", choices=("A", "B"), default="A",
                   help="marginal entropy used in classical correlations (default A)")

    r = sub.add_parser("regress", parents=[common], help="fit fidelity on QD and EoF from a sweep CSV")
    r.add_argument("--in", dest="inp", type=Path, required=True)
    r.add_argument("--json-out", type=Path)

    sub.add_parser("qec-test", parents=[common], help="check all single-qubit Pauli errors on the five-qubit code")

    o = sub.add_parser("purify-opt", parents=[common], help="choose adaptive purification angles")
    o.add_argument("--p", type=_unit)
    o.add_argument("--q", type=_unit)
    o.add_argument("--qd", type=_nonneg, help="pilot discord, used with --eof instead of --p/--q")
    o.add_argument("--eof", type=_unit)
    o.add_argument("--json-out", type=Path)

    p = sub.add_parser("protocol", parents=[common], help="run superdense coding end to end")
    p.add_argument("--p", type=_unit, default=0.0)
    p.add_argument("--q", type=_unit, default=0.0)
    p.add_argument("--message", type=_message, default="all", help="two bits such as 01, or 'all'")
    p.add_argument("--qec", action="store_true")
    p.add_argument("--adaptive", action="store_true")
    p.add_argument("--pilot-count", type=_int_at_least(1), default=1)
    p.add_argument("--shots", type=_int_at_least(1), default=1024)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", default=True)
    mode.add_argument("--sample", dest="exact", action="store_false")
    p.add_argument("--json-out", type=Path)
    return parser


def _emit(out, pairs) -> None:
    for k, v in pairs:
        out.write(f"{k}={_fmt(v)}\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_json(path: Path | None, obj) -> None:
    if path is not None:
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_sweep(args, out) -> int:
    records = experiments.sweep_noise_grid(args.p_steps, args.q_steps, args.discord_reference)
    experiments.write_csv(records, args.out)
    _emit(out, [("rows", len(records)), ("out", args.out)])
    return EXIT_OK


def cmd_regress(args, out) -> int:
    try:
        records = experiments.read_csv(args.inp)
    except OSError as exc:
        raise UsageError(f"cannot read {args.inp}: {exc.strerror}")
    fit = experiments.fit_regression(records)
    _emit(out, [("records", len(records))] + list(fit.as_dict().items()))
    _write_json(args.json_out, fit.as_dict())
    return EXIT_OK


def cmd_qec_test(args, out) -> int:
    result = qec.exhaustive_single_qubit_check()
    out.write(f"{result.corrected}/{result.total} single-qubit Pauli errors corrected\n")
    _emit(out, [("distinct_syndromes", result.distinct_syndromes), ("min_fidelity", result.min_fidelity)])
    return EXIT_OK if result.all_corrected else EXIT_INVARIANT


def cmd_purify_opt(args, out) -> int:
    by_noise = args.p is not None or args.q is not None
    by_metrics = args.qd is not None or args.eof is not None
    if by_noise == by_metrics:
        raise UsageError("give either --p and --q, or --qd and --eof")
    if by_noise:
        if args.p is None or args.q is None:
            raise UsageError("--p and --q must be given together")
        estimate = NoiseEstimate(args.p, args.q, 0.0)
    else:
        if args.qd is None or args.eof is None:
            raise UsageError("--qd and --eof must be given together")
        estimate = estimate_noise(args.qd, args.eof, build_metric_table())
    angles, value = optimize_angles(estimate)
    report = {
        "p_hat": estimate.p_hat,
        "q_hat": estimate.q_hat,
        "residual": estimate.residual,
        "theta1": angles.theta1,
        "theta2": angles.theta2,
        "mean_pair_fidelity": value,
        "baseline_fidelity": identity_baseline(estimate),
    }
    _emit(out, report.items())
    _write_json(args.json_out, report)
    return EXIT_OK


def cmd_protocol(args, out) -> int:
    config = ProtocolConfig(
        noise=NoiseParams(args.p, args.q),
        use_qec=args.qec,
        use_adaptive_purification=args.adaptive,
        pilot_count=args.pilot_count,
        shots=args.shots,
        seed=args.seed,
        exact=args.exact,
    )
    messages = ALL_MESSAGES if args.message == "all" else (Message.parse(args.message),)
    results = [run_protocol(config, m) for m in messages]
    for res in results:
        tag = f"msg{res.message}"
        pairs = [(f"{tag}.success_probability", res.success_probability),
                 (f"{tag}.bell_fidelity", res.bell_fidelity),
                 (f"{tag}.capacity", res.capacity)]
        pairs += [(f"{tag}.P{m}", prob) for m, prob in sorted(res.decoded_distribution.items())]
        if res.chosen_angles is not None:
            pairs += [(f"{tag}.theta1", res.chosen_angles.theta1), (f"{tag}.theta2", res.chosen_angles.theta2)]
        _emit(out, pairs)
    pilot = results[0].pilot_metrics
    _emit(out, [(f"pilot.{k}", v) for k, v in pilot.as_dict().items()])
    _write_json(args.json_out, {"results": [r.as_dict() for r in results]})
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "regress": cmd_regress,
    "qec-test": cmd_qec_test,
    "purify-opt": cmd_purify_opt,
    "protocol": cmd_protocol,
}


def run_cli(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except InvariantViolation as exc:
        err.write(f"invariant violated: {exc}\n")
        return EXIT_INVARIANT
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
