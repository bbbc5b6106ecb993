"""Command-line entry point ``rescorr``.

Exit codes: 0 when every asserted row passes (or the code is correctable),
1 on any residual failure, 2 on usage errors such as a missing config file,
an unknown code or a malformed config.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from rescorr.channels import channel_from_spec
from rescorr.codes import get_code
from rescorr.conditions import DEFAULT_TOL, kl_gram
from rescorr.decoding import POLICIES, build_table
from rescorr.experiments import EXPERIMENTS, ConfigError, load_config, render, run_experiment, summary
from rescorr.measures import physical_pauli_basis

OUTPUT_DIR_ENV = "RESCORR_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load_code(name: str):
    try:
        return get_code(name)
    except (KeyError, ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_run(args) -> int:
    try:
        config = load_config(args.config, args.experiment)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {args.config}") from None
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    fmt = args.format or config.format
    rows = run_experiment(config)
    text = render(rows, fmt, config)
    out = args.out or config.output
    if not out and os.environ.get(OUTPUT_DIR_ENV):
        out = str(Path(os.environ[OUTPUT_DIR_ENV]) / f"{config.experiment}.{fmt}")
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    counts = summary(rows)
    print(" ".join(f"{k}={v}" for k, v in counts.items()), file=sys.stderr)
    return EXIT_FAIL if counts["fail"] else EXIT_OK


def cmd_check_kl(args) -> int:
    code = _load_code(args.code)
    try:
        channel = channel_from_spec(args.channel, code.n)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad channel spec {args.channel!r}: {exc}") from exc
    report = kl_gram(code, channel, args.tol)
    print(report.to_json(indent=2))
    return EXIT_OK if report.correctable else EXIT_FAIL


def cmd_basis(args) -> int:
    code = _load_code(args.code)
    basis = physical_pauli_basis(code)
    v = basis.vectors
    gram_dev = float(np.max(np.abs(v.conj().T @ v - np.eye(basis.size))))
    print(f"# code={code.name} vectors={basis.size} dim={basis.dim} gram_deviation={gram_dev:.3e}")
    for j, label in enumerate(basis.labels):
        if not args.dump:
            print(label)
            continue
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        amps = " ".join(f"{i}:{col[i].real:+.12g}{col[i].imag:+.12g}j" for i in nz)
        print(f"{label} {amps}")
    return EXIT_OK


def cmd_decode_table(args) -> int:
    code = _load_code(args.code)
    try:
        table = build_table(code, args.policy)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(table.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rescorr", description="Resource correction on stabilizer codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", required=True, help="JSON config file, or 'default'")
    run.add_argument("--out", help=f"output file (default: ${OUTPUT_DIR_ENV}/<experiment>.<format>, else stdout)")
    run.add_argument("--format", choices=("csv", "json"))
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="correctability checks")
    check_sub = check.add_subparsers(dest="check", required=True)
    kl = check_sub.add_parser("kl", help="test the error-correction conditions for a channel on a code")
    kl.add_argument("--code", required=True, help="code name or code file")
    kl.add_argument("--channel", required=True, help="channel spec, e.g. bitflip:p=0.2")
    kl.add_argument("--tol", type=float, default=DEFAULT_TOL)
    kl.set_defaults(func=cmd_check_kl)

    basis = sub.add_parser("basis", help="physical incoherent basis of a code")
    basis.add_argument("--code", required=True)
    basis.add_argument("--dump", action="store_true", help="print the nonzero amplitudes of every vector")
    basis.set_defaults(func=cmd_basis)

    dt = sub.add_parser("decode-table", help="print a syndrome lookup table")
    dt.add_argument("--code", required=True)
    dt.add_argument("--policy", required=True, choices=POLICIES)
    dt.set_defaults(func=cmd_decode_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rescorr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
