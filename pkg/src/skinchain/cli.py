"""Command-line interface.

Subcommands: `verify` (invariant suite), `run <config>` (scenario
runner), `bae` (Bethe roots for one sector), `steady` (steady-state
probabilities), `export-op` (sparse text dump of one generator).
Exit codes: 0 success, 1 validation failure, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from .basis import CapacityError, build_sector
from .bethe import SolveError, solve_sector
from .liouvillian import build_effective_liouvillian
from .params import ModelParams
from .scenarios import (ConfigError, ROOTS_HEADER, ScenarioError,
                        parse_config, roots_to_rows, run_scenario,
                        verify_suite)
from .spectra import NumericError, steady_state

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2


def _add_model_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--bc", required=True, choices=("PBC", "OBC", "GBC"))
    sub.add_argument("--L", required=True, type=int)
    sub.add_argument("--M", required=True, type=int)
    sub.add_argument("--phi", required=True, type=float)
    sub.add_argument("--J", type=float, default=1.0)
    sub.add_argument("--deltaL", type=float, default=0.0)
    sub.add_argument("--deltaR", type=float, default=0.0)


def _params_from_args(args) -> ModelParams:
    return ModelParams(L=args.L, M=args.M, J=args.J, phi=args.phi,
                       bc=args.bc, delta_L=args.deltaL, delta_R=args.deltaR)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skinchain",
        description="Dissipative spin-chain Liouvillian: exact solutions "
                    "and skin-effect observables.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("verify", help="run the invariant suite at desk scale")
    sub.add_argument("--L-max", type=int, default=4)

    sub = subs.add_parser("run", help="execute a scenario config")
    sub.add_argument("config", help="path to a key=value scenario config")

    sub = subs.add_parser("bae", help="solve one sector's Bethe equations")
    _add_model_args(sub)
    sub.add_argument("--out", help="write roots CSV here instead of stdout")

    sub = subs.add_parser("steady", help="steady-state probabilities of one sector")
    _add_model_args(sub)
    sub.add_argument("--out", help="write CSV here instead of stdout")

    sub = subs.add_parser("export-op", help="dump one generator in sparse text form")
    _add_model_args(sub)
    sub.add_argument("--out", help="write here instead of stdout")
    return parser


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_verify(args) -> int:
    L_values = tuple(range(2, args.L_max + 1))
    checks = verify_suite(L_values=L_values)
    for name, ok, worst in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name} (worst deviation {worst:.3e})")
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_NUMERIC


def _cmd_run(args) -> int:
    config = parse_config(args.config)
    manifest = run_scenario(config)
    print(f"scenario {config.scenario}: "
          f"{len(manifest['files'])} artifacts in {config.out_dir}")
    return EXIT_OK


def _cmd_bae(args) -> int:
    params = _params_from_args(args)
    roots = solve_sector(params)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROOTS_HEADER)
    for row in roots_to_rows(params, roots):
        writer.writerow([x if isinstance(x, str) else f"{x:.17g}"
                         if isinstance(x, float) else str(x) for x in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_steady(args) -> int:
    params = _params_from_args(args)
    basis = build_sector(params.L, params.M)
    op = build_effective_liouvillian(params, basis)
    ss = steady_state(op, basis)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["config_bits", "probability"])
    for config, prob in zip(basis.configs, ss.probabilities):
        writer.writerow([format(config, f"0{params.L}b"), f"{prob.real:.17g}"])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_export_op(args) -> int:
    params = _params_from_args(args)
    basis = build_sector(params.L, params.M)
    op = build_effective_liouvillian(params, basis)
    rows, cols, vals = op.triplets()
    lines = [f"{op.dim} {len(vals)}"]
    lines += [f"{r} {c} {v.real:.17g} {v.imag:.17g}"
              for r, c, v in zip(rows, cols, vals)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "verify": _cmd_verify,
    "run": _cmd_run,
    "bae": _cmd_bae,
    "steady": _cmd_steady,
    "export-op": _cmd_export_op,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, FileNotFoundError, CapacityError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericError, SolveError, ScenarioError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
