"""Command-line entry points: run scenarios, verify archives, regenerate constants.

Exit codes: 0 success; 1 solver error; 2 gate failure under ``--strict``;
64 scenario schema violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_GATE = 2
EXIT_SCHEMA = 64


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _apply_thread_cap() -> None:
    """Honor SBNK_THREADS (0 or unset = automatic)."""
    cap = os.environ.get("SBNK_THREADS", "0")
    try:
        n = int(cap)
    except ValueError:
        n = 0
    if n > 0:
        try:
            from threadpoolctl import threadpool_limits

            threadpool_limits(limits=n)
        except ImportError:
            for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
                os.environ.setdefault(var, str(n))


def _write_cauchy_csv(path: Path, cauchy) -> None:
    ratios = cauchy.ratios()
    lines = ["n,delta_f_q,delta_rho_h2,delta_u_h1,l2h1_grad_u,ratio"]
    for i, n in enumerate(cauchy.n):
        lines.append(
            ",".join(
                [
                    str(n),
                    _fmt(cauchy.delta_f_q[i]),
                    _fmt(cauchy.delta_rho_h2[i]),
                    _fmt(cauchy.delta_u_h1[i]),
                    _fmt(cauchy.l2h1_grad_u[i]),
                    _fmt(ratios[i]),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _write_diagnostics_csv(path: Path, rows) -> None:
    lines = ["lemma_id,t,measured,gate,pass"]
    for r in rows:
        lines.append(
            ",".join(
                [r.lemma_id, _fmt(r.t), _fmt(r.measured), _fmt(r.gate), str(r.passed).lower()]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args: argparse.Namespace) -> int:
    from sbnk.archive import write_archive
    from sbnk.picard import diagnostics_suite, direct_solve, evaluate_gates, picard_iterate
    from sbnk.scenario import SchemaError, load_scenario, scenario_to_params

    try:
        table = load_scenario(args.scenario)
        params = scenario_to_params(table)
    except SchemaError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    mode = params.mode
    if args.picard:
        mode = "picard"
    if args.direct:
        mode = "direct"

    out_dir = Path(args.out_dir or table.get("output.dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        if mode == "picard":
            result = picard_iterate(params, max_n=args.max_n)
            for traj in result.trajectories:
                write_archive(out_dir / f"iterate_{traj.n:03d}.bin", traj)
            _write_cauchy_csv(out_dir / "cauchy.csv", result.cauchy)
            rows = diagnostics_suite(result.final, params)
            _write_diagnostics_csv(out_dir / "diagnostics.csv", rows)
            gates_fail = any(not g.all_pass for g in result.gates) or any(
                not r.passed for r in rows
            )
        else:
            traj = direct_solve(params)
            write_archive(out_dir / "run.bin", traj)
            rows = diagnostics_suite(traj, params)
            _write_diagnostics_csv(out_dir / "diagnostics.csv", rows)
            gate = evaluate_gates(traj, params)
            gates_fail = (
                not gate.all_pass or any(not r.passed for r in rows)
            )
    except Exception as exc:  # solver failure
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    if gates_fail:
        failed = sorted({r.lemma_id for r in rows if not r.passed})
        print(f"gate failure: {', '.join(failed) if failed else 'norm gates'}")
        if args.strict:
            return EXIT_GATE
    else:
        print("all gates passed")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    from sbnk.archive import ArchiveError, verify_archive

    try:
        for line in verify_archive(args.archive):
            print(line)
    except (ArchiveError, OSError) as exc:
        print(f"verify error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_lemma_bench(args: argparse.Namespace) -> int:
    from sbnk.lemma_checks import generate_constants, write_constants

    constants = generate_constants(
        size=args.size,
        q=args.q,
        gammas=tuple(args.gamma),
        d=args.d,
        seed=args.seed,
    )
    meta = {
        "ensemble_size": str(args.size),
        "seed": str(args.seed),
        "q": f"{args.q:g}",
        "gammas": ",".join(f"{g:g}" for g in args.gamma),
        "d": str(args.d),
    }
    write_constants(args.out, constants, meta)
    print(f"wrote {len(constants)} constants to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sbnk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run a scenario")
    pr.add_argument("scenario", help="scenario file path")
    mode = pr.add_mutually_exclusive_group()
    mode.add_argument("--picard", action="store_true", help="force Picard mode")
    mode.add_argument("--direct", action="store_true", help="force direct mode")
    pr.add_argument("--max-n", type=int, default=None, help="cap Picard iterations")
    pr.add_argument("--out-dir", default=None, help="output directory")
    pr.add_argument("--strict", action="store_true", help="exit 2 on gate failure")
    pr.set_defaults(func=cmd_run)

    pv = sub.add_parser("verify", help="validate and summarize an archive")
    pv.add_argument("archive", help="archive file path")
    pv.set_defaults(func=cmd_verify)

    pl = sub.add_parser("lemma-bench", help="regenerate the empirical constants file")
    pl.add_argument("--size", type=int, default=5000)
    pl.add_argument("--q", type=float, default=6.0)
    pl.add_argument("--gamma", type=float, action="append", default=None)
    pl.add_argument("--d", type=int, default=1)
    pl.add_argument("--seed", type=int, default=1)
    pl.add_argument("--out", default="constants.txt")
    pl.set_defaults(func=cmd_lemma_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "gamma", None) is None and args.command == "lemma-bench":
        args.gamma = [1.0, 2.0]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
