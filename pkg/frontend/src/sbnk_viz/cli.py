"""Command-line entry point: one subcommand per plot kind."""

from __future__ import annotations

import argparse
import sys

from sbnk_viz.formats import FormatError


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="sbnk-viz", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("contraction", help="Cauchy differences with factorial-fit overlay")
    pc.add_argument("cauchy_csv")
    pc.add_argument("out_png")

    pg = sub.add_parser("gates", help="measured-vs-gate diagnostic tracks")
    pg.add_argument("diagnostics_csv")
    pg.add_argument("out_png")

    pe = sub.add_parser("energy", help="total energy over time from an archive")
    pe.add_argument("archive")
    pe.add_argument("out_png")

    ps = sub.add_parser("snapshot", help="field snapshot at one time index")
    ps.add_argument("archive")
    ps.add_argument("out_png")
    ps.add_argument("--index", type=int, default=-1, help="snapshot index (default last)")

    args = p.parse_args(argv)
    from sbnk_viz import plots

    try:
        if args.command == "contraction":
            plots.plot_contraction(args.cauchy_csv, args.out_png)
        elif args.command == "gates":
            plots.plot_gates(args.diagnostics_csv, args.out_png)
        elif args.command == "energy":
            plots.plot_energy(args.archive, args.out_png)
        else:
            plots.plot_snapshot(args.archive, args.index, args.out_png)
    except (FormatError, plots.PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
