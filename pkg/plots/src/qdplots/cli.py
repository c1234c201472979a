"""qdplot command line: curves | heatmap | ranksum."""
from __future__ import annotations

import argparse
import sys

from .curves import FigureSpec, plot_metric_curves
from .heatmap import MODES, plot_container_heatmap
from .io import METRIC_CHOICES, SchemaError
from .ranksum import RefusalError, ranksum_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdplot",
        description="Render figures and reports from deepgrid result CSVs")
    sub = parser.add_subparsers(dest="command", required=True)

    curves = sub.add_parser("curves",
                            help="median + interquartile curves per variant")
    curves.add_argument("inputs", nargs="+", metavar="RESULT_DIR")
    curves.add_argument("--metric", required=True, choices=METRIC_CHOICES)
    curves.add_argument("--out", required=True, help="output PNG path")
    curves.add_argument("--title", help="figure title override")

    heatmap = sub.add_parser("heatmap", help="archive heatmap on the run's grid")
    heatmap.add_argument("input", help="snapshot CSV, or corrected-container "
                                       "CSV for --mode corrected")
    heatmap.add_argument("--config", required=True,
                         help="resolved config JSON carrying the grid geometry")
    heatmap.add_argument("--mode", default="raw", choices=MODES)
    heatmap.add_argument("--out", required=True, help="output PNG path")
    heatmap.add_argument("--vmin", type=float,
                         help="fitness mapped to the bottom of the color scale")
    heatmap.add_argument("--vmax", type=float,
                         help="fitness mapped to the top of the color scale")

    ranksum = sub.add_parser("ranksum",
                             help="pairwise rank-sum tests on final metrics")
    ranksum.add_argument("inputs", nargs="+", metavar="RESULT_DIR")
    ranksum.add_argument("--out", help="write the report here instead of stdout")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "curves":
            plot_metric_curves(FigureSpec(inputs=tuple(args.inputs),
                                          metric=args.metric, out=args.out,
                                          title=args.title))
        elif args.command == "heatmap":
            plot_container_heatmap(args.input, args.config, args.mode,
                                   args.out, vmin=args.vmin, vmax=args.vmax)
        else:
            report = ranksum_report(args.inputs)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(report)
            else:
                sys.stdout.write(report)
    except RefusalError as exc:
        print(exc, file=sys.stdout)
        return 2
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
