"""Command-line interface: ``simmap layout|compare|export-svg|diagnose``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
failure. Messages go to standard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .diagnostics import diagnose
from .errors import ConfigError, DataError, NumericalError
from .mapdoc import METHODS, SIMILARITIES, read_document, write_document
from .pipeline import RunConfig, compare, prepare_corpus, report_as_dict, run_layout, summary_table
from .svg import export_svg

EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("simmap")


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _add_run_flags(p):
    p.add_argument("--edges", required=True, help="co-occurrence edge list (id_a,id_b,count)")
    p.add_argument("--items", help="optional item metadata CSV (id,label,weight,cluster)")
    p.add_argument("--out", required=True, help="output path")
    p.add_argument("--starts", type=int, default=100, help="random starts (default 100)")
    p.add_argument("--seed", type=int, default=1, help="master seed (default 1)")
    p.add_argument("--eps", type=float, default=None,
                   help="relative convergence tolerance (default 1e-8 for MDS, 1e-10 for VOS)")
    p.add_argument("--max-iter", type=int, default=10000, help="iterations per start (default 10000)")
    p.add_argument("--largest-component", action="store_true",
                   help="keep only the largest connected component")
    p.add_argument("--drop-isolated", action="store_true",
                   help="drop items without any co-occurrence")
    p.add_argument("--workers", type=int, default=1, help="threads for the random starts")
    p.add_argument("--progress", action="store_true", help="report each finished start on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simmap", description="Co-occurrence maps by MDS and VOS.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("layout", help="compute one map and write a map document")
    p.add_argument("--method", choices=METHODS, default="mds-ordinal")
    p.add_argument("--similarity", choices=SIMILARITIES, default="assoc")
    p.add_argument("--figure", help="also render the map to an image file")
    _add_run_flags(p)

    p = sub.add_parser("compare", help="run MDS-AS, MDS-COS and VOS and write a JSON report")
    p.add_argument("--family", choices=("ordinal", "interval"), default="ordinal",
                   help="MDS transformation family (default ordinal)")
    p.add_argument("--table", help="TSV summary path (default: report path with .tsv)")
    p.add_argument("--figure", help="comparison figure path (default: report path with .png)")
    p.add_argument("--no-figure", action="store_true", help="skip the comparison figure")
    _add_run_flags(p)

    p = sub.add_parser("export-svg", help="render a map document as SVG")
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=1000)
    p.add_argument("--labels", type=int, default=25, help="label the K heaviest items")
    p.add_argument("--min-radius", type=float, default=2.0)
    p.add_argument("--max-radius", type=float, default=20.0)

    p = sub.add_parser("diagnose", help="print layout diagnostics of a map document as TSV")
    p.add_argument("--map", required=True)
    p.add_argument("--weights-from-items", help="item CSV whose weight/cluster columns override the document")
    return parser


def _config(args, method="mds-ordinal", similarity="assoc") -> RunConfig:
    return RunConfig(
        method=method, similarity=similarity, n_starts=args.starts, master_seed=args.seed,
        eps=args.eps, max_iter=args.max_iter, drop_isolated=args.drop_isolated,
        largest_component=args.largest_component, workers=args.workers,
    ).validate()


def _progress(enabled, total):
    if not enabled:
        return None

    def report(*a):
        *prefix, k, layout = a
        tag = f"{prefix[0]} " if prefix else ""
        print(f"{tag}start {k + 1}/{total} score {layout.score:.6g}", file=sys.stderr, flush=True)

    return report


def cmd_layout(args) -> int:
    config = _config(args, args.method, args.similarity)
    corpus = prepare_corpus(args.edges, args.items, config)
    doc = run_layout(corpus, config, _progress(args.progress, config.n_starts))
    write_document(doc, args.out)
    if args.figure:
        from .plotting import plot_document

        plot_document(doc, args.figure)
    return 0


def cmd_compare(args) -> int:
    config = _config(args)
    corpus = prepare_corpus(args.edges, args.items, config)
    report = compare(corpus, config, args.family, _progress(args.progress, config.n_starts))
    out = Path(args.out)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report_as_dict(report), fh, indent=2, ensure_ascii=False, allow_nan=False)
        fh.write("\n")
    table = Path(args.table) if args.table else out.with_suffix(".tsv")
    with open(table, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary_table(report))
    if not args.no_figure:
        from .plotting import plot_comparison

        figure = Path(args.figure) if args.figure else out.with_suffix(".png")
        plot_comparison({name: (doc, report["methods"][name])
                         for name, doc in report["maps"].items()}, figure)
    return 0


def cmd_export_svg(args) -> int:
    doc = read_document(args.map)
    export_svg(doc, args.out, width=args.width, labels=args.labels,
               min_radius=args.min_radius, max_radius=args.max_radius)
    return 0


def _read_item_overrides(path, ids):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise DataError(f"cannot read items file {path}: {exc}") from None
    known = set(ids)
    weights, clusters = {}, {}
    for row in rows:
        item = (row.get("id") or "").strip()
        if item not in known:
            raise DataError(f"items file names unknown id {item!r}")
        try:
            if row.get("weight", "").strip():
                weights[item] = float(row["weight"])
            if (row.get("cluster") or "").strip():
                clusters[item] = int(row["cluster"])
        except ValueError as exc:
            raise DataError(f"bad value for item {item!r}: {exc}") from None
    return weights, clusters


def cmd_diagnose(args) -> int:
    doc = read_document(args.map)
    ids = [it.id for it in doc.items]
    weights = {it.id: it.weight for it in doc.items}
    clusters = {it.id: it.cluster for it in doc.items}
    if args.weights_from_items:
        w, c = _read_item_overrides(args.weights_from_items, ids)
        weights.update(w)
        clusters.update(c)
    coords = np.array([[it.x, it.y] for it in doc.items], dtype=float).reshape(-1, 2)
    cl = [clusters[i] for i in ids]
    report = diagnose(coords, np.array([weights[i] for i in ids]),
                      cl if all(v is not None for v in cl) else None)
    rows = [("method", doc.method), ("similarity", doc.similarity), ("n", len(ids)),
            ("score", doc.score)] + list(report.as_dict().items())
    for key, value in rows:
        value = "NA" if value is None else (repr(value) if isinstance(value, float) else value)
        print(f"{key}\t{value}")
    return 0


COMMANDS = {
    "layout": cmd_layout,
    "compare": cmd_compare,
    "export-svg": cmd_export_svg,
    "diagnose": cmd_diagnose,
}


def main(argv=None) -> int:
    logging.basicConfig(format="simmap: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"simmap: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"simmap: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"simmap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"simmap: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
