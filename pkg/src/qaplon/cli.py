"""Command-line front end.

Subcommands mirror the pipeline stages: generate an instance, build and
filter its LON, detect communities on an exported graph, run a batch
experiment, summarize a records file.

Exit codes: 0 success, 1 usage error (bad flags or argument values),
2 data error (unreadable or malformed input files), 3 refusal because an
instance size exceeds the exhaustive-enumeration limit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .community import (
    greedy_modularity,
    load_graph_csv,
    save_partition,
    spinglass_communities,
)
from .errors import ContractError, ModularityUndefinedError, ParseError, ResourceLimitError
from .experiment import (
    RECORDS_FILENAME,
    format_summary,
    load_experiment_config,
    read_records_csv,
    run_experiment,
    summarize,
    write_summary_csv,
)
from .generators import GeneratorConfig, generate, format_instance, load_instance, save_instance, save_meta
from .landscape import enumerate_basins, save_basin_map
from .lon import EXPORT_FORMATS, build_lon, export_graph, filter_lon

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_LIMIT = 3


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the documented usage-error code is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageExit(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qaplon", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a seeded instance")
    p.add_argument("--class", dest="instance_class", required=True,
                   choices=["uniform", "real-like"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, default=None,
                   help="instance file path; stdout when omitted")

    p = sub.add_parser("lon", help="enumerate basins and export the filtered LON")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--export", choices=list(EXPORT_FORMATS), default="edge_csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("communities", help="detect communities on an exported graph")
    p.add_argument("--graph", type=Path, required=True,
                   help="edge CSV (src,dst,weight); a sibling .nodes.csv is picked up")
    p.add_argument("--algorithm", choices=["greedy", "spinglass"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--out", type=Path, required=True, help="partition CSV path")

    p = sub.add_parser("experiment", help="run a batch experiment from a config file")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("summarize", help="summarize a records CSV")
    p.add_argument("--records", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="summary CSV path")
    return parser


def _cmd_generate(args) -> int:
    cls = args.instance_class.replace("-", "_")
    cfg = GeneratorConfig(n=args.n, seed=args.seed, instance_class=cls)
    inst = generate(cfg)
    if args.out is None:
        sys.stdout.write(format_instance(inst))
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        save_instance(inst, args.out)
        save_meta(cfg, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_lon(args) -> int:
    inst = load_instance(args.instance)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    stem = args.instance.stem
    bm = enumerate_basins(inst, workers=args.workers)
    save_basin_map(bm, out / f"{stem}.basins", out / f"{stem}.roster.csv")
    lon = build_lon(inst, bm, workers=args.workers)
    flon = filter_lon(lon, args.alpha)
    suffix = {"graphml": ".graphml", "dot": ".dot", "edge_csv": ".edges.csv"}[args.export]
    written = export_graph(flon, args.export, out / f"{stem}.filtered{suffix}")
    thr = "none" if flon.threshold is None else f"{float(flon.threshold):.6g}"
    print(
        f"{stem}: n={inst.n} optima={bm.n_optima} "
        f"edges_kept={len(flon.edges)} threshold={thr}"
    )
    for path in [out / f"{stem}.basins", out / f"{stem}.roster.csv"] + written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_communities(args) -> int:
    g = load_graph_csv(args.graph)
    if args.algorithm == "greedy":
        part = greedy_modularity(g)
        gamma = None
    else:
        part = spinglass_communities(g, seed=args.seed, gamma=args.gamma)
        gamma = args.gamma
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_partition(part, args.out, gamma=gamma)
    print(
        f"{args.algorithm}: {part.n_communities} communities, Q = {part.q:.6f}"
    )
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = load_experiment_config(args.config, out_dir=args.out)
    records = run_experiment(cfg)
    # summarize the CSV as written so `summarize` on it reproduces summary.csv
    records = read_records_csv(Path(args.out) / RECORDS_FILENAME)
    summary = summarize(records)
    write_summary_csv(summary, Path(args.out) / "summary.csv")
    print(format_summary(summary))
    n_err = sum(1 for r in records if r.error)
    print(f"{len(records)} records ({n_err} errors) -> {Path(args.out) / RECORDS_FILENAME}")
    return EXIT_OK


def _cmd_summarize(args) -> int:
    records = read_records_csv(args.records)
    summary = summarize(records)
    write_summary_csv(summary, args.out)
    print(format_summary(summary))
    print(f"wrote {args.out}")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "lon": _cmd_lon,
    "communities": _cmd_communities,
    "experiment": _cmd_experiment,
    "summarize": _cmd_summarize,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ParseError, ModularityUndefinedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
