"""Command-line front end: ``ssbm {fit,select,generate,eval,sweep}``.

Every command that writes files writes them to one run directory along
with ``manifest.json`` (command, inputs, fully resolved config, seed,
version, wall time).  Exit codes: 0 ok, 2 usage, 3 bad input data,
4 fit failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .benchmark import (GeneratorConfig, generate, generate_mixed_blocks, nmi, parse_grid, sweep,
                        sweep_csv)
from .em import DegenerateParametersError, FitConfig, FitResult, fit
from .graph import EdgeListError, Partition, format_labels, read_edge_list, read_labels, write_edge_list
from .membership import block_image, hard_partition, membership_table, soft_membership
from .selection import select_groups

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FIT = 0, 2, 3, 4
THREADS_ENV = "SSBM_THREADS"

log = logging.getLogger("ssbm")


class DataError(Exception):
    pass


def _write_manifest(out: Path, command: str, inputs: list[str], config: dict, seed: int,
                    started: float) -> None:
    manifest = {"command": command, "inputs": inputs, "config": config, "seed": seed,
                "version": __version__, "wall_time": time.time() - started}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_graph(path: str, directed: bool | None):
    try:
        return read_edge_list(path, directed=directed)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (EdgeListError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _fit_config(args) -> FitConfig:
    return FitConfig(restarts=args.restarts, max_iters=args.max_iters, rel_tol=args.tol,
                     seed=args.seed, threads=args.threads, init=args.init)


def _write_fit(out: Path, g, res: FitResult) -> None:
    d = res.to_dict()
    d["names"] = list(g.names)
    (out / "params.json").write_text(json.dumps(d) + "\n")
    (out / "membership.csv").write_text(membership_table(res.params, g.names))
    (out / "block_image.json").write_text(json.dumps(block_image(res.params), indent=2) + "\n")
    labels = hard_partition(soft_membership(res.params), "outgoing").labels
    (out / "labels.tsv").write_text(format_labels(g.names, labels))


def cmd_fit(args) -> int:
    started = time.time()
    g = _load_graph(args.graph, args.directed)
    cfg = _fit_config(args)
    if args.groups > g.n:
        raise DataError(f"--groups {args.groups} exceeds the {g.n} vertices")
    res = fit(g, args.groups, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_fit(out, g, res)
    _write_manifest(out, "fit", [args.graph], {"groups": args.groups, **asdict(cfg),
                    "mode": cfg.resolved_mode(g)}, cfg.seed, started)
    print(f"L = {res.log_likelihood:.6f} after {res.iterations} iterations "
          f"(converged: {res.converged}); wrote {out}")
    return EXIT_OK


def cmd_select(args) -> int:
    started = time.time()
    g = _load_graph(args.graph, args.directed)
    cfg = _fit_config(args)
    if args.max_groups > g.n:
        raise DataError(f"--max-groups {args.max_groups} exceeds the {g.n} vertices")
    report = select_groups(g, args.min_groups, args.max_groups, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "mdl.csv").write_text(report.to_csv())
    (out / "mdl.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    _write_fit(out, g, report.best.fit)
    _write_manifest(out, "select", [args.graph],
                    {"min_groups": args.min_groups, "max_groups": args.max_groups, **asdict(cfg),
                     "mode": cfg.resolved_mode(g), "zero_tol": report.zero_tol}, cfg.seed, started)
    print(f"best c = {report.best_c}; wrote {out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    started = time.time()
    if args.mixed:
        net = generate_mixed_blocks(args.seed, args.block_size)
        config = net.metadata
    else:
        cfg = GeneratorConfig(n=args.n, groups=args.groups, avg_degree=args.avg_degree,
                              p_in=args.p_in, p_plus=args.p_plus, p_minus=args.p_minus,
                              mode=args.mode, seed=args.seed)
        net = generate(cfg)
        config = asdict(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(net.graph, out / "graph.txt")
    (out / "truth.tsv").write_text(format_labels(net.graph.names, net.truth.labels))
    _write_manifest(out, "generate", [], config, args.seed, started)
    print(f"n = {net.graph.n}, m+ = {len(net.graph.pos)}, m- = {len(net.graph.neg)}; wrote {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        names, truth = read_labels(args.truth)
        _, pred = read_labels(args.predicted, names)
    except OSError as exc:
        raise DataError(f"cannot read labels: {exc}") from None
    except (EdgeListError, ValueError) as exc:
        raise DataError(str(exc)) from None
    try:
        score = nmi(Partition.from_labels(truth), Partition.from_labels(pred))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    print(repr(score))
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.time()
    cells = parse_grid(args.grid)
    base = GeneratorConfig(n=args.n, groups=args.groups, avg_degree=args.avg_degree,
                           mode=args.mode, seed=args.seed)
    cfg = _fit_config(args)
    rows = sweep(cells, args.realizations, base, cfg, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(sweep_csv(rows))
    _write_manifest(out, "sweep", [], {"grid": args.grid, "realizations": args.realizations,
                    "generator": asdict(base), "fit": asdict(cfg)}, args.seed, started)
    sys.stdout.write(sweep_csv(rows))
    return EXIT_OK


def _probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"{v} is not in [0, 1]")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} must be >= 1")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{v} must be > 0")
    return v


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssbm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--restarts", type=_positive_int, default=10)
    fitting.add_argument("--max-iters", type=_positive_int, default=500)
    fitting.add_argument("--tol", type=_positive_float, default=1e-8,
                         help="relative log-likelihood change that stops EM")
    fitting.add_argument("--seed", type=int, default=0)
    fitting.add_argument("--init", choices=["spectral", "random"], default="spectral")
    fitting.add_argument("--threads", type=_positive_int, default=_default_threads(),
                         help=f"parallel workers (default: ${THREADS_ENV} or 1)")

    graph_in = argparse.ArgumentParser(add_help=False)
    graph_in.add_argument("graph", help="signed edge list")
    d = graph_in.add_mutually_exclusive_group()
    d.add_argument("--directed", dest="directed", action="store_const", const=True, default=None)
    d.add_argument("--undirected", dest="directed", action="store_const", const=False)

    p = sub.add_parser("fit", parents=[graph_in, fitting], help="fit the model with c groups")
    p.add_argument("--groups", "-c", type=_positive_int, required=True)
    p.add_argument("--out", default="ssbm-fit")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", parents=[graph_in, fitting], help="choose c by description length")
    p.add_argument("--min-groups", type=_positive_int, default=1)
    p.add_argument("--max-groups", type=_positive_int, required=True)
    p.add_argument("--out", default="ssbm-select")
    p.set_defaults(func=cmd_select)

    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument("--mode", choices=["community", "disassortative"], default="community")
    gen.add_argument("--n", type=_positive_int, default=128)
    gen.add_argument("--groups", type=_positive_int, default=4)
    gen.add_argument("--avg-degree", type=float, default=16.0)

    p = sub.add_parser("generate", parents=[gen], help="write a synthetic signed network")
    p.add_argument("--p-in", type=_probability, default=0.8)
    p.add_argument("--p-plus", type=_probability, default=0.0)
    p.add_argument("--p-minus", type=_probability, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mixed", action="store_true",
                   help="directed four-block network with mixed structure types")
    p.add_argument("--block-size", type=_positive_int, default=32)
    p.add_argument("--out", default="ssbm-generate")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="NMI between two label files")
    p.add_argument("truth")
    p.add_argument("predicted")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[gen, fitting], help="mean NMI over a parameter grid")
    p.add_argument("--grid", required=True, help='e.g. "p_in=0.9,0.5;p_plus=0;p_minus=0"')
    p.add_argument("--realizations", type=_positive_int, default=10)
    p.add_argument("--out", default="ssbm-sweep")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "select" and args.min_groups > args.max_groups:
        parser.error("--min-groups must not exceed --max-groups")
    if args.command == "sweep":
        try:
            parse_grid(args.grid)
        except ValueError as exc:
            parser.error(str(exc))
    try:
        return args.func(args)
    except DataError as exc:
        print(f"ssbm: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateParametersError as exc:
        print(f"ssbm: fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except ValueError as exc:
        # configuration rejected by the library, e.g. an infeasible degree target
        print(f"ssbm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
