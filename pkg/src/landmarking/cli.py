"""Command-line pipeline: ``gen -> graph -> align -> select -> learn``, plus ``bench`` and ``bound``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import alignment as al
from .bench import ExperimentConfig, emit_report, run_experiment
from .data import generate_synthetic, load_dataset, save_dataset, SYNTHETIC_KINDS
from .graph import knn_graph, load_graph, save_graph
from .landmark import SELECTORS, SelectionResult, select_landmarks
from .spectral import GershgorinState, error_bound, surrogate_q
from .ssml import ls_learn, spec_learn

log = logging.getLogger("landmarking")


class UsageError(Exception):
    def __init__(self, message, usage):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="landmarking", description=__doc__.splitlines()[0])
    p.add_argument("-q", "--quiet", action="store_true", help="log warnings only")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="generate a synthetic dataset")
    s.add_argument("--kind", required=True, choices=SYNTHETIC_KINDS)
    s.add_argument("--n", required=True, type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=0.0, help="ambient noise standard deviation")
    s.add_argument("--out", required=True)

    s = sub.add_parser("graph", help="build a K-NN graph")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--k", required=True, type=int)
    s.add_argument("--out", required=True)

    s = sub.add_parser("align", help="build an alignment matrix")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--method", required=True, choices=al.METHODS)
    s.add_argument("--d", type=int)
    s.add_argument("--lle-reg", type=float, default=1e-3)
    s.add_argument("--le-weight", choices=("distance", "heat"), default="distance")
    s.add_argument("--out", required=True)

    s = sub.add_parser("select", help="select landmarks")
    s.add_argument("--align", required=True)
    s.add_argument("--method", required=True, choices=SELECTORS)
    s.add_argument("--L", required=True, type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tau", type=float, help="positivity margin (default 1e-8 * max |phi_ii|)")
    s.add_argument("--exact-eval", action="store_true")
    s.add_argument("--data", help="dataset CSV (approxdpp, kmeans)")
    s.add_argument("--graph", help="graph file (maxmingeo)")
    s.add_argument("--out", required=True)

    s = sub.add_parser("learn", help="propagate landmark labels")
    s.add_argument("--align", required=True)
    s.add_argument("--labels", required=True, help="labeled dataset CSV")
    s.add_argument("--landmarks", required=True, help="selection JSON or comma-separated indices")
    s.add_argument("--learner", choices=("ls", "spec"), default="ls")
    s.add_argument("--gamma", type=float)
    s.add_argument("--d", type=int)
    s.add_argument("--out", required=True)

    s = sub.add_parser("bench", help="run the regression benchmark")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--jobs", type=int, default=1)

    s = sub.add_parser("bound", help="print the error bound and its Gershgorin surrogate")
    s.add_argument("--align", required=True)
    s.add_argument("--landmarks", required=True, help="selection JSON or comma-separated indices")
    s.add_argument("--tau", type=float, help="regularize with this margin before evaluating")
    return p


def _read_landmarks(spec: str):
    if os.path.exists(spec):
        with open(spec) as fh:
            return SelectionResult.from_json(fh.read()).landmarks
    try:
        return [int(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise FileNotFoundError(f"{spec}: neither a selection file nor an index list") from None


def _cmd_gen(args):
    ds = generate_synthetic(args.kind, args.n, args.seed, args.noise)
    save_dataset(ds, args.out)


def _cmd_graph(args):
    save_graph(knn_graph(load_dataset(args.inp), args.k), args.out)


def _cmd_align(args):
    ds = load_dataset(args.inp)
    a = al.build_alignment(ds, load_graph(args.graph), args.method, d=args.d,
                           lle_reg=args.lle_reg, le_weight=args.le_weight)
    al.save_alignment(a, args.out)


def _cmd_select(args):
    a = al.load_alignment(args.align)
    reg = al.regularize_alignment(a, args.tau)
    ds = load_dataset(args.data) if args.data else None
    g = load_graph(args.graph) if args.graph else None
    if args.method in ("approxdpp", "kmeans") and ds is None:
        raise ValueError(f"--data is required for {args.method}")
    if args.method == "maxmingeo" and g is None:
        raise ValueError("--graph is required for maxmingeo")
    sel = select_landmarks(args.method, args.L, args.seed, reg=reg, alignment=a, dataset=ds,
                           graph=g, exact_eval=args.exact_eval)
    if args.method not in ("gcls", "mincond"):
        sel.seed = args.seed
    with open(args.out, "w") as fh:
        fh.write(sel.to_json())
        fh.write("\n")


def _cmd_learn(args):
    a = al.load_alignment(args.align)
    ds = load_dataset(args.labels, has_labels=True)
    lm = np.asarray(_read_landmarks(args.landmarks))
    z_l = ds.labels[:, lm]
    if args.learner == "ls":
        res = ls_learn(a, z_l, lm, 0.0 if args.gamma is None else args.gamma)
    else:
        res = spec_learn(a, z_l, lm, 1.0 if args.gamma is None else args.gamma, args.d)
    save_dataset(ds, args.out, labels=res.full())


def _cmd_bench(args):
    with open(args.config) as fh:
        raw = json.load(fh)
    if os.environ.get("BENCH_SEED"):
        raw["master_seed"] = int(os.environ["BENCH_SEED"])
    cfg = ExperimentConfig.from_dict(raw)
    log.info("bench configuration: %s", json.dumps(cfg.to_dict(), sort_keys=True))
    emit_report(run_experiment(cfg, jobs=args.jobs), args.out, args.format)


def _cmd_bound(args):
    a = al.load_alignment(args.align)
    psi = al.regularize_alignment(a, args.tau).matrix if args.tau is not None else a.matrix
    lm = _read_landmarks(args.landmarks)
    state = GershgorinState(psi)
    for i in lm:
        state.remove(int(i))
    print(f"bound {error_bound(psi, lm):.12g}")
    print(f"Q {surrogate_q(state):.12g}")


COMMANDS = {"gen": _cmd_gen, "graph": _cmd_graph, "align": _cmd_align, "select": _cmd_select,
            "learn": _cmd_learn, "bench": _cmd_bench, "bound": _cmd_bound}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        print(exc.usage, file=sys.stderr, end="")
        return 1
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("resolved configuration: %s", json.dumps(vars(args), sort_keys=True))
    try:
        COMMANDS[args.command](args)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
