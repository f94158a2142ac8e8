"""Command-line entry point: ``mimset <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input and 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from functools import lru_cache

import numpy as np

from . import gaussian, heads_tails, inclusion_exclusion as decomp, mec
from .graph import (Admg, GraphError, consistent_order, format_graph, graph_to_json, make_order,
                    parse_graph)
from .imset import Imset, ImsetError
from .separation import m_separated


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def render_set(g_or_names, mask: int) -> str:
    names = g_or_names.names if isinstance(g_or_names, Admg) else g_or_names
    return " ".join(names[i] for i in range(len(names)) if mask >> i & 1)


def parse_set(names, text: str) -> int:
    mask = 0
    for v in text.replace(",", " ").split():
        if v not in names:
            raise GraphError(f"unknown vertex {v!r}")
        mask |= 1 << names.index(v)
    return mask


def write_csv(rows, header, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating, int, np.integer)) else v for v in row])


def imset_rows(u: Imset):
    return [(render_set(u.names, s), int(u.values[s])) for s in range(1 << u.n)]


def read_imset_csv(text: str, names) -> Imset:
    """Inverse of the ``imset`` subcommand's output."""
    names = tuple(names)
    u = Imset(names)
    rows = list(csv.reader(io.StringIO(text)))
    for row in rows[1:]:
        if row:
            u.values[parse_set(names, row[0])] = int(row[1])
    return u


def load_graph(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise UsageError(f"--graph: cannot read {path}: {err.strerror}") from None
    try:
        return parse_graph(text)
    except GraphError as err:
        raise GraphError(f"{path}: {err}") from None


def resolve_order(g: Admg, declared, flag: str | None):
    if flag:
        return make_order(g, [v for v in flag.replace(",", " ").split()])
    return declared or consistent_order(g)


def load_moments(args, names=None) -> tuple[list[str], gaussian.SampleMoments]:
    if bool(args.data) == bool(args.cov):
        raise UsageError("give exactly one of --data or --cov")
    if args.data:
        header, x = gaussian.read_data_csv(args.data, names)
        return header, gaussian.SampleMoments.from_data(x)
    if args.n is None:
        raise UsageError("--cov needs --n")
    header, s = gaussian.read_covariance_csv(args.cov, names)
    return header, gaussian.SampleMoments.from_covariance(s, args.n)


@lru_cache(maxsize=4)
def catalog(p: int, names: tuple[str, ...]) -> mec.MecCatalog:
    return mec.build_mec_catalog(p, names)


# -- subcommands -------------------------------------------------------------------

def cmd_msep(args, out):
    g, _ = load_graph(args.graph)
    a, b, c = (parse_set(g.names, s or "") for s in (args.a, args.b, args.c))
    print("separated" if m_separated(g, a, b, c) else "connected", file=out)


def cmd_params(args, out):
    g, _ = load_graph(args.graph)
    fam = heads_tails.parameterizing_sets(g)
    if args.format == "json":
        json.dump({"heads": [{"head": g.labels(ht.head), "tail": g.labels(ht.tail)}
                             for ht in fam.head_tails],
                   "parameterizing": [g.labels(s) for s in fam.sets]}, out)
        out.write("\n")
        return
    rows = [("head", render_set(g, ht.head), render_set(g, ht.tail)) for ht in fam.head_tails]
    rows += [("parameterizing", render_set(g, s), "") for s in fam.sets]
    write_csv(rows, ["kind", "set", "tail"], out)


def cmd_imset(args, out):
    g, declared = load_graph(args.graph)
    if args.which == "m":
        u = heads_tails.m_imset(g)
    elif args.which == "n":
        u = heads_tails.n_imset(g)
    elif args.which == "characteristic":
        u = heads_tails.characteristic_imset(g)
    else:
        res = decomp.nie(g, resolve_order(g, declared, args.order))
        u = res.inclusion if args.which == "inclusion" else res.exclusion
    write_csv(imset_rows(u), ["subset", "value"], out)


def _cert_rows(g, side, cert):
    return [(side, render_set(g, t.a), render_set(g, t.b), render_set(g, t.c), str(k))
            for t, k in cert.terms]


def cmd_nie(args, out):
    g, declared = load_graph(args.graph)
    order = resolve_order(g, declared, args.order)
    res = decomp.nie(g, order, nonredundant=args.nonredundant)
    rows = [("inclusion", s, v) for s, v in imset_rows(res.inclusion)]
    rows += [("exclusion", s, v) for s, v in imset_rows(res.exclusion)]
    certs = _cert_rows(g, "inclusion", res.inclusion_cert) + _cert_rows(g, "exclusion", res.exclusion_cert)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "imsets.csv"), "w", encoding="utf-8") as fh:
            write_csv(rows, ["imset", "subset", "value"], fh)
        with open(os.path.join(args.out, "certificates.csv"), "w", encoding="utf-8") as fh:
            write_csv(certs, ["imset", "a", "b", "c", "coefficient"], fh)
        return
    write_csv(rows, ["imset", "subset", "value"], out)
    out.write("\n")
    write_csv(certs, ["imset", "a", "b", "c", "coefficient"], out)


def cmd_verify(args, out):
    g, declared = load_graph(args.graph)
    rep = decomp.verify_decomposition(g, resolve_order(g, declared, args.order))
    for f in rep.failures:
        print(f"FAIL {f}", file=out)
    print(f"{'ok' if rep.ok else 'failed'}: {rep.checked_triples} triples checked", file=out)
    return 0 if rep.ok else 1


def cmd_simulate(args, out):
    g, _ = load_graph(args.graph)
    x, model = gaussian.simulate(g, args.n, args.seed)
    target = open(args.out, "w", encoding="utf-8") if args.out else out
    try:
        target.write(f"# seed: {args.seed}\n")
        write_csv(x.tolist(), list(g.names), target)
    finally:
        if args.out:
            target.close()
    if args.sigma_out:
        with open(args.sigma_out, "w", encoding="utf-8") as fh:
            fh.write(f"# seed: {args.seed}\n")
            write_csv(model.sigma.tolist(), list(g.names), fh)


def cmd_score(args, out):
    g, declared = load_graph(args.graph)
    _, mom = load_moments(args, g.names)
    res = gaussian.bic_mf(g, resolve_order(g, declared, args.order), mom)
    write_csv([(res.score, res.loglik, res.dimension, res.penalty)],
              ["score", "loglik", "dimension", "penalty"], out)


def cmd_rank(args, out):
    names, mom = load_moments(args)
    if len(names) > mec.MAX_P:
        raise UsageError(f"ranking supports at most {mec.MAX_P} variables")
    cat = catalog(len(names), tuple(names))
    truth = None
    if args.truth:
        tg, _ = load_graph(args.truth)
        truth = cat.class_of(tg)
    rep = mec.rank_models(cat, mom, truth)
    rows = []
    for pos, cid in enumerate(rep.ranking, start=1):
        rows.append((int(cid), format_graph(cat.representative(cid)).strip().replace("\n", "; "),
                     float(rep.scores[cid]), pos))
    target = out
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        target = open(os.path.join(args.out, "ranks.csv"), "w", encoding="utf-8")
    try:
        write_csv(rows, ["class_id", "representative", "score", "rank"], target)
    finally:
        if target is not out:
            target.close()
    if truth is not None:
        print(f"rank of truth: {rep.rank_of_truth} (ties {rep.ties_with_truth})", file=sys.stderr)


def cmd_experiment(args, out):
    if bool(args.generator) == bool(args.edges):
        raise UsageError("give exactly one of --generator or --edges")
    p = args.p
    if args.generator:
        gen, _ = load_graph(args.generator)
        p = gen.n
    cat = catalog(p, tuple(gen.names) if args.generator else tuple(mec.DEFAULT_NAMES[:p]))
    if args.edges:
        lo, hi = (int(v) for v in args.edges.split(","))
        gen = mec.random_mag_sampler(cat, (lo, hi))
    ns = [int(v) for v in args.n.split(",")]
    hist_rows, summary_rows = [], []
    for n in ns:
        res = mec.recovery_experiment(cat, gen, n, args.reps, args.seed)
        hist_rows += [(n, b, c) for b, c in res.histogram()]
        summary_rows.append((n, args.reps, res.top1() if args.reps else "", res.mean_rank() if args.reps else "",
                             res.seconds, args.seed))
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "histogram.csv"), "w", encoding="utf-8") as fh:
        write_csv(hist_rows, ["n", "bin", "count"], fh)
    with open(os.path.join(args.out, "summary.csv"), "w", encoding="utf-8") as fh:
        write_csv(summary_rows, ["n", "reps", "top1", "mean_rank", "wall_time", "seed"], fh)
    write_csv(summary_rows, ["n", "reps", "top1", "mean_rank", "wall_time", "seed"], out)


def cmd_enumerate(args, out):
    if args.mags:
        print(len(mec.directed_mag_codes(args.p)), file=out)
    else:
        print(len(catalog(args.p, tuple(mec.DEFAULT_NAMES[:args.p]))), file=out)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mimset", description="m-connecting imsets for ADMGs")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def graph_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--graph", required=True)
        return p

    p = graph_cmd("msep", "test m-separation")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--c", default="")
    p = graph_cmd("params", "heads, tails and parameterizing sets")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p = graph_cmd("imset", "print an imset of the graph")
    p.add_argument("--which", choices=["m", "n", "characteristic", "inclusion", "exclusion"], default="m")
    p.add_argument("--order")
    p = graph_cmd("nie", "inclusion-exclusion decomposition")
    p.add_argument("--order")
    p.add_argument("--nonredundant", action="store_true")
    p.add_argument("--out")
    p = graph_cmd("verify", "check the decomposition and its certificates")
    p.add_argument("--order")
    p = graph_cmd("simulate", "draw Gaussian data from a directed MAG")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--sigma-out")
    p = graph_cmd("score", "BIC_MF of a graph")
    p.add_argument("--order")
    rank = sub.add_parser("rank", help="rank every equivalence class")
    for q in (p, rank):
        q.add_argument("--data")
        q.add_argument("--cov")
        q.add_argument("--n", type=int, help="sample size behind --cov")
    rank.add_argument("--truth")
    rank.add_argument("--out")
    rank.add_argument("--threads", type=int, default=0)
    p = sub.add_parser("experiment", help="recovery experiment")
    p.add_argument("--generator")
    p.add_argument("--edges", help="edge-count range LO,HI for random MAGs")
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--n", required=True, help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=0)
    p = sub.add_parser("enumerate", help="count equivalence classes of directed MAGs")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--mags", action="store_true", help="count MAGs instead of classes")
    return ap


COMMANDS = {"msep": cmd_msep, "params": cmd_params, "imset": cmd_imset, "nie": cmd_nie,
            "verify": cmd_verify, "simulate": cmd_simulate, "score": cmd_score, "rank": cmd_rank,
            "experiment": cmd_experiment, "enumerate": cmd_enumerate}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.cmd](args, out) or 0
    except (gaussian.NumericalError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        sys.stderr.close()
        return 0
    except (UsageError, GraphError, ImsetError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
