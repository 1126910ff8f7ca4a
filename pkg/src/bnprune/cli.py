"""Command-line interface.

Subcommands:

    scores   build pruned candidate-parent-set score caches
    bounds   report per-node and global in-degree bounds
    stats    pruning activation counts for chosen in-degrees
    verify   certify pruning losslessness against brute force

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 verification
failure, 4 refused work budget.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from . import __version__
from .cache import FORMATS, filter_dominated, write_cache
from .dataset import load_csv, read_arity_file
from .errors import BudgetError, DataError
from .kernels import backend_name
from .oracle import OracleReport, certify, certify_campaign
from .pruning import RULES, PruneConfig, bounds_report, build_lists, search_space_size

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3
EXIT_BUDGET = 4

STAT_SELECTIONS = (
    ("alg1", ("alg1",)),
    ("alg2", ("alg2",)),
    ("alg1+2", ("alg1", "alg2")),
    ("alg3", ("alg3",)),
    ("alg4", ("alg4",)),
    ("alg3+4", ("alg3", "alg4")),
    ("alg1+4", ("alg1", "alg4")),
)


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rules_arg(text):
    if text.strip() in ("", "none"):
        return frozenset()
    rules = [tok.strip() for tok in text.split(",")]
    unknown = [r for r in rules if r not in RULES]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown rules {unknown}; pick from {','.join(RULES)} or 'none'"
        )
    return frozenset(rules)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _indegree_list(text):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad in-degree list {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"bad in-degree list {text!r}")
    return values


def _add_dataset_args(p, optional=False):
    if optional:
        p.add_argument("dataset", nargs="?", help="input csv file")
    else:
        p.add_argument("dataset", help="input csv file")
    p.add_argument("--delimiter", default=",", help="csv field separator (default ',')")
    p.add_argument("--no-header", action="store_true", help="first line is data, not names")
    p.add_argument("--allow-constant", action="store_true",
                   help="keep single-valued columns instead of rejecting them")
    p.add_argument("--arity-file", default=None,
                   help="json sidecar declaring arities above the observed support "
                        "(default: <dataset>.arities.json when present)")


def _add_run_args(p):
    p.add_argument("--log-base", choices=("e", "2"), default="e",
                   help="log base for all scores (default e)")
    p.add_argument("--rules", type=_rules_arg, default=frozenset(RULES),
                   help="comma list from alg1,alg2,alg3,alg4, or 'none' (default: all)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads (default: BNPRUNE_THREADS or 1)")


def build_parser():
    p = _Parser(prog="bnprune", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"bnprune {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("scores", help="build pruned score caches")
    _add_dataset_args(ps)
    _add_run_args(ps)
    ps.add_argument("-k", "--max-indegree", type=int, required=True,
                    help="largest parent-set size to consider")
    ps.add_argument("-o", "--output", required=True, help="cache file to write")
    ps.add_argument("--format", choices=FORMATS, default=None,
                    help="cache format (default: from output suffix, else jkl)")
    ps.set_defaults(func=cmd_scores)

    pb = sub.add_parser("bounds", help="report in-degree bounds")
    _add_dataset_args(pb)
    pb.add_argument("-k", "--max-indegree", type=int, default=None,
                    help="requested cap to fold into the effective bounds")
    pb.add_argument("--log-base", choices=("e", "2"), default="e")
    pb.add_argument("-o", "--output", default=None, help="write the report as json")
    pb.set_defaults(func=cmd_bounds)

    pt = sub.add_parser("stats", help="pruning activation counts")
    _add_dataset_args(pt)
    pt.add_argument("--indegrees", type=_indegree_list, required=True,
                    help="comma list of in-degree caps, e.g. 3,4,5")
    pt.add_argument("--log-base", choices=("e", "2"), default="e")
    pt.add_argument("--threads", type=_positive_int, default=None)
    pt.add_argument("-o", "--output", default=None, help="write the table as json")
    pt.set_defaults(func=cmd_stats)

    pv = sub.add_parser("verify", help="certify pruning losslessness")
    _add_dataset_args(pv, optional=True)
    _add_run_args(pv)
    pv.add_argument("-k", "--max-indegree", type=int, default=None,
                    help="in-degree cap (default: number of variables minus one)")
    pv.add_argument("--random", type=_positive_int, default=None, metavar="COUNT",
                    help="certify COUNT seeded random instances over all rule subsets")
    pv.add_argument("--seed", type=int, default=0, help="campaign master seed")
    pv.add_argument("--budget", type=_positive_int, default=10**6,
                    help="max exhaustive candidate sets per child (default 1000000)")
    pv.add_argument("-o", "--output", default=None, help="write the full report as json")
    pv.set_defaults(func=cmd_verify)
    return p


def _resolve_threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("BNPRUNE_THREADS", "")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise DataError(f"BNPRUNE_THREADS={env!r} is not an integer") from None
        if value < 1:
            raise DataError(f"BNPRUNE_THREADS={env!r} must be at least 1")
        return value
    return 1


def _resolve_base(args):
    return 2.0 if args.log_base == "2" else math.e


def _load_dataset(args):
    overrides = None
    if args.arity_file:
        overrides = read_arity_file(args.arity_file)
    else:
        sidecar = f"{args.dataset}.arities.json"
        if os.path.exists(sidecar):
            overrides = read_arity_file(sidecar)
    return load_csv(
        args.dataset,
        delimiter=args.delimiter,
        header=not args.no_header,
        allow_constant=args.allow_constant,
        arity_overrides=overrides,
    )


def _fingerprint(args, k, rules, seed=None):
    return {
        "dataset": getattr(args, "dataset", None),
        "max_indegree": k,
        "rules": ",".join(r for r in RULES if r in rules) or "none",
        "base": args.log_base,
        "seed": seed,
        "version": __version__,
    }


def _print_fingerprint(fp):
    print(
        "config: dataset={dataset} k={max_indegree} rules={rules} "
        "base={base} seed={seed} version={version}".format(**fp)
    )


def cmd_scores(args):
    if args.max_indegree < 0:
        print("error: max in-degree must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    ds = _load_dataset(args)
    k = min(args.max_indegree, ds.n - 1)
    config = PruneConfig(k, args.rules, _resolve_base(args))
    threads = _resolve_threads(args)
    started = time.perf_counter()
    lists, stats = build_lists(ds, config, threads=threads)
    final = [filter_dominated(scores, child) for child, scores in enumerate(lists)]
    elapsed = time.perf_counter() - started

    fmt = args.format
    if fmt is None:
        suffix = args.output.rsplit(".", 1)[-1].lower()
        fmt = suffix if suffix in FORMATS else "jkl"
    meta = {
        "base": args.log_base,
        "max_indegree": k,
        "rules": ",".join(stats.rules) or "none",
        "variables": ds.n,
        "rows": ds.N,
        "version": __version__,
    }
    write_cache(final, ds.names, args.output, fmt=fmt, meta=meta)

    kept_total = sum(len(cl.entries) for cl in final)
    by_rule = stats.by_rule_total
    print(f"dataset: {args.dataset} n={ds.n} N={ds.N} backend={backend_name()}")
    _print_fingerprint(_fingerprint(args, k, config.rules))
    print(f"search space: {stats.search_space} non-empty candidate sets")
    print(f"evaluated: {stats.evaluated_total} pruned: {stats.pruned_total} "
          + " ".join(f"{r}={by_rule[r]}" for r in stats.rules))
    print(f"extra conditional entropies for alg2: {stats.cond_entropy_evals_total}")
    dropped = stats.evaluated_total + ds.n - kept_total
    print(f"retained: {kept_total} entries after dominated-subset filter (-{dropped})")
    for cl in final:
        print(f"  {ds.names[cl.child]}: {len(cl.entries)}")
    print(f"wrote {fmt} cache: {args.output}")
    print(f"time: {elapsed:.3f}s")
    return EXIT_OK


def cmd_bounds(args):
    ds = _load_dataset(args)
    base = _resolve_base(args)
    rep = bounds_report(ds, args.max_indegree, base)
    print(f"dataset: {args.dataset} n={ds.n} N={ds.N}")
    print(f"global bound: {rep.global_bound}")
    print(f"per-node bounds: {rep.grouped()}")
    print(f"effective cap (k={rep.max_indegree}):")
    for name, bound, eff in zip(rep.names, rep.per_node, rep.effective):
        print(f"  {name}: bound={bound} effective={eff}")
    if args.output:
        doc = {
            "dataset": args.dataset,
            "n": ds.n,
            "N": ds.N,
            "base": args.log_base,
            "max_indegree": rep.max_indegree,
            "global_bound": rep.global_bound,
            "per_node": [
                {"name": name, "bound": bound, "effective": eff}
                for name, bound, eff in zip(rep.names, rep.per_node, rep.effective)
            ],
            "grouped": rep.grouped(),
            "version": __version__,
        }
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        print(f"wrote report: {args.output}")
    return EXIT_OK


def cmd_stats(args):
    ds = _load_dataset(args)
    base = _resolve_base(args)
    threads = _resolve_threads(args)
    labels = [label for label, _ in STAT_SELECTIONS]
    rows = []
    started = time.perf_counter()
    for req in args.indegrees:
        k = min(req, ds.n - 1)
        counts = {}
        for label, selection in STAT_SELECTIONS:
            _, stats = build_lists(ds, PruneConfig(k, frozenset(selection), base), threads)
            counts[label] = stats.pruned_total
        ratios = {}
        for label in ("alg1+2", "alg1+4"):
            ratios[f"{label}/alg1"] = (
                counts[label] / counts["alg1"] if counts["alg1"] else None
            )
        rows.append(
            {
                "max_indegree": k,
                "search_space": search_space_size(ds.n, k),
                "counts": counts,
                "ratios": ratios,
            }
        )
    elapsed = time.perf_counter() - started

    print(f"dataset: {args.dataset} n={ds.n} N={ds.N} backend={backend_name()}")
    header = ["k", "|S|"] + labels + ["alg1+2/alg1", "alg1+4/alg1"]
    print("  ".join(header))
    for row in rows:
        cells = [str(row["max_indegree"]), str(row["search_space"])]
        cells += [str(row["counts"][label]) for label in labels]
        for key in ("alg1+2/alg1", "alg1+4/alg1"):
            val = row["ratios"][key]
            cells.append("-" if val is None else f"{val:.2f}")
        print("  ".join(cells))
    print(f"time: {elapsed:.3f}s")
    if args.output:
        doc = {
            "dataset": args.dataset,
            "n": ds.n,
            "N": ds.N,
            "base": args.log_base,
            "seed": None,
            "version": __version__,
            "rows": rows,
        }
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        print(f"wrote report: {args.output}")
    return EXIT_OK


def cmd_verify(args):
    base = _resolve_base(args)
    threads = _resolve_threads(args)
    if args.random is None and args.dataset is None:
        print("error: verify needs a dataset or --random COUNT", file=sys.stderr)
        return EXIT_USAGE

    started = time.perf_counter()
    if args.random is not None:
        report = certify_campaign(
            args.random,
            args.seed,
            base=base,
            budget=args.budget,
            threads=threads,
            max_indegree=args.max_indegree,
        )
        fp = _fingerprint(args, args.max_indegree, args.rules, seed=args.seed)
    else:
        ds = _load_dataset(args)
        k = ds.n - 1 if args.max_indegree is None else min(args.max_indegree, ds.n - 1)
        config = PruneConfig(k, args.rules, base)
        result = certify(
            ds, config, threads=threads, budget=args.budget, check_dominance=True
        )
        report = OracleReport([result])
        fp = _fingerprint(args, k, args.rules, seed=None)
    elapsed = time.perf_counter() - started

    _print_fingerprint(fp)
    print(report.summary())
    dominance = [r.dominance_ok for r in report.instances if r.dominance_ok is not None]
    if dominance:
        print(f"dominance checks: {'ok' if all(dominance) else 'FAIL'} ({len(dominance)} run)")
    print(f"time: {elapsed:.3f}s")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
            fh.write("\n")
        print(f"wrote report: {args.output}")
    if not report.all_safe or (dominance and not all(dominance)):
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
