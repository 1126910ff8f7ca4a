"""Brute-force reference scoring and pruning-safety certification.

Everything in this module recomputes from first principles: counts go
through plain dictionaries keyed by row value tuples, likelihoods are
summed cell by cell with ``math.log``, and no counting code is shared
with the production kernels. The certification entry points run the
pruned pipeline, then confront its output with the oracle's numbers:

  * every evaluated entry must match the oracle score;
  * every candidate that was skipped or filtered out must be covered by
    a retained subset scoring at least as well (ties resolve toward
    fewer arcs, so equality is lossless).

A random-instance campaign over all rule subsets is the strongest form:
losslessness is certified against exhaustive enumeration, instance by
instance.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cache import filter_dominated
from .dataset import Dataset
from .errors import BudgetError
from .pruning import RULES, PruneConfig, build_lists

DEFAULT_BUDGET = 10**6


def _log_fn(base):
    if base == 2:
        return math.log2
    if base == math.e:
        return math.log
    if not base >= 2:
        raise ValueError(f"log base must be at least 2, got {base}")
    scale = math.log(base)
    return lambda v: math.log(v) / scale


def exhaustive_scores(ds: Dataset, child: int, max_indegree: int, base=math.e, budget=DEFAULT_BUDGET):
    """BIC of every parent set of ``child`` up to the in-degree cap.

    Plain nested-loop counting, one pass per candidate. Returns a dict
    from parent-set bitmask to score, empty set included. Refuses with
    :class:`BudgetError` when the candidate count exceeds ``budget``.
    """
    n, N = ds.n, ds.N
    k = min(max_indegree, n - 1)
    total = sum(math.comb(n - 1, j) for j in range(k + 1))
    if total > budget:
        raise BudgetError(
            f"child {child}: {total} candidate sets exceed budget {budget}"
        )
    logf = _log_fn(base)
    rows = ds.rows
    rx = int(ds.arities[child])
    others = [i for i in range(n) if i != child]
    out = {}
    for size in range(k + 1):
        for combo in itertools.combinations(others, size):
            groups: dict[tuple, int] = {}
            cells: dict[tuple, int] = {}
            for r in range(N):
                key = tuple(int(rows[r, p]) for p in combo)
                groups[key] = groups.get(key, 0) + 1
                cell = (key, int(rows[r, child]))
                cells[cell] = cells.get(cell, 0) + 1
            ll = 0.0
            for (key, _), c in cells.items():
                ll += c * logf(c / groups[key])
            q = 1
            for p in combo:
                q *= int(ds.arities[p])
            try:
                pen = -(logf(N) / 2.0) * (rx - 1) * float(q)
            except OverflowError:
                pen = -math.inf
            mask = 0
            for v in combo:
                mask |= 1 << v
            out[mask] = ll + pen
    return out


def random_dataset(seed, *, min_vars=3, max_vars=6, min_rows=20, max_rows=200,
                   max_arity=4, dep_prob=0.35, flip_prob=0.1) -> Dataset:
    """Seeded random instance with planted dependencies.

    Columns are uniform draws, except that with probability ``dep_prob``
    a column is a relabelled copy of an earlier one with values flipped
    at rate ``flip_prob``. Low flip rates produce the deterministic and
    near-deterministic relationships that exercise the pruning rules'
    edge cases.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(min_vars, max_vars + 1))
    N = int(rng.integers(min_rows, max_rows + 1))
    arities = rng.integers(2, max_arity + 1, size=n).astype(np.int64)
    data = np.empty((n, N), dtype=np.int64)
    for i in range(n):
        if i > 0 and rng.random() < dep_prob:
            src = int(rng.integers(0, i))
            arities[i] = arities[src]
            relabel = rng.permutation(arities[src])
            col = relabel[data[src]]
            flips = rng.random(N) < flip_prob
            col[flips] = rng.integers(0, arities[i], size=int(flips.sum()))
        else:
            col = rng.integers(0, arities[i], size=N)
        data[i] = col
    return Dataset.from_codes(data.T, arities=arities)


@dataclass
class InstanceReport:
    """Certification outcome for one (dataset, configuration) pair."""

    seed: int | None
    n: int
    N: int
    max_indegree: int
    rules: tuple
    base: float
    candidates: int
    evaluated: int
    skipped: int
    retained: int
    score_mismatches: int
    max_rel_err: float
    worst_deficit: float | None
    violations: list = field(default_factory=list)
    dominance_ok: bool | None = None

    @property
    def safe(self) -> bool:
        return not self.violations and self.score_mismatches == 0


@dataclass
class OracleReport:
    """A batch of certification outcomes."""

    instances: list = field(default_factory=list)

    @property
    def all_safe(self) -> bool:
        return all(r.safe for r in self.instances)

    @property
    def total_violations(self) -> int:
        return sum(len(r.violations) for r in self.instances)

    def summary(self) -> str:
        lines = []
        for r in self.instances:
            state = "ok" if r.safe else "FAIL"
            deficit = "n/a" if r.worst_deficit is None else f"{r.worst_deficit:.3e}"
            lines.append(
                f"seed={r.seed} n={r.n} N={r.N} k={r.max_indegree} "
                f"rules={','.join(r.rules) or 'none'}: {state} "
                f"skipped={r.skipped}/{r.candidates} worst_deficit={deficit} "
                f"max_rel_err={r.max_rel_err:.3e}"
            )
        lines.append(
            f"instances={len(self.instances)} violations={self.total_violations} "
            f"all_safe={self.all_safe}"
        )
        return "\n".join(lines)

    def to_json(self) -> str:
        doc = {
            "all_safe": self.all_safe,
            "total_violations": self.total_violations,
            "instances": [asdict(r) for r in self.instances],
        }
        return json.dumps(doc, indent=1)


def _rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def certify(ds: Dataset, config: PruneConfig, *, threads=1, budget=DEFAULT_BUDGET,
            seed=None, oracle_tables=None, check_dominance=False) -> InstanceReport:
    """Certify one pruned run against exhaustive scoring.

    ``oracle_tables`` may carry precomputed :func:`exhaustive_scores`
    output (one dict per child) so a batch over rule subsets pays for
    the oracle once. ``check_dominance`` additionally runs the four
    single-rule sweeps and verifies the marginal rules' skip sets are
    contained in their conditional counterparts'.
    """
    k = min(config.max_indegree, ds.n - 1)
    if oracle_tables is None:
        oracle_tables = [
            exhaustive_scores(ds, child, k, config.base, budget) for child in range(ds.n)
        ]
    lists, stats = build_lists(ds, config, threads=threads)

    mismatches = 0
    max_rel_err = 0.0
    worst_deficit = None
    violations = []
    retained_total = 0
    for child in range(ds.n):
        oracle = oracle_tables[child]
        fast = lists[child]
        for mask, entry in fast.items():
            err = _rel_err(entry.bic, oracle[mask])
            if err > max_rel_err:
                max_rel_err = err
            if err > 1e-9:
                mismatches += 1
        final = filter_dominated(fast, child)
        retained = {e.parents.mask for e in final.entries}
        retained_total += len(retained)
        # Best retained strict subset of every candidate, by lattice DP.
        best_kept: dict[int, float] = {}
        for mask in sorted(oracle, key=lambda m: m.bit_count()):
            best = -math.inf
            m = mask
            while m:
                low = m & -m
                sub = mask ^ low
                if sub in retained and oracle[sub] > best:
                    best = oracle[sub]
                if best_kept[sub] > best:
                    best = best_kept[sub]
                m ^= low
            best_kept[mask] = best
            if mask not in retained:
                deficit = oracle[mask] - best
                if worst_deficit is None or deficit > worst_deficit:
                    worst_deficit = deficit
                if deficit > 0.0:
                    violations.append(
                        {
                            "child": child,
                            "parents": list(
                                int(b) for b in range(ds.n) if mask >> b & 1
                            ),
                            "bic": oracle[mask],
                            "best_retained_subset": best,
                        }
                    )

    dominance_ok = None
    if check_dominance:
        dominance_ok = True
        skip_sets = {}
        for rule in RULES:
            single = PruneConfig(k, frozenset([rule]), config.base)
            single_lists, _ = build_lists(ds, single, threads=threads)
            skip_sets[rule] = [
                set(oracle_tables[c]) - set(single_lists[c]) for c in range(ds.n)
            ]
        for weak, strong in (("alg3", "alg1"), ("alg4", "alg2")):
            for c in range(ds.n):
                if not skip_sets[weak][c] <= skip_sets[strong][c]:
                    dominance_ok = False

    return InstanceReport(
        seed=seed,
        n=ds.n,
        N=ds.N,
        max_indegree=k,
        rules=stats.rules,
        base=config.base,
        candidates=ds.n * sum(math.comb(ds.n - 1, j) for j in range(k + 1)),
        evaluated=stats.evaluated_total,
        skipped=stats.pruned_total,
        retained=retained_total,
        score_mismatches=mismatches,
        max_rel_err=max_rel_err,
        worst_deficit=worst_deficit,
        violations=violations,
        dominance_ok=dominance_ok,
    )


def all_rule_subsets():
    """All 16 subsets of the four rules, smallest first, fixed order."""
    out = []
    for size in range(len(RULES) + 1):
        for combo in itertools.combinations(RULES, size):
            out.append(frozenset(combo))
    return out


def certify_campaign(count, master_seed, *, base=math.e, budget=DEFAULT_BUDGET,
                     threads=1, rule_sets=None, max_indegree=None,
                     dataset_kwargs=None, check_dominance=True) -> OracleReport:
    """Random-instance certification campaign.

    Draws ``count`` seeded instances, scores each exhaustively once, and
    certifies the pruned pipeline under every requested rule subset (all
    16 by default) at full in-degree (n - 1) unless capped.
    """
    subsets = all_rule_subsets() if rule_sets is None else list(rule_sets)
    report = OracleReport()
    for idx in range(count):
        seed = [int(master_seed), idx]
        ds = random_dataset(seed, **(dataset_kwargs or {}))
        k = ds.n - 1 if max_indegree is None else min(max_indegree, ds.n - 1)
        tables = [
            exhaustive_scores(ds, child, k, base, budget) for child in range(ds.n)
        ]
        for pos, rules in enumerate(subsets):
            report.instances.append(
                certify(
                    ds,
                    PruneConfig(k, frozenset(rules), base),
                    threads=threads,
                    budget=budget,
                    seed=idx,
                    oracle_tables=tables,
                    check_dominance=check_dominance and pos == len(subsets) - 1,
                )
            )
    return report
