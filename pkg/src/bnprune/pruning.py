"""Entropy-based pruning of the candidate parent-set lattice.

For every child the lattice of parent sets up to a maximum in-degree is
swept layer by layer. Before scoring a candidate, each way of writing it
as (evaluated set P, one extra parent y) is tested against four rules.
Every rule compares a scaled entropy term with the penalty increase the
extra parent causes,

    N * (entropy term)  <=  (1 - arity(y)) * pen(child | P),

and a firing rule proves that the extended set and all of its supersets
can never beat a smaller competitor, so they are skipped without being
scored. The rules differ only in the entropy term:

    alg1: H(child | P)   conditional, already paid for by scoring P
    alg2: H(y | P)       conditional, needs an extra counting pass
    alg3: H(child)       marginal, precomputed once
    alg4: H(y)           marginal, precomputed once

The marginal rules are weaker than their conditional counterparts (a
condition never raises entropy) but cost nothing per candidate. A
skipped set's supersets are skipped by inheritance, which keeps the
evaluated family closed under taking subsets; that closure is what lets
each candidate be judged from its immediate predecessors only.

Per-node in-degree bounds derived from the same inequality are provided
alongside: a per-child bound using marginal entropies, and a coarser
one depending only on the sample count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .dataset import Dataset, column_entropy_all
from .kernels import grouped_loglike, log_scalar
from .scoring import ParentSet, ScoreEntry, _penalty_from_q

RULES = ("alg1", "alg2", "alg3", "alg4")


@dataclass(frozen=True)
class PruneConfig:
    """Sweep configuration: in-degree cap, active rules, log base."""

    max_indegree: int
    rules: frozenset = frozenset(RULES)
    base: float = math.e

    def __post_init__(self):
        if self.max_indegree < 0:
            raise ValueError("max_indegree must be >= 0")
        unknown = set(self.rules) - set(RULES)
        if unknown:
            raise ValueError(f"unknown rules: {sorted(unknown)}")
        if not (self.base == math.e or self.base >= 2):
            raise ValueError("log base must be at least 2")
        object.__setattr__(self, "rules", frozenset(self.rules))

    @property
    def rule_order(self) -> tuple[str, ...]:
        """Active rules in the fixed attribution order."""
        return tuple(r for r in RULES if r in self.rules)


@dataclass
class ChildStats:
    """Sweep counters for one child."""

    child: int
    evaluated: int = 0
    pruned: int = 0
    by_rule: dict = field(default_factory=dict)
    cond_entropy_evals: int = 0


@dataclass
class PruneStats:
    """Aggregated sweep counters plus the effective configuration."""

    max_indegree: int
    rules: tuple
    base: float
    search_space: int
    per_child: list

    @property
    def evaluated_total(self) -> int:
        return sum(c.evaluated for c in self.per_child)

    @property
    def pruned_total(self) -> int:
        return sum(c.pruned for c in self.per_child)

    @property
    def by_rule_total(self) -> dict:
        out = {r: 0 for r in self.rules}
        for c in self.per_child:
            for r, v in c.by_rule.items():
                out[r] += v
        return out

    @property
    def cond_entropy_evals_total(self) -> int:
        return sum(c.cond_entropy_evals for c in self.per_child)


def search_space_size(n: int, k: int) -> int:
    """Number of non-empty candidate parent sets over all children.

    ``n * sum_{j=1..k} C(n-1, j)``, exact. The always-scored empty set
    is not counted.
    """
    if n < 2:
        raise ValueError("need at least two variables")
    if not 0 <= k <= n - 1:
        raise ValueError(f"max in-degree {k} outside 0..{n - 1}")
    return n * sum(math.comb(n - 1, j) for j in range(1, k + 1))


def global_indegree_bound(N: int, base: float = math.e) -> int:
    """In-degree cap implied by the sample count alone.

    ``ceil(1 + log2(N) - log2(log_base(N)))``; independent of the data
    values and of the child.
    """
    if N < 2:
        raise ValueError("need at least two rows")
    return math.ceil(1.0 + math.log2(N) - math.log2(log_scalar(float(N), base)))


def node_indegree_bound(ds: Dataset, child: int, entropies=None, base: float = math.e) -> int:
    """Per-child in-degree cap from marginal entropies.

    Maximum over co-variables y of

        ceil(1 + log2(min(H(child), H(y)) / ((r_child-1)(r_y-1)))
               + log2(N) - log2(log_base(N)))

    clamped below at 0. A zero min-entropy pair contributes 0: such a
    pair can never reward an extra parent at all.
    """
    if not 0 <= child < ds.n:
        raise ValueError(f"child index {child} out of range")
    ent = column_entropy_all(ds, base) if entropies is None else entropies
    log2_n = math.log2(ds.N)
    log2_log_n = math.log2(log_scalar(float(ds.N), base))
    rx = int(ds.arities[child])
    best = 0
    for y in range(ds.n):
        if y == child:
            continue
        h_min = min(ent[child], ent[y])
        denom = (rx - 1) * (int(ds.arities[y]) - 1)
        if h_min <= 0.0 or denom == 0:
            continue
        val = 1.0 + math.log2(h_min / denom) + log2_n - log2_log_n
        c = math.ceil(val)
        if c > best:
            best = c
    return best


@dataclass
class BoundsReport:
    """Per-node and global in-degree bounds for one dataset."""

    names: tuple
    per_node: tuple
    global_bound: int
    max_indegree: int
    effective: tuple

    def grouped(self) -> str:
        """Per-node bounds as 'bound (child count)' groups, largest first."""
        counts: dict[int, int] = {}
        for b in self.per_node:
            counts[b] = counts.get(b, 0) + 1
        return ", ".join(f"{b} ({counts[b]})" for b in sorted(counts, reverse=True))


def bounds_report(ds: Dataset, max_indegree=None, base: float = math.e) -> BoundsReport:
    k = ds.n - 1 if max_indegree is None else min(max_indegree, ds.n - 1)
    ent = column_entropy_all(ds, base)
    per_node = tuple(node_indegree_bound(ds, x, ent, base) for x in range(ds.n))
    glob = global_indegree_bound(ds.N, base)
    eff = tuple(min(b, glob, k) for b in per_node)
    return BoundsReport(ds.names, per_node, glob, k, eff)


def rule_check(rule, ds, child, pi_star, y, base=math.e, pi_star_entry=None):
    """Test one pruning rule for extending parent set ``pi_star`` with ``y``.

    True means: every superset of ``pi_star + {y}`` scores no better than
    an already-evaluated subset, so the whole branch is skippable.
    ``pi_star_entry`` may pass the already-computed score of ``pi_star``
    to avoid recounting.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    ps = pi_star if isinstance(pi_star, ParentSet) else ParentSet(pi_star)
    if not 0 <= y < ds.n or y == child or y in ps:
        raise ValueError(f"bad extra parent {y}")
    if pi_star_entry is not None and pi_star_entry.parents != ps:
        raise ValueError("pi_star_entry does not belong to pi_star")

    if pi_star_entry is not None:
        pen = pi_star_entry.pen
    else:
        q = math.prod(int(ds.arities[p]) for p in ps.members)
        pen = _penalty_from_q(ds.N, int(ds.arities[child]), q, base)
    threshold = (1.0 - int(ds.arities[y])) * pen

    if rule == "alg1":
        ll = pi_star_entry.ll if pi_star_entry is not None else grouped_loglike(
            ds.codes, ds.arities, (child,), ps.members, base
        )
        lhs = -ll
    elif rule == "alg2":
        lhs = -grouped_loglike(ds.codes, ds.arities, (y,), ps.members, base)
    elif rule == "alg3":
        lhs = -grouped_loglike(ds.codes, ds.arities, (child,), (), base)
    else:
        lhs = -grouped_loglike(ds.codes, ds.arities, (y,), (), base)
    return lhs <= threshold


def subset_reference_check(ds, child, pi_star, y, reference, base=math.e):
    """Prune test against an arbitrary evaluated subset of ``pi_star``.

    Generalises the marginal rules from the empty reference set to any
    subset. Not used by the default sweep; exposed as an extension point
    for callers willing to pay for the extra conditional entropies.
    """
    ps = pi_star if isinstance(pi_star, ParentSet) else ParentSet(pi_star)
    ref = reference if isinstance(reference, ParentSet) else ParentSet(reference)
    if not ref.issubset(ps):
        raise ValueError("reference must be a subset of pi_star")
    if not 0 <= y < ds.n or y == child or y in ps:
        raise ValueError(f"bad extra parent {y}")
    q = math.prod(int(ds.arities[p]) for p in ps.members)
    pen = _penalty_from_q(ds.N, int(ds.arities[child]), q, base)
    threshold = (1.0 - int(ds.arities[y])) * pen
    lhs = min(
        -grouped_loglike(ds.codes, ds.arities, (child,), ref.members, base),
        -grouped_loglike(ds.codes, ds.arities, (y,), ref.members, base),
    )
    return lhs <= threshold


def _sweep_child(ds, child, k, rule_order, base, marginal_nh):
    """Sweep one child's lattice; returns (mask -> ScoreEntry, ChildStats).

    Candidates are visited by layer (set size) and lexicographically
    within a layer, so every immediate predecessor of a candidate has
    already been classified when the candidate comes up.
    """
    codes, arities = ds.codes, ds.arities
    n, N = ds.n, ds.N
    rx = int(arities[child])
    others = [i for i in range(n) if i != child]

    ll0 = grouped_loglike(codes, arities, (child,), (), base)
    pen0 = _penalty_from_q(N, rx, 1, base)
    scores = {0: ScoreEntry.build(ParentSet.from_mask(0), ll0, pen0)}
    skipped: dict[int, str] = {}
    stats = ChildStats(child, by_rule={r: 0 for r in rule_order})
    nh_memo: dict[tuple[int, int], float] = {}

    for size in range(1, k + 1):
        for combo in itertools.combinations(others, size):
            mask = 0
            for v in combo:
                mask |= 1 << v
            verdict = None
            # Decompositions (predecessor, extra parent) in predecessor
            # enumeration order: dropping a later member gives the
            # lexicographically earlier predecessor.
            for y in reversed(combo):
                pmask = mask & ~(1 << y)
                verdict = skipped.get(pmask)
                if verdict is not None:
                    break  # superset of a skipped set, same attribution
                entry = scores[pmask]
                threshold = (1.0 - int(arities[y])) * entry.pen
                for rule in rule_order:
                    if rule == "alg1":
                        lhs = -entry.ll
                    elif rule == "alg2":
                        key = (y, pmask)
                        lhs = nh_memo.get(key)
                        if lhs is None:
                            rest = tuple(v for v in combo if v != y)
                            lhs = -grouped_loglike(codes, arities, (y,), rest, base)
                            nh_memo[key] = lhs
                            stats.cond_entropy_evals += 1
                    elif rule == "alg3":
                        lhs = marginal_nh[child]
                    else:
                        lhs = marginal_nh[y]
                    if lhs <= threshold:
                        verdict = rule
                        break
                if verdict is not None:
                    break
            if verdict is not None:
                skipped[mask] = verdict
                stats.by_rule[verdict] += 1
            else:
                ll = grouped_loglike(codes, arities, (child,), combo, base)
                q = math.prod(int(arities[v]) for v in combo)
                pen = _penalty_from_q(N, rx, q, base)
                scores[mask] = ScoreEntry.build(ParentSet.from_mask(mask), ll, pen)

    stats.evaluated = len(scores) - 1
    stats.pruned = len(skipped)
    return scores, stats


def build_lists(ds: Dataset, config: PruneConfig, threads: int = 1):
    """Score all children's candidate parent sets under pruning.

    Returns ``(lists, stats)`` where ``lists[x]`` maps the parent-set
    bitmask of every evaluated candidate of child ``x`` to its
    :class:`ScoreEntry`, in enumeration order, empty set included. The
    evaluated family of each child is closed under taking subsets.

    ``threads`` > 1 distributes children over a thread pool; results are
    merged in child order, so the output does not depend on scheduling.
    """
    k = min(config.max_indegree, ds.n - 1)
    rule_order = config.rule_order
    base = config.base
    # Marginal N*H terms for alg3/alg4, one kernel pass per column.
    marginal_nh = [
        -grouped_loglike(ds.codes, ds.arities, (i,), (), base) for i in range(ds.n)
    ]

    def work(child):
        return _sweep_child(ds, child, k, rule_order, base, marginal_nh)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(ds.n)))
    else:
        results = [work(child) for child in range(ds.n)]

    lists = [scores for scores, _ in results]
    stats = PruneStats(
        max_indegree=k,
        rules=rule_order,
        base=base,
        search_space=search_space_size(ds.n, k),
        per_child=[st for _, st in results],
    )
    return lists, stats
