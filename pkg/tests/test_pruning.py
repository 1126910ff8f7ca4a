"""Sweep mechanics: rules, bounds, counters, closure, determinism."""

import itertools
import math

import numpy as np
import pytest

import bnprune as bp
from bnprune import pruning, scoring
from bnprune.oracle import random_dataset
from helpers import uniform_dataset


def test_search_space_size_formula():
    assert pruning.search_space_size(8, 3) == 504
    assert pruning.search_space_size(8, 4) == 784
    assert pruning.search_space_size(8, 5) == 952
    assert pruning.search_space_size(5, 0) == 0
    # cross-check against direct enumeration
    for n, k in [(4, 2), (5, 4), (6, 3)]:
        count = 0
        for child in range(n):
            others = [i for i in range(n) if i != child]
            for j in range(1, k + 1):
                count += sum(1 for _ in itertools.combinations(others, j))
        assert pruning.search_space_size(n, k) == count
    with pytest.raises(ValueError):
        pruning.search_space_size(5, 5)
    with pytest.raises(ValueError):
        pruning.search_space_size(5, -1)
    with pytest.raises(ValueError):
        pruning.search_space_size(1, 0)


def test_global_indegree_bound_reference_values():
    for N, expect in [(214, 6), (101, 5), (768, 8), (1473, 9), (2310, 9), (2, 2)]:
        assert pruning.global_indegree_bound(N, base=2.0) == expect
    # nats give a slightly looser cap at the same N
    assert pruning.global_indegree_bound(214) >= 6
    with pytest.raises(ValueError):
        pruning.global_indegree_bound(1)


def test_node_bound_degenerate_columns():
    codes = [[0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]]
    ds = bp.Dataset.from_codes(
        codes, arities=[1, 2, 2], allow_constant=True
    )
    # arity-1 child: no free parameters, nothing to reward
    assert pruning.node_indegree_bound(ds, 0) == 0
    assert pruning.node_indegree_bound(ds, 1) > 0
    with pytest.raises(ValueError):
        pruning.node_indegree_bound(ds, 5)


def test_node_bound_zero_entropy_pair(rng):
    base_cols = rng.integers(0, 2, size=(40, 2))
    const = np.zeros((40, 1), dtype=int)
    ds = bp.Dataset.from_codes(
        np.hstack([base_cols, const]), arities=[2, 2, 2], allow_constant=True
    )
    # the constant column pairs at min-entropy 0 with everyone
    full = pruning.node_indegree_bound(ds, 0)
    drop = bp.Dataset.from_codes(base_cols)
    assert pruning.node_indegree_bound(drop, 0) == full
    assert pruning.node_indegree_bound(ds, 2) == 0


def test_bounds_report_shape(rng):
    ds = uniform_dataset(rng, n=6, n_rows=120)
    rep = pruning.bounds_report(ds, max_indegree=3, base=2.0)
    assert rep.names == ds.names
    assert len(rep.per_node) == ds.n
    assert rep.global_bound == pruning.global_indegree_bound(ds.N, 2.0)
    assert rep.max_indegree == 3
    assert rep.effective == tuple(
        min(b, rep.global_bound, 3) for b in rep.per_node
    )
    counts = {}
    for b in rep.per_node:
        counts[b] = counts.get(b, 0) + 1
    expect = ", ".join(f"{b} ({counts[b]})" for b in sorted(counts, reverse=True))
    assert rep.grouped() == expect
    # no cap: defaults to n - 1
    assert pruning.bounds_report(ds).max_indegree == ds.n - 1


def test_prune_config_validation():
    cfg = pruning.PruneConfig(3, rules={"alg4", "alg1"})
    assert cfg.rule_order == ("alg1", "alg4")
    assert pruning.PruneConfig(2).rule_order == pruning.RULES
    assert pruning.PruneConfig(2, rules=frozenset()).rule_order == ()
    with pytest.raises(ValueError):
        pruning.PruneConfig(-1)
    with pytest.raises(ValueError):
        pruning.PruneConfig(2, rules={"alg9"})
    with pytest.raises(ValueError):
        pruning.PruneConfig(2, base=1.0)


def test_rule_check_validation(rng):
    ds = uniform_dataset(rng, n=4, n_rows=40)
    with pytest.raises(ValueError, match="unknown rule"):
        pruning.rule_check("alg7", ds, 0, (1,), 2)
    with pytest.raises(ValueError, match="extra parent"):
        pruning.rule_check("alg1", ds, 0, (1,), 0)
    with pytest.raises(ValueError, match="extra parent"):
        pruning.rule_check("alg1", ds, 0, (1,), 1)
    wrong = scoring.bic(ds, 0, (2,))
    with pytest.raises(ValueError, match="belong"):
        pruning.rule_check("alg1", ds, 0, (1,), 3, pi_star_entry=wrong)


def test_marginal_rules_imply_conditional_rules(rng):
    """A weaker rule firing forces the stronger one to fire too."""
    checked = 0
    for seed in range(12):
        ds = random_dataset(seed)
        for child in range(ds.n):
            others = [i for i in range(ds.n) if i != child]
            for r in range(len(others)):
                for combo in itertools.combinations(others, r):
                    for y in others:
                        if y in combo:
                            continue
                        if pruning.rule_check("alg3", ds, child, combo, y):
                            assert pruning.rule_check("alg1", ds, child, combo, y)
                            checked += 1
                        if pruning.rule_check("alg4", ds, child, combo, y):
                            assert pruning.rule_check("alg2", ds, child, combo, y)
                            checked += 1
    assert checked > 0


def test_rule_check_entry_shortcut_is_equivalent(rng):
    ds = uniform_dataset(rng, n=5, n_rows=60)
    for child in range(ds.n):
        others = [i for i in range(ds.n) if i != child]
        for combo in itertools.combinations(others, 2):
            entry = scoring.bic(ds, child, combo)
            y = next(i for i in others if i not in combo)
            for rule in pruning.RULES:
                with_entry = pruning.rule_check(
                    rule, ds, child, combo, y, pi_star_entry=entry
                )
                without = pruning.rule_check(rule, ds, child, combo, y)
                assert with_entry == without


def test_subset_reference_check(rng):
    ds = uniform_dataset(rng, n=5, n_rows=60)
    for child in range(ds.n):
        others = [i for i in range(ds.n) if i != child]
        combo = tuple(others[:2])
        y = others[2]
        # empty reference reproduces the union of the marginal rules
        fired = pruning.subset_reference_check(ds, child, combo, y, ())
        expect = pruning.rule_check("alg3", ds, child, combo, y) or pruning.rule_check(
            "alg4", ds, child, combo, y
        )
        assert fired == expect
    with pytest.raises(ValueError, match="subset"):
        pruning.subset_reference_check(ds, 0, (1,), 2, (3,))


def test_zero_indegree_sweep(rng):
    ds = uniform_dataset(rng, n=4, n_rows=30)
    lists, stats = bp.build_lists(ds, pruning.PruneConfig(0))
    assert stats.search_space == 0
    for child, scores in enumerate(lists):
        assert set(scores) == {0}
        entry = scores[0]
        assert entry.bic == scoring.bic(ds, child, ()).bic
    assert stats.evaluated_total == 0
    assert stats.pruned_total == 0


def test_counter_conservation_and_closure():
    for seed in (3, 11, 27):
        ds = random_dataset(seed)
        k = min(3, ds.n - 1)
        per_child_space = sum(
            math.comb(ds.n - 1, j) for j in range(1, k + 1)
        )
        for rules in [frozenset(), frozenset({"alg1"}), frozenset(pruning.RULES)]:
            lists, stats = bp.build_lists(ds, pruning.PruneConfig(k, rules=rules))
            assert stats.search_space == pruning.search_space_size(ds.n, k)
            for child, cs in enumerate(stats.per_child):
                assert cs.child == child
                assert cs.evaluated + cs.pruned == per_child_space
                assert cs.evaluated == len(lists[child]) - 1
                assert sum(cs.by_rule.values()) == cs.pruned
                assert set(cs.by_rule) <= set(rules)
                # evaluated family is closed under removing one parent
                for mask in lists[child]:
                    m = mask
                    while m:
                        low = m & -m
                        assert (mask & ~low) in lists[child]
                        m ^= low
            if not rules:
                assert stats.pruned_total == 0
                assert stats.evaluated_total == stats.search_space


def test_evaluated_scores_match_direct_bic():
    ds = random_dataset(5)
    lists, _ = bp.build_lists(ds, pruning.PruneConfig(2))
    for child, scores in enumerate(lists):
        for mask, entry in scores.items():
            direct = scoring.bic(ds, child, bp.ParentSet.from_mask(mask))
            assert entry.ll == direct.ll
            assert entry.pen == direct.pen
            assert entry.bic == direct.bic


def test_stronger_rules_prune_supersets_of_weaker():
    """alg1 skips everything alg3 skips; alg2 everything alg4 skips."""
    for seed in (2, 9, 21, 40):
        ds = random_dataset(seed)
        k = min(3, ds.n - 1)
        by_rule = {}
        for rule in pruning.RULES:
            lists, _ = bp.build_lists(ds, pruning.PruneConfig(k, rules={rule}))
            by_rule[rule] = [set(scores) for scores in lists]
        for child in range(ds.n):
            assert by_rule["alg1"][child] <= by_rule["alg3"][child]
            assert by_rule["alg2"][child] <= by_rule["alg4"][child]


def test_alg2_memo_counter():
    ds = random_dataset(13)
    k = min(3, ds.n - 1)
    _, with_alg2 = bp.build_lists(ds, pruning.PruneConfig(k, rules={"alg2"}))
    assert with_alg2.cond_entropy_evals_total > 0
    _, without = bp.build_lists(ds, pruning.PruneConfig(k, rules={"alg1", "alg3"}))
    assert without.cond_entropy_evals_total == 0


def test_thread_count_does_not_change_results():
    ds = random_dataset(31)
    k = min(3, ds.n - 1)
    cfg = pruning.PruneConfig(k)
    seq_lists, seq_stats = bp.build_lists(ds, cfg, threads=1)
    par_lists, par_stats = bp.build_lists(ds, cfg, threads=4)
    assert len(seq_lists) == len(par_lists)
    for a, b in zip(seq_lists, par_lists):
        assert list(a) == list(b)
        for mask in a:
            assert a[mask] == b[mask]
    assert seq_stats.evaluated_total == par_stats.evaluated_total
    assert seq_stats.by_rule_total == par_stats.by_rule_total


def test_indegree_cap_clamped_to_n_minus_1(rng):
    ds = uniform_dataset(rng, n=3, n_rows=25)
    lists, stats = bp.build_lists(ds, pruning.PruneConfig(10, rules=frozenset()))
    assert stats.max_indegree == 2
    assert max(len(bp.ParentSet.from_mask(m)) for m in lists[0]) == 2
