"""BIC scores for candidate parent sets.

The score of a child ``X`` with parent set ``P`` decomposes as

    bic(X | P) = ll(X | P) + pen(X | P)

where ``ll`` is the maximised multinomial log-likelihood

    ll(X | P) = sum over parent configs p, child values x of
                N[x,p] * log(N[x,p] / N[p])

and ``pen`` the dimension penalty

    pen(X | P) = -(log(N) / 2) * (arity(X) - 1) * prod(arity(p) for p in P),

with the empty parent set contributing a single configuration. Both
terms use the same log base (default e). ``ll`` is never positive and
``pen`` is negative for any child with at least two levels, so scores
can be compared directly: larger is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .kernels import grouped_loglike, log_scalar


class ParentSet:
    """Canonical set of parent variable indices, backed by a bitmask.

    Immutable by convention; equality and hashing use the mask, so two
    sets with the same members always compare equal.
    """

    __slots__ = ("mask",)

    def __init__(self, members=()):
        mask = 0
        for i in members:
            v = int(i)
            if v < 0:
                raise ValueError(f"negative variable index {v}")
            mask |= 1 << v
        self.mask = mask

    @classmethod
    def from_mask(cls, mask: int) -> "ParentSet":
        if mask < 0:
            raise ValueError("mask must be non-negative")
        ps = cls.__new__(cls)
        ps.mask = mask
        return ps

    @property
    def members(self) -> tuple[int, ...]:
        out = []
        m = self.mask
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return tuple(out)

    def add(self, i: int) -> "ParentSet":
        return ParentSet.from_mask(self.mask | (1 << int(i)))

    def issubset(self, other: "ParentSet") -> bool:
        return self.mask & ~other.mask == 0

    def __contains__(self, i) -> bool:
        return bool(self.mask >> int(i) & 1)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other) -> bool:
        return isinstance(other, ParentSet) and self.mask == other.mask

    def __hash__(self) -> int:
        return hash(self.mask)

    def __repr__(self) -> str:
        return f"ParentSet({', '.join(map(str, self.members))})"


@dataclass(frozen=True, slots=True)
class ScoreEntry:
    """One scored candidate: ``bic == ll + pen`` by construction."""

    parents: ParentSet
    ll: float
    pen: float
    bic: float

    @classmethod
    def build(cls, parents: ParentSet, ll: float, pen: float) -> "ScoreEntry":
        return cls(parents, ll, pen, ll + pen)


def _as_parent_set(parents) -> ParentSet:
    if isinstance(parents, ParentSet):
        return parents
    return ParentSet(parents)


def _check(ds: Dataset, child: int, ps: ParentSet) -> None:
    if not 0 <= child < ds.n:
        raise ValueError(f"child index {child} out of range")
    if ps.mask >> ds.n:
        raise ValueError("parent index out of range")
    if child in ps:
        raise ValueError(f"variable {child} cannot be its own parent")


def contingency(ds: Dataset, child: int, parents=()) -> dict:
    """Joint counts over (parent configuration, child value).

    Returns a dict mapping ``(parent_codes_tuple, child_code)`` to the
    number of rows matching it. Only observed configurations appear, so
    the values sum to N.
    """
    ps = _as_parent_set(parents)
    _check(ds, child, ps)
    stack = ds.codes[list(ps.members) + [child]]
    uniq, counts = np.unique(stack.T, axis=0, return_counts=True)
    out = {}
    for row, c in zip(uniq, counts):
        key = tuple(int(v) for v in row[:-1])
        out[(key, int(row[-1]))] = int(c)
    return out


def log_likelihood(ds: Dataset, child: int, parents=(), base: float = math.e) -> float:
    ps = _as_parent_set(parents)
    _check(ds, child, ps)
    return grouped_loglike(ds.codes, ds.arities, (child,), ps.members, base)


def _penalty_from_q(N: int, r_child: int, q: int, base: float) -> float:
    try:
        qf = float(q)
    except OverflowError:
        return float("-inf")
    pen = -(log_scalar(float(N), base) / 2.0) * (r_child - 1) * qf
    # + 0.0 turns the arity-1 child's -0.0 into a plain zero
    return pen + 0.0


def penalty(ds: Dataset, child: int, parents=(), base: float = math.e) -> float:
    """Model-dimension penalty; -inf if the parent state space overflows."""
    ps = _as_parent_set(parents)
    _check(ds, child, ps)
    q = math.prod(int(ds.arities[p]) for p in ps.members)
    return _penalty_from_q(ds.N, int(ds.arities[child]), q, base)


def bic(ds: Dataset, child: int, parents=(), base: float = math.e) -> ScoreEntry:
    ps = _as_parent_set(parents)
    _check(ds, child, ps)
    ll = grouped_loglike(ds.codes, ds.arities, (child,), ps.members, base)
    q = math.prod(int(ds.arities[p]) for p in ps.members)
    pen = _penalty_from_q(ds.N, int(ds.arities[child]), q, base)
    return ScoreEntry.build(ps, ll, pen)


def set_log_likelihood(ds: Dataset, targets, given=(), base: float = math.e) -> float:
    """Log-likelihood of a set of columns given another, disjoint set."""
    tcols = tuple(int(t) for t in targets)
    gcols = tuple(int(g) for g in given)
    if not tcols:
        raise ValueError("need at least one target variable")
    for c in tcols + gcols:
        if not 0 <= c < ds.n:
            raise ValueError(f"variable index {c} out of range")
    if set(tcols) & set(gcols):
        raise ValueError("targets and conditioning set overlap")
    return grouped_loglike(ds.codes, ds.arities, tcols, gcols, base)


def cond_entropy(ds: Dataset, target: int, given=(), base: float = math.e) -> float:
    """Empirical conditional entropy H(target | given).

    Shares the likelihood code path, so ``N * cond_entropy`` and
    ``-log_likelihood`` are the same computation.
    """
    ps = _as_parent_set(given)
    _check(ds, target, ps)
    return -grouped_loglike(ds.codes, ds.arities, (target,), ps.members, base) / ds.N


def joint_entropy(ds: Dataset, variables, base: float = math.e) -> float:
    """Empirical joint entropy of a set of variables; 0 for the empty set."""
    cols = tuple(int(v) for v in variables)
    if not cols:
        return 0.0
    if len(set(cols)) != len(cols):
        raise ValueError("duplicate variable in joint entropy")
    for c in cols:
        if not 0 <= c < ds.n:
            raise ValueError(f"variable index {c} out of range")
    return -grouped_loglike(ds.codes, ds.arities, cols, (), base) / ds.N
