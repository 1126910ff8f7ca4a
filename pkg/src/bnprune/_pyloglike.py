"""NumPy fallback for the grouped log-likelihood kernel.

Both kernel implementations reduce a candidate (targets | given) split to
the same canonical form: a histogram over cell and group sizes. With
``C_m`` cells and ``G_m`` given-groups of size ``m``,

    LL = sum_m (C_m - G_m) * m * log(m)

because every cell contributes ``c * log(c/g) = c*log(c) - (its share of
g*log(g))`` and the group terms collect to ``-g*log(g)``.

The sum itself is evaluated in a log-prime basis: each ``log(m)`` is
split over the prime factors of ``m``, integer coefficients are
accumulated exactly, and only then is one float dot product with
``log(p)`` taken, ascending in p. Two candidates whose likelihoods agree
as real numbers (proportional tables, deterministic targets) therefore
agree bit for bit, so the exact <= comparisons downstream never see a
last-ulp inversion, and a deterministic target yields exactly 0.0.
"""

from __future__ import annotations

import math

import numpy as np


def _hist_ll(cell_counts, group_counts, n_rows, use_log2, spf) -> float:
    hist = np.bincount(cell_counts, minlength=n_rows + 1) - np.bincount(
        group_counts, minlength=n_rows + 1
    )
    sizes = np.flatnonzero(hist[2:]) + 2
    if sizes.size == 0:
        return 0.0
    coeff: dict[int, int] = {}
    for m in sizes:
        weight = int(hist[m]) * int(m)
        x = int(m)
        while x > 1:
            p = int(spf[x])
            e = 0
            while x % p == 0:
                x //= p
                e += 1
            coeff[p] = coeff.get(p, 0) + weight * e
    logf = math.log2 if use_log2 else math.log
    total = 0.0
    for p in sorted(coeff):
        k = coeff[p]
        if k:
            total += k * logf(p)
    return total


def grouped_ll_radix(codes, cols, strides, t_prod, use_log2, spf):
    """Grouped log-likelihood via mixed-radix int64 row keys.

    The caller guarantees the full key space fits in an int64 and that
    ``spf`` maps every size up to the row count to its smallest prime
    factor; target columns occupy the low digits so ``key // t_prod``
    is the group key.
    """
    key = codes[cols[0]].astype(np.int64) * strides[0]
    for j in range(1, len(cols)):
        key += codes[cols[j]].astype(np.int64) * strides[j]
    key.sort()
    n_rows = key.shape[0]

    cut = np.flatnonzero(key[1:] != key[:-1])
    starts = np.concatenate(([0], cut + 1))
    cell_counts = np.diff(np.concatenate((starts, [n_rows])))

    gkeys = key[starts] // t_prod
    gcut = np.flatnonzero(gkeys[1:] != gkeys[:-1])
    group_counts = np.add.reduceat(cell_counts, np.concatenate(([0], gcut + 1)))
    return _hist_ll(cell_counts, group_counts, n_rows, use_log2, spf)


def grouped_ll_lexsort(codes, target_cols, given_cols, use_log2, spf):
    """Row-tuple fallback for key spaces too large for int64 radix keys."""
    n_rows = codes.shape[1]
    sort_keys = [codes[c] for c in reversed(target_cols)]
    sort_keys += [codes[c] for c in reversed(given_cols)]
    order = np.lexsort(sort_keys)

    tgt = codes[np.asarray(target_cols)][:, order]
    tchange = (tgt[:, 1:] != tgt[:, :-1]).any(axis=0)
    if given_cols:
        gvn = codes[np.asarray(given_cols)][:, order]
        gchange = (gvn[:, 1:] != gvn[:, :-1]).any(axis=0)
    else:
        gchange = np.zeros(n_rows - 1, dtype=bool)

    cchange = tchange | gchange
    cell_counts = np.diff(np.concatenate(([0], np.flatnonzero(cchange) + 1, [n_rows])))
    group_counts = np.diff(np.concatenate(([0], np.flatnonzero(gchange) + 1, [n_rows])))
    return _hist_ll(cell_counts, group_counts, n_rows, use_log2, spf)
