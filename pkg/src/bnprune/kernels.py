"""Counting-kernel selection and shared logarithm helpers.

The hot operation behind every score is a grouped log-likelihood over
encoded columns. A Cython extension provides it when built; a NumPy
implementation with identical semantics is the fallback, selected here
at import time. Setting ``BNPRUNE_NO_EXT`` in the environment forces the
fallback, and :func:`set_backend` switches at runtime (used by the
benchmark and the cross-implementation tests). Both implementations
accumulate likelihoods as integer coefficients over log-primes (see
``_pyloglike``), so candidates that tie as real numbers tie exactly as
doubles too.

Scores use the log base requested by the caller. Bases 2 and e get
dedicated paths (``log2`` is exact at powers of two, which some
downstream equalities rely on); any other base >= 2 is computed in nats
and rescaled.
"""

from __future__ import annotations

import math
import os
import threading

import numpy as np

from . import _pyloglike

_python = _pyloglike
try:
    from . import _loglike as _compiled
except ImportError:
    _compiled = None

_impl = _python if (_compiled is None or os.environ.get("BNPRUNE_NO_EXT")) else _compiled

# Mixed-radix keys must stay clear of int64 territory, including the
# sentinel headroom used by the compiled scan.
_RADIX_LIMIT = 2**62

_spf_lock = threading.Lock()
_spf_table = np.zeros(1, dtype=np.int32)


def _spf(limit: int) -> np.ndarray:
    """Smallest-prime-factor table covering at least 0..limit.

    Grown on demand and cached for the process; kernels use it to split
    log(m) over prime factors. The returned table may be larger than
    requested.
    """
    global _spf_table
    table = _spf_table
    if table.shape[0] > limit:
        return table
    with _spf_lock:
        table = _spf_table
        if table.shape[0] > limit:
            return table
        size = max(limit + 1, 2 * table.shape[0], 64)
        fresh = np.zeros(size, dtype=np.int32)
        if size > 1:
            fresh[1] = 1
        for i in range(2, size):
            if fresh[i] == 0:
                view = fresh[i::i]
                view[view == 0] = i
        _spf_table = fresh
        return fresh


def backend_name() -> str:
    return "compiled" if _impl is _compiled and _compiled is not None else "python"


def have_compiled() -> bool:
    return _compiled is not None


def set_backend(name: str) -> str:
    """Select the kernel implementation by name; returns the previous one."""
    global _impl
    before = backend_name()
    if name == "python":
        _impl = _python
    elif name == "compiled":
        if _compiled is None:
            raise ValueError("compiled kernel is not available")
        _impl = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    return before


def _mode_and_scale(base: float) -> tuple[bool, float]:
    if base == 2:
        return True, 1.0
    if base == math.e:
        return False, 1.0
    if not base >= 2:
        raise ValueError(f"log base must be at least 2, got {base}")
    return False, math.log(base)


def log_scalar(x: float, base: float) -> float:
    """log of ``x`` in the given base, with exact paths for 2 and e."""
    if base == 2:
        return math.log2(x)
    if base == math.e:
        return math.log(x)
    if not base >= 2:
        raise ValueError(f"log base must be at least 2, got {base}")
    return math.log(x) / math.log(base)


def mlogm_sum(counts, base: float) -> float:
    """Canonical sum of ``c * log(c)`` over an array of counts.

    Counts are bucketed by value and accumulated in ascending order, the
    same summation the kernels use, so results do not depend on the
    order of ``counts``.
    """
    use_log2, scale = _mode_and_scale(base)
    hist = np.bincount(np.asarray(counts, dtype=np.int64))
    m = np.flatnonzero(hist[2:]) + 2
    if m.size == 0:
        return 0.0
    mf = m.astype(np.float64)
    logs = np.log2(mf) if use_log2 else np.log(mf)
    total = float(np.sum(hist[m] * (mf * logs)))
    return total if scale == 1.0 else total / scale


def grouped_loglike(codes, arities, targets, given=(), base=math.e, impl=None):
    """Log-likelihood of the target columns given the conditioning columns.

    Parameters
    ----------
    codes : np.ndarray
        Encoded data, shape ``(n, N)``, int32, C-contiguous.
    arities : array-like
        Per-column arities.
    targets, given : sequences of int
        Disjoint column index sets; at least one target.
    base : float
        Log base (>= 2, or ``math.e``).
    impl : module, optional
        Explicit kernel implementation, overriding the selected backend.

    Returns
    -------
    float
        ``sum_cells c*log(c) - sum_groups g*log(g)``, always <= 0. The
        conditional entropy identity is ``N * H(T | G) = -result``.
    """
    use_log2, scale = _mode_and_scale(base)
    tcols = tuple(int(c) for c in targets)
    gcols = tuple(int(c) for c in given)
    if not tcols:
        raise ValueError("need at least one target column")

    spf = _spf(codes.shape[1])
    cols = tcols + gcols
    t_prod = math.prod(int(arities[c]) for c in tcols)
    full = t_prod * math.prod(int(arities[c]) for c in gcols)
    if full < _RADIX_LIMIT:
        strides = np.empty(len(cols), dtype=np.int64)
        acc = 1
        for j, c in enumerate(cols):
            strides[j] = acc
            acc *= int(arities[c])
        mod = impl if impl is not None else _impl
        val = mod.grouped_ll_radix(
            codes, np.asarray(cols, dtype=np.int64), strides, t_prod, use_log2, spf
        )
    else:
        # Key space exceeds int64: group by row tuples instead. Always
        # the NumPy path; the compiled kernel is radix-only.
        val = _python.grouped_ll_lexsort(codes, tcols, gcols, use_log2, spf)
    return val if scale == 1.0 else val / scale
