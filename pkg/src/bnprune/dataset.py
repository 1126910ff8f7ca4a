"""Categorical dataset loading and per-column entropy.

A dataset is a complete table of categorical observations. Each column is
encoded to dense integer codes in order of first appearance, and its arity
is the number of distinct values actually observed, unless a sidecar file
raises it explicitly. Missing values are rejected: the scores computed
downstream assume complete data.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParseError

DEFAULT_MISSING_MARKERS = ("", "?", "NA")


@dataclass(frozen=True, eq=False)
class Dataset:
    """A complete categorical data table in column-encoded form.

    Attributes
    ----------
    names : tuple[str, ...]
        Variable names, one per column.
    arities : np.ndarray
        Number of category levels per variable, shape ``(n,)``, int64.
    codes : np.ndarray
        Encoded observations laid out one row per *variable*, shape
        ``(n, N)``, int32, C-contiguous, so counting kernels can walk a
        column of the original table as one contiguous vector.
    levels : tuple[tuple[str, ...], ...] | None
        Original value strings per variable (index = code), when the
        dataset came from a text file.
    """

    names: tuple[str, ...]
    arities: np.ndarray
    codes: np.ndarray
    levels: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self):
        n, rows = self.codes.shape
        if len(self.names) != n or self.arities.shape != (n,):
            raise DataError("names, arities and codes disagree on variable count")
        if n < 2:
            raise DataError("need at least two variables")
        if rows < 2:
            raise DataError("need at least two rows")
        if not self.codes.flags["C_CONTIGUOUS"]:
            raise DataError("codes must be C-contiguous")
        if (self.arities < 1).any():
            raise DataError("arities must be positive")
        if (self.codes < 0).any() or (self.codes >= self.arities[:, None]).any():
            raise DataError("codes out of range for declared arities")

    @property
    def n(self) -> int:
        """Number of variables."""
        return self.codes.shape[0]

    @property
    def N(self) -> int:
        """Number of rows."""
        return self.codes.shape[1]

    @property
    def rows(self) -> np.ndarray:
        """The conventional N x n view of the same memory."""
        return self.codes.T

    @classmethod
    def from_codes(cls, rows, names=None, arities=None, allow_constant=False):
        """Build a dataset from an ``(N, n)`` array of integer codes.

        Codes are taken as-is, not re-encoded. Without an explicit
        ``arities`` every column must be dense (values exactly
        ``0..max``); with it, declared arities may exceed the observed
        support but never undercut it.
        """
        arr = np.asarray(rows)
        if arr.ndim != 2:
            raise DataError("rows must be a 2-d array")
        if arr.size and arr.min() < 0:
            raise DataError("codes must be non-negative")
        codes = np.ascontiguousarray(arr.T, dtype=np.int32)
        n = codes.shape[0]
        if names is None:
            names = tuple(f"X{i}" for i in range(n))
        observed = []
        for i in range(n):
            col = codes[i]
            distinct = len(np.unique(col))
            top = int(col.max()) + 1 if col.size else 0
            if arities is None and distinct != top:
                raise DataError(
                    f"column {names[i]} is not densely coded; pass explicit arities"
                )
            observed.append(top)
        if arities is None:
            ar = np.asarray(observed, dtype=np.int64)
        else:
            ar = np.asarray(list(arities), dtype=np.int64)
            if ar.shape != (n,):
                raise DataError("arities must give one value per column")
            if (ar < np.asarray(observed)).any():
                raise DataError("declared arity below observed support")
        if not allow_constant and (ar < 2).any():
            bad = names[int(np.argmax(ar < 2))]
            raise DataError(f"column {bad} is constant; rerun with allow_constant")
        return cls(tuple(names), ar, codes)


def load_csv(
    path,
    *,
    delimiter=",",
    header=True,
    missing_markers=DEFAULT_MISSING_MARKERS,
    allow_constant=False,
    arity_overrides=None,
):
    """Load a categorical CSV file into a :class:`Dataset`.

    Cell values are compared as exact strings (no stripping, no numeric
    parsing) and encoded in first-appearance order, so loading the same
    file twice yields identical codes. Any cell equal to one of
    ``missing_markers`` aborts the load: incomplete data is unsupported.

    Parameters
    ----------
    path : str or os.PathLike
        File to read (UTF-8).
    delimiter : str
        Field separator.
    header : bool
        Whether the first line holds variable names. Without it columns
        are named ``X0, X1, ...``.
    missing_markers : sequence of str
        Cell values treated as missing.
    allow_constant : bool
        Accept single-valued columns instead of rejecting them.
    arity_overrides : mapping of str to int, optional
        Per-variable arities overriding the observed support upward,
        e.g. from :func:`read_arity_file`.
    """
    markers = frozenset(missing_markers)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            table = [row for row in reader if row]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except (UnicodeDecodeError, csv.Error) as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from exc
    if not table:
        raise ParseError(f"{path}: empty file")

    if header:
        names = tuple(table[0])
        body = table[1:]
    else:
        names = tuple(f"X{i}" for i in range(len(table[0])))
        body = table
    n = len(names)
    if n < 2:
        raise DataError(f"{path}: need at least two columns, found {n}")
    if len(set(names)) != n:
        raise DataError(f"{path}: duplicate column names")

    for i, row in enumerate(body, start=1):
        if len(row) != n:
            raise ParseError(f"{path}: row {i} has {len(row)} fields, expected {n}")
        for j, cell in enumerate(row):
            if cell in markers:
                raise DataError(
                    f"{path}: missing value at row {i}, column {names[j]}"
                )
    if len(body) < 2:
        raise DataError(f"{path}: need at least two data rows")

    N = len(body)
    codes = np.empty((n, N), dtype=np.int32)
    levels = []
    for j in range(n):
        seen: dict[str, int] = {}
        col = codes[j]
        for i, row in enumerate(body):
            cell = row[j]
            code = seen.get(cell)
            if code is None:
                code = len(seen)
                seen[cell] = code
            col[i] = code
        levels.append(tuple(seen))

    arities = np.asarray([len(lv) for lv in levels], dtype=np.int64)
    if arity_overrides:
        unknown = set(arity_overrides) - set(names)
        if unknown:
            raise DataError(f"{path}: arity override for unknown column {sorted(unknown)}")
        for name, arity in arity_overrides.items():
            j = names.index(name)
            if int(arity) < arities[j]:
                raise DataError(
                    f"{path}: arity override {arity} for {name} below observed {arities[j]}"
                )
            arities[j] = int(arity)
    if not allow_constant:
        for j in range(n):
            if arities[j] < 2:
                raise DataError(
                    f"{path}: column {names[j]} is constant; "
                    "rerun with --allow-constant to keep it"
                )
    return Dataset(names, arities, codes, tuple(levels))


def read_arity_file(path):
    """Read a sidecar JSON file mapping variable names to declared arities."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: expected an object mapping names to arities")
    out = {}
    for name, arity in raw.items():
        if not isinstance(arity, int) or arity < 1:
            raise ParseError(f"{path}: bad arity {arity!r} for {name}")
        out[str(name)] = arity
    return out


def column_entropy_all(ds: Dataset, base: float = math.e) -> np.ndarray:
    """Marginal entropy of every variable, in units of ``log base``.

    One O(N) counting pass per column. Results are clamped to the
    mathematically valid range ``[0, log(arity)]``, which last-ulp
    rounding would otherwise occasionally overshoot on uniform columns.
    """
    from .kernels import log_scalar, mlogm_sum

    n, N = ds.codes.shape
    out = np.empty(n, dtype=np.float64)
    log_n = log_scalar(float(N), base)
    for i in range(n):
        counts = np.bincount(ds.codes[i], minlength=int(ds.arities[i]))
        h = log_n - mlogm_sum(counts, base) / N
        cap = log_scalar(float(ds.arities[i]), base)
        out[i] = min(max(h, 0.0), cap)
    return out
