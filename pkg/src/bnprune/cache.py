"""Final candidate lists and score-cache files.

After the sweep, each child's evaluated sets are reduced to the list a
structure-learning solver actually needs: a set is kept only if it beats
every evaluated proper subset, since otherwise the subset is at least as
good with fewer arcs. The surviving entries are written in one of three
formats:

    jkl    block text format used by score-based solver pipelines
    csv    one row per (child, parent set) with ll, pen, bic columns
    json   single object carrying names, metadata and all lists

All three round-trip through :func:`read_cache` at their stated
precision (jkl and csv print 6 decimals; json keeps full doubles).
"""

from __future__ import annotations

import csv as _csv
import io
import json
import math
from dataclasses import dataclass, field

from .errors import CacheFormatError, DataError
from .scoring import ParentSet, ScoreEntry

FORMATS = ("jkl", "csv", "json")


@dataclass
class CandidateList:
    """Final per-child list, sorted best-first.

    Order: descending BIC, ties broken by smaller parent-set size, then
    lexicographic members; no two entries compare equal.
    """

    child: int
    entries: list


def _sort_entries(entries) -> list:
    return sorted(entries, key=lambda e: (-e.bic, len(e.parents), e.parents.members))


def filter_dominated(scores: dict, child: int) -> CandidateList:
    """Drop evaluated sets that fail to beat some evaluated proper subset.

    ``scores`` maps parent-set bitmasks to :class:`ScoreEntry` and must
    be closed under taking subsets (sweep output is). A set is retained
    iff its BIC strictly exceeds that of every evaluated proper subset;
    the empty set is always retained.
    """
    best_below: dict[int, float] = {}
    kept = []
    for mask in sorted(scores, key=lambda m: (m.bit_count(), ParentSet.from_mask(m).members)):
        entry = scores[mask]
        best = -math.inf
        m = mask
        while m:
            low = m & -m
            sub = mask ^ low
            cand = scores[sub].bic
            if cand > best:
                best = cand
            if best_below[sub] > best:
                best = best_below[sub]
            m ^= low
        best_below[mask] = best
        if mask == 0 or entry.bic > best:
            kept.append(entry)
    return CandidateList(child, _sort_entries(kept))


@dataclass
class CacheEntry:
    """One entry read back from a cache file; ll/pen where the format has them."""

    parents: tuple
    bic: float
    ll: float | None = None
    pen: float | None = None


@dataclass
class ScoreCache:
    """Parsed cache file: variable names, metadata, per-child entry lists."""

    names: tuple
    meta: dict = field(default_factory=dict)
    lists: list = field(default_factory=list)


def _infer_format(path, fmt):
    if fmt is not None:
        if fmt not in FORMATS:
            raise ValueError(f"unknown cache format {fmt!r}")
        return fmt
    suffix = str(path).rsplit(".", 1)[-1].lower()
    if suffix in FORMATS:
        return suffix
    raise ValueError(f"cannot infer cache format from {path!r}; pass fmt=")


def _meta_line(meta) -> str:
    parts = []
    for key, val in meta.items():
        text = str(val)
        if any(ch.isspace() for ch in str(key)) or any(ch.isspace() for ch in text):
            raise ValueError(f"metadata {key!r}={text!r} must not contain whitespace")
        parts.append(f"{key}={text}")
    return "# bnprune " + " ".join(parts)


def _parse_meta_line(line) -> dict:
    body = line[1:].strip()
    if body.startswith("bnprune"):
        body = body[len("bnprune"):].strip()
    out = {}
    for token in body.split():
        if "=" in token:
            key, _, val = token.partition("=")
            out[key] = val
    return out


def write_cache(lists, names, path, fmt=None, meta=None):
    """Write per-child candidate lists to ``path``.

    ``lists`` holds one :class:`CandidateList` per variable, in variable
    order. ``meta`` is a flat mapping recorded in the file (comment line
    for jkl/csv, object field for json).
    """
    fmt = _infer_format(path, fmt)
    if len(lists) != len(names):
        raise ValueError("need exactly one candidate list per variable")
    meta = dict(meta or {})
    writer = {"jkl": _write_jkl, "csv": _write_csv, "json": _write_json}[fmt]
    text = writer(lists, tuple(names), meta)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_jkl(lists, names, meta) -> str:
    for name in names:
        if any(ch.isspace() for ch in name) or not name:
            raise DataError(f"variable name {name!r} unusable in jkl format")
    out = io.StringIO()
    if meta:
        out.write(_meta_line(meta) + "\n")
    out.write(f"{len(names)}\n")
    for cl in lists:
        name = names[cl.child]
        out.write(f"{name} {len(cl.entries)}\n")
        for e in cl.entries:
            members = " ".join(names[p] for p in e.parents.members)
            sep = " " if members else ""
            out.write(f"{e.bic:.6f} {len(e.parents)}{sep}{members}\n")
    return out.getvalue()


def _write_csv(lists, names, meta) -> str:
    out = io.StringIO()
    if meta:
        out.write(_meta_line(meta) + "\n")
    w = _csv.writer(out, lineterminator="\n")
    w.writerow(["child", "parents", "ll", "pen", "bic"])
    for cl in lists:
        for e in cl.entries:
            members = " ".join(names[p] for p in e.parents.members)
            w.writerow(
                [names[cl.child], members, f"{e.ll:.6f}", f"{e.pen:.6f}", f"{e.bic:.6f}"]
            )
    return out.getvalue()


def _write_json(lists, names, meta) -> str:
    doc = {
        "meta": meta,
        "variables": list(names),
        "lists": [
            {
                "child": names[cl.child],
                "entries": [
                    {
                        "parents": [names[p] for p in e.parents.members],
                        "ll": e.ll,
                        "pen": e.pen,
                        "bic": e.bic,
                    }
                    for e in cl.entries
                ],
            }
            for cl in lists
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def read_cache(path, fmt=None) -> ScoreCache:
    """Parse a cache file back into names, metadata and entry lists."""
    fmt = _infer_format(path, fmt)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CacheFormatError(f"cannot read {path}: {exc}") from exc
    reader = {"jkl": _read_jkl, "csv": _read_csv, "json": _read_json}[fmt]
    return reader(text, str(path))


def _read_jkl(text, path) -> ScoreCache:
    lines = text.splitlines()
    meta = {}
    pos = 0
    while pos < len(lines) and lines[pos].startswith("#"):
        meta.update(_parse_meta_line(lines[pos]))
        pos += 1
    if pos >= len(lines):
        raise CacheFormatError(f"{path}: missing variable count")
    try:
        n = int(lines[pos])
    except ValueError:
        raise CacheFormatError(f"{path}: bad variable count {lines[pos]!r}") from None
    pos += 1

    blocks = []
    for _ in range(n):
        if pos >= len(lines):
            raise CacheFormatError(f"{path}: expected {n} variable blocks, found {len(blocks)}")
        head = lines[pos].split()
        if len(head) != 2:
            raise CacheFormatError(f"{path}: bad block header {lines[pos]!r}")
        name, count_text = head
        try:
            count = int(count_text)
        except ValueError:
            raise CacheFormatError(f"{path}: bad entry count in block {name}") from None
        pos += 1
        rows = []
        for i in range(count):
            if pos >= len(lines):
                raise CacheFormatError(
                    f"{path}: block {name} truncated after {i} of {count} entries"
                )
            fields = lines[pos].split()
            if len(fields) < 2:
                raise CacheFormatError(f"{path}: bad entry line {lines[pos]!r} in block {name}")
            try:
                score = float(fields[0])
                size = int(fields[1])
            except ValueError:
                raise CacheFormatError(
                    f"{path}: bad entry line {lines[pos]!r} in block {name}"
                ) from None
            if len(fields) != 2 + size:
                raise CacheFormatError(
                    f"{path}: entry in block {name} announces {size} parents, "
                    f"lists {len(fields) - 2}"
                )
            rows.append((score, tuple(fields[2:])))
            pos += 1
        blocks.append((name, rows))

    names = tuple(name for name, _ in blocks)
    if len(set(names)) != len(names):
        raise CacheFormatError(f"{path}: duplicate variable block")
    index = {name: i for i, name in enumerate(names)}
    lists = []
    for name, rows in blocks:
        entries = []
        for score, parent_names in rows:
            try:
                parents = tuple(sorted(index[p] for p in parent_names))
            except KeyError as exc:
                raise CacheFormatError(
                    f"{path}: unknown parent {exc.args[0]!r} in block {name}"
                ) from None
            entries.append(CacheEntry(parents, score))
        lists.append(entries)
    return ScoreCache(names, meta, lists)


def _read_csv(text, path) -> ScoreCache:
    lines = text.splitlines()
    meta = {}
    pos = 0
    while pos < len(lines) and lines[pos].startswith("#"):
        meta.update(_parse_meta_line(lines[pos]))
        pos += 1
    rows = list(_csv.reader(lines[pos:]))
    if not rows or rows[0] != ["child", "parents", "ll", "pen", "bic"]:
        raise CacheFormatError(f"{path}: missing csv header row")
    raw: dict[str, list] = {}
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise CacheFormatError(f"{path}: row {i} has {len(row)} fields, expected 5")
        child, parents_text, ll_text, pen_text, bic_text = row
        try:
            ll, pen, bic = float(ll_text), float(pen_text), float(bic_text)
        except ValueError:
            raise CacheFormatError(f"{path}: row {i} has non-numeric scores") from None
        raw.setdefault(child, []).append((parents_text.split(), ll, pen, bic))
    names = tuple(raw)
    index = {name: i for i, name in enumerate(names)}
    lists = []
    for name in names:
        entries = []
        for parent_names, ll, pen, bic in raw[name]:
            try:
                parents = tuple(sorted(index[p] for p in parent_names))
            except KeyError as exc:
                raise CacheFormatError(
                    f"{path}: unknown parent {exc.args[0]!r} for child {name}"
                ) from None
            entries.append(CacheEntry(parents, bic, ll, pen))
        lists.append(entries)
    return ScoreCache(names, meta, lists)


def _read_json(text, path) -> ScoreCache:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CacheFormatError(f"{path}: invalid json: {exc}") from None
    try:
        names = tuple(doc["variables"])
        meta = dict(doc.get("meta", {}))
        index = {name: i for i, name in enumerate(names)}
        lists = []
        for block in doc["lists"]:
            entries = []
            for e in block["entries"]:
                parents = tuple(sorted(index[p] for p in e["parents"]))
                entries.append(CacheEntry(parents, float(e["bic"]), float(e["ll"]), float(e["pen"])))
            lists.append(entries)
    except (KeyError, TypeError) as exc:
        raise CacheFormatError(f"{path}: malformed cache document: {exc}") from None
    return ScoreCache(names, meta, lists)
