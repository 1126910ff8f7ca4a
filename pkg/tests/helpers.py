"""Shared test utilities: hypothesis strategies and small builders."""

import numpy as np
from hypothesis import strategies as st

import bnprune as bp


@st.composite
def small_datasets(draw, min_vars=2, max_vars=4, min_rows=2, max_rows=40, max_arity=4):
    """A complete categorical dataset with explicit arities."""
    n = draw(st.integers(min_vars, max_vars))
    n_rows = draw(st.integers(min_rows, max_rows))
    arities = [draw(st.integers(2, max_arity)) for _ in range(n)]
    cols = [
        draw(st.lists(st.integers(0, a - 1), min_size=n_rows, max_size=n_rows))
        for a in arities
    ]
    return bp.Dataset.from_codes(list(zip(*cols)), arities=arities)


def uniform_dataset(rng, n, n_rows, max_arity=4):
    arities = rng.integers(2, max_arity + 1, size=n)
    data = np.column_stack([rng.integers(0, a, size=n_rows) for a in arities])
    return bp.Dataset.from_codes(data, arities=arities)


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)
