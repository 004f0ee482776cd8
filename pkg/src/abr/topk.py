"""Bounded top-k selection with a deterministic tie-break.

Rows are ranked by one output column; ties are broken by the remaining
output columns in schema order, ascending.  The selection keeps a size-k
buffer (heapq.nsmallest) rather than sorting all rows; differential
tests compare it against a full-sort oracle.
"""

from __future__ import annotations

import heapq


def topk_indices(columns, key_idx: int, descending: bool, k: int) -> list[int]:
    """Indices of the k extreme rows, in final output order.

    ``columns`` holds per-column sequences of comparable Python values
    (numbers for the sort column).
    """
    n = len(columns[key_idx]) if columns else 0
    others = [c for i, c in enumerate(columns) if i != key_idx]
    key_col = columns[key_idx]

    def rank(i: int):
        v = key_col[i]
        return (-v if descending else v, tuple(c[i] for c in others))

    return heapq.nsmallest(k, range(n), key=rank)
