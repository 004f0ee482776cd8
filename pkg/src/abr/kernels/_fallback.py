"""Pure-Python kernels, used when the compiled extension is unavailable.

Same algorithms and same hash function as ``_core.pyx``: open addressing,
linear probing, power-of-two capacity sized so the load factor stays at
or below 0.5.  Outputs are byte-identical to the compiled kernels.
"""

from __future__ import annotations

import numpy as np

from .hashtable import hash_key


def _capacity_for(n: int) -> int:
    cap = 1024
    while cap < 2 * n:
        cap *= 2
    return cap


def hash_i32(key: int) -> int:
    return hash_key(int(key).to_bytes(4, "little", signed=True))


def join_i32(build_keys: np.ndarray, probe_keys: np.ndarray):
    """All matching row pairs of an inner equi-join on int32 keys.

    Builds an open-addressing table over ``build_keys``, probes with
    ``probe_keys``; returns (build_idx, probe_idx) int64 arrays ordered by
    probe row, matches per probe row in build-row order.
    """
    nb = len(build_keys)
    cap = _capacity_for(nb)
    mask = cap - 1
    slot_key = [0] * cap
    slot_row = [-1] * cap
    for r in range(nb):
        k = int(build_keys[r])
        i = hash_i32(k) & mask
        while slot_row[i] >= 0:
            i = (i + 1) & mask
        slot_key[i] = k
        slot_row[i] = r

    out_b: list[int] = []
    out_p: list[int] = []
    for r in range(len(probe_keys)):
        k = int(probe_keys[r])
        i = hash_i32(k) & mask
        while slot_row[i] >= 0:
            if slot_key[i] == k:
                out_b.append(slot_row[i])
                out_p.append(r)
            i = (i + 1) & mask
    return (
        np.asarray(out_b, dtype=np.int64),
        np.asarray(out_p, dtype=np.int64),
    )


def group_rows(key_bytes: np.ndarray):
    """Group rows by fixed-width binary keys.

    ``key_bytes`` is a C-contiguous (n, width) uint8 array, one encoded
    composite key per row.  Returns (group_id int64[n], representative
    int64[n_groups]); group ids are assigned in first-occurrence order and
    the representative is the first row of each group.
    """
    n = len(key_bytes)
    cap = _capacity_for(n)
    mask = cap - 1
    slot_gid = [-1] * cap
    slot_key: list[bytes | None] = [None] * cap
    gid = np.empty(n, dtype=np.int64)
    rep: list[int] = []
    raw = key_bytes.tobytes()
    w = key_bytes.shape[1] if key_bytes.ndim == 2 else 0
    for r in range(n):
        k = raw[r * w : (r + 1) * w]
        i = hash_key(k) & mask
        while slot_gid[i] >= 0:
            if slot_key[i] == k:
                break
            i = (i + 1) & mask
        if slot_gid[i] >= 0:
            gid[r] = slot_gid[i]
        else:
            g = len(rep)
            slot_gid[i] = g
            slot_key[i] = k
            gid[r] = g
            rep.append(r)
    return gid, np.asarray(rep, dtype=np.int64)
