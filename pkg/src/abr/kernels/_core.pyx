# Compiled kernels: open-addressing hash join and hash group-by.
# Same algorithms and hash function as the pure-Python fallback in
# _fallback.py; outputs must stay byte-identical between the two.

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t, uint32_t, uint64_t
from libc.string cimport memcmp

cnp.import_array()

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL
cdef uint64_t MIX_MULT = 0xFF51AFD7ED558CCDULL


cdef inline uint64_t _finish(uint64_t h) nogil:
    h ^= h >> 33
    h *= MIX_MULT
    h ^= h >> 33
    return h


cdef inline uint64_t _hash_bytes(const uint8_t *p, Py_ssize_t n) nogil:
    cdef uint64_t h = FNV_OFFSET
    cdef Py_ssize_t i
    for i in range(n):
        h ^= p[i]
        h *= FNV_PRIME
    return _finish(h)


cdef inline uint64_t _hash_i32(int32_t key) nogil:
    cdef uint32_t u = <uint32_t> key
    cdef uint8_t b[4]
    b[0] = <uint8_t> (u & 0xFF)
    b[1] = <uint8_t> ((u >> 8) & 0xFF)
    b[2] = <uint8_t> ((u >> 16) & 0xFF)
    b[3] = <uint8_t> ((u >> 24) & 0xFF)
    return _hash_bytes(b, 4)


cdef int64_t _capacity_for(int64_t n):
    cdef int64_t cap = 1024
    while cap < 2 * n:
        cap *= 2
    return cap


def hash_key(key: bytes) -> int:
    """Parity hook for tests: same value as kernels.hashtable.hash_key."""
    cdef const uint8_t[::1] view = key
    if len(key) == 0:
        return int(_finish(FNV_OFFSET))
    return int(_hash_bytes(&view[0], len(key)))


def join_i32(cnp.ndarray build_keys, cnp.ndarray probe_keys):
    """All matching row pairs of an inner equi-join on int32 keys; see
    the fallback docstring for the exact contract."""
    cdef const int32_t[::1] bk = np.ascontiguousarray(build_keys, dtype=np.int32)
    cdef const int32_t[::1] pk = np.ascontiguousarray(probe_keys, dtype=np.int32)
    cdef int64_t nb = bk.shape[0]
    cdef int64_t npr = pk.shape[0]
    cdef int64_t cap = _capacity_for(nb)
    cdef uint64_t mask = <uint64_t> (cap - 1)

    cdef cnp.ndarray[int32_t, ndim=1] slot_key = np.zeros(cap, dtype=np.int32)
    cdef cnp.ndarray[int64_t, ndim=1] slot_row = np.full(cap, -1, dtype=np.int64)
    cdef int32_t[::1] skv = slot_key
    cdef int64_t[::1] srv = slot_row

    cdef int64_t r, total
    cdef uint64_t i
    cdef int32_t k
    with nogil:
        for r in range(nb):
            k = bk[r]
            i = _hash_i32(k) & mask
            while srv[i] >= 0:
                i = (i + 1) & mask
            skv[i] = k
            srv[i] = r

        # first pass: count matches
        total = 0
        for r in range(npr):
            k = pk[r]
            i = _hash_i32(k) & mask
            while srv[i] >= 0:
                if skv[i] == k:
                    total += 1
                i = (i + 1) & mask

    cdef cnp.ndarray[int64_t, ndim=1] out_b = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] out_p = np.empty(total, dtype=np.int64)
    cdef int64_t[::1] obv = out_b
    cdef int64_t[::1] opv = out_p
    cdef int64_t w = 0
    with nogil:
        for r in range(npr):
            k = pk[r]
            i = _hash_i32(k) & mask
            while srv[i] >= 0:
                if skv[i] == k:
                    obv[w] = srv[i]
                    opv[w] = r
                    w += 1
                i = (i + 1) & mask
    return out_b, out_p


def group_rows(cnp.ndarray key_bytes):
    """Group rows by fixed-width binary keys; see the fallback docstring
    for the exact contract."""
    cdef cnp.ndarray arr = np.ascontiguousarray(key_bytes, dtype=np.uint8)
    cdef const uint8_t[:, ::1] kv = arr
    cdef int64_t n = kv.shape[0]
    cdef int64_t w = kv.shape[1]
    cdef int64_t cap = _capacity_for(n)
    cdef uint64_t mask = <uint64_t> (cap - 1)

    cdef cnp.ndarray[int64_t, ndim=1] slot_gid = np.full(cap, -1, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] slot_row = np.zeros(cap, dtype=np.int64)
    cdef int64_t[::1] sgv = slot_gid
    cdef int64_t[::1] srw = slot_row

    cdef cnp.ndarray[int64_t, ndim=1] gid = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] rep = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] gv = gid
    cdef int64_t[::1] rv = rep

    cdef int64_t r, ngroups = 0
    cdef uint64_t i
    cdef const uint8_t *base
    if n == 0:
        return gid, rep[:0].copy()
    base = &kv[0, 0]
    with nogil:
        for r in range(n):
            i = _hash_bytes(base + r * w, w) & mask
            while sgv[i] >= 0:
                if memcmp(base + srw[i] * w, base + r * w, w) == 0:
                    break
                i = (i + 1) & mask
            if sgv[i] >= 0:
                gv[r] = sgv[i]
            else:
                sgv[i] = ngroups
                srw[i] = r
                gv[r] = ngroups
                rv[ngroups] = r
                ngroups += 1
    return gid, rep[:ngroups].copy()
