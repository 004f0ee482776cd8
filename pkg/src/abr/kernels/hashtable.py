"""Open-addressing hash table with linear probing.

Fixed-width byte-string keys, arbitrary byte-string payloads.  Capacity
is a power of two (initially 1024) and the table doubles whenever the
load factor would exceed 0.5.  Duplicate keys are allowed: each insert
takes the first free slot along the probe chain, so all slots holding a
given key sit before the first empty slot seen when probing for it.

The hash is fixed and documented (see ``hash_key``) so probe traces are
reproducible; the compiled kernels use byte-for-byte the same function.
"""

from __future__ import annotations

_M64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MIX_MULT = 0xFF51AFD7ED558CCD

INITIAL_CAPACITY = 1024
MAX_LOAD = 0.5


def hash_key(key: bytes) -> int:
    """64-bit FNV-1a over the key bytes, finished with a multiplicative
    avalanche mix (xor-shift 33, multiply, xor-shift 33)."""
    h = _FNV_OFFSET
    for b in key:
        h ^= b
        h = (h * _FNV_PRIME) & _M64
    h ^= h >> 33
    h = (h * _MIX_MULT) & _M64
    h ^= h >> 33
    return h


class HashTable:
    def __init__(self, key_width: int, capacity: int = INITIAL_CAPACITY):
        if capacity & (capacity - 1):
            raise ValueError("capacity must be a power of two")
        self.key_width = key_width
        self.capacity = capacity
        self.count = 0
        self._keys: list[bytes | None] = [None] * capacity
        self._payloads: list[bytes | None] = [None] * capacity

    def _check_key(self, key: bytes):
        if len(key) != self.key_width:
            raise ValueError(f"key width {len(key)}, table expects {self.key_width}")

    def insert(self, key: bytes, payload: bytes) -> int:
        """Place (key, payload) at the first free probe slot; returns the
        slot index.  Duplicate keys get their own slots."""
        self._check_key(key)
        if (self.count + 1) > self.capacity * MAX_LOAD:
            self._grow()
        i = hash_key(key) & (self.capacity - 1)
        while self._keys[i] is not None:
            i = (i + 1) & (self.capacity - 1)
        self._keys[i] = key
        self._payloads[i] = payload
        self.count += 1
        return i

    def lookup(self, key: bytes) -> bytes | None:
        """Payload of the first slot holding ``key``, or None."""
        self._check_key(key)
        i = hash_key(key) & (self.capacity - 1)
        while self._keys[i] is not None:
            if self._keys[i] == key:
                return self._payloads[i]
            i = (i + 1) & (self.capacity - 1)
        return None

    def lookup_all(self, key: bytes) -> list[bytes]:
        """Payloads of every slot holding ``key``, in insertion order."""
        self._check_key(key)
        out = []
        i = hash_key(key) & (self.capacity - 1)
        while self._keys[i] is not None:
            if self._keys[i] == key:
                out.append(self._payloads[i])
            i = (i + 1) & (self.capacity - 1)
        return out

    def _grow(self):
        old_keys, old_payloads = self._keys, self._payloads
        self.capacity *= 2
        self._keys = [None] * self.capacity
        self._payloads = [None] * self.capacity
        self.count = 0
        for k, p in zip(old_keys, old_payloads):
            if k is not None:
                self.insert(k, p)
