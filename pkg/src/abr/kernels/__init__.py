"""Hot kernels for the compiled query backend.

At import time we prefer the Cython extension (``_core``) and fall back
to the pure-Python implementation (``_fallback``) when the extension is
not built.  Both expose the same functions with byte-identical outputs;
``KERNEL_BACKEND`` records which one is active.
"""

from .hashtable import HashTable, hash_key as hash_key_py

try:
    from ._core import group_rows, hash_key, join_i32

    KERNEL_BACKEND = "compiled"
except ImportError:  # extension not built; pure-Python fallback
    from ._fallback import group_rows, join_i32
    from .hashtable import hash_key

    KERNEL_BACKEND = "python"

__all__ = [
    "HashTable",
    "KERNEL_BACKEND",
    "group_rows",
    "hash_key",
    "hash_key_py",
    "join_i32",
]
