"""Micro-benchmark: compiled (Cython) kernels vs the pure-Python fallback.

Runs the two hot kernels -- int32 hash join and multi-column grouping --
over identical random inputs and prints mean latency for each backend.

Usage:
    python3 benchmarks/kernel_benchmark.py [--rows 200000] [--trials 5]
"""

from __future__ import annotations

import argparse
import importlib
import statistics
import time

import numpy as np

from abr.kernels import KERNEL_BACKEND, _fallback


def _load_backends():
    backends = {"python": _fallback}
    try:
        backends["compiled"] = importlib.import_module("abr.kernels._core")
    except ImportError:
        pass
    return backends


def _time(fn, trials):
    times = []
    for _ in range(trials):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.mean(times) * 1000.0


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--trials", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(42)
    build = rng.integers(0, args.rows // 4 + 1, size=args.rows, dtype=np.int32)
    probe = rng.integers(0, args.rows // 4 + 1, size=args.rows, dtype=np.int32)
    keys = np.ascontiguousarray(
        rng.integers(0, 1000, size=(args.rows, 2), dtype=np.int32)
    ).view(np.uint8).reshape(args.rows, 8)

    backends = _load_backends()
    print(f"rows={args.rows}  trials={args.trials}  active backend={KERNEL_BACKEND}")
    print(f"{'kernel':<12} {'backend':<10} {'mean_ms':>10}")
    results: dict[tuple[str, str], float] = {}
    for name, mod in backends.items():
        results[("join_i32", name)] = _time(
            lambda: mod.join_i32(build, probe), args.trials
        )
        results[("group_rows", name)] = _time(
            lambda: mod.group_rows(keys), args.trials
        )
    for (kernel, name), ms in results.items():
        print(f"{kernel:<12} {name:<10} {ms:>10.2f}")
    if "compiled" in backends:
        for kernel in ("join_i32", "group_rows"):
            ratio = results[(kernel, "python")] / results[(kernel, "compiled")]
            print(f"{kernel}: compiled is {ratio:.1f}x faster than python")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
