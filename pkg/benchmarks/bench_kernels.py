"""Benchmark the numba kernel path against the pure-numpy fallback.

The backend is fixed at import time by the BINSIG_NO_NUMBA environment flag,
so each backend is timed in its own subprocess and the parent prints a
side-by-side table.  Run from the repository root:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --repeats 9
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

SRC = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src")


def _time_best(fn, repeats: int) -> float:
    """Best-of-N wall time in milliseconds (first call runs separately as warmup)."""
    fn()
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def run_workloads(repeats: int) -> dict[str, float]:
    import numpy as np

    from binsig import kernels

    rng = np.random.default_rng(0)

    d = 100_000
    words = (d + 63) // 64
    queries = rng.integers(0, 1 << 63, size=(1000, words), dtype=np.uint64)
    protos = rng.integers(0, 1 << 63, size=(4, words), dtype=np.uint64)

    n_f = 10_879
    feats = rng.standard_normal(n_f)
    key = kernels.stream_key(7)
    t0, t1 = kernels.ternary_thresholds(0.9)

    x_sig = rng.standard_normal((22, 875))
    coeffs = np.tile(
        np.array([[0.067, 0.0, -0.067, -1.142, 0.412]]), (8, 1)
    )

    x_svm = np.where(rng.standard_normal((192, 1096)) > 0, 1.0, -1.0)
    y_svm = np.where(rng.integers(0, 2, size=192) > 0, 1.0, -1.0)

    results = {}
    results["hamming_1000x4_d100k"] = _time_best(
        lambda: kernels.hamming_many(queries, protos), repeats
    )
    results["project_10879_to_100k_s0.9"] = _time_best(
        lambda: kernels.project_bits(feats, d, key, t0, t1), repeats
    )
    results["biquad_8band_22ch_875smp"] = _time_best(
        lambda: kernels.biquad_chain(x_sig, coeffs), repeats
    )
    results["dcd_192x1096"] = _time_best(
        lambda: kernels.dcd_solve(x_svm, y_svm, 1.0, 1e-4, 200), repeats
    )
    return results


def child_main(repeats: int) -> None:
    from binsig._backend import backend_name

    print(json.dumps({"backend": backend_name(), "results": run_workloads(repeats)}))


def spawn(no_numba: bool, repeats: int) -> dict:
    env = dict(os.environ)
    env["BINSIG_NO_NUMBA"] = "1" if no_numba else "0"
    env["PYTHONPATH"] = SRC + os.pathsep + env.get("PYTHONPATH", "")
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--child", "--repeats", str(repeats)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeats per op")
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        child_main(args.repeats)
        return 0

    numpy_run = spawn(no_numba=True, repeats=args.repeats)
    try:
        import numba  # noqa: F401

        numba_run = spawn(no_numba=False, repeats=args.repeats)
    except ImportError:
        numba_run = None
        print("numba not importable; timing the numpy fallback only\n")

    ops = list(numpy_run["results"])
    width = max(len(op) for op in ops)
    if numba_run is None:
        print(f"{'workload':<{width}}  numpy ms")
        for op in ops:
            print(f"{op:<{width}}  {numpy_run['results'][op]:8.2f}")
        return 0

    assert numba_run["backend"] == "numba", "numba child fell back to numpy"
    print(f"{'workload':<{width}}  numba ms  numpy ms   speedup")
    for op in ops:
        nb = numba_run["results"][op]
        np_ = numpy_run["results"][op]
        print(f"{op:<{width}}  {nb:8.2f}  {np_:8.2f}  {np_ / nb:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
