"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py --count 1000000 --repeat 3
"""

import argparse
import json
import sys
import time

import numpy as np

from ratiogroup import _kernels_py
from ratiogroup.arith import primes_up_to
from ratiogroup.dirichlet import DirichletCharacter, enumerate_characters, log_table

try:
    from ratiogroup import _kernels as compiled
except ImportError:  # pragma: no cover - depends on the build
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=10**6, help="progression length")
    ap.add_argument("--prime-bound", type=int, default=2300)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    primes = primes_up_to(args.prime_bound)
    chi = [c for c in enumerate_characters(3125, 20) if c.order == 20][0]
    table, L = log_table(chi)
    rng = np.random.default_rng(0)
    i1 = rng.integers(0, 3125, args.count, dtype=np.int64)
    i2 = rng.integers(0, 3125, args.count, dtype=np.int64)
    shift = rng.integers(0, L, args.count, dtype=np.int64)

    backends = {"numpy": _kernels_py}
    if compiled is not None:
        backends["compiled"] = compiled
    rows = {}
    for name, mod in backends.items():
        rows[name] = {
            "strip_primes": best_of(lambda: mod.strip_primes(5, 1, 1, args.count, primes), args.repeat),
            "pair_histogram": best_of(lambda: mod.pair_histogram(i1, i2, shift, table, L), args.repeat),
        }
    if compiled is not None:
        e0, c0 = _kernels_py.strip_primes(5, 1, 1, 10**4, primes)
        e1, c1 = compiled.strip_primes(5, 1, 1, 10**4, primes)
        assert np.array_equal(e0, e1) and np.array_equal(c0, c1), "backends disagree"
    if args.json:
        print(json.dumps(rows, sort_keys=True))
    else:
        print(f"count={args.count} primes<={args.prime_bound} (best of {args.repeat})")
        for name, r in rows.items():
            print(f"  {name:9s} " + "  ".join(f"{k}={v:.4f}s" for k, v in r.items()))
        if compiled is None:
            print("  compiled core not built; only the fallback was timed", file=sys.stderr)


if __name__ == "__main__":
    main()
