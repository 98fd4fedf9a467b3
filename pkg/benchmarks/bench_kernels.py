"""Compare the compiled pointwise kernels with the numpy fallback.

    python benchmarks/bench_kernels.py --n 64 128 --repeat 5
"""
import argparse
import time

import numpy as np

from ghartree import _pykernels

try:
    from ghartree import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench(n: int, p: float, repeat: int) -> list:
    rng = np.random.default_rng(0)
    u = rng.normal(size=(n,) * 3) + 1j * rng.normal(size=(n,) * 3)
    V = rng.random((n,) * 3)
    cases = {
        "abs_pow": lambda m: m.abs_pow(u, p),
        "veff": lambda m: m.veff(u, V, p),
        "potential_term": lambda m: m.potential_term(u, V, p),
        "phase_rotate": lambda m: m.phase_rotate(u.copy(), V, p, 1e-3),
    }
    rows = []
    for name, call in cases.items():
        t_py = _best(lambda: call(_pykernels), repeat)
        t_c = _best(lambda: call(_ckernels), repeat) if _ckernels else float("nan")
        if _ckernels:
            a, b = np.asarray(call(_pykernels)), np.asarray(call(_ckernels))
            agree = float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))
        else:
            agree = float("nan")
        rows.append((name, n, t_py, t_c, t_py / t_c, agree))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[64, 128])
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':<15}{'n':>5}{'python [s]':>12}{'cython [s]':>12}{'speedup':>9}{'max rel diff':>14}")
    for n in args.n:
        for name, n_, tp, tc, sp, d in bench(n, args.p, args.repeat):
            print(f"{name:<15}{n_:>5}{tp:>12.4f}{tc:>12.4f}{sp:>9.2f}{d:>14.1e}")


if __name__ == "__main__":
    main()
