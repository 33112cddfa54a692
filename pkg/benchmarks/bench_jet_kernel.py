"""Benchmark the truncated-product kernel: compiled extension vs. the NumPy
fallback, on the exact sparse triple tables the geometry stack uses.

Run:  python3 benchmarks/bench_jet_kernel.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from finslerlab import _jetcore_py
from finslerlab._kernel import BACKEND
from finslerlab.jets import jet_space

try:
    from finslerlab import _jetcore
except ImportError:
    _jetcore = None


def bench_multiply(n, order_x, order_y, reps=2000):
    sp = jet_space(n, order_x, order_y)
    ti, tj, tk = sp.mul_tables
    rng = np.random.default_rng(0)
    a = rng.standard_normal(sp.size)
    b = rng.standard_normal(sp.size)
    rows = []
    impls = [("numpy", _jetcore_py.multiply)]
    if _jetcore is not None:
        impls.append(("cython", _jetcore.multiply))
    ref = None
    for name, fn in impls:
        out = fn(a, b, ti, tj, tk, sp.size)
        if ref is None:
            ref = out
        else:
            assert np.allclose(out, ref, atol=1e-12), "backends disagree"
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(a, b, ti, tj, tk, sp.size)
        dt = (time.perf_counter() - t0) / reps
        rows.append((name, dt))
    return sp.size, len(ti), rows


def bench_pack(pure: bool, reps=30) -> float:
    env = dict(os.environ)
    if pure:
        env["FINSLERLAB_PURE_PYTHON"] = "1"
    else:
        env.pop("FINSLERLAB_PURE_PYTHON", None)
    code = (
        "import time, numpy as np\n"
        "from finslerlab import metrics, tensors\n"
        "m = metrics.get_metric('funk', 3)\n"
        "st = metrics.sample_states(m, 1, seed=0)[0]\n"
        "tensors.pack(m, st).riemann  # warm caches\n"
        f"t0 = time.perf_counter()\n"
        f"for i in range({reps}):\n"
        "    st = metrics.sample_states(m, 1, seed=i)[0]\n"
        "    pk = tensors.pack(m, st)\n"
        "    pk.riemann; pk.berwald; pk.landsberg\n"
        f"print((time.perf_counter() - t0) / {reps})\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main():
    print(f"active backend: {BACKEND}")
    print("\nkernel micro-benchmark (truncated jet product):")
    print(f"{'space':>22} {'coeffs':>7} {'triples':>8} "
          f"{'numpy':>10} {'cython':>10} {'speedup':>8}")
    for n, ox, oy in ((2, 2, 6), (3, 2, 6), (3, 1, 4), (2, 0, 2)):
        size, ntrip, rows = bench_multiply(n, ox, oy)
        times = dict(rows)
        np_t = times["numpy"]
        cy_t = times.get("cython")
        print(f"  n={n} ox={ox} oy={oy:<8} {size:>7} {ntrip:>8} "
              f"{np_t * 1e6:>8.1f}us "
              f"{(cy_t * 1e6 if cy_t else float('nan')):>8.1f}us "
              f"{(np_t / cy_t if cy_t else float('nan')):>7.1f}x")

    print("\nend-to-end: full curvature stack, funk n=3 (per point):")
    t_native = bench_pack(pure=False)
    t_pure = bench_pack(pure=True)
    print(f"  compiled core:   {t_native * 1e3:8.2f} ms")
    print(f"  pure fallback:   {t_pure * 1e3:8.2f} ms")
    print(f"  speedup:         {t_pure / t_native:8.2f}x")


if __name__ == "__main__":
    main()
