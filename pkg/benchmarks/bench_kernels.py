"""Benchmark the numba kernels against their pure-numpy twins.

Both flavours are timed in the same process regardless of the
RISIMAGING_DISABLE_NUMBA flag, after a warmup call that triggers JIT
compilation. Each row also reports the largest deviation between flavours.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --repeat 20 --json bench.json
"""
import argparse
import json
import platform
import timeit

import numpy as np

from risimaging import kernels
from risimaging._accel import NUMBA_AVAILABLE
from risimaging.metrics import gaussian_window


def _unit(gen, n):
    u = gen.standard_normal((n, 3))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def cases(gen):
    lam = 3e8 / 5.8e9
    side = np.arange(40) * lam / 2
    px, py = np.meshgrid(side, side)
    offsets = np.column_stack([px.ravel(), py.ravel(), np.zeros(px.size)])
    dirs = _unit(gen, 256)

    H = (gen.standard_normal((1200, 256)) + 1j * gen.standard_normal((1200, 256))) / np.sqrt(2)
    z = gen.standard_normal(256) + 1j * gen.standard_normal(256)
    y = np.abs(H @ z) ** 2 * gen.uniform(0.5, 1.5, 1200)
    w = gen.uniform(0.1, 1.0, 1200)

    a = gen.random((64, 64))
    b = np.clip(a + 0.1 * gen.standard_normal((64, 64)), 0, 1)
    win = gaussian_window()

    u = _unit(gen, 400)
    u[200:260] = u[:60] * np.where(gen.random((60, 1)) < 0.5, -1.0, 1.0)
    tol = np.radians(1.0)

    return [
        ("steering_matrix 1600x256", "steering_matrix", (offsets, dirs, lam)),
        ("wf_objective_grad 1200x256", "wf_objective_grad", (H, z, y, w)),
        ("ssim_map 64x64 win7", "ssim_map", (a, b, win, 1e-4, 9e-4)),
        ("collinear_pairs 400 dirs", "collinear_pairs", (u, tol)),
    ]


def _max_dev(r1, r2):
    if isinstance(r1, tuple):
        return max(_max_dev(x, y) for x, y in zip(r1, r2))
    r1, r2 = np.asarray(r1), np.asarray(r2)
    if r1.shape != r2.shape:
        return float("inf")
    return float(np.max(np.abs(r1 - r2))) if r1.size else 0.0


def run(repeat=10):
    gen = np.random.default_rng(0)
    rows = []
    for label, name, args in cases(gen):
        f_np = getattr(kernels, f"{name}_numpy")
        f_nb = getattr(kernels, f"{name}_numba")
        ref = f_np(*args)
        out = f_nb(*args)  # warmup / JIT compile
        t_np = min(timeit.repeat(lambda: f_np(*args), number=1, repeat=repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*args), number=1, repeat=repeat))
        rows.append({
            "kernel": label,
            "numpy_ms": 1e3 * t_np,
            "numba_ms": 1e3 * t_nb,
            "speedup": t_np / t_nb if t_nb > 0 else float("inf"),
            "max_abs_diff": _max_dev(ref, out),
        })
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=10, help="timing repeats; the best is reported")
    p.add_argument("--json", metavar="PATH", help="also write results as JSON")
    args = p.parse_args(argv)

    if not NUMBA_AVAILABLE:
        print("numba not importable; the numba column times the plain-Python loops")
    rows = run(args.repeat)
    print(f"{'kernel':<30}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}{'max |diff|':>12}")
    for r in rows:
        print(f"{r['kernel']:<30}{r['numpy_ms']:>11.3f}{r['numba_ms']:>11.3f}{r['speedup']:>9.2f}{r['max_abs_diff']:>12.1e}")
    if args.json:
        meta = {"python": platform.python_version(), "numpy": np.__version__, "numba_available": NUMBA_AVAILABLE}
        with open(args.json, "w") as fh:
            json.dump({"meta": meta, "results": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
