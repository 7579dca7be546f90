"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 20]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fusegrad import _pykernels

try:
    from fusegrad import _ckernels
except ImportError:
    _ckernels = None


def kernel_cases(size, rng):
    x = rng.random((size, size))
    gx, gy = rng.random((2, size, size))
    out = int(size * 0.5 + 0.5)
    g = rng.random((out, out))
    k = np.exp(-np.linspace(-3, 3, 11) ** 2 / 2)
    k /= k.sum()
    gv = rng.random((size - 10, size - 10))
    return {
        "sobel": lambda m: m.sobel(x, False),
        "sobel_adjoint": lambda m: m.sobel_adjoint(gx, gy, True),
        "resize(0.5)": lambda m: m.resize(x, out, out, 0.5),
        "resize_adjoint": lambda m: m.resize_adjoint(g, size, size, 0.5),
        "gauss_valid": lambda m: m.gauss_valid(x, k),
        "gauss_adjoint": lambda m: m.gauss_valid_adjoint(gv, k),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def composite_time(size, backend_env):
    # the backend is fixed at import, so time each one in a fresh interpreter
    code = (
        "import timeit, numpy as np\n"
        "from fusegrad.losses import composite_loss\n"
        f"r = np.random.default_rng(0); f, v, i = r.random((3, {size}, {size}))\n"
        "print(min(timeit.repeat(lambda: composite_loss(f, v, i), number=1, repeat=10)))\n"
    )
    env = dict(os.environ, FUSEGRAD_PURE_PYTHON=backend_env)
    return float(subprocess.check_output([sys.executable, "-c", code], env=env, text=True))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)
    if _ckernels is None:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")

    rng = np.random.default_rng(0)
    print(f"{args.size}x{args.size}, best of {args.repeat}")
    print(f"{'kernel':<16}{'cython ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, fn in kernel_cases(args.size, rng).items():
        tc = best(lambda: fn(_ckernels), args.repeat)
        tp = best(lambda: fn(_pykernels), args.repeat)
        print(f"{name:<16}{tc * 1e3:>12.3f}{tp * 1e3:>12.3f}{tp / tc:>9.1f}x")
    tc, tp = composite_time(args.size, "0"), composite_time(args.size, "1")
    print(f"{'composite_loss':<16}{tc * 1e3:>12.3f}{tp * 1e3:>12.3f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
