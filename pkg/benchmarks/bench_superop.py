"""Compiled vs pure-NumPy superoperator kernels.

    python3 benchmarks/bench_superop.py [--qubits 5 7 9 10] [--repeat 5]

Times single applications on every qubit (pair) position, then a full noisy
feature-map program, and checks that both backends agree.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from peqml import _superop_py, kernels
from peqml.backend import Backend
from peqml.circuit import build_feature_map
from peqml.device import DeviceModel
from peqml.noise import NoiseConfig, run_program

try:
    from peqml import _superop
except ImportError:  # extension not built
    _superop = None


def timed(fn, repeat):
    samples = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t)
    return statistics.median(samples)


def kernel_times(mod, n, repeat, rng):
    dim = 1 << n
    rho = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    s1 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    s2 = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    one = timed(lambda: [mod.apply_superop_1q(rho, s1, q, n) for q in range(n)], repeat) / n
    two = timed(lambda: [mod.apply_superop_2q(rho, s2, q, q + 1, n) for q in range(n - 1)], repeat) / (n - 1)
    return one, two


def program_time(mod, n, repeat):
    prog = Backend("pe", True, DeviceModel(n), NoiseConfig(seed=0)).program(
        build_feature_map(np.linspace(0.1, 0.9, n), 4)
    )
    saved = kernels.apply_superop_1q, kernels.apply_superop_2q
    kernels.apply_superop_1q, kernels.apply_superop_2q = mod.apply_superop_1q, mod.apply_superop_2q
    try:
        def once():
            rho = np.zeros((1 << n, 1 << n), dtype=complex)
            rho[0, 0] = 1
            return run_program(prog, rho)

        result = once()
        return timed(once, repeat), result
    finally:
        kernels.apply_superop_1q, kernels.apply_superop_2q = saved


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+", default=[5, 7, 9, 10])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _superop is None:
        raise SystemExit("the compiled extension is not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    print(f"{'n':>3} {'backend':>8} {'1q ms':>9} {'2q ms':>9} {'program ms':>11}")
    for n in args.qubits:
        results = {}
        for name, mod in (("cython", _superop), ("numpy", _superop_py)):
            one, two = kernel_times(mod, n, args.repeat, rng)
            prog, rho = program_time(mod, n, max(1, args.repeat // 2))
            results[name] = rho
            print(f"{n:>3} {name:>8} {one * 1e3:>9.3f} {two * 1e3:>9.3f} {prog * 1e3:>11.1f}")
        err = np.max(np.abs(results["cython"] - results["numpy"]))
        print(f"    max |cython - numpy| on the program output: {err:.1e}")


if __name__ == "__main__":
    main()
