"""Wall-clock comparison of the compiled and NumPy step kernels.

    python3 benchmarks/bench_step.py [--steps 60] [--repeat 5] [--tau 0.5]

Also checks that both kernels produce the same final state.
"""

import argparse
import timeit

import numpy as np

from qwduet.kernels import available_backends
from qwduet.lattice import evolve, initial_state
from qwduet.momentum import exact_second_moment


def run(tau, steps, backend):
    return evolve(initial_state(steps), tau, steps, backend=backend)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=60)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--tau", type=float, default=0.5)
    args = ap.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}; steps={args.steps}, tau={args.tau}")
    finals, times = {}, {}
    for name in backends:
        best = min(timeit.repeat(lambda: run(args.tau, args.steps, name), number=1, repeat=args.repeat))
        times[name] = best
        finals[name] = run(args.tau, args.steps, name).amplitudes
        print(f"  {name:>7}: {best * 1e3:8.2f} ms  ({best / args.steps * 1e6:.1f} us/step)")
    if len(finals) > 1:
        a, b = finals.values()
        print(f"  max |difference| between kernels: {np.max(np.abs(a - b)):.3e}")
        print(f"  speedup: {times['numpy'] / times['cython']:.1f}x")
    else:
        print("  compiled kernel not built; only the NumPy path was timed")

    t = min(args.steps, 20)
    best = min(timeit.repeat(lambda: exact_second_moment(args.tau, t), number=1, repeat=3))
    print(f"momentum-space <x^2> at t={t} (grid {4 * t + 2}^2): {best * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
