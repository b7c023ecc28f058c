"""Compare the compiled sweep kernels against the pure-numpy fallback.

Times the two backends on the workloads that dominate the robustness search
(Bell-operator extreme-eigenvalue sweeps and extraction-margin sweeps) and
checks that they agree to near machine precision.

Run:  python3 benchmarks/bench_kernels.py [--grid 13] [--bell-grid 15]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from graphbell.bell import angle_grid, operator_arrays, preset_graph_state, preset_inequality
from graphbell.robustness import extraction_gammas
from graphbell._kernels import pure

try:
    from graphbell._kernels import _sweep as compiled
except ImportError:
    compiled = None


def _time(fn, *args, repeats=3, **kwargs):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=13, help="margin sweep resolution per party")
    parser.add_argument("--bell-grid", type=int, default=15, help="bell sweep resolution per party")
    parser.add_argument("--preset", default="b1")
    args = parser.parse_args()

    if compiled is None:
        print("compiled kernel not available; build it with: python3 setup.py build_ext --inplace")

    ineq = preset_inequality(args.preset)
    psi = preset_graph_state(args.preset)
    coeffs, k0, k1, k2 = operator_arrays(ineq)
    gamma_lo, gamma_hi = extraction_gammas(ineq.ac, ineq.n_parties)

    bell_thetas = angle_grid(ineq.n_parties, args.bell_grid)
    print(f"bell sweep: {ineq.name}, {bell_thetas.shape[0]} angle tuples "
          f"({args.bell_grid} per axis)")
    vals_pure, t_pure = _time(pure.sweep_bell_extreme, coeffs, k0, k1, k2, bell_thetas, "max")
    print(f"  pure     {t_pure:8.3f} s")
    if compiled is not None:
        vals_comp, t_comp = _time(compiled.sweep_bell_extreme, coeffs, k0, k1, k2, bell_thetas, "max")
        diff = float(np.max(np.abs(vals_pure - vals_comp)))
        print(f"  compiled {t_comp:8.3f} s   speedup {t_pure / t_comp:.2f}x   max |diff| {diff:.2e}")

    margin_thetas = angle_grid(ineq.n_parties, args.grid)
    shift = 1.0
    print(f"extraction margin sweep: {margin_thetas.shape[0]} angle tuples ({args.grid} per axis)")
    m_pure, t_pure = _time(
        pure.sweep_extraction_margin, psi, gamma_lo, gamma_hi, coeffs, k0, k1, k2, margin_thetas, shift
    )
    print(f"  pure     {t_pure:8.3f} s")
    if compiled is not None:
        m_comp, t_comp = _time(
            compiled.sweep_extraction_margin, psi, gamma_lo, gamma_hi, coeffs, k0, k1, k2, margin_thetas, shift
        )
        diff = float(np.max(np.abs(m_pure - m_comp)))
        print(f"  compiled {t_comp:8.3f} s   speedup {t_pure / t_comp:.2f}x   max |diff| {diff:.2e}")


if __name__ == "__main__":
    main()
