"""Recompute the shipped robustness coefficients for all six presets.

Prints the `_PRESET_COEFFS_DATA` dict literal for graphbell/robustness.py.
Uses the active kernel backend; expect a few minutes on the pure fallback.

Run:  python3 benchmarks/regen_preset_coeffs.py [--grid 13]
"""

from __future__ import annotations

import argparse
import time

from graphbell import PRESET_NAMES, optimize_coefficients, preset_inequality
from graphbell._kernels import ACTIVE_BACKEND


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=13)
    args = parser.parse_args()

    print(f"backend: {ACTIVE_BACKEND}, grid: {args.grid}")
    rows = {}
    total = time.perf_counter()
    for name in PRESET_NAMES:
        t0 = time.perf_counter()
        co = optimize_coefficients(preset_inequality(name), grid_resolution=args.grid)
        rows[name] = co
        print(f"  {name}: s = {co.slope:.4f}, mu = {co.offset:.6f}   [{time.perf_counter() - t0:.1f} s]")
    print(f"total {time.perf_counter() - total:.1f} s\n")

    print("_PRESET_COEFFS_DATA: dict[str, tuple[float, float, float, float, int, float]] = {")
    for name, co in rows.items():
        print(f'    "{name}": ({co.slope!r}, {co.offset!r}, {co.beta_c!r}, '
              f"{co.beta_q!r}, {co.grid_resolution}, {co.residual:.1e}),")
    print("}")


if __name__ == "__main__":
    main()
