"""Hot-loop sweep kernels with backend selection at import.

The compiled Cython extension (_sweep) is preferred when built; the numpy
implementation (pure) is the fallback and the reference.  Force a backend
with GRAPHBELL_KERNEL=pure or GRAPHBELL_KERNEL=compiled.

Contract shared by both backends:

    sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode) -> (G,) float64
        Extreme eigenvalue (mode 'max' or 'min') of the Bell operator
        sum_t coeffs[t] * kron_i (k0[t,i] + cos(th_i) k1[t,i] + sin(th_i) k2[t,i])
        for each angle row of thetas (G, N).

    sweep_extraction_margin(psi, gamma_lo, gamma_hi, coeffs, k0, k1, k2, thetas, shift)
        -> (G,) float64: smallest eigenvalue of K(theta) - shift * B(theta),
        where K applies the per-party extraction channel (trade-off weights,
        branch operator gamma_lo below pi/4, gamma_hi at or above) to
        |psi><psi|.
"""

from __future__ import annotations

import os

import numpy as np

from . import pure

_forced = os.environ.get("GRAPHBELL_KERNEL", "").strip().lower()
if _forced not in ("", "pure", "compiled"):
    raise ImportError(f"GRAPHBELL_KERNEL must be 'pure' or 'compiled', got {_forced!r}")

_compiled = None
if _forced != "pure":
    try:
        from . import _sweep as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None
    if _compiled is not None and not all(
        hasattr(_compiled, fn) for fn in ("sweep_bell_extreme", "sweep_extraction_margin")
    ):
        _compiled = None
if _forced == "compiled" and _compiled is None:
    raise ImportError("GRAPHBELL_KERNEL=compiled but the compiled kernel is not importable")

ACTIVE_BACKEND = "compiled" if _compiled is not None else "pure"
_impl = _compiled if _compiled is not None else pure

tradeoff = pure.tradeoff


def _prep_common(coeffs, k0, k1, k2, thetas):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    k0 = np.ascontiguousarray(k0, dtype=np.complex128)
    k1 = np.ascontiguousarray(k1, dtype=np.complex128)
    k2 = np.ascontiguousarray(k2, dtype=np.complex128)
    thetas = np.ascontiguousarray(np.atleast_2d(thetas), dtype=np.float64)
    t_count, n_parties = k0.shape[0], k0.shape[1]
    if coeffs.shape != (t_count,):
        raise ValueError(f"coeffs shape {coeffs.shape} does not match {t_count} terms")
    for arr, name in ((k0, "k0"), (k1, "k1"), (k2, "k2")):
        if arr.shape != (t_count, n_parties, 2, 2):
            raise ValueError(f"{name} shape {arr.shape} != ({t_count}, {n_parties}, 2, 2)")
    if thetas.ndim != 2 or thetas.shape[1] != n_parties:
        raise ValueError(f"thetas shape {thetas.shape} does not match {n_parties} parties")
    return coeffs, k0, k1, k2, thetas, n_parties


def sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode: str = "max") -> np.ndarray:
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    coeffs, k0, k1, k2, thetas, _ = _prep_common(coeffs, k0, k1, k2, thetas)
    return _impl.sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode)


def sweep_extraction_margin(psi, gamma_lo, gamma_hi, coeffs, k0, k1, k2, thetas, shift: float) -> np.ndarray:
    coeffs, k0, k1, k2, thetas, n_parties = _prep_common(coeffs, k0, k1, k2, thetas)
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    gamma_lo = np.ascontiguousarray(gamma_lo, dtype=np.complex128)
    gamma_hi = np.ascontiguousarray(gamma_hi, dtype=np.complex128)
    if psi.shape != (1 << n_parties,):
        raise ValueError(f"psi shape {psi.shape} != ({1 << n_parties},)")
    for arr, name in ((gamma_lo, "gamma_lo"), (gamma_hi, "gamma_hi")):
        if arr.shape != (n_parties, 2, 2):
            raise ValueError(f"{name} shape {arr.shape} != ({n_parties}, 2, 2)")
    return _impl.sweep_extraction_margin(psi, gamma_lo, gamma_hi, coeffs, k0, k1, k2, thetas, float(shift))
