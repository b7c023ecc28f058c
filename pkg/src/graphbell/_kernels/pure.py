"""Pure-numpy sweep kernels: chunked batched construction + eigvalsh.

Reference implementation for the compiled extension; selected automatically
when the extension is unavailable.  Both backends share the contract defined
in graphbell._kernels.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 2048
_BRANCH_POINT = np.pi / 4
_TRADEOFF_SCALE = 1.0 + np.sqrt(2.0)


def tradeoff(x):
    """Extraction trade-off g(x) = (1 + sqrt2)(sin x + cos x - 1)."""
    return _TRADEOFF_SCALE * (np.sin(x) + np.cos(x) - 1.0)


def _site_ops_chunk(k0: np.ndarray, k1: np.ndarray, k2: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    # (C, T, N, 2, 2) site operators for one chunk of angle rows
    c = np.cos(thetas)[:, None, :, None, None]
    s = np.sin(thetas)[:, None, :, None, None]
    return k0[None] + c * k1[None] + s * k2[None]


def _bell_chunk(coeffs: np.ndarray, ops: np.ndarray) -> np.ndarray:
    # ops: (C, T, N, 2, 2) -> Bell operators (C, D, D)
    n_chunk, n_terms, n_parties = ops.shape[:3]
    dim = 1 << n_parties
    out = np.zeros((n_chunk, dim, dim), dtype=complex)
    for t in range(n_terms):
        m = ops[:, t, 0]
        d = 2
        for i in range(1, n_parties):
            m = np.einsum("cij,ckl->cikjl", m, ops[:, t, i]).reshape(n_chunk, d * 2, d * 2)
            d *= 2
        out += coeffs[t] * m
    return out


def bell_operators(coeffs, k0, k1, k2, thetas) -> np.ndarray:
    """Dense Bell operators for every angle row, shape (G, D, D)."""
    dim = 1 << k0.shape[1]
    out = np.empty((thetas.shape[0], dim, dim), dtype=complex)
    for start in range(0, thetas.shape[0], _CHUNK):
        rows = thetas[start : start + _CHUNK]
        out[start : start + rows.shape[0]] = _bell_chunk(coeffs, _site_ops_chunk(k0, k1, k2, rows))
    return out


def extraction_operators(psi, gamma_lo, gamma_hi, thetas) -> np.ndarray:
    """Extraction images K(theta) of |psi><psi| for every angle row."""
    dim = psi.shape[0]
    out = np.empty((thetas.shape[0], dim, dim), dtype=complex)
    for start in range(0, thetas.shape[0], _CHUNK):
        rows = thetas[start : start + _CHUNK]
        out[start : start + rows.shape[0]] = _extraction_chunk(psi, gamma_lo, gamma_hi, rows)
    return out


def sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode="max") -> np.ndarray:
    """Extreme Bell-operator eigenvalue per angle row."""
    pick = -1 if mode == "max" else 0
    out = np.empty(thetas.shape[0])
    for start in range(0, thetas.shape[0], _CHUNK):
        rows = thetas[start : start + _CHUNK]
        ops = _site_ops_chunk(k0, k1, k2, rows)
        bells = _bell_chunk(coeffs, ops)
        out[start : start + rows.shape[0]] = np.linalg.eigvalsh(bells)[:, pick]
    return out


def _extraction_chunk(psi: np.ndarray, gamma_lo: np.ndarray, gamma_hi: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    # Local channels applied party by party to |psi><psi|; (C, D, D) result.
    n_parties = thetas.shape[1]
    dim = psi.shape[0]
    rho = np.broadcast_to(np.outer(psi, psi.conj()), (thetas.shape[0], dim, dim)).copy()
    eyes = [np.eye(1 << i, dtype=complex) for i in range(n_parties)]
    for i in range(n_parties):
        x = thetas[:, i]
        g = tradeoff(x)
        keep = (1.0 + g) / 2.0
        flip = (1.0 - g) / 2.0
        hi = x >= _BRANCH_POINT
        for mask, gamma in ((~hi, gamma_lo[i]), (hi, gamma_hi[i])):
            idx = np.nonzero(mask)[0]
            if idx.size == 0:
                continue
            full = np.kron(np.kron(eyes[i], gamma), eyes[n_parties - 1 - i])
            conj = full @ rho[idx] @ full.conj().T
            rho[idx] = keep[idx, None, None] * rho[idx] + flip[idx, None, None] * conj
    return rho


def sweep_extraction_margin(psi, gamma_lo, gamma_hi, coeffs, k0, k1, k2, thetas, shift) -> np.ndarray:
    """Smallest eigenvalue of K(theta) - shift * B(theta) per angle row."""
    out = np.empty(thetas.shape[0])
    for start in range(0, thetas.shape[0], _CHUNK):
        rows = thetas[start : start + _CHUNK]
        ops = _site_ops_chunk(k0, k1, k2, rows)
        bells = _bell_chunk(coeffs, ops)
        extracted = _extraction_chunk(psi, gamma_lo, gamma_hi, rows)
        out[start : start + rows.shape[0]] = np.linalg.eigvalsh(extracted - shift * bells)[:, 0]
    return out
