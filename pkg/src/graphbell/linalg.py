"""Small dense linear-algebra layer used by everything else.

Thin, validated wrappers around numpy: Kronecker products, Hermitian
eigendecomposition, and expectation values for state vectors or density
matrices.  Matrices are plain complex ndarrays; a state is a 1-D vector or a
2-D density matrix, distinguished by ndim.
"""

from __future__ import annotations

import numpy as np

from .config import TOL

# Single-qubit constants.  HADAMARD_OBS/ANTIHADAMARD_OBS are the +-1-valued
# observables (X+Z)/sqrt2 and (X-Z)/sqrt2, not the Hadamard gate convention.
IDENTITY_2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD_OBS = (PAULI_X + PAULI_Z) / np.sqrt(2)
ANTIHADAMARD_OBS = (PAULI_X - PAULI_Z) / np.sqrt(2)


def kron(*operators: np.ndarray) -> np.ndarray:
    """Kronecker product of the given operators, first factor most significant."""
    if not operators:
        raise ValueError("kron needs at least one operator")
    out = np.asarray(operators[0], dtype=complex)
    for op in operators[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Largest entrywise deviation of M from its conjugate transpose."""
    m = np.asarray(matrix)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def require_hermitian(matrix: np.ndarray, tol: float = TOL.hermiticity, what: str = "matrix") -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be square, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValueError(f"{what} is not Hermitian: max |M - M^dag| = {defect:.3e} exceeds {tol:.1e}")
    return m


def hermitian_eigen(matrix: np.ndarray, tol: float = TOL.hermiticity) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Rejects non-Hermitian input and checks the reconstruction
    V diag(w) V^dag against the input.
    """
    m = require_hermitian(matrix, tol)
    eigenvalues, eigenvectors = np.linalg.eigh(m)
    recon = (eigenvectors * eigenvalues) @ eigenvectors.conj().T
    err = np.max(np.abs(recon - m))
    if err > TOL.eigen_reconstruction:
        raise ValueError(f"eigendecomposition reconstruction error {err:.3e} exceeds {TOL.eigen_reconstruction:.1e}")
    return eigenvalues, eigenvectors


def require_state_vector(state: np.ndarray, tol: float = TOL.state_norm) -> np.ndarray:
    v = np.asarray(state, dtype=complex)
    if v.ndim != 1:
        raise ValueError(f"state vector must be 1-D, got ndim {v.ndim}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state vector norm {norm!r} deviates from 1 beyond {tol:.1e}")
    return v


def require_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    m = require_hermitian(rho, TOL.hermiticity, what="density matrix")
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > TOL.density_trace:
        raise ValueError(f"density matrix trace {tr!r} deviates from 1 beyond {TOL.density_trace:.1e}")
    smallest = float(np.linalg.eigvalsh(m)[0])
    if smallest < -TOL.density_psd:
        raise ValueError(f"density matrix has negative eigenvalue {smallest:.3e}")
    return m


def projector(state: np.ndarray) -> np.ndarray:
    v = require_state_vector(state)
    return np.outer(v, v.conj())


def partial_trace(state: np.ndarray, keep: "tuple[int, ...] | list[int]", n_parties: int) -> np.ndarray:
    """Reduced density matrix on the 1-based qubit sites in `keep`.

    Accepts a state vector or a density matrix on n_parties qubits; the kept
    sites retain their relative order.
    """
    kept = list(keep)
    if len(set(kept)) != len(kept):
        raise ValueError(f"duplicate sites in {kept}")
    if any(not 1 <= i <= n_parties for i in kept):
        raise ValueError(f"sites {kept} out of range 1..{n_parties}")
    st = np.asarray(state, dtype=complex)
    rho = np.outer(st, st.conj()) if st.ndim == 1 else st
    if rho.shape != (1 << n_parties, 1 << n_parties):
        raise ValueError(f"state shape {rho.shape} does not match {n_parties} qubits")
    tensor = rho.reshape((2,) * (2 * n_parties))
    # trace out the complement, highest axis first so earlier axes keep their index
    for site in sorted(set(range(1, n_parties + 1)) - set(kept), reverse=True):
        axis = site - 1
        tensor = np.trace(tensor, axis1=axis, axis2=axis + tensor.ndim // 2)
    d = 1 << len(kept)
    reduced = tensor.reshape(d, d)
    if kept != sorted(kept):
        perm = np.argsort(np.argsort(kept))  # new position of each kept site
        dims = len(kept)
        t = reduced.reshape((2,) * (2 * dims))
        t = np.transpose(t, tuple(perm) + tuple(p + dims for p in perm))
        reduced = t.reshape(d, d)
    return reduced


def expectation(state: np.ndarray, observable: np.ndarray) -> float:
    """<psi|O|psi> for a vector, Tr(rho O) for a density matrix.

    The raw value must be real up to the imaginary-residue tolerance; the
    residue is checked and then discarded.
    """
    obs = np.asarray(observable, dtype=complex)
    st = np.asarray(state, dtype=complex)
    if obs.ndim != 2 or obs.shape[0] != obs.shape[1]:
        raise ValueError(f"observable must be square, got shape {obs.shape}")
    if st.ndim == 1:
        if st.shape[0] != obs.shape[0]:
            raise ValueError(f"dimension mismatch: state {st.shape[0]}, observable {obs.shape[0]}")
        raw = complex(st.conj() @ obs @ st)
    elif st.ndim == 2:
        if st.shape != obs.shape:
            raise ValueError(f"dimension mismatch: state {st.shape}, observable {obs.shape}")
        raw = complex(np.trace(st @ obs))
    else:
        raise ValueError(f"state must be a vector or a density matrix, got ndim {st.ndim}")
    if abs(raw.imag) > TOL.imag_residue:
        raise ValueError(f"expectation has imaginary residue {raw.imag:.3e} beyond {TOL.imag_residue:.1e}")
    return raw.real
