# cython: language_level=3
"""Compiled sweep kernels: fused operator construction + LAPACK eigensolve.

Same contract as graphbell._kernels.pure.  Each angle row builds the Bell
operator (and the extraction image of the target projector when needed) in
stack-local buffers and calls zheev for eigenvalues only, with no Python
object traffic inside the loop.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from libc.stdlib cimport free, malloc
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

ctypedef double complex zcomplex

cdef double _TRADEOFF_SCALE = 2.414213562373095  # 1 + sqrt(2)
cdef double _BRANCH_POINT = 0.7853981633974483   # pi / 4


cdef inline double _tradeoff(double x) noexcept nogil:
    return _TRADEOFF_SCALE * (sin(x) + cos(x) - 1.0)


cdef void _build_bell(
    const double* coeffs, const zcomplex* k0, const zcomplex* k1, const zcomplex* k2,
    const double* theta, int n_terms, int n_parties, int dim,
    zcomplex* bell, zcomplex* cur, zcomplex* nxt,
) noexcept nogil:
    """bell <- sum_t coeffs[t] * kron_i (k0 + cos k1 + sin k2)."""
    cdef int t, i, d, r1, c1, r2, c2, idx
    cdef double ct, st
    cdef zcomplex site[4]
    cdef const zcomplex* base
    cdef zcomplex* swap
    for idx in range(dim * dim):
        bell[idx] = 0
    for t in range(n_terms):
        # first site straight into cur
        ct = cos(theta[0]); st = sin(theta[0])
        base = k0 + (t * n_parties) * 4
        for idx in range(4):
            cur[idx] = base[idx] + ct * k1[(t * n_parties) * 4 + idx] + st * k2[(t * n_parties) * 4 + idx]
        d = 2
        for i in range(1, n_parties):
            ct = cos(theta[i]); st = sin(theta[i])
            base = k0 + (t * n_parties + i) * 4
            for idx in range(4):
                site[idx] = base[idx] + ct * k1[(t * n_parties + i) * 4 + idx] + st * k2[(t * n_parties + i) * 4 + idx]
            for r1 in range(d):
                for c1 in range(d):
                    for r2 in range(2):
                        for c2 in range(2):
                            nxt[(r1 * 2 + r2) * (2 * d) + (c1 * 2 + c2)] = cur[r1 * d + c1] * site[r2 * 2 + c2]
            swap = cur; cur = nxt; nxt = swap
            d *= 2
        for idx in range(dim * dim):
            bell[idx] = bell[idx] + coeffs[t] * cur[idx]


cdef void _apply_channels(
    const zcomplex* gamma_lo, const zcomplex* gamma_hi, const double* theta,
    int n_parties, int dim, zcomplex* rho,
) noexcept nogil:
    """In-place per-party extraction channel on rho (dim x dim)."""
    cdef int i, m, mask, r0, r1, c0, c1
    cdef double g, keep, flip
    cdef const zcomplex* gm
    cdef zcomplex g00, g01, g10, g11
    cdef zcomplex a00, a01, a10, a11, t00, t01, t10, t11, b00, b01, b10, b11
    for i in range(n_parties):
        g = _tradeoff(theta[i])
        keep = (1.0 + g) / 2.0
        flip = (1.0 - g) / 2.0
        gm = (gamma_lo if theta[i] < _BRANCH_POINT else gamma_hi) + i * 4
        g00 = gm[0]; g01 = gm[1]; g10 = gm[2]; g11 = gm[3]
        m = n_parties - 1 - i
        mask = 1 << m
        for r0 in range(dim):
            if r0 & mask:
                continue
            r1 = r0 | mask
            for c0 in range(dim):
                if c0 & mask:
                    continue
                c1 = c0 | mask
                a00 = rho[r0 * dim + c0]; a01 = rho[r0 * dim + c1]
                a10 = rho[r1 * dim + c0]; a11 = rho[r1 * dim + c1]
                t00 = g00 * a00 + g01 * a10
                t01 = g00 * a01 + g01 * a11
                t10 = g10 * a00 + g11 * a10
                t11 = g10 * a01 + g11 * a11
                b00 = t00 * g00.conjugate() + t01 * g01.conjugate()
                b01 = t00 * g10.conjugate() + t01 * g11.conjugate()
                b10 = t10 * g00.conjugate() + t11 * g01.conjugate()
                b11 = t10 * g10.conjugate() + t11 * g11.conjugate()
                rho[r0 * dim + c0] = keep * a00 + flip * b00
                rho[r0 * dim + c1] = keep * a01 + flip * b01
                rho[r1 * dim + c0] = keep * a10 + flip * b10
                rho[r1 * dim + c1] = keep * a11 + flip * b11


cdef int _eig_workspace(int dim, int* lwork) except -1:
    """Optimal zheev workspace size for a dim x dim problem."""
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    cdef int n = dim, lda = dim, info = 0, query = -1
    cdef zcomplex wkopt
    cdef zcomplex a_dummy
    cdef double w_dummy
    cdef double rw_dummy
    zheev(&jobz, &uplo, &n, &a_dummy, &lda, &w_dummy, &wkopt, &query, &rw_dummy, &info)
    if info != 0:
        raise RuntimeError(f"zheev workspace query failed with info={info}")
    lwork[0] = <int>wkopt.real
    return 0


cdef inline int _eig_extreme(
    zcomplex* a, int dim, bint want_max, zcomplex* work, int lwork, double* rwork, double* w, double* out,
) noexcept nogil:
    # Row-major Hermitian input equals the conjugate of its column-major view;
    # the spectrum is identical, so no transpose is needed for values only.
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    cdef int n = dim, lda = dim, info = 0
    zheev(&jobz, &uplo, &n, a, &lda, w, work, &lwork, rwork, &info)
    if info != 0:
        return info
    out[0] = w[dim - 1] if want_max else w[0]
    return 0


def sweep_bell_extreme(
    const double[::1] coeffs not None,
    const zcomplex[:, :, :, ::1] k0 not None,
    const zcomplex[:, :, :, ::1] k1 not None,
    const zcomplex[:, :, :, ::1] k2 not None,
    const double[:, ::1] thetas not None,
    mode,
):
    cdef int n_terms = k0.shape[0]
    cdef int n_parties = k0.shape[1]
    cdef int dim = 1 << n_parties
    cdef Py_ssize_t n_rows = thetas.shape[0]
    cdef bint want_max = mode == "max"
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_rows)
    cdef double[::1] out_v = out
    cdef int lwork = 0
    _eig_workspace(dim, &lwork)

    cdef zcomplex* bell = <zcomplex*>malloc(dim * dim * sizeof(zcomplex))
    cdef zcomplex* cur = <zcomplex*>malloc(dim * dim * sizeof(zcomplex))
    cdef zcomplex* nxt = <zcomplex*>malloc(dim * dim * sizeof(zcomplex))
    cdef zcomplex* work = <zcomplex*>malloc(lwork * sizeof(zcomplex))
    cdef double* rwork = <double*>malloc((3 * dim - 2) * sizeof(double))
    cdef double* w = <double*>malloc(dim * sizeof(double))
    if not (bell and cur and nxt and work and rwork and w):
        free(bell); free(cur); free(nxt); free(work); free(rwork); free(w)
        raise MemoryError()

    cdef Py_ssize_t row
    cdef int info = 0
    try:
        with nogil:
            for row in range(n_rows):
                _build_bell(&coeffs[0], &k0[0, 0, 0, 0], &k1[0, 0, 0, 0], &k2[0, 0, 0, 0],
                            &thetas[row, 0], n_terms, n_parties, dim, bell, cur, nxt)
                info = _eig_extreme(bell, dim, want_max, work, lwork, rwork, w, &out_v[row])
                if info != 0:
                    break
        if info != 0:
            raise RuntimeError(f"zheev failed with info={info}")
    finally:
        free(bell); free(cur); free(nxt); free(work); free(rwork); free(w)
    return out


def sweep_extraction_margin(
    const zcomplex[::1] psi not None,
    const zcomplex[:, :, ::1] gamma_lo not None,
    const zcomplex[:, :, ::1] gamma_hi not None,
    const double[::1] coeffs not None,
    const zcomplex[:, :, :, ::1] k0 not None,
    const zcomplex[:, :, :, ::1] k1 not None,
    const zcomplex[:, :, :, ::1] k2 not None,
    const double[:, ::1] thetas not None,
    double shift,
):
    cdef int n_terms = k0.shape[0]
    cdef int n_parties = k0.shape[1]
    cdef int dim = 1 << n_parties
    cdef Py_ssize_t n_rows = thetas.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_rows)
    cdef double[::1] out_v = out
    cdef int lwork = 0
    _eig_workspace(dim, &lwork)

    cdef zcomplex* bell = <zcomplex*>malloc(dim * dim * sizeof(zcomplex))
    cdef zcomplex* cur = <zcomplex*>malloc(dim * dim * sizeof(zcomplex))
    cdef zcomplex* nxt = <zcomplex*>malloc(dim * dim * sizeof(zcomplex))
    cdef zcomplex* rho = <zcomplex*>malloc(dim * dim * sizeof(zcomplex))
    cdef zcomplex* work = <zcomplex*>malloc(lwork * sizeof(zcomplex))
    cdef double* rwork = <double*>malloc((3 * dim - 2) * sizeof(double))
    cdef double* w = <double*>malloc(dim * sizeof(double))
    if not (bell and cur and nxt and rho and work and rwork and w):
        free(bell); free(cur); free(nxt); free(rho); free(work); free(rwork); free(w)
        raise MemoryError()

    cdef Py_ssize_t row
    cdef int r, c, info = 0
    try:
        with nogil:
            for row in range(n_rows):
                _build_bell(&coeffs[0], &k0[0, 0, 0, 0], &k1[0, 0, 0, 0], &k2[0, 0, 0, 0],
                            &thetas[row, 0], n_terms, n_parties, dim, bell, cur, nxt)
                for r in range(dim):
                    for c in range(dim):
                        rho[r * dim + c] = psi[r] * psi[c].conjugate()
                _apply_channels(&gamma_lo[0, 0, 0], &gamma_hi[0, 0, 0], &thetas[row, 0], n_parties, dim, rho)
                for r in range(dim * dim):
                    rho[r] = rho[r] - shift * bell[r]
                info = _eig_extreme(rho, dim, False, work, lwork, rwork, w, &out_v[row])
                if info != 0:
                    break
        if info != 0:
            raise RuntimeError(f"zheev failed with info={info}")
    finally:
        free(bell); free(cur); free(nxt); free(rho); free(work); free(rwork); free(w)
    return out
