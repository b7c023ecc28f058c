"""Central numeric tolerance configuration.

Every validation threshold used across the package lives here so there is a
single tuning point.  Functions take these as defaults; tests pin against the
same record.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermiticity: float = 1e-12          # max |M - M^dag| entry for Hermitian inputs
    imag_residue: float = 1e-10         # allowed imaginary part of a real expectation
    eigen_reconstruction: float = 1e-9  # |V diag(w) V^dag - M| after an eigensolve
    state_norm: float = 1e-12           # deviation of |psi| from 1
    density_trace: float = 1e-10        # deviation of Tr(rho) from 1
    density_psd: float = 1e-10          # allowed negative eigenvalue magnitude of rho
    probability_sum: float = 1e-10      # deviation of an outcome distribution from 1
    dichotomic: float = 1e-8            # |eigenvalue| - 1 for +-1-valued observables
    stabilizer_expect: float = 1e-10    # graph-state stabilizer expectations vs 1
    frame_covariance: float = 1e-10     # graph frame vs experimental frame agreement
    feasibility: float = 1e-4           # slack in s*beta_q + mu >= 1 during the s-search
    residual: float = 1e-3              # max recorded |s*beta_q + mu - 1| gap
    margin_check: float = 1e-6          # slack when re-checking min eig(K - sB) >= mu


TOL = Tolerances()
