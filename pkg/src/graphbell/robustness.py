"""Extraction-channel robustness bounds and fidelity certificates.

For a Bell inequality with quantum bound beta_q, a slope/offset pair (s, mu)
certifies extractable fidelity F >= s * <B> + mu device-independently once

    K(theta) - s * B(theta) >= mu * Id   for all angle tuples theta,

where K applies a local extraction channel to the target-state projector.
The channel on each party keeps the state with weight (1 + g)/2 and conjugates
by a branch operator with weight (1 - g)/2, with trade-off
g(x) = (1 + sqrt2)(sin x + cos x - 1); the branch operator is the party's
first measurement direction below x = pi/4 and the second at or above it.

The best slope is the smallest s with s * beta_q + mu(s) >= 1, found by a
descending scan plus bisection; mu is then tightened to 1 - s * beta_q so the
certificate touches F = 1 at the quantum bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import ACTIVE_BACKEND, sweep_extraction_margin, tradeoff
from .bell import BellInequality, MeasurementAngles, angle_grid, operator_arrays, pattern_search, preset_graph_state, preset_inequality
from .config import TOL
from .linalg import ANTIHADAMARD_OBS, HADAMARD_OBS, PAULI_X, PAULI_Z, kron, projector, require_state_vector

BRANCH_POINT = float(np.pi / 4)

VERDICT_GENUINE = "GENUINE_ENTANGLEMENT"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_MARGIN_GRID = 13  # odd: keeps 0, pi/4, pi/2 on the per-axis grid


def extraction_tradeoff(x):
    """Trade-off g(x) on [0, pi/2]; g(0) = g(pi/2) = 0 and g(pi/4) = 1."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > np.pi / 2 + 1e-12):
        raise ValueError(f"trade-off argument outside [0, pi/2]: {x!r}")
    out = tradeoff(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def channel_weights(x) -> tuple:
    """Keep/flip weights ((1+g)/2, (1-g)/2) of the extraction channel."""
    g = extraction_tradeoff(x)
    return (1.0 + g) / 2.0, (1.0 - g) / 2.0


def extraction_gammas(ac, n_parties: int) -> tuple[np.ndarray, np.ndarray]:
    """Branch operators per party: (below pi/4, at-or-above pi/4)."""
    lo = np.empty((n_parties, 2, 2), dtype=complex)
    hi = np.empty_like(lo)
    for site in range(1, n_parties + 1):
        if site in ac:
            lo[site - 1], hi[site - 1] = PAULI_X, PAULI_Z
        else:
            lo[site - 1], hi[site - 1] = HADAMARD_OBS, ANTIHADAMARD_OBS
    return lo, hi


def extraction_operator(target: np.ndarray, ac, angles: MeasurementAngles) -> np.ndarray:
    """K(theta): the per-party extraction channel applied to |target><target|."""
    psi = require_state_vector(target)
    n = int(np.log2(psi.shape[0]))
    if 1 << n != psi.shape[0]:
        raise ValueError(f"target dimension {psi.shape[0]} is not a power of 2")
    if len(angles.thetas) != n:
        raise ValueError(f"expected {n} angles, got {len(angles.thetas)}")
    gamma_lo, gamma_hi = extraction_gammas(ac, n)
    rho = projector(psi)
    for site in range(1, n + 1):
        x = angles.thetas[site - 1]
        keep, flip = channel_weights(x)
        gamma = gamma_lo[site - 1] if x < BRANCH_POINT else gamma_hi[site - 1]
        full = kron(np.eye(1 << (site - 1)), gamma, np.eye(1 << (n - site)))
        rho = keep * rho + flip * (full @ rho @ full.conj().T)
    return rho


@dataclass(frozen=True)
class RobustnessCoefficients:
    """Certificate line F >= slope * <B> + offset with its provenance data."""

    inequality: str
    slope: float
    offset: float
    beta_c: float
    beta_q: float
    grid_resolution: int
    residual: float  # |slope * beta_q + raw grid offset - 1| before tightening

    def fidelity_bound(self, bell_value: float) -> float:
        return self.slope * bell_value + self.offset

    def to_json(self) -> dict:
        return {
            "inequality": self.inequality,
            "s": self.slope,
            "mu": self.offset,
            "beta_c": self.beta_c,
            "beta_q": self.beta_q,
            "grid": self.grid_resolution,
            "residual": self.residual,
        }

    @classmethod
    def from_json(cls, obj: dict | str) -> "RobustnessCoefficients":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            inequality=str(obj["inequality"]),
            slope=float(obj["s"]),
            offset=float(obj["mu"]),
            beta_c=float(obj["beta_c"]),
            beta_q=float(obj["beta_q"]),
            grid_resolution=int(obj.get("grid", 0)),
            residual=float(obj.get("residual", 0.0)),
        )


class MarginEvaluator:
    """Reusable min_theta lambda_min(K - s B) evaluator over a fixed grid.

    The grid and the operator data do not depend on s, so one instance serves
    the whole slope scan; on the pure backend the dense K and B batches are
    cached so each slope costs one batched eigvalsh.  Refinement
    pattern-searches from the best grid points; it can only lower the margin,
    so a grid-level verdict below `abort_below` is already final and skips
    refinement.
    """

    _CACHE_ROW_LIMIT = 400_000  # ~2 x 16 MB per 1000 rows at N = 4

    def __init__(
        self,
        ineq: BellInequality,
        target: np.ndarray,
        grid_resolution: int = DEFAULT_MARGIN_GRID,
        refine_rounds: int = 3,
        refine_starts: int = 3,
    ):
        self.ineq = ineq
        self.psi = require_state_vector(target)
        if self.psi.shape[0] != 1 << ineq.n_parties:
            raise ValueError("target dimension does not match the inequality's party count")
        self.coeffs, self.k0, self.k1, self.k2 = operator_arrays(ineq)
        self.gamma_lo, self.gamma_hi = extraction_gammas(ineq.ac, ineq.n_parties)
        self.thetas = angle_grid(ineq.n_parties, grid_resolution)
        self.grid_resolution = grid_resolution
        self.refine_rounds = refine_rounds
        self.refine_starts = refine_starts
        self._step0 = (np.pi / 2) / (grid_resolution - 1) / 2
        self._bell_batch: np.ndarray | None = None
        self._extraction_batch: np.ndarray | None = None

    def _margin_at(self, thetas: np.ndarray, shift: float) -> np.ndarray:
        return sweep_extraction_margin(
            self.psi, self.gamma_lo, self.gamma_hi, self.coeffs, self.k0, self.k1, self.k2, thetas, shift
        )

    def _grid_values(self, shift: float) -> np.ndarray:
        if ACTIVE_BACKEND == "compiled" or self.thetas.shape[0] > self._CACHE_ROW_LIMIT:
            return self._margin_at(self.thetas, shift)
        if self._bell_batch is None:
            from ._kernels import pure

            self._bell_batch = pure.bell_operators(self.coeffs, self.k0, self.k1, self.k2, self.thetas)
            self._extraction_batch = pure.extraction_operators(self.psi, self.gamma_lo, self.gamma_hi, self.thetas)
        return np.linalg.eigvalsh(self._extraction_batch - shift * self._bell_batch)[:, 0]

    def margin(self, shift: float, refine: bool = True, abort_below: float | None = None) -> tuple[float, np.ndarray]:
        """(min margin, achieving angles); refine polishes off-grid minima."""
        values = self._grid_values(shift)
        order = np.argsort(values, kind="stable")[: self.refine_starts]
        best_val = float(values[order[0]])
        best_theta = self.thetas[order[0]].copy()
        if abort_below is not None and best_val < abort_below:
            return best_val, best_theta
        if refine:
            def eval_rows(rows: np.ndarray) -> np.ndarray:
                return self._margin_at(rows, shift)

            for idx in order:
                val, theta = pattern_search(
                    eval_rows, self.thetas[idx], self._step0, rounds=self.refine_rounds, minimize=True
                )
                if val < best_val:
                    best_val, best_theta = val, theta
        return best_val, best_theta


def offset_for_slope(
    ineq: BellInequality,
    slope: float,
    target: np.ndarray | None = None,
    grid_resolution: int = DEFAULT_MARGIN_GRID,
    refine_rounds: int = 3,
) -> float:
    """Largest offset mu with K - slope * B >= mu over the angle grid."""
    if target is None:
        target = preset_graph_state(ineq.name)
    evaluator = MarginEvaluator(ineq, target, grid_resolution, refine_rounds)
    return evaluator.margin(float(slope))[0]


def optimize_coefficients(
    ineq: BellInequality,
    target: np.ndarray | None = None,
    grid_resolution: int = DEFAULT_MARGIN_GRID,
    s_max: float = 1.2,
    s_step: float = 0.01,
    bisect_tol: float = 0.001,
    feasibility_tol: float = TOL.feasibility,
) -> RobustnessCoefficients:
    """Smallest slope with slope * beta_q + mu(slope) >= 1, offset tightened.

    Feasibility is monotone in the slope (the margin deficit at any angle
    tuple shrinks as s grows, since beta_q dominates every Bell expectation),
    so a descending scan with early stop plus bisection finds the boundary.
    """
    if target is None:
        target = preset_graph_state(ineq.name)
    evaluator = MarginEvaluator(ineq, target, grid_resolution)
    beta_q = ineq.quantum_bound_value

    def feasible(s: float) -> bool:
        # refinement only lowers mu, so a grid margin already below the
        # threshold is final and margin() skips the pattern search
        threshold = 1.0 - feasibility_tol - s * beta_q
        mu, _ = evaluator.margin(s, refine=True, abort_below=threshold)
        return s * beta_q + mu - 1.0 >= -feasibility_tol

    hi = float(s_max)
    if not feasible(hi):
        found = None
        probe = hi + 0.05
        while probe <= 2.0 + 1e-9:
            if feasible(probe):
                found = probe
                break
            probe += 0.05
        if found is None:
            raise ValueError(f"no feasible slope in [0, 2] for {ineq.name}")
        lo, hi = found - 0.05, found
    else:
        lo = None
        s = hi - s_step
        while s > -s_step / 2:
            s_val = max(s, 0.0)
            if feasible(s_val):
                hi = s_val
            else:
                lo = s_val
                break
            s -= s_step
        if lo is None:
            lo = 0.0  # feasible down to slope 0; bisect against the floor

    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid

    slope = hi
    mu_raw, _ = evaluator.margin(slope, refine=True)
    residual = abs(slope * beta_q + mu_raw - 1.0)
    if residual > TOL.residual:
        raise ValueError(f"slope search left residual {residual:.2e} above {TOL.residual:.0e}")
    offset = 1.0 - slope * beta_q
    return RobustnessCoefficients(
        inequality=ineq.name,
        slope=float(slope),
        offset=float(offset),
        beta_c=ineq.classical_bound_value,
        beta_q=beta_q,
        grid_resolution=grid_resolution,
        residual=float(residual),
    )


@dataclass(frozen=True)
class FidelityCertificate:
    inequality: str
    bell_value: float
    bell_sigma: float
    fidelity_bound: float
    fidelity_sigma: float
    verdict: str

    def to_json(self) -> dict:
        return {
            "inequality": self.inequality,
            "bell_value": self.bell_value,
            "bell_sigma": self.bell_sigma,
            "fidelity_bound": self.fidelity_bound,
            "fidelity_sigma": self.fidelity_sigma,
            "verdict": self.verdict,
        }

    def display(self) -> str:
        return (
            f"{self.inequality}: <B> = {format_uncertainty(self.bell_value, self.bell_sigma)}"
            f" -> F >= {format_uncertainty(self.fidelity_bound, self.fidelity_sigma)} [{self.verdict}]"
        )


def certify(bell_value: float, bell_sigma: float, coeffs: RobustnessCoefficients) -> FidelityCertificate:
    """Device-independent fidelity bound from a measured Bell value.

    A Bell value above the quantum bound by more than three sigma cannot come
    from any quantum state under the assumed model and is rejected.
    """
    if bell_sigma < 0:
        raise ValueError(f"negative uncertainty {bell_sigma!r}")
    if bell_value > coeffs.beta_q + 3.0 * bell_sigma:
        raise ValueError(
            f"Bell value {bell_value} exceeds the quantum bound {coeffs.beta_q:.6f} "
            f"by more than 3 sigma ({bell_sigma}): statistically inconsistent input"
        )
    bound = coeffs.fidelity_bound(bell_value)
    sigma = coeffs.slope * bell_sigma
    verdict = VERDICT_GENUINE if bound > 0.5 else VERDICT_INCONCLUSIVE
    return FidelityCertificate(coeffs.inequality, float(bell_value), float(bell_sigma), float(bound), float(sigma), verdict)


def bound_curve(coeffs: RobustnessCoefficients, n_points: int = 51) -> tuple[np.ndarray, float | None]:
    """(bell value, fidelity bound) samples on [beta_c, beta_q], clipped to [0, 1].

    Returns the sample array (n, 2) and the bell value where the bound crosses
    F = 1/2 (None when the crossing lies outside the sampled range).  The
    crossing point is inserted as an explicit sample.
    """
    if n_points < 2:
        raise ValueError("need at least 2 curve points")
    betas = list(np.linspace(coeffs.beta_c, coeffs.beta_q, n_points))
    crossing = None
    if coeffs.slope > 0:
        candidate = (0.5 - coeffs.offset) / coeffs.slope
        if coeffs.beta_c <= candidate <= coeffs.beta_q:
            crossing = float(candidate)
            betas = sorted(set(betas) | {crossing})
    points = np.array([[b, min(max(coeffs.fidelity_bound(b), 0.0), 1.0)] for b in betas])
    return points, crossing


def format_uncertainty(value: float, sigma: float) -> str:
    """Parenthesis notation, e.g. 0.9096 +- 0.021 -> '0.91(2)'.

    The uncertainty keeps two significant digits when its leading digit is 1
    (0.9565 +- 0.013 -> '0.957(13)'), one otherwise; the value is rounded to
    the same decimal place.
    """
    if sigma < 0:
        raise ValueError(f"negative uncertainty {sigma!r}")
    if sigma == 0:
        return f"{value:.6g}"
    exponent = math.floor(math.log10(sigma))
    leading = int(sigma / 10**exponent)
    digits = 2 if leading == 1 else 1
    decimals = max(0, -(exponent - digits + 1))
    scaled = round(sigma * 10**decimals)
    return f"{value:.{decimals}f}({scaled})"


# ---------------------------------------------------------------------------
# Precomputed coefficients for the six presets (grid 13 per axis, slope scan
# step 0.01 bisected to 0.001).  `graphbell robustness --recompute` rebuilds
# them from scratch; values regenerated by benchmarks/regen_preset_coeffs.py.

_PRESET_COEFFS_DATA: dict[str, tuple[float, float, float, float, int, float]] = {
    "b1": (0.9918749999999997, -3.789196154357623, 4.0, 4.828427124746187, 13, 1.8e-15),
    "b2": (0.6899999999999995, -3.5932294321497373, 5.0, 6.656854249492378, 13, 1.4e-15),
    "b3": (0.4899999999999993, -3.1577878733768916, 6.0, 8.485281374238566, 13, 1.8e-15),
    "b4": (0.9918749999999997, -3.789196154357626, 4.0, 4.828427124746190, 13, 4.5e-16),
    "b5": (0.7399999999999995, -3.9260721446243556, 5.0, 6.656854249492377, 13, 3.2e-15),
    "b6": (0.6162499999999995, -2.4860364312496745, 4.0, 5.656854249492377, 13, 3.2e-15),
}


def preset_coefficients(name: str, recompute: bool = False, grid_resolution: int = DEFAULT_MARGIN_GRID) -> RobustnessCoefficients:
    """Shipped (slope, offset) for a preset; optionally recomputed fresh."""
    key = name.strip().lower()
    if not recompute and grid_resolution == DEFAULT_MARGIN_GRID and key in _PRESET_COEFFS_DATA:
        slope, offset, beta_c, beta_q, grid, residual = _PRESET_COEFFS_DATA[key]
        return RobustnessCoefficients(key, slope, offset, beta_c, beta_q, grid, residual)
    return optimize_coefficients(preset_inequality(key), grid_resolution=grid_resolution)
