"""Noisy-state preparation, Poissonian counting statistics, and fidelity estimators.

The simulation pipeline mirrors a photonic coincidence experiment: prepare a
(possibly noisy) four-qubit state, measure one dichotomic observable per
party, record Poisson-fluctuating event counts per outcome tuple, and
estimate correlators with first-order error propagation.  On top of the
generic pipeline sit two direct fidelity estimators: population/coherence for
the GHZ state and the sixteen-stabilizer average for the linear cluster
state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bell import BellInequality, experimental_frame, preset_family, required_correlators
from .config import TOL
from .graphs import Graph, PauliString, canonical_state, conjugate_by_hadamard, generators, pauli_to_matrix, stabilizer_element
from .linalg import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    kron,
    partial_trace,
    projector,
    expectation,
    require_density_matrix,
    require_state_vector,
)

__all__ = [
    "NoiseSpec",
    "CountsRecord",
    "CorrelatorEstimate",
    "noisy_state",
    "preset_noise",
    "outcome_distribution",
    "sample_counts",
    "estimate_correlator",
    "bell_value_from_counts",
    "simulate_bell_records",
    "coherence_observable",
    "ghz_population_setting",
    "ghz_coherence_setting",
    "ghz_fidelity_terms",
    "ghz_fidelity_from_values",
    "ghz_fidelity_from_counts",
    "cluster_stabilizer_table",
    "cluster_expectations",
    "cluster_fidelity",
]


# ---------------------------------------------------------------------------
# Noise model: the prepared state mixes the target with a fixed-weight
# leakage state, rho = (|psi><psi| + p * rho_noise) / (1 + p).


@dataclass(frozen=True)
class NoiseSpec:
    """Noisy proportion p plus the state the leakage events produce."""

    p: float
    noise_state: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.p < 0:
            raise ValueError(f"noisy proportion must be >= 0, got {self.p}")
        object.__setattr__(self, "noise_state", require_density_matrix(self.noise_state))


def noisy_state(pure: np.ndarray, noise: NoiseSpec) -> np.ndarray:
    """Density matrix (|psi><psi| + p * rho_noise) / (1 + p)."""
    rho = projector(pure)
    if rho.shape != noise.noise_state.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape[0]}, noise {noise.noise_state.shape[0]}")
    return (rho + noise.p * noise.noise_state) / (1.0 + noise.p)


def preset_noise(family: str, p: float, dephased: bool = False) -> NoiseSpec:
    """Leakage model of the four-photon source: two independent pairs.

    With no interference between the two pair sources, the leaked state is a
    product of pair states on parties (1,2) and (3,4): maximally entangled
    pairs for the GHZ source, (|00> + sqrt(3)|11>)/2 pairs for the cluster
    source.  `dephased` replaces the product state by its computational-basis
    diagonal, modeling pairs that also lost their internal coherence.
    """
    fam = family.strip().lower()
    if fam == "ghz":
        pair = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2)
    elif fam == "cluster":
        pair = np.array([1.0, 0.0, 0.0, math.sqrt(3)], dtype=complex) / 2.0
    else:
        raise ValueError(f"unknown noise family {family!r} (expected 'ghz' or 'cluster')")
    rho = kron(projector(pair), projector(pair))
    if dephased:
        rho = np.diag(np.diag(rho))
    return NoiseSpec(float(p), rho)


# ---------------------------------------------------------------------------
# Measurement settings and counts.  A setting assigns one named dichotomic
# observable to each measured party; outcomes are '+'/'-' strings with one
# character per measured party, in setting-token order.


def _parse_token(token: str) -> tuple[int, str]:
    """'A1' -> (1, 'A'); names ending in a digit use a colon, 'M0:3' -> (3, 'M0')."""
    if ":" in token:
        name, _, idx = token.rpartition(":")
    else:
        stripped = token.rstrip("0123456789")
        name, idx = stripped, token[len(stripped):]
    if not name or not idx:
        raise ValueError(f"malformed setting token {token!r} (expected e.g. 'A1' or 'M0:1')")
    party = int(idx)
    if party < 1:
        raise ValueError(f"party index must be >= 1 in token {token!r}")
    return party, name


def _format_token(party: int, name: str) -> str:
    return f"{name}:{party}" if name[-1].isdigit() else f"{name}{party}"


@dataclass(frozen=True)
class CountsRecord:
    """Event counts for one measurement setting.

    `setting` lists the measured parties as observable-name tokens, e.g.
    "A1 B2 B3 B4" or "B2 B3"; `counts` maps outcome strings ('+'/'-' per
    measured party, token order) to nonnegative event counts.
    """

    setting: str
    counts: Mapping[str, int]

    def __post_init__(self) -> None:
        parties = [p for p, _ in self.parsed_setting()]
        if len(set(parties)) != len(parties):
            raise ValueError(f"duplicate party in setting {self.setting!r}")
        width = len(parties)
        for outcome, n in self.counts.items():
            if len(outcome) != width or set(outcome) - {"+", "-"}:
                raise ValueError(f"outcome {outcome!r} does not match setting {self.setting!r}")
            if int(n) != n or n < 0:
                raise ValueError(f"count for {outcome!r} must be a nonnegative integer, got {n!r}")

    def parsed_setting(self) -> tuple[tuple[int, str], ...]:
        """((party, observable name), ...) in token order."""
        return tuple(_parse_token(tok) for tok in self.setting.split())

    def total(self) -> int:
        return int(sum(self.counts.values()))

    def to_json(self) -> dict:
        return {"setting": self.setting, "counts": {k: int(v) for k, v in self.counts.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> "CountsRecord":
        return cls(str(obj["setting"]), {str(k): int(v) for k, v in obj["counts"].items()})


def outcome_strings(n_measured: int) -> tuple[str, ...]:
    """All '+'/'-' outcome tuples in a fixed order ('+' sorts first)."""
    return tuple("".join(t) for t in itertools.product("+-", repeat=n_measured))


def outcome_distribution(state: np.ndarray, observables: Sequence[np.ndarray]) -> dict[str, float]:
    """Joint outcome probabilities for one dichotomic observable per party.

    P(a, b, ...) = Tr(rho * proj_a x proj_b x ...) with proj_+- = (I +- O)/2.
    """
    st = np.asarray(state, dtype=complex)
    rho = projector(st) if st.ndim == 1 else require_density_matrix(st)
    n = len(observables)
    if rho.shape[0] != 1 << n:
        raise ValueError(f"state dimension {rho.shape[0]} does not match {n} observables")
    site_projs = []
    for i, obs in enumerate(observables, start=1):
        o = np.asarray(obs, dtype=complex)
        if not np.allclose(o @ o, IDENTITY_2, atol=TOL.dichotomic):
            raise ValueError(f"observable for party {i} is not dichotomic (O^2 != I)")
        site_projs.append(((IDENTITY_2 + o) / 2, (IDENTITY_2 - o) / 2))
    dist = {}
    for outcome in outcome_strings(n):
        proj = kron(*(site_projs[i][0 if c == "+" else 1] for i, c in enumerate(outcome)))
        dist[outcome] = max(float(np.trace(rho @ proj).real), 0.0)
    total = sum(dist.values())
    if abs(total - 1.0) > TOL.probability_sum:
        raise ValueError(f"outcome probabilities sum to {total!r}, not 1")
    return dist


def sample_counts(
    dist: Mapping[str, float],
    mean_total: float,
    seed: "int | np.random.Generator",
    setting: str,
) -> CountsRecord:
    """Poisson counts per outcome cell with mean mean_total * P(outcome)."""
    if mean_total <= 0:
        raise ValueError(f"mean_total must be positive, got {mean_total}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    outcomes = list(dist)
    draws = rng.poisson(mean_total * np.array([dist[k] for k in outcomes]))
    counts = {k: int(n) for k, n in zip(outcomes, draws) if n > 0}
    return CountsRecord(setting, counts)


# ---------------------------------------------------------------------------
# Correlator and Bell-value estimation.  Each count is treated as an
# independent Poisson variable; uncertainties are first-order propagation
# through the normalized sign-weighted sums.


@dataclass(frozen=True)
class CorrelatorEstimate:
    value: float
    sigma: float
    n_events: int

    def __post_init__(self) -> None:
        if abs(self.value) > 1 + 1e-12:
            raise ValueError(f"correlator value {self.value} outside [-1, 1]")


def _sign_vector(record: CountsRecord, parties: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    """(counts array, +-1 sign per outcome restricted to the given parties)."""
    measured = [p for p, _ in record.parsed_setting()]
    positions = []
    for p in parties:
        if p not in measured:
            raise ValueError(f"party {p} is not measured in setting {record.setting!r}")
        positions.append(measured.index(p))
    outcomes = list(record.counts)
    n = np.array([record.counts[k] for k in outcomes], dtype=float)
    signs = np.array([math.prod(1 if k[pos] == "+" else -1 for pos in positions) for k in outcomes], dtype=float)
    return n, signs


def estimate_correlator(record: CountsRecord, parties: Iterable[int] | None = None) -> CorrelatorEstimate:
    """Sign-weighted average over outcomes; sigma from Poisson cell variances.

    `parties` selects which measured parties enter the +-1 product (all of
    them by default), so marginal correlators of a wider setting are allowed.
    """
    chosen = [p for p, _ in record.parsed_setting()] if parties is None else list(parties)
    n, signs = _sign_vector(record, chosen)
    total = float(n.sum())
    if total <= 0:
        raise ValueError(f"no events recorded for setting {record.setting!r}")
    value = float((signs * n).sum() / total)
    # sigma^2 = sum_k (dE/dn_k)^2 Var(n_k) with Var(n_k) = n_k
    grad = (signs - value) / total
    sigma = float(math.sqrt(float((grad * grad * n).sum())))
    return CorrelatorEstimate(value, sigma, int(total))


def bell_value_from_counts(records: Sequence[CountsRecord], ineq: BellInequality) -> tuple[float, float]:
    """Bell value and propagated uncertainty from per-setting counts.

    Terms with (A+-B) sites expand into plain A/B correlators; each one is
    matched to the record measuring exactly those observables (a wider record
    covering them is accepted when no exact one exists).  Records are
    independent, but correlators sharing a record are propagated jointly.
    """
    parsed = [dict(r.parsed_setting()) for r in records]
    groups: dict[int, list] = {}
    for req in required_correlators(ineq):
        req_map = dict(req.letters)
        covering = [
            i for i, assignment in enumerate(parsed)
            if all(assignment.get(p) == obs for p, obs in req_map.items())
        ]
        exact = [i for i in covering if len(parsed[i]) == len(req_map)]
        if not covering:
            raise ValueError(f"missing counts record for setting {req.setting_label!r}")
        idx = exact[0] if exact else covering[0]
        groups.setdefault(idx, []).append(req)
    value = 0.0
    variance = 0.0
    for idx, reqs in groups.items():
        record = records[idx]
        total = record.total()
        if total <= 0:
            raise ValueError(f"no events recorded for setting {record.setting!r}")
        grad = None
        for req in reqs:
            n, signs = _sign_vector(record, [p for p, _ in req.letters])
            est = float((signs * n).sum() / total)
            value += req.weight * est
            contrib = req.weight * (signs - est) / total
            grad = contrib if grad is None else grad + contrib
        n = np.array([record.counts[k] for k in record.counts], dtype=float)
        variance += float((grad * grad * n).sum())
    return value, math.sqrt(variance)


def simulate_bell_records(
    ineq: BellInequality,
    noise_p: float = 0.0,
    events_per_setting: float = 100_000,
    seed: int = 0,
    dephased: bool = False,
    state: np.ndarray | None = None,
) -> list[CountsRecord]:
    """Counts for every correlator a preset inequality needs.

    The canonical state of the preset's family (or the given pure `state`) is
    prepared with the matching pair-leakage noise at proportion `noise_p`,
    and each required setting is sampled from the reduced state of its
    measured parties with an independent child seed.
    """
    family = preset_family(ineq.name)
    frame = experimental_frame(ineq, family)
    pure = canonical_state(frame.state_name) if state is None else require_state_vector(state)
    if pure.shape[0] != 1 << ineq.n_parties:
        raise ValueError(f"state dimension {pure.shape[0]} does not match {ineq.n_parties} parties")
    rho = noisy_state(pure, preset_noise(family, noise_p, dephased))
    reqs = required_correlators(ineq)
    children = np.random.SeedSequence(seed).spawn(len(reqs))
    records = []
    for req, child in zip(reqs, children):
        parties = [p for p, _ in req.letters]
        observables = [frame.pairs[p - 1][0 if obs == "A" else 1] for p, obs in req.letters]
        reduced = partial_trace(rho, parties, ineq.n_parties)
        dist = outcome_distribution(reduced, observables)
        records.append(sample_counts(dist, events_per_setting, np.random.default_rng(child), req.setting_label))
    return records


# ---------------------------------------------------------------------------
# Direct GHZ fidelity: population of the extreme computational outcomes plus
# coherence from the four bases M_k = cos(k pi/4) X + sin(k pi/4) Y.

GHZ_COHERENCE_SETTINGS = 4


def coherence_observable(k: int) -> np.ndarray:
    if not 0 <= k < GHZ_COHERENCE_SETTINGS:
        raise ValueError(f"coherence index must be 0..3, got {k}")
    angle = k * math.pi / 4
    return math.cos(angle) * PAULI_X + math.sin(angle) * PAULI_Y


def ghz_population_setting(n_parties: int = 4) -> str:
    return " ".join(_format_token(p, "Z") for p in range(1, n_parties + 1))


def ghz_coherence_setting(k: int, n_parties: int = 4) -> str:
    return " ".join(_format_token(p, f"M{k}") for p in range(1, n_parties + 1))


def ghz_fidelity_terms(state: np.ndarray) -> tuple[float, list[float]]:
    """(population, [<M_k tensor power>]) evaluated exactly on a state."""
    st = np.asarray(state, dtype=complex)
    dim = st.shape[0]
    n = dim.bit_length() - 1
    pop_diag = np.zeros(dim)
    pop_diag[0] = pop_diag[-1] = 1.0
    population = expectation(state, np.diag(pop_diag).astype(complex))
    coherences = [expectation(state, kron(*([coherence_observable(k)] * n))) for k in range(GHZ_COHERENCE_SETTINGS)]
    return population, coherences


def ghz_fidelity_from_values(
    population: float,
    coherences: Sequence[float],
    population_sigma: float = 0.0,
    coherence_sigmas: Sequence[float] | None = None,
) -> tuple[float, float]:
    """F = (P + C)/2 with C the alternating mean of the four M-expectations."""
    if len(coherences) != GHZ_COHERENCE_SETTINGS:
        raise ValueError(f"expected {GHZ_COHERENCE_SETTINGS} coherence expectations, got {len(coherences)}")
    sigmas = [0.0] * GHZ_COHERENCE_SETTINGS if coherence_sigmas is None else list(coherence_sigmas)
    if len(sigmas) != GHZ_COHERENCE_SETTINGS:
        raise ValueError(f"expected {GHZ_COHERENCE_SETTINGS} coherence sigmas, got {len(sigmas)}")
    coherence = sum((-1) ** k * c for k, c in enumerate(coherences)) / 4.0
    fidelity = (population + coherence) / 2.0
    var_c = sum(s * s for s in sigmas) / 16.0
    sigma = math.sqrt(population_sigma**2 + var_c) / 2.0
    return fidelity, sigma


def ghz_fidelity_from_counts(population: CountsRecord, coherence: Sequence[CountsRecord]) -> tuple[float, float]:
    """Estimate (F, sigma) from one computational-basis record plus four M_k records."""
    if len(coherence) != GHZ_COHERENCE_SETTINGS:
        raise ValueError(f"expected {GHZ_COHERENCE_SETTINGS} coherence settings, got {len(coherence)}")
    names = {name for _, name in population.parsed_setting()}
    if names != {"Z"}:
        raise ValueError(f"population record must measure Z on every party, got {population.setting!r}")
    width = len(population.parsed_setting())
    total = population.total()
    if total <= 0:
        raise ValueError("population record has no events")
    extreme = ("+" * width, "-" * width)
    hits = sum(population.counts.get(k, 0) for k in extreme)
    pop = hits / total
    # delta method on Poisson cells reduces to the binomial form P(1-P)/T
    pop_sigma = math.sqrt(max(pop * (1.0 - pop), 0.0) / total)
    values, sigmas = [], []
    for k, record in enumerate(coherence):
        names = {name for _, name in record.parsed_setting()}
        if names != {f"M{k}"}:
            raise ValueError(f"coherence record {k} must measure M{k} on every party, got {record.setting!r}")
        est = estimate_correlator(record)
        values.append(est.value)
        sigmas.append(est.sigma)
    return ghz_fidelity_from_values(pop, values, pop_sigma, sigmas)


# ---------------------------------------------------------------------------
# Direct cluster fidelity: the projector onto a stabilizer state is the
# average of its stabilizer group, so F is the mean of the sixteen measured
# stabilizer expectations (identity included, fixed at 1).

CLUSTER_STABILIZER_COUNT = 16


def cluster_stabilizer_table(n_parties: int = 4) -> tuple[PauliString, ...]:
    """All stabilizers of the canonical cluster state, identity first.

    These are the line-graph stabilizers conjugated into the experimental
    frame (Hadamards on the end qubits), in generator-mask order.
    """
    gens = generators(Graph.line(n_parties))
    frame_sites = (1, n_parties)
    return tuple(
        conjugate_by_hadamard(stabilizer_element(gens, mask), frame_sites)
        for mask in range(1 << n_parties)
    )


def cluster_expectations(state: np.ndarray) -> list[float]:
    """The sixteen stabilizer expectations evaluated exactly on a state."""
    return [expectation(state, pauli_to_matrix(p)) for p in cluster_stabilizer_table()]


def cluster_fidelity(values: Sequence[float], sigmas: Sequence[float] | None = None) -> tuple[float, float]:
    """Mean of the sixteen stabilizer expectations with quadrature sigma."""
    vals = [float(v) for v in values]
    if len(vals) != CLUSTER_STABILIZER_COUNT:
        raise ValueError(f"expected {CLUSTER_STABILIZER_COUNT} stabilizer expectations, got {len(vals)}")
    if abs(vals[0] - 1.0) > 1e-9:
        raise ValueError(f"first entry is the identity stabilizer and must be 1, got {vals[0]}")
    sg = [0.0] * CLUSTER_STABILIZER_COUNT if sigmas is None else [float(s) for s in sigmas]
    if len(sg) != CLUSTER_STABILIZER_COUNT:
        raise ValueError(f"expected {CLUSTER_STABILIZER_COUNT} sigmas, got {len(sg)}")
    fidelity = sum(vals) / CLUSTER_STABILIZER_COUNT
    sigma = math.sqrt(sum(s * s for s in sg)) / CLUSTER_STABILIZER_COUNT
    return fidelity, sigma
