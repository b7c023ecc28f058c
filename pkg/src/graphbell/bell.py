"""Bell inequalities built from graph-state stabilizers.

The construction takes a list of stabilizer elements (products of graph-state
generators), a set AC of parties that get two anticommuting measurement
directions, a list P of stabilizer pairs and a remainder list R.  Each
stabilizer maps to a correlator term by the letter substitution

    at a site in AC:      X -> (A + B),  Z -> (A - B)
    at any other site:    X -> A,        Z -> B
    identity stays identity

and the inequality is the multiset sum of the mapped pair members plus the
mapped remainder.  Y letters and negative phases are outside the recipe.

Local observables follow a one-angle family per party: on AC sites
A = cos(t) X + sin(t) Z and B = cos(t) X - sin(t) Z; elsewhere the same with
(X + Z)/sqrt2 and (X - Z)/sqrt2 in place of X and Z.  At t = pi/4 every party
without two directions measures plain X, and the graph state reaches the
quantum bound.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .config import TOL
from .graphs import Graph, GeneratorSet, PauliString, generators, stabilizer_element
from .linalg import (
    ANTIHADAMARD_OBS,
    HADAMARD_OBS,
    IDENTITY_2,
    PAULI_X,
    PAULI_Z,
    expectation,
    hermitian_eigen,
    kron,
)

MAX_CLASSICAL_PARTIES = 10  # 4^N strategies are enumerated exactly

OPTIMAL_ANGLE = float(np.pi / 4)


class SiteLabel(Enum):
    IDENTITY = "I"
    A = "A"
    B = "B"
    A_PLUS_B = "A+B"
    A_MINUS_B = "A-B"


@dataclass(frozen=True)
class BellTerm:
    coefficient: float
    labels: tuple[SiteLabel, ...]

    def __str__(self) -> str:
        parts = []
        for i, lab in enumerate(self.labels, start=1):
            if lab is SiteLabel.IDENTITY:
                continue
            if lab in (SiteLabel.A_PLUS_B, SiteLabel.A_MINUS_B):
                op = "+" if lab is SiteLabel.A_PLUS_B else "-"
                parts.append(f"(A{i}{op}B{i})")
            else:
                parts.append(f"{lab.value}{i}")
        body = " ".join(parts) if parts else "1"
        coeff = int(self.coefficient) if float(self.coefficient).is_integer() else self.coefficient
        return f"{coeff} * {body}"


@dataclass(frozen=True)
class ConstructionSpec:
    """Stabilizer selection driving the inequality construction.

    stabilizers: generator-index subsets, one per stabilizer element.
    ac: parties with two anticommuting directions.
    pairs / remainder: 1-based indices into the stabilizer list.
    """

    stabilizers: tuple[frozenset[int], ...]
    ac: frozenset[int]
    pairs: tuple[tuple[int, int], ...]
    remainder: tuple[int, ...]

    def __post_init__(self) -> None:
        n_stab = len(self.stabilizers)
        used = [k for pair in self.pairs for k in pair]
        for k in used + list(self.remainder):
            if not (1 <= k <= n_stab):
                raise ValueError(f"stabilizer index {k} out of range 1..{n_stab}")
        overlap = set(self.remainder) & set(used)
        if overlap:
            raise ValueError(f"remainder indices {sorted(overlap)} also appear in pairs")

    @classmethod
    def from_json(cls, obj: dict | str) -> "ConstructionSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            stabilizers=tuple(frozenset(int(i) for i in masks) for masks in obj["stabilizers"]),
            ac=frozenset(int(i) for i in obj["ac"]),
            pairs=tuple((int(l), int(k)) for l, k in obj["pairs"]),
            remainder=tuple(int(r) for r in obj["remainder"]),
        )

    def to_json(self) -> dict:
        return {
            "stabilizers": [sorted(m) for m in self.stabilizers],
            "ac": sorted(self.ac),
            "pairs": [list(p) for p in self.pairs],
            "remainder": list(self.remainder),
        }


@dataclass(frozen=True)
class BellInequality:
    name: str
    n_parties: int
    ac: frozenset[int]
    terms: tuple[BellTerm, ...]
    classical_bound_value: float
    quantum_bound_value: float

    def __str__(self) -> str:
        body = "  +  ".join(str(t) for t in self.terms)
        return f"{self.name}: {body}  <=  {self.classical_bound_value:g} (classical), {self.quantum_bound_value:.6f} (quantum)"


@dataclass(frozen=True)
class MeasurementAngles:
    """One angle per party, restricted to [0, pi/2]."""

    thetas: tuple[float, ...]

    def __post_init__(self) -> None:
        for t in self.thetas:
            if not (0.0 <= t <= np.pi / 2 + 1e-12):
                raise ValueError(f"angle {t!r} outside [0, pi/2]")

    @classmethod
    def uniform(cls, n_parties: int, theta: float = OPTIMAL_ANGLE) -> "MeasurementAngles":
        return cls((float(theta),) * n_parties)


def map_stabilizer(s: PauliString, ac: Iterable[int]) -> BellTerm:
    """Letter substitution of one stabilizer element into a correlator term."""
    if s.phase != 1:
        raise ValueError(f"stabilizer {s} has negative phase; the construction needs +1 phases")
    ac_set = set(ac)
    labels = []
    for site, letter in enumerate(s.letters, start=1):
        if letter == "Y":
            raise ValueError(f"stabilizer {s} contains Y at site {site}; the construction handles X/Z/I only")
        if letter == "I":
            labels.append(SiteLabel.IDENTITY)
        elif site in ac_set:
            labels.append(SiteLabel.A_PLUS_B if letter == "X" else SiteLabel.A_MINUS_B)
        else:
            labels.append(SiteLabel.A if letter == "X" else SiteLabel.B)
    return BellTerm(1.0, tuple(labels))


def _pairable(a: PauliString, b: PauliString, ac: frozenset[int]) -> bool:
    """Pair condition: anticommuting letters at some shared non-identity site in AC."""
    for site in ac:
        la, lb = a.letters[site - 1], b.letters[site - 1]
        if la != "I" and lb != "I" and la != lb:
            return True
    return False


def build_inequality(graph: Graph, spec: ConstructionSpec, name: str = "custom") -> BellInequality:
    """Construct the Bell inequality and fill both bounds.

    The classical bound is exact (deterministic-strategy enumeration); the
    quantum bound comes from evaluating the Bell operator at the optimal
    angles t = pi/4 for every party.
    """
    gens = generators(graph)
    n = graph.n_vertices
    for site in spec.ac:
        if not (1 <= site <= n):
            raise ValueError(f"AC site {site} out of range 1..{n}")
    elements = [stabilizer_element(gens, mask) for mask in spec.stabilizers]

    if not spec.pairs and not spec.remainder:
        raise ValueError("construction selects no stabilizers: no terms to build")
    for l, k in spec.pairs:
        if not _pairable(elements[l - 1], elements[k - 1], spec.ac):
            raise ValueError(
                f"stabilizers {elements[l - 1]} and {elements[k - 1]} are not pairable: "
                "no shared site in AC with anticommuting letters"
            )

    merged: dict[tuple[SiteLabel, ...], float] = {}
    order: list[tuple[SiteLabel, ...]] = []
    for idx in [k for pair in spec.pairs for k in pair] + list(spec.remainder):
        term = map_stabilizer(elements[idx - 1], spec.ac)
        if term.labels not in merged:
            merged[term.labels] = 0.0
            order.append(term.labels)
        merged[term.labels] += term.coefficient
    terms = tuple(BellTerm(merged[labels], labels) for labels in order)

    draft = BellInequality(name, n, spec.ac, terms, 0.0, 0.0)
    beta_c = classical_bound(draft)
    operator = bell_operator(draft, MeasurementAngles.uniform(n))
    beta_q = float(hermitian_eigen(operator)[0][-1])
    if not beta_c < beta_q:
        raise ValueError(f"construction gives no quantum violation: classical {beta_c}, quantum {beta_q}")
    return BellInequality(name, n, spec.ac, terms, beta_c, beta_q)


# deterministic-strategy factor per label, given local assignment (a, b)
_LABEL_FACTOR = {
    SiteLabel.IDENTITY: lambda a, b: 1.0,
    SiteLabel.A: lambda a, b: a,
    SiteLabel.B: lambda a, b: b,
    SiteLabel.A_PLUS_B: lambda a, b: a + b,
    SiteLabel.A_MINUS_B: lambda a, b: a - b,
}

_STRATEGIES = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def deterministic_value(ineq: BellInequality, a_signs: Sequence[int], b_signs: Sequence[int]) -> float:
    """Inequality value for one local deterministic assignment."""
    if len(a_signs) != ineq.n_parties or len(b_signs) != ineq.n_parties:
        raise ValueError("assignment length must match the party count")
    total = 0.0
    for term in ineq.terms:
        prod = term.coefficient
        for lab, a, b in zip(term.labels, a_signs, b_signs):
            prod *= _LABEL_FACTOR[lab](a, b)
        total += prod
    return total


def classical_bound(ineq: BellInequality) -> float:
    """Exact classical bound by enumerating all 4^N deterministic strategies."""
    n = ineq.n_parties
    if n > MAX_CLASSICAL_PARTIES:
        raise ValueError(f"refusing to enumerate 4^{n} strategies (limit {MAX_CLASSICAL_PARTIES} parties)")
    total = None
    for term in ineq.terms:
        grid = np.array([term.coefficient])
        for lab in term.labels:
            factors = np.array([_LABEL_FACTOR[lab](a, b) for a, b in _STRATEGIES])
            grid = np.multiply.outer(grid, factors)
        total = grid if total is None else total + grid
    return float(total.max())


def _site_observables(theta: float, in_ac: bool) -> tuple[np.ndarray, np.ndarray]:
    base_x = PAULI_X if in_ac else HADAMARD_OBS
    base_z = PAULI_Z if in_ac else ANTIHADAMARD_OBS
    a = np.cos(theta) * base_x + np.sin(theta) * base_z
    return a, np.cos(theta) * base_x - np.sin(theta) * base_z


def observables_from_angles(ineq: BellInequality, angles: MeasurementAngles) -> list[tuple[np.ndarray, np.ndarray]]:
    if len(angles.thetas) != ineq.n_parties:
        raise ValueError(f"expected {ineq.n_parties} angles, got {len(angles.thetas)}")
    return [_site_observables(t, site in ineq.ac) for site, t in enumerate(angles.thetas, start=1)]


def _label_matrix(lab: SiteLabel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if lab is SiteLabel.IDENTITY:
        return IDENTITY_2
    if lab is SiteLabel.A:
        return a
    if lab is SiteLabel.B:
        return b
    if lab is SiteLabel.A_PLUS_B:
        return a + b
    return a - b


def bell_operator(ineq: BellInequality, settings) -> np.ndarray:
    """Bell operator for MeasurementAngles or explicit per-party (A, B) pairs."""
    if isinstance(settings, MeasurementAngles):
        pairs = observables_from_angles(ineq, settings)
    else:
        pairs = [(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)) for a, b in settings]
        if len(pairs) != ineq.n_parties:
            raise ValueError(f"expected {ineq.n_parties} observable pairs, got {len(pairs)}")
    dim = 1 << ineq.n_parties
    out = np.zeros((dim, dim), dtype=complex)
    for term in ineq.terms:
        out += term.coefficient * kron(*(_label_matrix(lab, *pairs[i]) for i, lab in enumerate(term.labels)))
    return out


def quantum_value(state: np.ndarray, ineq: BellInequality, settings) -> float:
    return expectation(state, bell_operator(ineq, settings))


def operator_arrays(ineq: BellInequality) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Affine site decomposition for the sweep kernels.

    Returns (coeffs, k0, k1, k2) with the site operator at angle t equal to
    k0 + cos(t) k1 + sin(t) k2.  Shapes: (T,), (T, N, 2, 2) x3.
    """
    n, t_count = ineq.n_parties, len(ineq.terms)
    coeffs = np.zeros(t_count)
    k0 = np.zeros((t_count, n, 2, 2), dtype=complex)
    k1 = np.zeros_like(k0)
    k2 = np.zeros_like(k0)
    for ti, term in enumerate(ineq.terms):
        coeffs[ti] = term.coefficient
        for site, lab in enumerate(term.labels):
            in_ac = (site + 1) in ineq.ac
            bx = PAULI_X if in_ac else HADAMARD_OBS
            bz = PAULI_Z if in_ac else ANTIHADAMARD_OBS
            if lab is SiteLabel.IDENTITY:
                k0[ti, site] = IDENTITY_2
            elif lab is SiteLabel.A:
                k1[ti, site], k2[ti, site] = bx, bz
            elif lab is SiteLabel.B:
                k1[ti, site], k2[ti, site] = bx, -bz
            elif lab is SiteLabel.A_PLUS_B:
                k1[ti, site] = 2 * bx
            else:
                k2[ti, site] = 2 * bz
    return coeffs, k0, k1, k2


def angle_grid(n_parties: int, resolution: int) -> np.ndarray:
    """Cartesian product grid over [0, pi/2]^N, shape (resolution^N, N)."""
    if resolution < 2:
        raise ValueError(f"grid resolution must be >= 2, got {resolution}")
    axis = np.linspace(0.0, np.pi / 2, resolution)
    mesh = np.meshgrid(*([axis] * n_parties), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def pattern_search(eval_batch, theta0: np.ndarray, step0: float, rounds: int = 3, minimize: bool = False) -> tuple[float, np.ndarray]:
    """Derivative-free coordinate refinement on [0, pi/2]^N.

    Each iteration evaluates all +-step axis moves in one batched call and
    takes the best improving move; when none improves, the step halves.
    Robust to the nonsmooth eigenvalue objective; deterministic.
    """
    sign = -1.0 if minimize else 1.0
    theta = np.array(theta0, dtype=float)
    best = sign * float(eval_batch(theta[None, :])[0])
    step = float(step0)
    for _ in range(rounds):
        while True:
            trials = []
            for axis in range(theta.shape[0]):
                for delta in (step, -step):
                    trial = theta.copy()
                    trial[axis] = min(max(trial[axis] + delta, 0.0), np.pi / 2)
                    if trial[axis] != theta[axis]:
                        trials.append(trial)
            if not trials:
                break
            values = sign * np.asarray(eval_batch(np.array(trials)))
            pick = int(np.argmax(values))
            if values[pick] > best + 1e-15:
                best, theta = float(values[pick]), trials[pick]
            else:
                break
        step /= 2.0
    return sign * best, theta


def search_quantum_bound(
    ineq: BellInequality, grid_resolution: int = 25, refine_rounds: int = 3
) -> tuple[float, MeasurementAngles]:
    """Largest Bell-operator eigenvalue over the angle grid, then refined.

    Returns the best value with the achieving angles.  The result can only
    underestimate the true quantum bound (every evaluation is a valid
    operator norm lower bound).
    """
    from ._kernels import sweep_bell_extreme

    coeffs, k0, k1, k2 = operator_arrays(ineq)
    thetas = angle_grid(ineq.n_parties, grid_resolution)
    values = sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode="max")
    best_idx = int(np.argmax(values))

    def eval_rows(rows: np.ndarray) -> np.ndarray:
        return sweep_bell_extreme(coeffs, k0, k1, k2, rows, mode="max")

    step = (np.pi / 2) / (grid_resolution - 1) / 2
    value, theta = pattern_search(eval_rows, thetas[best_idx], step, rounds=refine_rounds)
    return value, MeasurementAngles(tuple(float(t) for t in theta))


# ---------------------------------------------------------------------------
# Named presets: two graphs, six constructions.

_STAR_STABILIZERS = ((1,), (2,), (3,), (4,), (2, 3), (2, 4))
_LINE_STABILIZERS = ((1,), (2,), (3,), (4,), (1, 3), (2, 4))

_PRESET_TABLE: dict[str, tuple[str, tuple, frozenset, tuple, tuple]] = {
    "b1": ("star", _STAR_STABILIZERS, frozenset({1}), ((1, 2),), (5, 6)),
    "b2": ("star", _STAR_STABILIZERS, frozenset({1}), ((1, 2), (1, 3)), (6,)),
    "b3": ("star", _STAR_STABILIZERS, frozenset({1}), ((1, 2), (1, 3), (1, 4)), ()),
    "b4": ("line", _LINE_STABILIZERS, frozenset({1}), ((1, 2),), (3, 4)),
    "b5": ("line", _LINE_STABILIZERS, frozenset({2}), ((1, 2), (2, 3)), (4,)),
    "b6": ("line", _LINE_STABILIZERS, frozenset({2}), ((1, 2), (3, 6)), ()),
}

PRESET_NAMES = tuple(_PRESET_TABLE)


def preset_construction(name: str) -> tuple[Graph, ConstructionSpec]:
    key = name.strip().lower()
    if key not in _PRESET_TABLE:
        raise ValueError(f"unknown inequality preset {name!r} (expected one of {', '.join(PRESET_NAMES)})")
    kind, stabs, ac, pairs, remainder = _PRESET_TABLE[key]
    graph = Graph.star(4) if kind == "star" else Graph.line(4)
    spec = ConstructionSpec(
        stabilizers=tuple(frozenset(m) for m in stabs),
        ac=ac,
        pairs=pairs,
        remainder=remainder,
    )
    return graph, spec


def preset_inequality(name: str) -> BellInequality:
    graph, spec = preset_construction(name)
    return build_inequality(graph, spec, name=name.strip().lower())


def preset_graph_state(name: str) -> np.ndarray:
    """Graph state that maximally violates the named preset (graph frame)."""
    from .graphs import build_graph_state

    graph, _ = preset_construction(name)
    return build_graph_state(graph)


# ---------------------------------------------------------------------------
# Experimental frame: local Hadamards move the graph state to the canonical
# entangled state, and the optimal-angle observables to fixed lab settings.

_GHZ_PRESETS = ("b1", "b2", "b3")
_CLUSTER_PRESETS = ("b4", "b5", "b6")
_FRAME_STATE = {"ghz": "ghz4", "cluster": "cluster4"}
_FRAME_HADAMARDS = {"ghz": (2, 3, 4), "cluster": (1, 4)}


def preset_family(name: str) -> str:
    """'ghz' or 'cluster', by which canonical state the preset certifies."""
    key = name.strip().lower()
    if key in _GHZ_PRESETS:
        return "ghz"
    if key in _CLUSTER_PRESETS:
        return "cluster"
    raise ValueError(f"unknown preset {name!r} (expected one of {PRESET_NAMES})")


@dataclass(frozen=True)
class ExperimentalFrame:
    """Fixed lab observables equivalent to the optimal graph-frame angles."""

    inequality: str
    family: str                 # "ghz" or "cluster"
    state_name: str             # canonical state reaching the quantum bound
    hadamard_sites: tuple[int, ...]
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...] = field(repr=False)
    labels: tuple[tuple[str, str], ...]


def _conj_h(op: np.ndarray) -> np.ndarray:
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    return h @ op @ h


def experimental_frame(ineq: BellInequality, family: str) -> ExperimentalFrame:
    """Lab settings for the named preset in the given family frame."""
    fam = family.strip().lower()
    if fam not in _FRAME_STATE:
        raise ValueError(f"unknown family {family!r} (expected 'ghz' or 'cluster')")
    expected = _GHZ_PRESETS if fam == "ghz" else _CLUSTER_PRESETS
    if ineq.name not in expected:
        raise ValueError(f"inequality {ineq.name!r} does not belong to the {fam} family {expected}")

    h_sites = _FRAME_HADAMARDS[fam]
    pairs = []
    labels = []
    for site in range(1, ineq.n_parties + 1):
        a, b = _site_observables(OPTIMAL_ANGLE, site in ineq.ac)
        if site in h_sites:
            a, b = _conj_h(a), _conj_h(b)
        pairs.append((a, b))
        labels.append((_obs_name(a), _obs_name(b)))
    return ExperimentalFrame(ineq.name, fam, _FRAME_STATE[fam], h_sites, tuple(pairs), tuple(labels))


def _obs_name(op: np.ndarray) -> str:
    """Readable name for the handful of 2x2 observables the frames use."""
    candidates = {
        "X": PAULI_X, "Z": PAULI_Z,
        "(X+Z)/sqrt2": HADAMARD_OBS, "(X-Z)/sqrt2": ANTIHADAMARD_OBS,
        "-(X-Z)/sqrt2": -ANTIHADAMARD_OBS, "-X": -PAULI_X, "-Z": -PAULI_Z,
    }
    for name, mat in candidates.items():
        if np.allclose(op, mat, atol=1e-12):
            return name
    return "custom"


# ---------------------------------------------------------------------------
# Correlator expansion: which settings an experiment must record.


@dataclass(frozen=True)
class CorrelatorRequirement:
    """One correlator entering the inequality value.

    letters maps measured parties (support only) to 'A' or 'B'; weight is the
    term coefficient times the branch sign.
    """

    weight: float
    letters: tuple[tuple[int, str], ...]

    @property
    def setting_label(self) -> str:
        return " ".join(f"{obs}{party}" for party, obs in self.letters)


def required_correlators(ineq: BellInequality) -> tuple[CorrelatorRequirement, ...]:
    """Expand (A+-B) sites into explicit A/B correlators, merging duplicates."""
    merged: dict[tuple[tuple[int, str], ...], float] = {}
    order: list[tuple[tuple[int, str], ...]] = []
    for term in ineq.terms:
        branches: list[tuple[float, list[tuple[int, str]]]] = [(term.coefficient, [])]
        for site, lab in enumerate(term.labels, start=1):
            if lab is SiteLabel.IDENTITY:
                continue
            if lab is SiteLabel.A:
                options = [(1.0, "A")]
            elif lab is SiteLabel.B:
                options = [(1.0, "B")]
            elif lab is SiteLabel.A_PLUS_B:
                options = [(1.0, "A"), (1.0, "B")]
            else:
                options = [(1.0, "A"), (-1.0, "B")]
            branches = [
                (w * sign, letters + [(site, obs)])
                for w, letters in branches
                for sign, obs in options
            ]
        for weight, letters in branches:
            key = tuple(letters)
            if key not in merged:
                merged[key] = 0.0
                order.append(key)
            merged[key] += weight
    return tuple(CorrelatorRequirement(merged[k], k) for k in order if merged[k] != 0.0)
