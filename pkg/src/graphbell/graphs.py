"""Graph states, Pauli strings and stabilizer generators.

Vertices are numbered 1..N and party 1 is the most significant tensor factor:
basis index b encodes party k's bit at position N-k from the least significant
end.  A graph state is prepared as CZ edges applied to |+>^N.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

from .config import TOL
from .linalg import IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z, kron, require_state_vector

MAX_STATE_QUBITS = 12  # 2^12 amplitudes; larger states are refused

PAULI_MATRICES = {"I": IDENTITY_2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

# Single-site products P*Q -> (letter, phase exponent k) with phase i^k.
_PAULI_PRODUCT = {
    ("I", "I"): ("I", 0), ("I", "X"): ("X", 0), ("I", "Y"): ("Y", 0), ("I", "Z"): ("Z", 0),
    ("X", "I"): ("X", 0), ("X", "X"): ("I", 0), ("X", "Y"): ("Z", 1), ("X", "Z"): ("Y", 3),
    ("Y", "I"): ("Y", 0), ("Y", "X"): ("Z", 3), ("Y", "Y"): ("I", 0), ("Y", "Z"): ("X", 1),
    ("Z", "I"): ("Z", 0), ("Z", "X"): ("Y", 1), ("Z", "Y"): ("X", 3), ("Z", "Z"): ("I", 0),
}


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 1..n_vertices."""

    n_vertices: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise ValueError(f"graph needs at least one vertex, got {self.n_vertices}")
        normalized = set()
        for edge in self.edges:
            i, j = edge
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (1 <= i <= self.n_vertices and 1 <= j <= self.n_vertices):
                raise ValueError(f"edge {edge} out of range 1..{self.n_vertices}")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        return cls(n_vertices, frozenset((i, j) for i, j in edges))

    @classmethod
    def star(cls, n_vertices: int, center: int = 1) -> "Graph":
        return cls.from_edges(n_vertices, ((center, j) for j in range(1, n_vertices + 1) if j != center))

    @classmethod
    def line(cls, n_vertices: int) -> "Graph":
        return cls.from_edges(n_vertices, ((i, i + 1) for i in range(1, n_vertices)))

    @classmethod
    def from_edge_list_text(cls, text: str, n_vertices: int | None = None) -> "Graph":
        """Parse 'i j' pairs, one per line; blank lines and # comments ignored."""
        edges = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ValueError(f"edge list line {lineno}: expected 'i j', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
        if not edges and n_vertices is None:
            raise ValueError("empty edge list and no vertex count given")
        n = n_vertices if n_vertices is not None else max(max(e) for e in edges)
        return cls.from_edges(n, edges)

    @classmethod
    def from_json(cls, obj: dict | str) -> "Graph":
        """Accept {'n': N, 'edges': [[i, j], ...]} as a dict or JSON string."""
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_edges(int(obj["n"]), ((int(i), int(j)) for i, j in obj["edges"]))

    def to_json(self) -> dict:
        return {"n": self.n_vertices, "edges": [list(e) for e in sorted(self.edges)]}

    def neighbors(self, vertex: int) -> tuple[int, ...]:
        return tuple(sorted(j if i == vertex else i for i, j in self.edges if vertex in (i, j)))


@dataclass(frozen=True)
class PauliString:
    """Signed Pauli word: phase in {+1, -1}, one letter in I/X/Y/Z per party."""

    phase: int
    letters: str

    def __post_init__(self) -> None:
        if self.phase not in (1, -1):
            raise ValueError(f"phase must be +1 or -1, got {self.phase}")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")
        if not self.letters:
            raise ValueError("empty Pauli string")

    @property
    def n_parties(self) -> int:
        return len(self.letters)

    def support(self) -> tuple[int, ...]:
        """1-based sites where the letter is not identity."""
        return tuple(i for i, c in enumerate(self.letters, start=1) if c != "I")

    @property
    def weight(self) -> int:
        return len(self.support())

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n_parties != other.n_parties:
            raise ValueError("party count mismatch")
        anti = sum(1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b)
        return anti % 2 == 0

    def __str__(self) -> str:
        sign = "+" if self.phase == 1 else "-"
        return sign + "".join(f"{c}{i}" for i, c in enumerate(self.letters, start=1))


def identity_string(n_parties: int) -> PauliString:
    return PauliString(1, "I" * n_parties)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product of two Pauli strings; a resulting phase of +-i is rejected."""
    if a.n_parties != b.n_parties:
        raise ValueError(f"party count mismatch: {a.n_parties} vs {b.n_parties}")
    letters = []
    phase_exp = 0
    for p, q in zip(a.letters, b.letters):
        letter, k = _PAULI_PRODUCT[(p, q)]
        letters.append(letter)
        phase_exp += k
    phase_exp %= 4
    if phase_exp % 2 == 1:
        raise ValueError(f"product {a} * {b} has imaginary phase i^{phase_exp}")
    sign = 1 if phase_exp == 0 else -1
    return PauliString(a.phase * b.phase * sign, "".join(letters))


def pauli_to_matrix(p: PauliString) -> np.ndarray:
    return p.phase * reduce(np.kron, (PAULI_MATRICES[c] for c in p.letters))


def conjugate_by_hadamard(p: PauliString, sites: Iterable[int]) -> PauliString:
    """Conjugate by H on the given sites: X <-> Z, Y -> -Y there."""
    site_set = set(sites)
    letters = list(p.letters)
    phase = p.phase
    for i in site_set:
        if not (1 <= i <= p.n_parties):
            raise ValueError(f"site {i} out of range 1..{p.n_parties}")
        c = letters[i - 1]
        if c == "X":
            letters[i - 1] = "Z"
        elif c == "Z":
            letters[i - 1] = "X"
        elif c == "Y":
            phase = -phase
    return PauliString(phase, "".join(letters))


@dataclass(frozen=True)
class GeneratorSet:
    """Stabilizer generators of a graph state: X on vertex, Z on its neighbors."""

    graph: Graph
    generators: tuple[PauliString, ...]

    def __post_init__(self) -> None:
        n = self.graph.n_vertices
        if len(self.generators) != n:
            raise ValueError(f"expected {n} generators, got {len(self.generators)}")
        for i, gen in enumerate(self.generators, start=1):
            if gen.n_parties != n or gen.phase != 1:
                raise ValueError(f"generator {i} malformed: {gen}")
        for a, b in itertools.combinations(self.generators, 2):
            if not a.commutes_with(b):
                raise ValueError(f"generators {a} and {b} do not commute")

    @property
    def n_parties(self) -> int:
        return self.graph.n_vertices


def generators(graph: Graph) -> GeneratorSet:
    gens = []
    for v in range(1, graph.n_vertices + 1):
        letters = ["I"] * graph.n_vertices
        letters[v - 1] = "X"
        for u in graph.neighbors(v):
            letters[u - 1] = "Z"
        gens.append(PauliString(1, "".join(letters)))
    return GeneratorSet(graph, tuple(gens))


def stabilizer_element(gens: GeneratorSet | tuple[PauliString, ...], subset: int | Iterable[int]) -> PauliString:
    """Ordered product of the selected generators (ascending index).

    subset is a bit mask (bit k-1 selects generator k) or an iterable of
    1-based generator indices.  The empty selection gives the identity.
    """
    gen_list = gens.generators if isinstance(gens, GeneratorSet) else tuple(gens)
    n_gens = len(gen_list)
    if isinstance(subset, int):
        if subset < 0 or subset >= (1 << n_gens):
            raise ValueError(f"mask {subset} out of range for {n_gens} generators")
        indices = [k + 1 for k in range(n_gens) if (subset >> k) & 1]
    else:
        indices = sorted(set(int(k) for k in subset))
        for k in indices:
            if not (1 <= k <= n_gens):
                raise ValueError(f"generator index {k} out of range 1..{n_gens}")
    out = identity_string(gen_list[0].n_parties if gen_list else 1)
    for k in indices:
        out = multiply(out, gen_list[k - 1])
    return out


def build_graph_state(graph: Graph) -> np.ndarray:
    """State vector of the graph state: CZ on every edge applied to |+>^N."""
    n = graph.n_vertices
    if n > MAX_STATE_QUBITS:
        raise ValueError(f"refusing to build a {n}-qubit state (limit {MAX_STATE_QUBITS})")
    dim = 1 << n
    amps = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    indices = np.arange(dim)
    for i, j in graph.edges:
        both = ((indices >> (n - i)) & 1) & ((indices >> (n - j)) & 1)
        amps[both == 1] *= -1.0
    return amps


def apply_hadamard_frame(state: np.ndarray, sites: Iterable[int]) -> np.ndarray:
    """Apply the Hadamard gate to the given 1-based sites of a state vector."""
    v = require_state_vector(state)
    n = int(np.log2(v.shape[0]))
    if 1 << n != v.shape[0]:
        raise ValueError(f"state dimension {v.shape[0]} is not a power of 2")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    out = v.reshape((2,) * n)
    for site in sites:
        if not (1 <= site <= n):
            raise ValueError(f"site {site} out of range 1..{n}")
        out = np.tensordot(h, out, axes=([1], [site - 1]))
        out = np.moveaxis(out, 0, site - 1)
    return out.reshape(-1)


def canonical_state(name: str) -> np.ndarray:
    """Reference entangled states used by the experimental frames.

    ghz4: (|0000> + |1111>)/sqrt2.
    cluster4: (|0000> + |0011> + |1100> - |1111>)/2.
    """
    key = name.strip().lower()
    if key == "ghz4":
        v = np.zeros(16, dtype=complex)
        v[0b0000] = v[0b1111] = 1 / np.sqrt(2)
        return v
    if key == "cluster4":
        v = np.zeros(16, dtype=complex)
        v[0b0000] = v[0b0011] = v[0b1100] = 0.5
        v[0b1111] = -0.5
        return v
    raise ValueError(f"unknown canonical state {name!r} (expected 'ghz4' or 'cluster4')")


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for two state vectors."""
    va, vb = require_state_vector(a), require_state_vector(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return float(abs(np.vdot(va, vb)) ** 2)


def verify_stabilized(state: np.ndarray, gens: GeneratorSet, tol: float = TOL.stabilizer_expect) -> None:
    """Check <psi|S|psi> = 1 for every product of the generators."""
    v = require_state_vector(state)
    for mask in range(1 << len(gens.generators)):
        s = stabilizer_element(gens, mask)
        val = float(np.real(v.conj() @ pauli_to_matrix(s) @ v))
        if abs(val - 1.0) > tol:
            raise ValueError(f"stabilizer {s} has expectation {val!r}, not 1")
