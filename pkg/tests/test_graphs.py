"""Unit tests for graphs, Pauli strings, and graph-state construction."""

import itertools

import numpy as np
import pytest

from graphbell.graphs import (
    Graph,
    PauliString,
    apply_hadamard_frame,
    build_graph_state,
    canonical_state,
    conjugate_by_hadamard,
    generators,
    identity_string,
    multiply,
    pauli_to_matrix,
    stabilizer_element,
    state_fidelity,
    verify_stabilized,
)
from graphbell.linalg import expectation


def test_graph_constructors():
    star = Graph.star(4)
    assert star.n_vertices == 4
    assert set(star.edges) == {(1, 2), (1, 3), (1, 4)}
    assert star.neighbors(1) == (2, 3, 4)
    assert star.neighbors(3) == (1,)
    line = Graph.line(4)
    assert set(line.edges) == {(1, 2), (2, 3), (3, 4)}
    assert line.neighbors(2) == (1, 3)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])  # self loop
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 4)])  # vertex out of range
    # reversed duplicates normalize and merge rather than raise
    assert Graph.from_edges(3, [(1, 2), (2, 1)]) == Graph.from_edges(3, [(1, 2)])


def test_graph_text_and_json_round_trip():
    g = Graph.from_edge_list_text("1 2\n2 3\n3 4\n")
    assert g == Graph.line(4)
    again = Graph.from_json(g.to_json())
    assert again == g


def test_pauli_string_basics():
    p = PauliString(1, "XZZZ")
    assert str(p) == "+X1Z2Z3Z4"
    assert p.support() == (1, 2, 3, 4)
    assert PauliString(-1, "YIZI").weight == 2
    assert str(identity_string(4)) == "+I1I2I3I4"
    with pytest.raises(ValueError):
        PauliString(2, "XX")
    with pytest.raises(ValueError):
        PauliString(1, "XQ")
    with pytest.raises(ValueError):
        PauliString(1, "")


def test_commutation_rules():
    x1 = PauliString(1, "XI")
    z1 = PauliString(1, "ZI")
    xx = PauliString(1, "XX")
    zz = PauliString(1, "ZZ")
    assert not x1.commutes_with(z1)  # overlap on one site with different letters
    assert xx.commutes_with(zz)  # two anticommuting sites compensate
    assert x1.commutes_with(PauliString(1, "IX"))


def test_multiply_goldens():
    # star-graph generators 2 and 3 multiply to X2X3 (Z1 squares away)
    g2 = PauliString(1, "ZXII")
    g3 = PauliString(1, "ZIXI")
    assert str(multiply(g2, g3)) == "+I1X2X3I4"
    # cluster-frame generators: (Z1Z2)(X1X2Z3) picks up a -1 from two iY factors
    assert str(multiply(PauliString(1, "ZZII"), PauliString(1, "XXZI"))) == "-Y1Y2Z3I4"
    # squaring gives the identity
    p = PauliString(-1, "XYZX")
    assert multiply(p, p) == identity_string(4)


def test_multiply_rejects_imaginary_phase():
    with pytest.raises(ValueError):
        multiply(PauliString(1, "X"), PauliString(1, "Z"))


def test_multiply_matches_matrices():
    rng = np.random.default_rng(7)
    letters = "IXYZ"
    for _ in range(50):
        a = PauliString(1, "".join(rng.choice(list(letters), size=3)))
        b = PauliString(1, "".join(rng.choice(list(letters), size=3)))
        # skip products with imaginary phase, they are rejected by design
        try:
            c = multiply(a, b)
        except ValueError:
            prod = pauli_to_matrix(a) @ pauli_to_matrix(b)
            assert np.abs(np.trace(prod).imag) >= 0  # nothing to verify beyond rejection
            continue
        np.testing.assert_allclose(pauli_to_matrix(c), pauli_to_matrix(a) @ pauli_to_matrix(b), atol=1e-12)


def test_conjugate_by_hadamard():
    p = PauliString(1, "XZYI")
    q = conjugate_by_hadamard(p, (1, 2, 3))
    assert q == PauliString(-1, "ZXYI")
    # involution: conjugating twice restores the string
    assert conjugate_by_hadamard(q, (1, 2, 3)) == p
    with pytest.raises(ValueError):
        conjugate_by_hadamard(p, (5,))


def test_generator_goldens():
    star = generators(Graph.star(4))
    assert [str(g) for g in star.generators] == ["+X1Z2Z3Z4", "+Z1X2I3I4", "+Z1I2X3I4", "+Z1I2I3X4"]
    line = generators(Graph.line(4))
    assert [str(g) for g in line.generators] == ["+X1Z2I3I4", "+Z1X2Z3I4", "+I1Z2X3Z4", "+I1I2Z3X4"]


def test_generators_commute_random_graphs():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        pool = list(itertools.combinations(range(1, n + 1), 2))
        take = rng.random(len(pool)) < 0.45
        edges = [e for e, t in zip(pool, take) if t]
        gens = generators(Graph.from_edges(n, edges)).generators
        for a, b in itertools.combinations(gens, 2):
            assert a.commutes_with(b)


def test_stabilizer_element_masks():
    line = generators(Graph.line(4))
    assert stabilizer_element(line, 0) == identity_string(4)
    # mask bit k-1 selects generator k: mask 0b1001 is generators {1, 4}
    s14 = stabilizer_element(line, 0b1001)
    assert s14 == stabilizer_element(line, (1, 4))
    assert str(s14) == "+X1Z2Z3X4"
    # the H-rotated version of generators {1, 4} is the full-Z parity check
    assert str(conjugate_by_hadamard(s14, (1, 4))) == "+Z1Z2Z3Z4"
    with pytest.raises(ValueError):
        stabilizer_element(line, 16)
    with pytest.raises(ValueError):
        stabilizer_element(line, (0,))


def test_rotated_line_group_matches_reference_table():
    # all 16 products of the H{1,4}-rotated line generators, identity included
    line = generators(Graph.line(4))
    got = {str(conjugate_by_hadamard(stabilizer_element(line, m), (1, 4))) for m in range(16)}
    want = {
        "+I1I2I3I4",
        "+Z1Z2I3I4",
        "+X1X2Z3I4",
        "+I1Z2X3X4",
        "+I1I2Z3Z4",
        "-Y1Y2Z3I4",
        "+Z1I2X3X4",
        "+Z1Z2Z3Z4",
        "+X1Y2Y3X4",
        "+X1X2I3Z4",
        "-I1Z2Y3Y4",
        "+Y1X2Y3X4",
        "-Y1Y2I3Z4",
        "-Z1I2Y3Y4",
        "+X1Y2X3Y4",
        "+Y1X2X3Y4",
    }
    assert got == want


def test_build_graph_state_small():
    # single vertex: |+>
    np.testing.assert_allclose(build_graph_state(Graph.from_edges(1, [])), np.ones(2) / np.sqrt(2))
    # one edge: CZ|++> flips the |11> amplitude
    two = build_graph_state(Graph.from_edges(2, [(1, 2)]))
    np.testing.assert_allclose(two, np.array([1, 1, 1, -1]) / 2.0)


def test_graph_states_are_stabilized():
    cases = [
        Graph.star(4),
        Graph.line(4),
        Graph.from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]),  # ring
        Graph.from_edges(4, list(itertools.combinations(range(1, 5), 2))),  # complete
        Graph.from_edges(6, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]),
    ]
    for graph in cases:
        gens = generators(graph)
        verify_stabilized(build_graph_state(graph), gens)


def test_verify_stabilized_rejects_wrong_state():
    wrong = np.zeros(16)
    wrong[0] = 1.0
    with pytest.raises(ValueError):
        verify_stabilized(wrong, generators(Graph.star(4)))


def test_canonical_states():
    ghz = canonical_state("ghz4")
    assert ghz[0] == pytest.approx(1 / np.sqrt(2))
    assert ghz[15] == pytest.approx(1 / np.sqrt(2))
    assert np.linalg.norm(ghz) == pytest.approx(1.0, abs=1e-12)
    cl = canonical_state("cluster4")
    np.testing.assert_allclose(cl[[0b0000, 0b0011, 0b1100]], 0.5, atol=1e-12)
    assert cl[0b1111] == pytest.approx(-0.5)
    assert np.linalg.norm(cl) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        canonical_state("w4")


def test_hadamard_frame_maps_graph_states_to_canonical():
    star = build_graph_state(Graph.star(4))
    assert state_fidelity(apply_hadamard_frame(star, (2, 3, 4)), canonical_state("ghz4")) == pytest.approx(1.0, abs=1e-12)
    line = build_graph_state(Graph.line(4))
    assert state_fidelity(apply_hadamard_frame(line, (1, 4)), canonical_state("cluster4")) == pytest.approx(1.0, abs=1e-12)


def test_hadamard_frame_is_involution():
    rng = np.random.default_rng(23)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    v /= np.linalg.norm(v)
    back = apply_hadamard_frame(apply_hadamard_frame(v, (1, 3)), (1, 3))
    np.testing.assert_allclose(back, v, atol=1e-12)
    np.testing.assert_allclose(apply_hadamard_frame(v, ()), v, atol=1e-15)


def test_rotated_stabilizers_fix_canonical_states():
    # conjugated stabilizers must have unit expectation on the rotated states
    star, line = generators(Graph.star(4)), generators(Graph.line(4))
    ghz, cl = canonical_state("ghz4"), canonical_state("cluster4")
    for mask in range(16):
        s = conjugate_by_hadamard(stabilizer_element(star, mask), (2, 3, 4))
        assert expectation(ghz, pauli_to_matrix(s)) == pytest.approx(1.0, abs=1e-10)
        s = conjugate_by_hadamard(stabilizer_element(line, mask), (1, 4))
        assert expectation(cl, pauli_to_matrix(s)) == pytest.approx(1.0, abs=1e-10)
