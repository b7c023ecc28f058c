"""Backend-agreement and contract tests for the sweep kernels."""

import numpy as np
import pytest

from graphbell._kernels import (
    ACTIVE_BACKEND,
    pure,
    sweep_bell_extreme,
    sweep_extraction_margin,
    tradeoff,
)
from graphbell.bell import MeasurementAngles, operator_arrays, preset_inequality
from graphbell.linalg import hermitian_eigen
from graphbell.bell import bell_operator
from graphbell.robustness import extraction_gammas, extraction_operator
from graphbell.graphs import canonical_state

try:
    from graphbell._kernels import _sweep as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernel not built")


def _arrays(name="b1"):
    ineq = preset_inequality(name)
    return ineq, operator_arrays(ineq)


def test_active_backend_is_known():
    assert ACTIVE_BACKEND in ("pure", "compiled")


def test_tradeoff_endpoints():
    assert tradeoff(0.0) == pytest.approx(0.0, abs=1e-15)
    assert tradeoff(np.pi / 4) == pytest.approx(1.0, abs=1e-12)


def test_bell_sweep_matches_dense_operator():
    # the sweep's extreme eigenvalue equals an explicit dense reconstruction
    rng = np.random.default_rng(5)
    ineq, (coeffs, k0, k1, k2) = _arrays("b5")
    thetas = rng.uniform(0, np.pi / 2, size=(12, 4))
    values = sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode="max")
    for row, val in zip(thetas, values):
        op = bell_operator(ineq, MeasurementAngles(tuple(row)))
        assert val == pytest.approx(hermitian_eigen(op)[0][-1], abs=1e-10)
    lows = sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode="min")
    for row, val in zip(thetas, lows):
        op = bell_operator(ineq, MeasurementAngles(tuple(row)))
        assert val == pytest.approx(hermitian_eigen(op)[0][0], abs=1e-10)


def test_margin_sweep_matches_dense_operators():
    rng = np.random.default_rng(6)
    ineq, (coeffs, k0, k1, k2) = _arrays("b1")
    psi = canonical_state("ghz4")
    lo, hi = extraction_gammas(ineq.ac, 4)
    thetas = rng.uniform(0, np.pi / 2, size=(8, 4))
    shift = 0.7
    got = sweep_extraction_margin(psi, lo, hi, coeffs, k0, k1, k2, thetas, shift)
    for row, val in zip(thetas, got):
        angles = MeasurementAngles(tuple(row))
        k_op = extraction_operator(psi, ineq.ac, angles)
        b_op = bell_operator(ineq, angles)
        want = hermitian_eigen(k_op - shift * b_op)[0][0]
        assert val == pytest.approx(want, abs=1e-10)


def test_batch_builders_match_sweeps():
    rng = np.random.default_rng(7)
    ineq, (coeffs, k0, k1, k2) = _arrays("b4")
    psi = canonical_state("cluster4")
    lo, hi = extraction_gammas(ineq.ac, 4)
    thetas = rng.uniform(0, np.pi / 2, size=(10, 4))
    b_ops = pure.bell_operators(coeffs, k0, k1, k2, thetas)
    k_ops = pure.extraction_operators(psi, lo, hi, thetas)
    shift = 0.93
    want = sweep_extraction_margin(psi, lo, hi, coeffs, k0, k1, k2, thetas, shift)
    got = np.linalg.eigvalsh(k_ops - shift * b_ops)[:, 0]
    np.testing.assert_allclose(got, want, atol=1e-10)


@needs_compiled
def test_backends_agree_bell():
    rng = np.random.default_rng(8)
    for name in ("b1", "b3", "b6"):
        _, (coeffs, k0, k1, k2) = _arrays(name)
        thetas = rng.uniform(0, np.pi / 2, size=(50, 4))
        for mode in ("max", "min"):
            a = pure.sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode)
            b = compiled.sweep_bell_extreme(coeffs, k0, k1, k2, thetas, mode)
            np.testing.assert_allclose(a, b, atol=1e-10)


@needs_compiled
def test_backends_agree_margin():
    rng = np.random.default_rng(9)
    for name, state in (("b2", "ghz4"), ("b5", "cluster4")):
        ineq, (coeffs, k0, k1, k2) = _arrays(name)
        psi = canonical_state(state)
        lo, hi = extraction_gammas(ineq.ac, 4)
        thetas = rng.uniform(0, np.pi / 2, size=(50, 4))
        for shift in (0.3, 0.74, 1.1):
            a = pure.sweep_extraction_margin(psi, lo, hi, coeffs, k0, k1, k2, thetas, shift)
            b = compiled.sweep_extraction_margin(psi, lo, hi, coeffs, k0, k1, k2, thetas, shift)
            np.testing.assert_allclose(a, b, atol=1e-10)


def test_sweep_validation():
    _, (coeffs, k0, k1, k2) = _arrays()
    good = np.zeros((3, 4))
    with pytest.raises(ValueError):
        sweep_bell_extreme(coeffs, k0, k1, k2, good, mode="median")
    with pytest.raises(ValueError):
        sweep_bell_extreme(coeffs[:2], k0, k1, k2, good)
    with pytest.raises(ValueError):
        sweep_bell_extreme(coeffs, k0, k1, k2, np.zeros((3, 5)))
    psi = canonical_state("ghz4")
    lo, hi = extraction_gammas(frozenset({1}), 4)
    with pytest.raises(ValueError):
        sweep_extraction_margin(psi[:8], lo, hi, coeffs, k0, k1, k2, good, 1.0)
    with pytest.raises(ValueError):
        sweep_extraction_margin(psi, lo[:2], hi, coeffs, k0, k1, k2, good, 1.0)


def test_single_row_accepts_1d_thetas():
    _, (coeffs, k0, k1, k2) = _arrays()
    one = sweep_bell_extreme(coeffs, k0, k1, k2, np.full(4, np.pi / 4), mode="max")
    assert one.shape == (1,)
    assert one[0] == pytest.approx(2 + 2 * np.sqrt(2), abs=1e-9)
