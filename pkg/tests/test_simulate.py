"""Unit tests for noise models, counts simulation, and fidelity estimators."""

import numpy as np
import pytest

from graphbell.bell import (
    MeasurementAngles,
    experimental_frame,
    observables_from_angles,
    preset_family,
    preset_inequality,
    required_correlators,
)
from graphbell.graphs import canonical_state
from graphbell.linalg import (
    PAULI_X,
    PAULI_Z,
    expectation,
    hermitian_eigen,
    kron,
    partial_trace,
    projector,
)
from graphbell.simulate import (
    CLUSTER_STABILIZER_COUNT,
    GHZ_COHERENCE_SETTINGS,
    CorrelatorEstimate,
    CountsRecord,
    NoiseSpec,
    bell_value_from_counts,
    cluster_expectations,
    cluster_fidelity,
    cluster_stabilizer_table,
    coherence_observable,
    estimate_correlator,
    ghz_coherence_setting,
    ghz_fidelity_from_counts,
    ghz_fidelity_from_values,
    ghz_fidelity_terms,
    ghz_population_setting,
    noisy_state,
    outcome_distribution,
    outcome_strings,
    preset_noise,
    sample_counts,
    simulate_bell_records,
)

GHZ = canonical_state("ghz4")
CLUSTER = canonical_state("cluster4")


# ---------------------------------------------------------------------------
# Noise model.


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(-0.1, np.eye(16) / 16)
    with pytest.raises(ValueError):
        NoiseSpec(0.1, np.eye(16))  # trace 16
    NoiseSpec(0.0, np.eye(16) / 16)


def test_noisy_state_limits():
    spec = preset_noise("ghz", 0.0)
    np.testing.assert_allclose(noisy_state(GHZ, spec), projector(GHZ), atol=1e-12)
    heavy = preset_noise("ghz", 1e6)
    np.testing.assert_allclose(noisy_state(GHZ, heavy), heavy.noise_state, atol=1e-5)


def test_noisy_state_overlap_formula():
    # mixing weight p dilutes the target overlap as (1 + p q)/(1 + p)
    for family, psi in (("ghz", GHZ), ("cluster", CLUSTER)):
        spec0 = preset_noise(family, 1.0)
        q = expectation(spec0.noise_state, projector(psi))
        for p in (0.05, 0.1, 0.3):
            rho = noisy_state(psi, preset_noise(family, p))
            want = (1 + p * q) / (1 + p)
            assert expectation(rho, projector(psi)) == pytest.approx(want, abs=1e-12), family
    # the ghz leakage overlap is exactly one half
    ghz_noise = preset_noise("ghz", 1.0)
    assert expectation(ghz_noise.noise_state, projector(GHZ)) == pytest.approx(0.5, abs=1e-12)


def test_preset_noise_structure():
    spec = preset_noise("ghz", 0.2)
    assert spec.p == 0.2
    assert np.trace(spec.noise_state).real == pytest.approx(1.0, abs=1e-12)
    assert hermitian_eigen(spec.noise_state)[0][0] >= -1e-12
    # independent pairs: the (1,2) marginal is pure, the (2,3) marginal is not
    pair_red = partial_trace(spec.noise_state, (1, 2), 4)
    assert np.trace(pair_red @ pair_red).real == pytest.approx(1.0, abs=1e-10)
    cross_red = partial_trace(spec.noise_state, (2, 3), 4)
    np.testing.assert_allclose(cross_red, np.eye(4) / 4, atol=1e-12)
    with pytest.raises(ValueError):
        preset_noise("w", 0.1)


def test_preset_noise_dephased_is_diagonal():
    spec = preset_noise("cluster", 0.1, dephased=True)
    off = spec.noise_state - np.diag(np.diag(spec.noise_state))
    assert np.abs(off).max() == 0.0
    assert np.trace(spec.noise_state).real == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Outcome distributions.


def test_outcome_strings_order():
    assert outcome_strings(2) == ("++", "+-", "-+", "--")
    assert len(outcome_strings(4)) == 16


def test_distribution_ghz_all_z():
    dist = outcome_distribution(GHZ, [PAULI_Z] * 4)
    assert dist["++++"] == pytest.approx(0.5, abs=1e-12)
    assert dist["----"] == pytest.approx(0.5, abs=1e-12)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    others = [v for k, v in dist.items() if k not in ("++++", "----")]
    np.testing.assert_allclose(others, 0.0, atol=1e-12)


def test_distribution_ghz_all_x():
    # X^4 on the GHZ state is uniform over the 8 even-minus-count outcomes
    dist = outcome_distribution(GHZ, [PAULI_X] * 4)
    for outcome, prob in dist.items():
        parity = outcome.count("-") % 2
        want = 0.125 if parity == 0 else 0.0
        assert prob == pytest.approx(want, abs=1e-12), outcome


def test_distribution_maximally_mixed():
    dist = outcome_distribution(np.eye(4) / 4, [PAULI_X, PAULI_Z])
    for v in dist.values():
        assert v == pytest.approx(0.25, abs=1e-12)


def test_distribution_rejects_non_dichotomic():
    with pytest.raises(ValueError):
        outcome_distribution(GHZ, [PAULI_X, PAULI_X, PAULI_X, 0.5 * PAULI_X])


def test_distribution_no_signaling():
    # party 1 marginal cannot depend on which observable party 2 measures
    rng = np.random.default_rng(77)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    d_xz = outcome_distribution(v, [PAULI_X, PAULI_Z])
    d_xx = outcome_distribution(v, [PAULI_X, PAULI_X])
    p_plus_z = d_xz["++"] + d_xz["+-"]
    p_plus_x = d_xx["++"] + d_xx["+-"]
    assert p_plus_z == pytest.approx(p_plus_x, abs=1e-10)


# ---------------------------------------------------------------------------
# Counts records and sampling.


def test_counts_record_validation():
    CountsRecord("A1 B2", {"++": 3, "--": 1})
    with pytest.raises(ValueError):
        CountsRecord("A1 B2", {"+++": 3})  # width mismatch
    with pytest.raises(ValueError):
        CountsRecord("A1 B2", {"+0": 3})  # bad outcome character
    with pytest.raises(ValueError):
        CountsRecord("A1 B2", {"++": -1})
    with pytest.raises(ValueError):
        CountsRecord("A1 A1", {"++": 1})  # duplicate party
    with pytest.raises(ValueError):
        CountsRecord("A B2", {"++": 3})  # token without index


def test_counts_record_token_syntax():
    rec = CountsRecord("M0:1 M0:2", {"++": 5})
    assert rec.parsed_setting() == ((1, "M0"), (2, "M0"))
    plain = CountsRecord("A1 B12", {"+-": 2})
    assert plain.parsed_setting() == ((1, "A"), (12, "B"))
    assert plain.total() == 2


def test_counts_record_json_round_trip():
    rec = CountsRecord("A1 B2 B3 B4", {"++++": 10, "+-+-": 4})
    again = CountsRecord.from_json(rec.to_json())
    assert again == rec


def test_sample_counts_deterministic_and_poisson():
    dist = {"++": 1.0}
    rec = sample_counts(dist, 1000, seed=3, setting="A1 A2")
    assert set(rec.counts) == {"++"}
    assert abs(rec.total() - 1000) < 5 * np.sqrt(1000)
    # identical seeds give identical draws
    again = sample_counts(dist, 1000, seed=3, setting="A1 A2")
    assert again == rec
    with pytest.raises(ValueError):
        sample_counts(dist, 0, seed=1, setting="A1 A2")


def test_sample_counts_uniform_cells():
    dist = {k: 0.25 for k in outcome_strings(2)}
    rec = sample_counts(dist, 1_000_000, seed=11, setting="A1 B2")
    for k in dist:
        assert abs(rec.counts[k] - 250_000) < 5 * np.sqrt(250_000), k


# ---------------------------------------------------------------------------
# Correlator estimation.


def test_estimate_correlator_exact_cases():
    perfect = estimate_correlator(CountsRecord("A1 A2 A3 A4", {"++++": 100}))
    assert perfect.value == 1.0
    assert perfect.sigma == 0.0
    assert perfect.n_events == 100
    balanced = estimate_correlator(CountsRecord("A1 B2", {"++": 50, "+-": 50}))
    assert balanced.value == 0.0
    assert balanced.sigma == pytest.approx(0.1, abs=1e-12)


def test_estimate_correlator_marginals():
    rec = CountsRecord("A1 B2", {"++": 30, "+-": 20, "-+": 10, "--": 40})
    assert estimate_correlator(rec).value == pytest.approx(0.4)
    one = estimate_correlator(rec, parties=(1,))
    assert one.value == pytest.approx(0.0)
    assert one.sigma == pytest.approx(0.1, abs=1e-12)
    assert estimate_correlator(rec, parties=(2,)).value == pytest.approx(-0.2)
    with pytest.raises(ValueError, match="party 3"):
        estimate_correlator(rec, parties=(3,))


def test_estimate_correlator_no_events():
    with pytest.raises(ValueError):
        estimate_correlator(CountsRecord("A1 B2", {}))


def test_correlator_estimate_range_gate():
    with pytest.raises(ValueError):
        CorrelatorEstimate(1.5, 0.0, 10)


# diagonal observable (X+Z)/sqrt2; <D D D D> on GHZ is 1/2, so outcomes stay random
DIAG = (PAULI_X + PAULI_Z) / np.sqrt(2)


def test_sigma_scales_with_events():
    dist = outcome_distribution(GHZ, [DIAG] * 4)
    sigmas = []
    for i, n in enumerate((1_000, 10_000, 100_000)):
        rec = sample_counts(dist, n, seed=100 + i, setting="D1 D2 D3 D4")
        sigmas.append(estimate_correlator(rec).sigma)
    assert sigmas[0] / sigmas[1] == pytest.approx(np.sqrt(10), rel=0.2)
    assert sigmas[1] / sigmas[2] == pytest.approx(np.sqrt(10), rel=0.2)


def test_reported_sigma_tracks_seed_scatter():
    # the delta-method sigma agrees with the scatter over independent seeds
    dist = outcome_distribution(GHZ, [DIAG] * 4)
    values, reported = [], []
    for seed in range(10):
        rec = sample_counts(dist, 20_000, seed=seed, setting="D1 D2 D3 D4")
        est = estimate_correlator(rec)
        values.append(est.value)
        reported.append(est.sigma)
    assert np.mean(values) == pytest.approx(0.5, abs=0.02)
    scatter = np.std(values, ddof=1)
    mean_sigma = np.mean(reported)
    assert 0.5 < scatter / mean_sigma < 2.0


# ---------------------------------------------------------------------------
# Bell value from counts.


def test_bell_value_from_counts_ideal():
    ineq = preset_inequality("b1")
    records = simulate_bell_records(ineq, events_per_setting=1_000_000, seed=0)
    value, sigma = bell_value_from_counts(records, ineq)
    assert sigma < 0.01
    assert abs(value - ineq.quantum_bound_value) < 3 * sigma


def test_bell_value_from_counts_missing_setting():
    ineq = preset_inequality("b1")
    records = simulate_bell_records(ineq, events_per_setting=1000, seed=1)
    labels = [r.setting for r in records]
    dropped = [r for r in records if r.setting != labels[0]]
    with pytest.raises(ValueError, match=labels[0].split()[0]):
        bell_value_from_counts(dropped, ineq)


def test_bell_value_deterministic_under_seed():
    ineq = preset_inequality("b6")
    a = simulate_bell_records(ineq, events_per_setting=5000, seed=42)
    b = simulate_bell_records(ineq, events_per_setting=5000, seed=42)
    assert a == b
    va, _ = bell_value_from_counts(a, ineq)
    vb, _ = bell_value_from_counts(b, ineq)
    assert va == vb


def test_bell_value_sigma_calibrated():
    # empirical scatter of the Bell value over seeds matches the propagated
    # sigma, and the mean shows no bias against the quantum bound
    ineq = preset_inequality("b3")
    vals, sigs = [], []
    for seed in range(60):
        records = simulate_bell_records(ineq, events_per_setting=5_000, seed=seed)
        v, s = bell_value_from_counts(records, ineq)
        vals.append(v)
        sigs.append(s)
    vals, sigs = np.array(vals), np.array(sigs)
    ratio = vals.std(ddof=1) / sigs.mean()
    assert 0.75 < ratio < 1.35
    bias = vals.mean() - ineq.quantum_bound_value
    assert abs(bias) < 3 * vals.std(ddof=1) / np.sqrt(len(vals))


def test_simulate_bell_records_settings_and_totals():
    ineq = preset_inequality("b5")
    reqs = required_correlators(ineq)
    records = simulate_bell_records(ineq, events_per_setting=20_000, seed=7)
    assert [r.setting for r in records] == [req.setting_label for req in reqs]
    for rec in records:
        assert abs(rec.total() - 20_000) < 5 * np.sqrt(20_000)


def test_simulate_bell_records_noise_lowers_value():
    ineq = preset_inequality("b1")
    clean, _ = bell_value_from_counts(simulate_bell_records(ineq, events_per_setting=200_000, seed=5), ineq)
    noisy, _ = bell_value_from_counts(
        simulate_bell_records(ineq, noise_p=0.3, events_per_setting=200_000, seed=5), ineq
    )
    assert noisy < clean - 0.1


def test_simulate_bell_records_rejects_wrong_state():
    ineq = preset_inequality("b1")
    with pytest.raises(ValueError):
        simulate_bell_records(ineq, state=np.array([1.0] + [0.0] * 7))


def test_simulated_correlators_match_reduced_state():
    # each record's correlator estimate sits near its exact reduced-state value
    ineq = preset_inequality("b4")
    frame = experimental_frame(ineq, preset_family(ineq.name))
    records = simulate_bell_records(ineq, events_per_setting=500_000, seed=9)
    for req, rec in zip(required_correlators(ineq), records):
        ops = [frame.pairs[p - 1][0 if o == "A" else 1] for p, o in req.letters]
        exact = expectation(CLUSTER, _lift(ops, [p for p, _ in req.letters]))
        est = estimate_correlator(rec)
        assert abs(est.value - exact) < 4 * max(est.sigma, 1e-6), req.setting_label


def _lift(ops, parties, n=4):
    from graphbell.linalg import IDENTITY_2

    factors = [IDENTITY_2] * n
    for op, p in zip(ops, parties):
        factors[p - 1] = op
    return kron(*factors)


# ---------------------------------------------------------------------------
# GHZ fidelity.


def test_coherence_observables():
    np.testing.assert_allclose(coherence_observable(0), PAULI_X, atol=1e-15)
    for k in range(GHZ_COHERENCE_SETTINGS):
        m = coherence_observable(k)
        np.testing.assert_allclose(m @ m, np.eye(2), atol=1e-12)
    with pytest.raises(ValueError):
        coherence_observable(4)


def test_ghz_setting_names():
    assert ghz_population_setting() == "Z1 Z2 Z3 Z4"
    assert ghz_coherence_setting(0) == "M0:1 M0:2 M0:3 M0:4"
    assert ghz_coherence_setting(3) == "M3:1 M3:2 M3:3 M3:4"


def test_ghz_fidelity_terms_ideal():
    population, coherences = ghz_fidelity_terms(GHZ)
    assert population == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(coherences, [1.0, -1.0, 1.0, -1.0], atol=1e-12)
    f, sigma = ghz_fidelity_from_values(population, coherences)
    assert f == pytest.approx(1.0, abs=1e-12)
    assert sigma == 0.0


def test_ghz_fidelity_dephased_is_half():
    rho = np.zeros((16, 16), dtype=complex)
    rho[0, 0] = rho[15, 15] = 0.5
    population, coherences = ghz_fidelity_terms(rho)
    assert population == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(coherences, 0.0, atol=1e-12)
    f, _ = ghz_fidelity_from_values(population, coherences)
    assert f == pytest.approx(0.5, abs=1e-12)


def test_ghz_fidelity_reference_values():
    f, _ = ghz_fidelity_from_values(0.994, [0.918, -0.924, 0.916, -0.920])
    assert f == pytest.approx(0.95675, abs=1e-12)


def test_ghz_fidelity_sigma_combination():
    _, sigma = ghz_fidelity_from_values(0.9, [0.9, -0.9, 0.9, -0.9], 0.01, [0.02, 0.02, 0.02, 0.02])
    want = np.sqrt(0.01**2 + 4 * 0.02**2 / 16) / 2
    assert sigma == pytest.approx(want, abs=1e-15)


def test_ghz_fidelity_from_values_validation():
    with pytest.raises(ValueError):
        ghz_fidelity_from_values(1.0, [1.0, -1.0])
    with pytest.raises(ValueError):
        ghz_fidelity_from_values(1.0, [1.0, -1.0, 1.0, -1.0], 0.0, [0.1])


def test_ghz_fidelity_estimator_matches_state_overlap():
    # for the pair-leakage mixture the estimator equals the true fidelity
    for p in (0.05, 0.2):
        rho = noisy_state(GHZ, preset_noise("ghz", p))
        population, coherences = ghz_fidelity_terms(rho)
        f, _ = ghz_fidelity_from_values(population, coherences)
        assert f == pytest.approx(expectation(rho, projector(GHZ)), abs=1e-12)


def test_ghz_fidelity_stabilizer_diagonal_mixture():
    flipped = GHZ.copy()
    flipped[15] *= -1  # orthogonal GHZ-basis partner
    rho = 0.8 * projector(GHZ) + 0.2 * projector(flipped)
    population, coherences = ghz_fidelity_terms(rho)
    f, _ = ghz_fidelity_from_values(population, coherences)
    assert f == pytest.approx(0.8, abs=1e-12)


def test_ghz_fidelity_from_counts_ideal_and_noisy():
    pop_rec = sample_counts(outcome_distribution(GHZ, [PAULI_Z] * 4), 100_000, 0, ghz_population_setting())
    coh_recs = [
        sample_counts(outcome_distribution(GHZ, [coherence_observable(k)] * 4), 100_000, k + 1, ghz_coherence_setting(k))
        for k in range(4)
    ]
    f, sigma = ghz_fidelity_from_counts(pop_rec, coh_recs)
    assert f == pytest.approx(1.0, abs=1e-12)
    assert sigma == pytest.approx(0.0, abs=1e-12)

    p = 0.05
    rho = noisy_state(GHZ, preset_noise("ghz", p))
    pop_rec = sample_counts(outcome_distribution(rho, [PAULI_Z] * 4), 200_000, 10, ghz_population_setting())
    coh_recs = [
        sample_counts(outcome_distribution(rho, [coherence_observable(k)] * 4), 200_000, 11 + k, ghz_coherence_setting(k))
        for k in range(4)
    ]
    f, sigma = ghz_fidelity_from_counts(pop_rec, coh_recs)
    want = (1 + p / 2) / (1 + p)
    assert sigma > 0
    assert abs(f - want) < 3 * sigma


def test_ghz_fidelity_from_counts_validation():
    pop = CountsRecord("Z1 Z2 Z3 Z4", {"++++": 10})
    good = [CountsRecord(ghz_coherence_setting(k), {"++++": 5}) for k in range(4)]
    with pytest.raises(ValueError):
        ghz_fidelity_from_counts(CountsRecord("X1 X2 X3 X4", {"++++": 1}), good)
    with pytest.raises(ValueError):
        ghz_fidelity_from_counts(pop, good[:3])
    swapped = [good[1], good[0], good[2], good[3]]
    with pytest.raises(ValueError):
        ghz_fidelity_from_counts(pop, swapped)


# ---------------------------------------------------------------------------
# Cluster fidelity.


def test_cluster_stabilizer_table_structure():
    table = cluster_stabilizer_table()
    assert len(table) == CLUSTER_STABILIZER_COUNT
    assert str(table[0]) == "+I1I2I3I4"
    seen = {str(p) for p in table}
    assert len(seen) == 16
    vals = cluster_expectations(CLUSTER)
    np.testing.assert_allclose(vals, 1.0, atol=1e-10)


def test_cluster_fidelity_ideal_and_uniform():
    f, sigma = cluster_fidelity(cluster_expectations(CLUSTER))
    assert f == pytest.approx(1.0, abs=1e-10)
    assert sigma == 0.0
    # the maximally mixed state keeps only the identity row
    mixed = np.eye(16) / 16
    f, _ = cluster_fidelity(cluster_expectations(mixed))
    assert f == pytest.approx(1 / 16, abs=1e-12)


def test_cluster_fidelity_reference_values():
    values = [1.0, 0.993, 0.930, 0.931, 0.993, 0.933, 0.927, 0.986,
              0.932, 0.932, 0.944, 0.920, 0.924, 0.942, 0.924, 0.916]
    sigmas = [0.0, 0.003, 0.010, 0.010, 0.003, 0.010, 0.010, 0.004,
              0.010, 0.010, 0.009, 0.011, 0.011, 0.009, 0.011, 0.011]
    f, sigma = cluster_fidelity(values, sigmas)
    assert f == pytest.approx(0.9454375, abs=1e-12)
    from graphbell.robustness import format_uncertainty

    assert format_uncertainty(f, sigma) == "0.945(2)"


def test_cluster_fidelity_validation():
    ones = [1.0] * 16
    cluster_fidelity(ones)
    with pytest.raises(ValueError):
        cluster_fidelity(ones[:15])
    bad = ones.copy()
    bad[0] = 0.9  # identity expectation must be exactly 1
    with pytest.raises(ValueError):
        cluster_fidelity(bad)
    with pytest.raises(ValueError):
        cluster_fidelity(ones, [0.0] * 15)


def test_cluster_fidelity_stabilizer_diagonal_mixture():
    z1 = kron(PAULI_Z, np.eye(2), np.eye(2), np.eye(2))
    rho = 0.7 * projector(CLUSTER) + 0.3 * z1 @ projector(CLUSTER) @ z1
    f, _ = cluster_fidelity(cluster_expectations(rho))
    want = expectation(rho, projector(CLUSTER))
    assert want == pytest.approx(0.7, abs=1e-12)
    assert f == pytest.approx(want, abs=1e-10)
