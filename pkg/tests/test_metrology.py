"""Gain extraction, Hellinger and Fisher analyses, and their bounds."""

import math

import numpy as np
import pytest

from mesospin import (
    Direction,
    PhaseScan,
    ProjectionDistribution,
    X_AXIS,
    basis_state,
    classical_fisher,
    equatorial_phase_scan,
    fisher_gain,
    fisher_information,
    gain_from_hellinger,
    gain_from_magnetization,
    gain_from_parity,
    heisenberg_phase_uncertainty,
    hellinger_distance,
    kitten_state,
    parity_gain_from_contrast,
    phase_uncertainty,
    projection_probs,
    sql_phase_uncertainty,
    variance_bound,
)

J = 8.0
KITTEN = kitten_state(J)
COHERENT = basis_state(J, J, X_AXIS)


def _hellinger_grid():
    w = 0.3 / (2 * J)
    return np.linspace(0.0, 3 * w, 25)


def test_limit_values():
    assert sql_phase_uncertainty(J) == pytest.approx(0.25, abs=1e-15)
    assert heisenberg_phase_uncertainty(J) == pytest.approx(0.0625, abs=1e-15)


def test_phase_scan_validation():
    dists = [projection_probs(KITTEN), projection_probs(KITTEN)]
    with pytest.raises(ValueError):
        PhaseScan(phis=[0.0], distributions=dists)
    with pytest.raises(ValueError):
        PhaseScan(phis=[0.1, 0.1], distributions=dists)
    with pytest.raises(ValueError):
        PhaseScan(phis=[0.0, 0.1], distributions=dists, provenance="guessed")


def test_sampled_scan_is_deterministic_and_needs_seed():
    phis = np.linspace(0.0, 0.01, 5)
    s1 = equatorial_phase_scan(KITTEN, phis, atom_total=1000, seed=5)
    s2 = equatorial_phase_scan(KITTEN, phis, atom_total=1000, seed=5)
    assert s1.provenance == "sampled"
    assert s1.atom_total == 1000
    for d1, d2 in zip(s1.distributions, s2.distributions):
        assert np.array_equal(d1.counts, d2.counts)
    with pytest.raises(ValueError):
        equatorial_phase_scan(KITTEN, phis, atom_total=1000)


def test_phase_uncertainty_from_linear_mean_curve():
    phis = np.linspace(0.0, 1.0, 11)
    assert phase_uncertainty(phis, 3 * phis, np.full(11, 0.36), 0.5) == pytest.approx(
        0.2, rel=1e-12
    )
    with pytest.raises(ValueError):
        phase_uncertainty(phis, np.ones(11), np.full(11, 0.36), 0.5)


def test_parity_readout_reaches_heisenberg_uncertainty():
    phis = np.linspace(0.0, math.pi / 8, 129)
    p = np.sin(16 * phis)
    got = phase_uncertainty(phis, p, 1 - p**2, 0.0)
    assert got == pytest.approx(heisenberg_phase_uncertainty(J), rel=1e-3)


def test_parity_gain_of_ideal_superposition():
    phis = np.linspace(0.0, math.pi / 8, 129)
    rep = gain_from_parity(equatorial_phase_scan(KITTEN, phis), varz_bound=64.0)
    assert rep.method == "parity"
    assert rep.gain == pytest.approx(16.0, abs=1e-9)
    assert rep.fit.period == pytest.approx(math.pi / 8, abs=1e-9)
    assert rep.bound == pytest.approx(16.0, abs=1e-9)
    assert rep.gain <= rep.bound + 1e-9


def test_parity_gain_from_contrast_value():
    assert parity_gain_from_contrast(8, 0.74) == pytest.approx(8.7616, abs=1e-12)
    assert parity_gain_from_contrast(8, 1.0) == pytest.approx(16.0, abs=1e-12)


def test_hellinger_distance_extremes_and_validation():
    z0 = projection_probs(basis_state(8, 0))
    z1 = projection_probs(basis_state(8, 1))
    assert hellinger_distance(z0, z0) == pytest.approx(0.0, abs=1e-15)
    assert hellinger_distance(z0, z1) == pytest.approx(1.0, abs=1e-15)
    x = projection_probs(basis_state(8, 0, X_AXIS), X_AXIS)
    with pytest.raises(ValueError):
        hellinger_distance(z0, x)
    half = projection_probs(basis_state(3.5, 0.5))
    with pytest.raises(ValueError):
        hellinger_distance(z0, half)


def test_hellinger_gain_and_slope_ratio():
    phis = _hellinger_grid()
    gk = gain_from_hellinger(equatorial_phase_scan(KITTEN, phis), 0.0)
    gc = gain_from_hellinger(equatorial_phase_scan(COHERENT, phis), 0.0)
    assert gk.gain == pytest.approx(16.0, rel=0.02)
    assert gc.gain == pytest.approx(1.0, rel=0.02)
    # slope^2 = gain * j/4, so the squared slope ratio is the gain ratio
    assert gk.gain / gc.gain == pytest.approx(16.0, rel=0.02)
    coherent_slope = math.sqrt(gc.gain * J / 4.0)
    assert coherent_slope == pytest.approx(math.sqrt(2.0), rel=0.01)


def test_hellinger_gain_needs_fine_scan():
    phis = np.linspace(0.0, math.pi / 8, 33)
    scan = equatorial_phase_scan(KITTEN, phis)
    with pytest.raises(ValueError):
        gain_from_hellinger(scan, 0.0)


def test_hellinger_bias_correction_needs_atom_total():
    scan = equatorial_phase_scan(KITTEN, _hellinger_grid())
    with pytest.raises(ValueError):
        gain_from_hellinger(scan, 0.0, bias_correction=True)


def test_sampled_hellinger_gain_near_ideal():
    scan = equatorial_phase_scan(KITTEN, _hellinger_grid(), atom_total=90000, seed=3)
    rep = gain_from_hellinger(scan, 0.0)
    assert 13.0 < rep.gain < 19.0
    assert rep.uncertainty > 0.0


def _three_outcome_dist(mu):
    """Support {-8, 0, +8} with mean mu and constant second moment 49."""
    p = np.zeros(17)
    p[16] = (49 / 64 + mu / 8) / 2
    p[0] = (49 / 64 - mu / 8) / 2
    p[8] = 1.0 - p[0] - p[16]
    return ProjectionDistribution(j=8.0, axis=Direction(0.0, 0.0), probabilities=p)


def test_magnetization_gain_hand_computed():
    phis = np.arange(64) * math.pi / 64
    dists = [_three_outcome_dist(6 * math.cos(16 * phi)) for phi in phis]
    scan = PhaseScan(phis=phis, distributions=dists)
    rep = gain_from_magnetization(scan)
    assert rep.fit.amplitude == pytest.approx(6.0, abs=1e-9)
    # variance at the zero crossings is 49 - mu^2 = 49, so G = 2j A^2/49
    assert rep.gain == pytest.approx(576 / 49, rel=1e-9)


def test_classical_fisher_matches_exact_information():
    phis = np.linspace(0.0, math.pi / 8, 129)
    scan = equatorial_phase_scan(KITTEN, phis)
    assert classical_fisher(scan, 0.0) == pytest.approx(256.0, rel=0.01)


def test_exact_fisher_information_values():
    assert fisher_information(KITTEN, 0.0) == pytest.approx(256.0, abs=1e-9)
    assert fisher_information(COHERENT, math.pi / 2) == pytest.approx(16.0, abs=1e-9)
    assert fisher_information(COHERENT, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_fisher_gain_saturates_heisenberg_for_ideal_state():
    assert fisher_gain(KITTEN) == pytest.approx(16.0, abs=1e-9)


def test_variance_bound_values():
    assert variance_bound(KITTEN) == pytest.approx(16.0, abs=1e-9)
    assert variance_bound(COHERENT) == pytest.approx(1.0, abs=1e-9)
    rho = np.outer(KITTEN, KITTEN.conj())
    assert variance_bound(rho) == pytest.approx(16.0, abs=1e-9)
