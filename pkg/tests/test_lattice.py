import numpy as np
import pytest

import oracles
from latticewave.errors import BandNotFound, EdgeSingular
from latticewave.lattice import (
    LatticeSpec,
    band_edge,
    band_frequencies,
    band_frequency,
    bloch_mode,
    bloch_vector,
    cell_energy,
    completeness_check,
    energy_velocity,
    group_velocity,
    group_velocity_fd,
    mode_at_frequency,
    mode_field,
    normalization,
    periodic_part,
    power_flow,
    power_flow_direct,
    smeared_completeness,
    spatial_average,
)

UNIT = LatticeSpec(1.0)


def test_spec_validation_and_index():
    with pytest.raises(ValueError):
        LatticeSpec(-0.1)
    assert LatticeSpec(3.0).index == pytest.approx(2.0)
    assert UNIT.a == UNIT.c == 1.0


def test_bloch_vector_long_wavelength_limit():
    # K ~ n omega for omega a/c << 1
    K = bloch_vector(UNIT, 1e-4)
    assert K.imag == 0.0
    assert K.real == pytest.approx(np.sqrt(2.0) * 1e-4, rel=1e-8)


def test_bloch_vector_branches():
    edge = band_edge(UNIT, 1)
    inside = bloch_vector(UNIT, 0.5 * edge)
    assert inside.imag == 0.0 and 0 < inside.real < np.pi
    gap = bloch_vector(UNIT, edge + 0.05)
    assert gap.real == pytest.approx(np.pi) and gap.imag > 0
    # cos K reproduces the dispersion relation on every branch
    for w in (0.3, edge + 0.05, 4.5, 7.0):
        assert np.cos(bloch_vector(UNIT, w)) == pytest.approx(oracles.dispersion_rhs(1.0, w), abs=1e-12)


def test_band_edge_frozen_value():
    assert band_edge(UNIT, 1) == pytest.approx(1.7206671780387595, abs=1e-13)
    # a strong lattice pushes the first edge below omega a/c = 1
    assert band_edge(LatticeSpec(4.0), 1) < 1.0


def test_band_frequency_against_oracle():
    for band in (1, 2, 3, 4):
        for K in (-2.5, -0.3, 0.2, 1.1, 3.0):
            ref = oracles.band_frequency_newton(1.0, band, K)
            assert band_frequency(UNIT, band, K) == pytest.approx(ref, abs=1e-11)


def test_band_frequency_at_band_extremes():
    # odd bands top out at K = pi, even bands at K = 0; bottoms sit at (n-1) pi
    assert band_frequency(UNIT, 1, np.pi) == pytest.approx(band_edge(UNIT, 1), abs=1e-12)
    assert band_frequency(UNIT, 2, 0.0) == pytest.approx(band_edge(UNIT, 2), abs=1e-12)
    assert band_frequency(UNIT, 2, np.pi) == pytest.approx(np.pi, abs=1e-12)
    assert band_frequency(UNIT, 3, 0.0) == pytest.approx(2 * np.pi, abs=1e-12)


def test_band_frequencies_vectorized_matches_scalar():
    K = np.linspace(-3.0, 3.0, 13)
    vec = band_frequencies(UNIT, 3, K)
    assert np.allclose(vec, [band_frequency(UNIT, 3, k) for k in K], atol=1e-12)


def test_band_frequency_rejects_bad_band():
    with pytest.raises(BandNotFound):
        band_frequency(UNIT, 0, 0.5)


def test_normalization_refuses_band_edge():
    with pytest.raises(EdgeSingular):
        normalization(UNIT, 2, np.pi)


def test_mode_field_matches_transfer_matrix_shape():
    mode = bloch_mode(UNIT, 2, 0.9)
    xs = [0.2, -0.3, 1.4, -2.6, 3.05]
    ratios = np.array([mode_field(mode, x) / oracles.mode_field_direct(1.0, mode.k, mode.K, x) for x in xs])
    assert np.allclose(ratios, ratios[0], rtol=1e-12)


def test_bloch_condition_and_periodic_part():
    mode = bloch_mode(UNIT, 1, 1.2)
    x = np.linspace(-0.49, 0.49, 11)
    assert np.allclose(mode_field(mode, x + 3), np.exp(3j * mode.K) * mode_field(mode, x), atol=1e-13)
    u = periodic_part(mode, x)
    assert np.allclose(periodic_part(mode, x + 1), u, atol=1e-13)


def _inner(m1, m2):
    f = lambda x: np.conj(mode_field(m1, x)) * mode_field(m2, x)
    smooth = oracles.quad_complex(f, -0.5, 0.0) + oracles.quad_complex(f, 0.0, 0.5)
    return smooth + m1.spec.alpha * np.conj(mode_field(m1, 0.0)) * mode_field(m2, 0.0)


@pytest.mark.parametrize("K", [-2.0, 0.4, 2.9])
def test_orthonormality_spot_check(K):
    modes = [bloch_mode(UNIT, n, K) for n in (1, 2, 3)]
    G = np.array([[_inner(a, b) for b in modes] for a in modes])
    assert np.allclose(G, np.eye(3), atol=1e-10)


def test_completeness_pointwise_offdiagonal_decays():
    far = [abs(completeness_check(UNIT, 0.2, -0.3, n, 256)) for n in (4, 16)]
    assert far[1] < far[0]


def test_smeared_completeness_approaches_one():
    assert abs(smeared_completeness(UNIT, 0.23, 0.03, 32, 256) - 1.0) < 5e-3


def test_energy_velocity_equals_group_velocity():
    for band, K in ((1, 0.7), (2, 1.3), (3, -0.4)):
        mode = bloch_mode(UNIT, band, K)
        h = 1e-5
        fd = (band_frequency(UNIT, band, K + h) - band_frequency(UNIT, band, K - h)) / (2 * h)
        assert energy_velocity(mode) == pytest.approx(fd, rel=1e-7)


def test_energy_velocity_is_flow_over_energy():
    mode = bloch_mode(UNIT, 1, 1.0)
    assert power_flow(mode) / cell_energy(mode) == pytest.approx(energy_velocity(mode), rel=1e-10)
    assert np.allclose(power_flow_direct(mode, np.linspace(-0.45, 0.45, 7)), power_flow(mode), rtol=1e-12)


def test_energy_velocity_limits():
    # 1/n at long wavelength; c for the empty lattice
    assert energy_velocity(bloch_mode(UNIT, 1, 1e-3)) == pytest.approx(1 / np.sqrt(2), rel=1e-6)
    assert energy_velocity(bloch_mode(LatticeSpec(0.0), 1, 1.0)) == pytest.approx(1.0, abs=1e-12)


def test_group_velocity_vectorized():
    k = np.array([0.5, 1.0])
    K = np.real(bloch_vector(UNIT, k))
    assert np.allclose(group_velocity(1.0, k, K), group_velocity_fd(UNIT, k), rtol=1e-8)


def test_mode_at_frequency_picks_forward_mode():
    mode = mode_at_frequency(UNIT, 3.5)
    assert mode.band == 2 and energy_velocity(mode) > 0
    with pytest.raises(BandNotFound):
        mode_at_frequency(UNIT, 2.0)


def test_spatial_average_exact():
    mode = bloch_mode(UNIT, 1, 0.8)
    for x in (0.0, 0.3, -1.7):
        f = lambda y: mode_field(mode, x + y)
        pts = [p for p in (np.floor(x + 0.5) - x,) if -0.5 < p < 0.5]
        ref = oracles.quad_complex(f, -0.5, 0.5, points=pts or None)
        assert abs(spatial_average(mode, x) - ref) < 1e-11
