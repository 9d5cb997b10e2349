import numpy as np
import pytest

import oracles
from latticewave.classical import OscillatorSpec
from latticewave.errors import OnShellSingular
from latticewave.lattice import LatticeSpec, band_frequency, bloch_mode, periodic_part
from latticewave.quantum import (
    absorption_rate,
    finite_time_rate,
    fold_bloch_vector,
    fourier_coefficient_u,
    macroscopic_rate,
    resonance_roots,
    transition_amplitude,
)
from latticewave.relativity import FrameBoost

UNIT = LatticeSpec(1.0)
SQRT2 = np.sqrt(2.0)


def test_fourier_coefficient_against_quadrature():
    mode = bloch_mode(UNIT, 2, 1.1)
    for m in (-2, 0, 3):
        f = lambda x: np.conj(mode.N * periodic_part(mode, x)) * np.exp(-2j * np.pi * m * x)
        ref = oracles.quad_complex(f, -0.5, 0.0) + oracles.quad_complex(f, 0.0, 0.5)
        assert abs(fourier_coefficient_u(mode, m) - ref) < 1e-12
    assert fourier_coefficient_u(mode, np.arange(-2, 3)).shape == (5,)


def test_fourier_coefficient_empty_lattice_is_on_shell():
    mode = bloch_mode(LatticeSpec(0.0), 1, 0.7)
    with pytest.raises(OnShellSingular):
        fourier_coefficient_u(mode, 0)


def test_fold_bloch_vector():
    Kf, m = fold_bloch_vector(np.array([0.3, np.pi, 3 * np.pi, -np.pi, 7.0]))
    assert np.allclose(Kf, [0.3, np.pi, np.pi, np.pi, 7.0 - 2 * np.pi])
    assert list(m) == [0, 0, 1, -1, 1]


@pytest.mark.parametrize("omega0,V", [(0.1, 0.8), (1e-5, 0.75), (1.0, 0.5)])
def test_resonance_roots_solve_the_resonance_condition(omega0, V):
    b = FrameBoost(V)
    roots = resonance_roots(UNIT, omega0, b)
    assert roots
    for r in roots:
        assert omega0 / b.gamma + r.k - V * r.K_m == pytest.approx(0.0, abs=1e-12)
        assert np.cos(r.K_m) == pytest.approx(oracles.dispersion_rhs(1.0, r.k), abs=1e-13)
        assert -np.pi < r.K_folded <= np.pi
        assert band_frequency(UNIT, r.band, abs(r.K_folded)) == pytest.approx(r.k, abs=1e-12)
        # slope of the folded band, by finite differences
        h, Kf = 1e-6, abs(r.K_folded)
        fd = (band_frequency(UNIT, r.band, Kf + h) - band_frequency(UNIT, r.band, Kf - h)) / (2 * h)
        assert abs(r.group_velocity) == pytest.approx(abs(fd), rel=1e-6)


def test_no_resonance_at_rest():
    assert resonance_roots(UNIT, 0.1, FrameBoost(0.0)) == []
    assert absorption_rate(UNIT, OscillatorSpec(0.1), FrameBoost(0.0)).rate == 0.0


def test_rate_frames_and_kappa_scaling():
    b = FrameBoost(0.8)
    r1 = absorption_rate(UNIT, OscillatorSpec(0.1, kappa=1.0), b)
    r2 = absorption_rate(UNIT, OscillatorSpec(0.1, kappa=0.5), b)
    assert r1.rate_oscillator_frame == pytest.approx(b.gamma * r1.rate, rel=1e-15)
    assert r2.rate == pytest.approx(0.25 * r1.rate, rel=1e-14)
    assert r1.excluded == []


@pytest.mark.parametrize("V", [0.75, 0.9])
def test_rate_reaches_uniform_medium_value_above_threshold(V):
    osc = OscillatorSpec(1e-5, kappa=0.5)
    b = FrameBoost(V)
    r = absorption_rate(UNIT, osc, b)
    assert r.rate_oscillator_frame / (osc.kappa**2 / (4 * SQRT2)) == pytest.approx(1.0, abs=0.02)
    assert r.rate == pytest.approx(macroscopic_rate(osc, b, SQRT2), rel=1e-4)


def test_rate_suppressed_below_threshold():
    osc = OscillatorSpec(1e-5, kappa=0.5)
    ref = osc.kappa**2 / (4 * SQRT2)
    assert absorption_rate(UNIT, osc, FrameBoost(0.5)).rate_oscillator_frame < 1e-5 * ref


def test_macroscopic_rate_step():
    osc = OscillatorSpec(1.0, kappa=0.6)
    assert macroscopic_rate(osc, FrameBoost(0.5), SQRT2) == 0.0
    # exactly at threshold the step takes the value 0
    assert macroscopic_rate(osc, FrameBoost(0.5), 2.0) == 0.0
    b = FrameBoost(0.8)
    assert macroscopic_rate(osc, b, SQRT2) == pytest.approx(0.36 / (4 * SQRT2 * b.gamma))


def test_transition_amplitude_validation():
    mode = bloch_mode(UNIT, 1, 0.5)
    osc = OscillatorSpec(0.1)
    with pytest.raises(ValueError):
        transition_amplitude(UNIT, osc, FrameBoost(0.8), mode, 10)
    with pytest.raises(ValueError):
        transition_amplitude(UNIT, osc, FrameBoost(0.0), mode, 11)
    amp = transition_amplitude(UNIT, osc, FrameBoost(0.8), mode, 11)
    assert amp.T == pytest.approx(11 / 0.8) and np.isfinite(amp.zeta)


def test_transition_amplitude_grows_linearly_on_resonance():
    # a resonant mode is driven coherently, so |zeta| grows like T
    b = FrameBoost(0.8)
    root = resonance_roots(UNIT, 0.1, b)[0]
    mode = bloch_mode(UNIT, root.band, root.K_folded)
    osc = OscillatorSpec(0.1)
    z = [abs(transition_amplitude(UNIT, osc, b, mode, n).zeta) for n in (1001, 4001)]
    assert z[1] / z[0] == pytest.approx(4.0, rel=0.02)


def test_finite_time_rate_converges_to_rate():
    osc = OscillatorSpec(0.1, kappa=1.0)
    b = FrameBoost(0.8)
    exact = absorption_rate(UNIT, osc, b).rate
    assert finite_time_rate(UNIT, osc, b, 10001) / exact == pytest.approx(1.0, abs=0.01)
