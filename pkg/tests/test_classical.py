import numpy as np
import pytest
from scipy.integrate import quad

import oracles
from latticewave.classical import (
    OscillatorSpec,
    MacroscopicMedium,
    average_work,
    green_bloch,
    green_fixed_frequency,
    green_free,
    green_moving_frame,
    lattice_D,
    lattice_D_closed,
    macroscopic_damping,
    macroscopic_wavenumbers,
    oscillator_trajectory,
    work_roots,
    work_trace,
)
from latticewave.errors import OnShellSingular, ThresholdSingular
from latticewave.lattice import LatticeSpec, bloch_vector
from latticewave.relativity import FrameBoost

UNIT = LatticeSpec(1.0)
STRONG = LatticeSpec(4.0)
SQRT2 = np.sqrt(2.0)


# -- uniform medium ---------------------------------------------------------


def test_oscillator_spec_validation():
    with pytest.raises(ValueError):
        OscillatorSpec(0.0)
    with pytest.raises(ValueError):
        OscillatorSpec(1.0, kappa=np.inf)
    assert MacroscopicMedium.from_lattice(UNIT).n == pytest.approx(SQRT2)


def test_macroscopic_wavenumbers():
    kp, km = macroscopic_wavenumbers(1.0, 0.0, 1.5)
    assert (kp, km) == (pytest.approx(1.5), pytest.approx(-1.5))
    kp, km = macroscopic_wavenumbers(1.0, 0.9, SQRT2)
    assert kp.real < 0 and km.real < 0
    with pytest.raises(ThresholdSingular):
        macroscopic_wavenumbers(1.0, 1 / SQRT2, SQRT2)


def test_macroscopic_damping_step_is_exact():
    for V in (0.0, 0.3, -0.6):
        assert macroscopic_damping(1.0, V, SQRT2, 0.7) == 0.7**2 / (2 * SQRT2)
    for V in (0.75, -0.9):
        assert macroscopic_damping(1.0, V, SQRT2, 0.7) == 0.0


@pytest.mark.parametrize("gamma", [0.0, 0.3, 2.0, 5.0])
def test_trajectory_against_ode(gamma):
    osc = OscillatorSpec(1.0, X0=1.0, Xdot0=-0.4)
    t = np.linspace(0.0, 30.0, 301)
    ref = oracles.ode_trajectory(1.0, gamma, 1.0, -0.4, t)
    assert np.max(np.abs(oscillator_trajectory(osc, gamma, t) - ref)) < 1e-9


def test_trajectory_undamped_is_cosine():
    t = np.linspace(0, 10, 50)
    assert np.allclose(oscillator_trajectory(OscillatorSpec(2.0), 0.0, t), np.cos(2 * t), atol=1e-14)


# -- lattice dispersion function -----------------------------------------------


def test_lattice_D_dual_and_brute():
    k0, K = 0.5 + 0.1j, 0.3
    d = lattice_D(UNIT, k0, K)
    assert abs(d.sum_value - d.closed_value) < 1e-10
    brute = 1 + k0 * k0 * oracles.brute_lattice_sum(k0, K)
    assert abs(d.closed_value - brute) < 1e-8


def test_lattice_D_vanishes_on_the_band_structure():
    for w in (0.3, 1.2):
        K = bloch_vector(UNIT, w).real
        assert abs(lattice_D_closed(1.0, w, K)) < 1e-12


def test_lattice_D_on_shell():
    with pytest.raises(OnShellSingular):
        lattice_D(UNIT, 0.4, 0.4)


# -- Green functions -----------------------------------------------------------


@pytest.mark.parametrize("omega", [0.4, 1.0, 1.5])
def test_green_function_against_finite_chain(omega):
    eta = 0.4
    for x in (-3.7, 0.3, 0.25, 2.05, 4.2):
        ref = oracles.chain_green(1.0, omega + 1j * eta, x, 0.3, np.arange(-20, 21))
        assert abs(green_fixed_frequency(UNIT, x, 0.3, omega, eta) / ref - 1) < 1e-8


def test_green_bloch_matches_array_form():
    for omega, eta in ((0.4, 0.4), (1.0, 0.01), (2.0, 0.1)):
        for x, x0 in ((0.3, -0.2), (1.7, 0.1), (0.0, 0.0)):
            a = green_fixed_frequency(UNIT, x, x0, omega, eta)
            assert abs(green_bloch(UNIT, x, x0, omega, eta) / a - 1) < 1e-12


def test_green_reciprocity_and_free_limit():
    assert green_bloch(UNIT, 1.3, -0.4, 0.8, 0.05) == pytest.approx(green_bloch(UNIT, -0.4, 1.3, 0.8, 0.05), rel=1e-12)
    empty = LatticeSpec(0.0)
    assert green_fixed_frequency(empty, 0.5, 0.1, 1.0, 0.2) == pytest.approx(green_free(1.0 + 0.2j, 0.4))


def test_green_moving_frame_free_and_causal():
    empty = LatticeSpec(0.0)
    b = FrameBoost(0.5)
    # a moving-frame delay of 1 at fixed x' is a lattice-frame delay of gamma
    assert green_moving_frame(empty, 0.0, 0.0, 1.0, 0.0, b, eta=0.1) == pytest.approx(-0.5 * np.exp(-0.1 * b.gamma))
    # outside the light cone the free part vanishes in every frame
    assert green_moving_frame(empty, 2.0, 0.0, 1.0, 0.0, b) == 0.0


def test_green_moving_frame_against_frequency_quadrature():
    eta = 0.1
    for x, x0, tau in ((0.3, 0.3, 1.5), (1.7, 0.2, 0.8)):
        f = lambda w: np.real(np.exp(-1j * w * tau) * (green_bloch(UNIT, x, x0, w, eta) - green_free(w + 1j * eta, x - x0)))
        ref = quad(f, 0, 40, limit=2000)[0] / np.pi + (-0.5 * np.exp(-eta * tau) if tau > abs(x - x0) else 0.0)
        assert abs(green_moving_frame(UNIT, x, x0, tau, 0.0, FrameBoost(0.0), eta=eta) - ref) < 1e-10


def test_green_moving_frame_boost_consistency():
    # the same pair of lattice-frame events gives the same value in any frame
    b = FrameBoost(0.4)
    xp, tp = 0.9, 1.1
    x, t = (b.gamma * (xp + b.V * tp), b.gamma * (tp + b.V * xp))
    moving = green_moving_frame(UNIT, xp, 0.2, tp, 0.0, b)
    x0, t0 = b.gamma * 0.2, b.gamma * b.V * 0.2
    rest = green_moving_frame(UNIT, x, x0, t, t0, FrameBoost(0.0))
    assert moving == pytest.approx(rest, abs=1e-12)


# -- work ---------------------------------------------------------------------


def test_average_work_empty_lattice():
    osc = OscillatorSpec(1.0, kappa=0.8)
    assert average_work(LatticeSpec(0.0), osc, FrameBoost(0.5), 0.3) == pytest.approx(0.25 * 0.64 * 0.09)


@pytest.mark.parametrize("alpha", [1.0, 4.0])
def test_average_work_at_rest_matches_macroscopic_damping(alpha):
    # cycle-averaged power of the damping force, Gamma omega^2 / 2
    spec, w = LatticeSpec(alpha), 1e-3
    n = spec.index
    gamma_damp = macroscopic_damping(w, 0.0, n, 1.0)
    assert average_work(spec, OscillatorSpec(w), FrameBoost(0.0), w) / (gamma_damp * w * w / 2) == pytest.approx(1.0, abs=0.02)


def test_average_work_at_rest_is_position_averaged_local_value():
    w = 0.1
    xs = (np.arange(200) + 0.5) / 200
    local = [-(w**3 / 2) * green_bloch(STRONG, x, x, w, 1e-9).imag for x in xs]
    assert average_work(STRONG, OscillatorSpec(w), FrameBoost(0.0), w) == pytest.approx(np.mean(local), rel=1e-6)


def test_average_work_continuous_at_rest():
    osc = OscillatorSpec(0.1)
    at_rest = average_work(STRONG, osc, FrameBoost(0.0), 0.1)
    assert average_work(STRONG, osc, FrameBoost(1e-4), 0.1) == pytest.approx(at_rest, rel=1e-8)


def test_average_work_rejects_negative_velocity():
    with pytest.raises(ValueError):
        average_work(STRONG, OscillatorSpec(1.0), FrameBoost(-0.2), 0.1)


def test_work_roots_are_roots():
    b = FrameBoost(0.6)
    roots = work_roots(STRONG, b, 0.1)
    assert roots
    for r in roots:
        # zeros of D(k0, q): cos q = cos k0 - (alpha k0 / 2) sin k0
        # residual scaled by the size of the terms being cancelled
        scale = 1 + 2 * abs(r.k0)
        assert abs(np.cos(r.q) - oracles.dispersion_rhs(4.0, r.k0)) < 1e-13 * scale
        assert r.k0 == pytest.approx(0.1 / b.gamma + 0.6 * r.q, rel=1e-14, abs=1e-14)


def test_work_trace_mean_matches_residue_sum():
    osc = OscillatorSpec(1.0)
    tr = work_trace(STRONG, osc, FrameBoost(0.3), 5e-4, np.linspace(0, 10, 5))
    assert tr.mean() == pytest.approx(average_work(STRONG, osc, FrameBoost(0.3), 5e-4), rel=1e-6)
    assert tr.samples.shape == (5, 2)
    assert np.allclose(tr.collision_times, np.arange(len(tr.collision_times)) * tr.collision_period)


def test_work_trace_at_rest_uses_local_green_function():
    w, x0 = 0.1, 0.3
    tr = work_trace(STRONG, OscillatorSpec(1.0, x0=x0), FrameBoost(0.0), w, np.linspace(0, 5, 3))
    local = -(w**3 / 2) * green_bloch(STRONG, x0, x0, w, 1e-9).imag
    assert tr.mean() == pytest.approx(local, rel=1e-6)


def _panel_rule(T, panels=800, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, T, panels + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def test_window_average_matches_sampled_average():
    tr = work_trace(STRONG, OscillatorSpec(1.0), FrameBoost(0.6), 0.1, np.linspace(0, 1, 3))
    T = 40.0
    t, wt = _panel_rule(T)
    W = tr.evaluate(t)
    scale = np.max(np.abs(W))
    assert tr.window_average(0.0, T) == pytest.approx(np.sum(wt * W) / T, abs=1e-10 * scale)
    hann = np.sin(np.pi * t / T) ** 2
    ref = np.sum(wt * hann * W) / np.sum(wt * hann)
    assert tr.window_average(0.0, T, "hann") == pytest.approx(ref, abs=1e-10 * scale)


@pytest.mark.slow
def test_work_trace_follows_dipole_position_adiabatically():
    # at small V the collision-rate part of W tracks the static value at the
    # dipole's current lattice position, gamma (x0 + V t)
    V, w, x0 = 0.002, 0.5, 0.2
    b = FrameBoost(V)
    tr = work_trace(UNIT, OscillatorSpec(1.0, x0=x0), b, w, [0.0])
    mu, c = tr._components()
    n = len(tr.harmonics)
    slow, nu = c[n : 2 * n], mu[n : 2 * n]
    for t in np.linspace(0, tr.collision_period, 7):
        x = b.gamma * (x0 + V * t)
        static = -(w**3 / 2) * green_bloch(UNIT, x, x, w, 1e-9).imag
        assert np.real(np.sum(slow * np.exp(1j * nu * t))) == pytest.approx(static, rel=1e-4)


def test_work_trace_above_threshold_averages_to_nearly_zero():
    osc = OscillatorSpec(1.0)
    rest = average_work(STRONG, osc, FrameBoost(0.0), 5e-4)
    tr = work_trace(STRONG, osc, FrameBoost(0.6), 5e-4, np.linspace(0, 1, 3))
    assert abs(tr.mean()) < 1e-3 * rest


def test_work_trace_convergence_check_ignores_sampling_phase():
    # W(0) is tiny here by phase alone; the check must not depend on it
    tr = work_trace(STRONG, OscillatorSpec(1.0), FrameBoost(0.6), 5e-4, [0.0])
    t = np.linspace(0, 6000, 20001)
    assert abs(tr.samples[0, 1]) < 1e-4 * np.max(np.abs(tr.evaluate(t)))
