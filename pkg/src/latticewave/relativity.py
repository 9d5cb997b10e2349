"""Lorentz boosts of lattice modes and their diffracted, Doppler-shifted spectrum.

Boost convention: the primed frame moves with velocity ``+V`` relative to the
lattice, so ``x' = gamma (x - V t)`` and ``t' = gamma (t - V x)``. In the
primed frame the scatterers therefore stream past with velocity ``-V`` and
spacing ``a/gamma``. With this choice a lattice wave of order ``m`` carries
``omega' = gamma [k - V (K + 2 pi m)]`` and ``k' = gamma [K + 2 pi m - V k]``,
and the phase ``(K + 2 pi m) x - k t`` equals ``k' x' - omega' t'``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import BlochMode, field_and_derivative, mode_field
from .numerics import integrate

__all__ = [
    "FrameBoost",
    "MovingModeComponent",
    "boost_event",
    "unboost_event",
    "doppler_plane_wave",
    "doppler_wavenumbers",
    "diffraction_amplitudes",
    "moving_lattice_field",
    "moving_field_fourier",
    "moving_frame_spectrum",
    "negative_frequency_set",
]


@dataclass(frozen=True)
class FrameBoost:
    """Relative velocity ``V/c`` between lattice and observer.

    Attributes
    ----------
    V : float
        Velocity as a fraction of ``c``; ``|V| < 1``.
    """

    V: float

    def __post_init__(self):
        V = float(self.V)
        if not (abs(V) < 1.0):
            raise ValueError("V must satisfy |V|<1")
        object.__setattr__(self, "V", V)

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.V**2)


@dataclass(frozen=True)
class MovingModeComponent:
    """One diffraction order of a Bloch mode seen from the moving frame."""

    m: int
    omega_prime: float
    k_prime: float
    amplitude: complex


def boost_event(x, t, boost: FrameBoost):
    """Rest-frame event ``(x, t)`` expressed in the moving frame."""
    g, V = boost.gamma, boost.V
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return g * (x - V * t), g * (t - V * x)


def unboost_event(xp, tp, boost: FrameBoost):
    """Inverse of :func:`boost_event`."""
    g, V = boost.gamma, boost.V
    xp = np.asarray(xp, dtype=float)
    tp = np.asarray(tp, dtype=float)
    return g * (xp + V * tp), g * (tp + V * xp)


def doppler_plane_wave(omega, kx, boost: FrameBoost):
    """Transform a plane wave ``(omega, kx)`` to the moving frame.

    Returns ``(gamma (omega - V kx), gamma (kx - V omega))``.
    """
    g, V = boost.gamma, boost.V
    omega = np.asarray(omega, dtype=float)
    kx = np.asarray(kx, dtype=float)
    return g * (omega - V * kx), g * (kx - V * omega)


def doppler_wavenumbers(k, boost: FrameBoost):
    """Forward and backward Doppler-shifted wavenumbers ``sqrt((1 +- V)/(1 -+ V)) k``.

    Their product is ``k^2`` for every ``V``.
    """
    V = boost.V
    r = np.sqrt((1.0 + V) / (1.0 - V))
    return r * k, k / r


def diffraction_amplitudes(mode: BlochMode, m):
    """Amplitudes ``a_m`` of ``phi(x) = sum_m a_m exp(i (K + 2 pi m) x)``.

    These are complex conjugates of the periodic-part Fourier coefficients at
    order ``-m`` (see :func:`latticewave.quantum.fourier_coefficient_u`).
    """
    m = np.asarray(m)
    k, K = mode.k, mode.K
    den = (K + 2 * np.pi * m) ** 2 - k**2
    if mode.spec.alpha == 0.0:
        # empty lattice: a single plane wave sits on the on-shell order
        on_shell = np.abs(den) <= 1e-12 * max(1.0, k * k)
        plane = field_and_derivative(0.0, k, K, mode.N, 0.0)[0]
        return np.where(on_shell, plane, 0.0 + 0j)
    return mode.spec.alpha * mode.N * np.sin(k) * k**2 / den


def moving_lattice_field(mode: BlochMode, boost: FrameBoost, xp, tp):
    """Mode field at moving-frame event ``(x', t')``.

    Evaluates ``phi(x) exp(-i omega t)`` at the corresponding rest-frame event;
    at fixed ``t'`` the scatterer kinks repeat with period ``a/gamma`` in ``x'``.
    """
    x, t = unboost_event(xp, tp, boost)
    return mode_field(mode, x) * np.exp(-1j * mode.k * t)


def _bernoulli2_tail(y, M: int):
    """``sum_{|m| > M} exp(2 pi i m y) / (2 pi m)^2`` via the Bernoulli polynomial B2."""
    y = np.mod(y, 1.0)
    full = 0.5 * (y * y - y + 1.0 / 6.0)
    m = np.arange(1, M + 1)
    head = 2.0 * np.sum(np.cos(2 * np.pi * np.multiply.outer(y, m)) / (2 * np.pi * m) ** 2, axis=-1)
    return full - head


def _bernoulli3_tail(y, M: int):
    """``sum_{|m| > M} exp(2 pi i m y) / (2 pi m)^3`` via the Bernoulli polynomial B3."""
    y = np.mod(y, 1.0)
    full = 1j * (y**3 - 1.5 * y * y + 0.5 * y) / 6.0
    m = np.arange(1, M + 1)
    head = 2j * np.sum(np.sin(2 * np.pi * np.multiply.outer(y, m)) / (2 * np.pi * m) ** 3, axis=-1)
    return full - head


def moving_field_fourier(mode: BlochMode, boost: FrameBoost, xp, tp, m_max: int = 64, tail_correction: bool = True):
    """Field at ``(x', t')`` from its diffracted-wave expansion truncated at ``|m| <= m_max``.

    Each order contributes ``a_m exp(i (k'_m x' - omega'_m t'))``. The amplitudes
    decay like ``1/m^2``, so by default the ``1/(2 pi m)^2`` and ``1/(2 pi m)^3``
    parts of the tail beyond the cutoff are added in closed form (Kummer
    acceleration), leaving an error of order ``m_max^-3``.
    """
    g, V = boost.gamma, boost.V
    xp = np.asarray(xp, dtype=float)
    tp = np.asarray(tp, dtype=float)
    m = np.arange(-m_max, m_max + 1)
    amp = diffraction_amplitudes(mode, m)
    q = mode.K + 2 * np.pi * m
    wp = g * (mode.k - V * q)
    kp = g * (q - V * mode.k)
    phase = np.multiply.outer(xp, kp) - np.multiply.outer(tp, wp)
    total = np.sum(amp * np.exp(1j * phase), axis=-1)
    if tail_correction:
        x, t = unboost_event(xp, tp, boost)
        lead = mode.spec.alpha * mode.N * np.sin(mode.k) * mode.k**2
        tail = _bernoulli2_tail(x, m_max) - 2 * mode.K * _bernoulli3_tail(x, m_max)
        total = total + lead * np.exp(1j * (mode.K * x - mode.k * t)) * tail
    return total


def _periodic_norm(mode: BlochMode) -> float:
    """``int_cell |phi|^2 dx`` (smooth measure, no scatterer weights)."""
    f = lambda x: np.abs(field_and_derivative(mode.spec.alpha, mode.k, mode.K, mode.N, x)[0]) ** 2
    return float(np.real(integrate(f, -0.5, 0.0) + integrate(f, 0.0, 0.5)))


def moving_frame_spectrum(
    mode: BlochMode,
    boost: FrameBoost,
    m_range: tuple[int, int] = (-64, 64),
    sort: bool = False,
    coverage: float = 1.0 - 1e-8,
    max_order: int = 1 << 16,
) -> list[MovingModeComponent]:
    """Diffraction orders of ``mode`` with their moving-frame frequencies.

    Parameters
    ----------
    m_range : (int, int)
        Inclusive range of orders. It is widened symmetrically until the
        retained amplitudes carry ``coverage`` of the cell norm (Parseval).
    sort : bool
        Order by decreasing ``|amplitude|`` instead of by ``m``.
    """
    lo, hi = int(m_range[0]), int(m_range[1])
    if lo > hi:
        raise ValueError("m_range must be increasing")
    norm = _periodic_norm(mode)
    while True:
        m = np.arange(lo, hi + 1)
        amp = diffraction_amplitudes(mode, m)
        if np.sum(np.abs(amp) ** 2) >= coverage * norm or hi - lo > 2 * max_order:
            break
        span = max(hi - lo, 1)
        lo, hi = lo - span, hi + span
    q = mode.K + 2 * np.pi * m
    g, V = boost.gamma, boost.V
    wp = g * (mode.k - V * q)
    kp = g * (q - V * mode.k)
    comps = [MovingModeComponent(int(mi), float(w), float(kk), complex(a)) for mi, w, kk, a in zip(m, wp, kp, amp)]
    if sort:
        comps.sort(key=lambda c: (-abs(c.amplitude), c.m))
    return comps


def negative_frequency_set(spectrum: list[MovingModeComponent]) -> list[MovingModeComponent]:
    """Components whose moving-frame frequency is negative."""
    return [c for c in spectrum if c.omega_prime < 0.0]
