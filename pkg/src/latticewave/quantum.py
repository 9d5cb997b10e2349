"""Quantum excitation of a ground-state oscillator dragged through the lattice.

To first order in the coupling ``kappa``, the oscillator (natural frequency
``omega0``) is excited only by lattice modes whose moving-frame frequency has
become negative. Energy conservation then fixes discrete extended-zone Bloch
vectors ``K_m``, the roots of ``omega0/gamma + omega_n(K) - V K = 0``. The
rate sums one term per root. A finite-time transition amplitude, integrated
over all modes, converges to the same rate and serves as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .classical import OscillatorSpec
from .errors import OnShellSingular
from .lattice import (
    BlochMode,
    LatticeSpec,
    _slope_factor,
    band_edge,
    band_frequencies,
    dispersion_rhs,
    normalization_from_k,
)
from .numerics import Tolerance, find_root
from .relativity import FrameBoost

__all__ = [
    "ResonanceRoot",
    "AbsorptionRate",
    "TransitionAmplitude",
    "GRAZING_GUARD",
    "fourier_coefficient_u",
    "fold_bloch_vector",
    "resonance_roots",
    "absorption_rate",
    "macroscopic_rate",
    "transition_amplitude",
    "finite_time_rate",
]

GRAZING_GUARD = 1e-9
"""Roots with ``|1 - V/v_g|`` below this are excluded as grazing."""


@dataclass(frozen=True)
class ResonanceRoot:
    """An extended-zone solution of ``omega0/gamma + omega_n(K) - V K = 0``.

    Attributes
    ----------
    band : int
    m : int
        Diffraction order, ``K_m = K_folded + 2 pi m``.
    K_m : float
        Extended-zone Bloch vector.
    k : float
        Mode frequency ``omega_n(K_m)``.
    group_velocity : float
        ``d omega / d K`` at the root.
    weight : float
        Dimensionless summand ``|sin k / sin K_m| k^3 / (|1 - V/v_g| (K_m^2 - k^2)^2)``.
    """

    band: int
    m: int
    K_m: float
    k: float
    group_velocity: float
    weight: float

    @property
    def K_folded(self) -> float:
        return self.K_m - 2 * np.pi * self.m


@dataclass(frozen=True)
class AbsorptionRate:
    """Excitation rate of the oscillator with its per-root breakdown.

    Attributes
    ----------
    rate : float
        Rate in the lattice rest frame.
    rate_oscillator_frame : float
        ``gamma * rate``, the rate measured by the oscillator's clock.
    roots : list of ResonanceRoot
        Contributing roots.
    excluded : list of ResonanceRoot
        Grazing roots left out of the sum (``weight`` is ``inf`` there).
    """

    rate: float
    rate_oscillator_frame: float
    roots: list = field(default_factory=list)
    excluded: list = field(default_factory=list)


@dataclass(frozen=True)
class TransitionAmplitude:
    """First-order amplitude to excite mode ``(band, K)`` after ``N`` cells.

    Attributes
    ----------
    band, K :
        The emitted lattice mode.
    T : float
        Interaction time ``N a / V``.
    zeta : complex
        Amplitude at the end of the interaction window.
    """

    band: int
    K: float
    T: float
    zeta: complex


# --------------------------------------------------------------------------
# Fourier content of the modes


def fourier_coefficient_u(mode: BlochMode, m):
    """Coefficient ``(1/a) int conj(N u) exp(-2 pi i m x) dx`` over one cell.

    Closed form ``alpha conj(N) sin k k^2 / ((K - 2 pi m)^2 - k^2)``; accepts
    integer arrays.

    Raises
    ------
    OnShellSingular
        When ``(K - 2 pi m)^2 = k^2``. That only happens for the empty lattice,
        where the single on-shell order carries the whole plane wave.
    """
    m = np.asarray(m)
    k, K = mode.k, mode.K
    den = (K - 2 * np.pi * m) ** 2 - k**2
    if np.any(np.abs(den) <= 1e-12 * max(1.0, k * k)):
        raise OnShellSingular(f"order {m!r} is on shell for k={k!r}, K={K!r}")
    return mode.spec.alpha * np.conj(mode.N) * np.sin(k) * k**2 / den


# --------------------------------------------------------------------------
# resonance roots and the rate


def fold_bloch_vector(K):
    """Map extended-zone ``K`` into ``(-pi, pi]``; returns ``(K_folded, m)``."""
    K = np.asarray(K, dtype=float)
    m = np.ceil((K - np.pi) / (2 * np.pi))
    return K - 2 * np.pi * m, m.astype(int)


def _band_on_extended_zone(spec: LatticeSpec, band: int, K):
    Kf, _ = fold_bloch_vector(K)
    return band_frequencies(spec, band, np.abs(Kf))


def _scalar_band_frequency(spec: LatticeSpec, band: int, K: float, lo: float, hi: float) -> float:
    c = np.cos(K)
    return find_root(lambda k: float(dispersion_rhs(spec.alpha, k)) - c, lo, hi, Tolerance(1e-15, 0.0, 200))


def resonance_roots(
    spec: LatticeSpec,
    omega0: float,
    boost: FrameBoost,
    max_band: int = 6,
    samples_per_halfzone: int = 256,
    tol: Tolerance = Tolerance(1e-15, 0.0, 200),
) -> list[ResonanceRoot]:
    """All extended-zone resonance roots in bands ``1..max_band``.

    For ``V > 0`` the mismatch ``omega0/gamma + omega_n(K) - V K`` is positive
    for every ``K < (omega0/gamma + (n-1) pi)/V`` and every
    ``K > (omega0/gamma + edge_n)/V``; only the window between can hold
    roots, so the scan is exhaustive up to roots closer together than
    ``pi / samples_per_halfzone``. Roots are returned in increasing band,
    then increasing ``K``.
    """
    V, g = boost.V, boost.gamma
    if V <= 0.0:
        return []
    shift = omega0 / g
    roots: list[ResonanceRoot] = []
    for n in range(1, max_band + 1):
        lo_k, hi_k = (n - 1) * np.pi, band_edge(spec, n)
        K_lo = (shift + lo_k) / V
        K_hi = (shift + hi_k) / V
        # Breakpoints at multiples of pi, where the folded band turns around.
        j0, j1 = int(np.floor(K_lo / np.pi)), int(np.ceil(K_hi / np.pi))
        edges = np.arange(j0, j1 + 1) * np.pi
        edges = np.unique(np.clip(np.concatenate([edges, [K_lo, K_hi]]), K_lo, K_hi))
        grid = np.unique(np.concatenate([np.linspace(a, b, samples_per_halfzone + 1) for a, b in zip(edges[:-1], edges[1:])]))
        mismatch = lambda K: shift + _band_on_extended_zone(spec, n, K) - V * K
        vals = mismatch(grid)

        def scalar(K: float) -> float:
            Kf, _ = fold_bloch_vector(K)
            return shift + _scalar_band_frequency(spec, n, float(Kf), lo_k, hi_k) - V * K

        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        found = [grid[i] for i in np.nonzero(vals == 0.0)[0]]
        found += [find_root(scalar, grid[i], grid[i + 1], tol) for i in idx]
        for K in sorted(found):
            Kf, m = fold_bloch_vector(K)
            Kf = float(Kf)
            k = _scalar_band_frequency(spec, n, Kf, lo_k, hi_k)
            d = float(_slope_factor(spec.alpha, k))
            vg = np.sin(Kf) / d
            mismatch_v = abs(1.0 - V / vg) if vg != 0.0 else np.inf
            if mismatch_v < GRAZING_GUARD:
                weight = np.inf
            else:
                weight = abs(np.sin(k)) * k**3 / (abs(d) * abs(vg - V) * (K * K - k * k) ** 2)
            roots.append(ResonanceRoot(n, int(m), float(K), float(k), float(vg), float(weight)))
    return roots


def absorption_rate(spec: LatticeSpec, osc: OscillatorSpec, boost: FrameBoost, max_band: int = 6) -> AbsorptionRate:
    """Ground-to-first-excited-state rate of the moving oscillator.

    ``rate = (kappa^2 omega0 / (4 gamma^2)) alpha^2 sum_roots weight``; grazing
    roots are excluded and reported in ``excluded``.
    """
    roots = resonance_roots(spec, osc.omega0, boost, max_band)
    good = [r for r in roots if np.isfinite(r.weight)]
    bad = [r for r in roots if not np.isfinite(r.weight)]
    g = boost.gamma
    pref = osc.kappa**2 * osc.omega0 * spec.alpha**2 / (4.0 * g * g)
    rate = pref * float(np.sum([r.weight for r in good])) if good else 0.0
    return AbsorptionRate(rate, g * rate, good, bad)


def macroscopic_rate(osc: OscillatorSpec, boost: FrameBoost, n_index: float) -> float:
    """Uniform-medium limit ``kappa^2 Theta(V n - 1) / (4 n gamma)``, with ``Theta(0) = 0``."""
    if abs(boost.V) * n_index > 1.0:
        return osc.kappa**2 / (4.0 * n_index * boost.gamma)
    return 0.0


# --------------------------------------------------------------------------
# finite-time amplitude


def _segment_integral(theta, a: float, b: float):
    """``int_a^b exp(i theta x) dx`` with the ``theta -> 0`` limit handled."""
    theta = np.asarray(theta, dtype=complex)
    small = np.abs(theta) < 1e-8
    safe = np.where(small, 1.0, theta)
    val = (np.exp(1j * safe * b) - np.exp(1j * safe * a)) / (1j * safe)
    return np.where(small, (b - a) + 0j, val)


def _cell_overlap(k, K, N, beta):
    """``int_{-1/2}^{1/2} conj(N u(x)) exp(i beta x) dx`` in closed form."""
    s1, s2 = np.sin(0.5 * (k + K)), np.sin(0.5 * (k - K))
    right = np.exp(-0.5j * K) * (
        s1 * np.exp(0.5j * k) * _segment_integral(K + beta - k, 0.0, 0.5)
        + s2 * np.exp(-0.5j * k) * _segment_integral(K + beta + k, 0.0, 0.5)
    )
    left = np.exp(0.5j * K) * (
        s1 * np.exp(-0.5j * k) * _segment_integral(K + beta - k, -0.5, 0.0)
        + s2 * np.exp(0.5j * k) * _segment_integral(K + beta + k, -0.5, 0.0)
    )
    return np.conj(N) * (right + left)


def _zeta(alpha: float, omega0: float, kappa: float, boost: FrameBoost, k, K, N, n_cells: int):
    V, g = boost.V, boost.gamma
    T = n_cells / V
    mismatch = omega0 / g + k - V * K
    beta = mismatch / V
    overlap = _cell_overlap(k, K, N, beta) / V
    sb = np.sin(0.5 * beta)
    small = np.abs(sb) < 1e-12
    kernel = np.where(small, float(n_cells), np.sin(0.5 * n_cells * beta) / np.where(small, 1.0, sb))
    edge_value = N * (np.sin(0.5 * (k + K)) + np.sin(0.5 * (k - K)))  # N u(a/2)
    bulk = 0.5 * (omega0 / g) * kernel * overlap
    boundary = np.conj(edge_value) * np.sin(0.5 * mismatch * T)
    return 1j * kappa / np.sqrt(omega0 * k) * (bulk - boundary)


def transition_amplitude(
    spec: LatticeSpec, osc: OscillatorSpec, boost: FrameBoost, mode: BlochMode, N_cells: int
) -> TransitionAmplitude:
    """Amplitude to emit ``mode`` while the oscillator crosses ``N_cells`` cells.

    The sum over cells collapses to a one-cell overlap times the Dirichlet
    kernel ``sin(N beta/2)/sin(beta/2)`` with ``beta = (omega0/gamma + omega - V K)/V``;
    at ``beta`` in ``2 pi Z`` the kernel takes its limit ``N``. The boundary
    term from the integration by parts is kept: it is what makes the amplitude
    finite as ``K -> 0``.
    """
    if int(N_cells) != N_cells or N_cells < 1 or N_cells % 2 == 0:
        raise ValueError("N_cells must be a positive odd integer")
    if boost.V <= 0.0:
        raise ValueError("transition amplitude needs V > 0")
    z = _zeta(spec.alpha, osc.omega0, osc.kappa, boost, mode.k, mode.K, mode.N, int(N_cells))
    return TransitionAmplitude(mode.band, mode.K, N_cells / boost.V, complex(z))


def finite_time_rate(
    spec: LatticeSpec,
    osc: OscillatorSpec,
    boost: FrameBoost,
    N_cells: int,
    max_band: int = 6,
    points: int = 200_000,
) -> float:
    """``sum_n int dK/2pi |zeta_{n,K}|^2 / T`` by composite Simpson over the zone.

    Converges to :func:`absorption_rate` as ``N_cells`` grows, with a relative
    deviation that shrinks roughly like ``1/N_cells``. The switch-on and
    switch-off transients only become negligible once ``omega0 T >> 1`` with
    ``T = N_cells / V``; for slower oscillators they dominate. ``points`` must
    resolve the kernel peaks of width ``~ 2 pi V / N_cells`` in ``K``.
    """
    if int(N_cells) != N_cells or N_cells < 1 or N_cells % 2 == 0:
        raise ValueError("N_cells must be a positive odd integer")
    K = np.linspace(-np.pi, np.pi, int(points) + 1)
    T = N_cells / boost.V
    total = 0.0
    for n in range(1, max_band + 1):
        k = band_frequencies(spec, n, K)
        N = normalization_from_k(spec.alpha, k)
        z = _zeta(spec.alpha, osc.omega0, osc.kappa, boost, k, K, N, int(N_cells))
        dens = np.abs(z) ** 2 / T
        dens = np.where(np.isfinite(dens), dens, 0.0)  # band-edge nodes where N diverges
        total += simpson(dens, x=K) / (2 * np.pi)
    return float(total)
