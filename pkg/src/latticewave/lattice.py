"""Rest-frame lattice of point scatterers: dispersion, Bloch modes, energy transport.

Units are fixed to ``c = a = 1`` throughout, so frequencies are quoted as
``omega*a/c`` (equal to the free wavenumber ``k``), Bloch vectors as ``K*a``,
the polarizability as ``alpha/a`` and velocities as ``V/c``.

The scatterers sit at the integers. Inside the central cell a mode of band
``n`` and Bloch vector ``K`` is a pair of counter-propagating plane waves on
each side of the scatterer; other cells follow from the Bloch condition
``phi(x + 1) = exp(iK) phi(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BandNotFound, EdgeSingular
from .numerics import DEFAULT_TOL, Tolerance, find_root, gauss_legendre_panels, integrate

__all__ = [
    "LatticeSpec",
    "BlochMode",
    "MAX_BAND",
    "EDGE_GUARD",
    "dispersion_rhs",
    "bloch_vector",
    "band_edge",
    "band_frequency",
    "band_frequencies",
    "normalization",
    "normalization_from_k",
    "bloch_mode",
    "mode_at_frequency",
    "mode_field",
    "mode_derivative",
    "periodic_part",
    "completeness_check",
    "smeared_completeness",
    "power_flow",
    "power_flow_direct",
    "energy_density",
    "site_energy",
    "cell_energy",
    "energy_velocity",
    "group_velocity",
    "group_velocity_fd",
    "spatial_average",
]

MAX_BAND = 4096
"""Highest band index the inversion routines will search."""

EDGE_GUARD = 1e-6
"""Modes with ``|sin k|`` or the normalization denominator below this are rejected."""

Side = Literal["right", "left"]


@dataclass(frozen=True)
class LatticeSpec:
    """A one-dimensional lattice of identical delta scatterers.

    Parameters
    ----------
    alpha : float
        Polarizability per lattice constant, ``alpha/a >= 0``. The permittivity
        profile is ``rho(x) = 1 + alpha * sum_j delta(x - j)``.
    """

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not np.isfinite(a) or a < 0:
            raise ValueError("alpha must be finite and non-negative")
        object.__setattr__(self, "alpha", a)

    @property
    def a(self) -> float:
        """Lattice constant (unit of length)."""
        return 1.0

    @property
    def c(self) -> float:
        """Wave speed (unit of velocity)."""
        return 1.0

    @property
    def index(self) -> float:
        """Long-wavelength refractive index ``sqrt(1 + alpha/a)``."""
        return float(np.sqrt(1.0 + self.alpha))


@dataclass(frozen=True)
class BlochMode:
    """One normalized lattice eigenmode.

    Attributes
    ----------
    spec : LatticeSpec
    band : int
        Band index ``n >= 1``.
    K : float
        Bloch vector in ``(-pi, pi]``.
    k : float
        Reduced frequency ``omega*a/c``.
    N : complex
        Normalization constant; its phase is a branch convention (principal
        square roots) and only enters through ``|N|`` or phase-coherent
        combinations.
    """

    spec: LatticeSpec
    band: int
    K: float
    k: float
    N: complex

    @property
    def omega(self) -> float:
        return self.k

    def field(self, x, side: Side = "right"):
        return mode_field(self, x, side)

    def derivative(self, x, side: Side = "right"):
        return mode_derivative(self, x, side)


# --------------------------------------------------------------------------
# dispersion


def dispersion_rhs(alpha: float, k):
    """Right-hand side ``cos k - (alpha k / 2) sin k`` of the dispersion relation ``cos K = ...``."""
    k = np.asarray(k)
    return np.cos(k) - 0.5 * alpha * k * np.sin(k)


def bloch_vector(spec: LatticeSpec, omega):
    """Complex Bloch vector ``K*a`` for reduced frequency ``omega*a/c > 0``.

    The branch has ``Re K`` in ``[0, pi]`` and ``Im K >= 0``: real inside pass
    bands, ``i*acosh(g)`` where the right-hand side ``g`` exceeds 1, and
    ``pi + i*acosh(-g)`` where it falls below -1.
    """
    g = np.asarray(dispersion_rhs(spec.alpha, omega), dtype=float)
    out = np.empty(g.shape, dtype=complex)
    inside = np.abs(g) <= 1.0
    out[inside] = np.arccos(g[inside])
    above = g > 1.0
    out[above] = 1j * np.arccosh(g[above])
    below = g < -1.0
    out[below] = np.pi + 1j * np.arccosh(-g[below])
    return out if out.ndim else complex(out)


def _edge_function(alpha: float, n: int):
    # Factoring 1 -/+ cos K shows the upper edge of odd bands (cos K = -1) is a
    # zero of cos(k/2) - (alpha k/2) sin(k/2), and of even bands (cos K = 1) a
    # zero of sin(k/2) + (alpha k/2) cos(k/2); each has exactly one zero on
    # ((n-1) pi, n pi).
    if n % 2:
        return lambda k: np.cos(0.5 * k) - 0.5 * alpha * k * np.sin(0.5 * k)
    return lambda k: np.sin(0.5 * k) + 0.5 * alpha * k * np.cos(0.5 * k)


def _check_band(n: int) -> int:
    if int(n) != n or n < 1 or n > MAX_BAND:
        raise BandNotFound(f"band index {n!r} outside 1..{MAX_BAND}")
    return int(n)


def band_edge(spec: LatticeSpec, band: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """Upper edge ``k`` of a pass band (``K = pi`` for odd, ``K = 0`` for even bands).

    Band ``n`` spans ``[(n-1) pi, band_edge(n)]``; the lower edge is always
    ``(n-1) pi`` because ``sin k`` vanishes there.
    """
    n = _check_band(band)
    if spec.alpha == 0.0:
        return n * np.pi
    f = _edge_function(spec.alpha, n)
    return find_root(f, (n - 1) * np.pi, n * np.pi, Tolerance(rel=1e-15, abs=0.0, max_iter=tol.max_iter))


def band_frequency(spec: LatticeSpec, band: int, K: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Invert the dispersion relation on one band.

    Parameters
    ----------
    band : int
        Band index ``n >= 1``.
    K : float
        Real Bloch vector; only ``|K|`` matters.

    Raises
    ------
    BandNotFound
        For an invalid band index or a bracket failure.
    """
    n = _check_band(band)
    target = np.cos(K)
    lo, hi = (n - 1) * np.pi, band_edge(spec, n)
    f = lambda k: float(dispersion_rhs(spec.alpha, k)) - target
    # band extremes (K = 0 or pi) sit on a bracket end, up to rounding
    for end in (lo, hi):
        if abs(f(end)) <= 1e-14 * (1.0 + spec.alpha * end):
            return float(end)
    try:
        return find_root(f, lo, hi, Tolerance(rel=1e-15, abs=0.0, max_iter=tol.max_iter))
    except Exception as exc:  # noqa: BLE001 - report as a band lookup failure
        raise BandNotFound(f"band {n} has no solution at K={K!r}: {exc}") from exc


def band_frequencies(spec: LatticeSpec, band: int, K) -> np.ndarray:
    """Vectorized band inversion by bisection on the monotone band bracket.

    Sixty-four halvings of a bracket no longer than ``pi`` reach machine
    precision, so no tolerance argument is needed.
    """
    n = _check_band(band)
    target = np.cos(np.asarray(K, dtype=float))
    lo = np.full(target.shape, (n - 1) * np.pi)
    hi = np.full(target.shape, band_edge(spec, n))
    flo = dispersion_rhs(spec.alpha, lo) - target
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        fm = dispersion_rhs(spec.alpha, mid) - target
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _slope_factor(alpha: float, k):
    """``(1 + alpha/2) sin k + (alpha k / 2) cos k``, which equals ``-d(rhs)/dk``."""
    return (1.0 + 0.5 * alpha) * np.sin(k) + 0.5 * alpha * k * np.cos(k)


def normalization_from_k(alpha: float, k):
    """Normalization ``1/(sqrt(sin k) sqrt(slope))`` with principal complex roots.

    Vectorized and unchecked; see :func:`normalization` for the guarded form.
    """
    k = np.asarray(k, dtype=float)
    return 1.0 / (np.sqrt(np.sin(k) + 0j) * np.sqrt(_slope_factor(alpha, k) + 0j))


def normalization(spec: LatticeSpec, band: int, K: float) -> complex:
    """Normalization constant of mode ``(band, K)``.

    Raises
    ------
    EdgeSingular
        If ``|sin k|`` or the slope factor is below :data:`EDGE_GUARD`.
    """
    k = band_frequency(spec, band, K)
    return _guarded_normalization(spec, k)


def _guarded_normalization(spec: LatticeSpec, k: float) -> complex:
    s, d = np.sin(k), _slope_factor(spec.alpha, k)
    if abs(s) < EDGE_GUARD or abs(d) < EDGE_GUARD:
        raise EdgeSingular(f"mode at k={k!r} is on a band edge (sin k={s:.3g}, slope={d:.3g})")
    return complex(normalization_from_k(spec.alpha, k))


def bloch_mode(spec: LatticeSpec, band: int, K: float) -> BlochMode:
    """Construct the normalized mode of ``band`` at Bloch vector ``K`` in ``(-pi, pi]``."""
    K = float(K)
    if not (-np.pi < K <= np.pi):
        raise ValueError(f"K={K!r} must lie in (-pi, pi]")
    k = band_frequency(spec, band, K)
    return BlochMode(spec, int(band), K, k, _guarded_normalization(spec, k))


def mode_at_frequency(spec: LatticeSpec, omega: float) -> BlochMode:
    """Forward-moving (positive group velocity) mode at a pass-band frequency.

    Raises
    ------
    BandNotFound
        If ``omega`` lies in a gap.
    EdgeSingular
        If ``omega`` sits on a band edge.
    """
    omega = float(omega)
    if not omega > 0:
        raise ValueError("omega must be positive")
    K = bloch_vector(spec, omega)
    if K.imag != 0.0:
        raise BandNotFound(f"omega={omega!r} lies in a band gap (Im K={K.imag:.3g})")
    band = int(np.floor(omega / np.pi)) + 1
    # even bands run downward in omega for K > 0
    K = K.real if band % 2 else -K.real
    if K == -np.pi:
        K = np.pi
    return BlochMode(spec, band, K, omega, _guarded_normalization(spec, omega))


# --------------------------------------------------------------------------
# fields


def _cell_coordinates(x, side: Side):
    x = np.asarray(x, dtype=float)
    if side == "right":
        j = np.floor(x + 0.5)
        y = x - j
        right = y >= 0.0
    else:
        j = np.ceil(x - 0.5)
        y = x - j
        right = y > 0.0
    return j, y, right


def field_and_derivative(alpha: float, k, K, N, x, side: Side = "right"):
    """Mode value and x-derivative for broadcastable arrays of ``(k, K, N, x)``.

    At a scatterer, ``side`` picks the one-sided limit of the derivative. The
    expressions are analytic, so complex ``k`` and ``K`` satisfying the
    dispersion relation give the (unnormalized) evanescent solutions.
    """
    k = np.asarray(k)
    K = np.asarray(K)
    j, y, right = _cell_coordinates(x, side)
    shift = np.where(right, y - 0.5, y + 0.5)
    pref = np.where(right, np.exp(0.5j * K), np.exp(-0.5j * K))
    s1 = np.sin(0.5 * (k + K))
    s2 = np.sin(0.5 * (k - K))
    ep = np.exp(1j * k * shift)
    em = np.exp(-1j * k * shift)
    amp = N * pref * np.exp(1j * K * j)
    return amp * (s1 * ep + s2 * em), amp * 1j * k * (s1 * ep - s2 * em)


def mode_field(mode: BlochMode, x, side: Side = "right"):
    """Field ``phi_{n,K}(x)``; continuous everywhere, Bloch periodic."""
    return field_and_derivative(mode.spec.alpha, mode.k, mode.K, mode.N, x, side)[0]


def mode_derivative(mode: BlochMode, x, side: Side = "right"):
    """``d phi/dx``; at a scatterer ``side`` selects the one-sided limit."""
    return field_and_derivative(mode.spec.alpha, mode.k, mode.K, mode.N, x, side)[1]


def periodic_part(mode: BlochMode, x):
    """Lattice-periodic factor ``u`` with ``phi = N u exp(iKx)``."""
    x = np.asarray(x, dtype=float)
    return mode_field(mode, x) * np.exp(-1j * mode.K * x) / mode.N


# --------------------------------------------------------------------------
# completeness


def _k_nodes(K_samples: int):
    panels = max(1, int(np.ceil(K_samples / 16)))
    return gauss_legendre_panels(np.linspace(-np.pi, np.pi, panels + 1), 16)


def completeness_check(spec: LatticeSpec, x: float, xp: float, band_cutoff: int, K_samples: int = 512) -> complex:
    """Truncated mode sum ``int dK/2pi sum_n rho(x') phi(x) conj(phi(x'))``.

    Converges (distributionally) to ``delta(x - x')``; points sitting on a
    scatterer would need the lumped weight, so ``x'`` must be off-site.
    """
    Kn, wK = _k_nodes(K_samples)
    total = 0.0 + 0.0j
    for n in range(1, band_cutoff + 1):
        k = band_frequencies(spec, n, Kn)
        N = normalization_from_k(spec.alpha, k)
        a = field_and_derivative(spec.alpha, k, Kn, N, x)[0]
        b = field_and_derivative(spec.alpha, k, Kn, N, xp)[0]
        total += np.sum(wK * a * np.conj(b)) / (2 * np.pi)
    return complex(total)


def smeared_completeness(
    spec: LatticeSpec,
    x: float,
    width: float,
    band_cutoff: int,
    K_samples: int = 512,
    x_nodes: int = 96,
) -> complex:
    """Mode sum applied to a Gaussian test function centred at ``x``.

    Returns ``int dx' C(x, x') g(x' - x) / g(0)`` where ``C`` is the truncated
    mode sum of :func:`completeness_check` and ``g`` a normalized Gaussian of
    the given ``width``. A complete basis reproduces ``g(0)``, so the ratio
    approaches 1 as ``band_cutoff`` grows, provided the Gaussian avoids the
    scatterers.
    """
    Kn, wK = _k_nodes(K_samples)
    xs, wx = gauss_legendre_panels(np.linspace(x - 7 * width, x + 7 * width, x_nodes // 16 + 1), 16)
    gauss = np.exp(-0.5 * ((xs - x) / width) ** 2) / (np.sqrt(2 * np.pi) * width)
    total = 0.0 + 0.0j
    for n in range(1, band_cutoff + 1):
        k = band_frequencies(spec, n, Kn)
        N = normalization_from_k(spec.alpha, k)
        here = field_and_derivative(spec.alpha, k, Kn, N, x)[0]
        there = field_and_derivative(spec.alpha, k[:, None], Kn[:, None], N[:, None], xs[None, :])[0]
        smeared = (np.conj(there) * (gauss * wx)[None, :]).sum(axis=1)
        total += np.sum(wK * here * smeared) / (2 * np.pi)
    return complex(total * np.sqrt(2 * np.pi) * width)


# --------------------------------------------------------------------------
# energy transport


def group_velocity(alpha: float, k, K):
    """``sin k sin K / (1 - cos k cos K + (alpha/2) sin^2 k)``, vectorized.

    Equals ``d omega / d K``; it is negative for modes whose frequency falls
    as ``|K|`` grows with ``K > 0`` (even bands).
    """
    k = np.asarray(k, dtype=float)
    K = np.asarray(K, dtype=float)
    den = 1.0 - np.cos(k) * np.cos(K) + 0.5 * alpha * np.sin(k) ** 2
    return np.sin(k) * np.sin(K) / den


def group_velocity_fd(spec: LatticeSpec, omega, step: float = 1e-5):
    """``d omega / d Re K`` by a central difference of :func:`bloch_vector`.

    Independent of the closed form in :func:`group_velocity`; magnitude only.
    """
    omega = np.asarray(omega, dtype=float)
    dK = np.real(bloch_vector(spec, omega + step)) - np.real(bloch_vector(spec, omega - step))
    return np.abs(2.0 * step / dK)


def energy_velocity(mode: BlochMode) -> float:
    """Energy-transport velocity ``v/c`` of a pass-band mode (equals ``d omega/dK``)."""
    return float(group_velocity(mode.spec.alpha, mode.k, mode.K))


def power_flow(mode: BlochMode) -> float:
    """Cycle-averaged power flow ``(1/2a)(omega/c)^2 v``."""
    return 0.5 * mode.k**2 * energy_velocity(mode)


def power_flow_direct(mode: BlochMode, x):
    """Power flow from its defining form ``(omega/2) Im[conj(phi) dphi/dx]``."""
    phi, dphi = field_and_derivative(mode.spec.alpha, mode.k, mode.K, mode.N, x)
    return 0.5 * mode.k * np.imag(np.conj(phi) * dphi)


def energy_density(mode: BlochMode, x):
    """Smooth part of the cycle-averaged energy density ``(|phi'|^2 + k^2 |phi|^2)/4``.

    The scatterers contribute lumped weights reported by :func:`site_energy`.
    """
    phi, dphi = field_and_derivative(mode.spec.alpha, mode.k, mode.K, mode.N, x)
    return 0.25 * (np.abs(dphi) ** 2 + mode.k**2 * np.abs(phi) ** 2)


def site_energy(mode: BlochMode) -> float:
    """Lumped energy ``(alpha k^2 / 4) |phi(j)|^2`` carried by each scatterer."""
    return 0.25 * mode.spec.alpha * mode.k**2 * abs(complex(mode_field(mode, 0.0))) ** 2


def cell_energy(mode: BlochMode, tol: Tolerance = DEFAULT_TOL) -> float:
    """Energy per unit cell: quadrature of the smooth part plus the site weight."""
    f = lambda x: energy_density(mode, x)
    smooth = integrate(f, -0.5, 0.0, tol) + integrate(f, 0.0, 0.5, tol)
    return float(np.real(smooth)) + site_energy(mode)


def spatial_average(mode: BlochMode, x):
    """Cell average ``(1/a) int_{-a/2}^{a/2} phi(x + y) dy``, evaluated exactly.

    Between scatterers ``phi'' = -k^2 phi``, so the integral reduces to
    boundary derivatives plus the derivative jumps ``-k^2 alpha phi(j)`` at
    the enclosed scatterers.
    """
    x = np.asarray(x, dtype=float)
    alpha, k, K, N = mode.spec.alpha, mode.k, mode.K, mode.N
    upper = field_and_derivative(alpha, k, K, N, x + 0.5, "left")[1]
    lower = field_and_derivative(alpha, k, K, N, x - 0.5, "right")[1]
    site = np.floor(x + 0.5)
    inside = (site > x - 0.5) & (site < x + 0.5)
    at_site = field_and_derivative(alpha, k, K, N, site)[0]
    return -(upper - lower) / k**2 - alpha * np.where(inside, at_site, 0.0)
