"""Classical oscillator moving through the lattice: damping, Green functions, work.

Two levels of description are provided.

* Uniform medium (index ``n``): the radiation reaction on a harmonic dipole
  moving with velocity ``V`` is a damping constant that switches off above
  the Cherenkov speed ``c/n``.
* Lattice: the response is built from the periodic Green function of the
  scatterer array. The work needed to keep the dipole oscillating at ``omega``
  is expanded on the comb of frequencies produced by the periodic passage of
  scatterers, one small-damping regularized integral per comb tooth, and its
  long-time average reduces to a residue sum over the real roots of the
  Doppler-shifted lattice dispersion relation.

Units: ``c = a = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRoot, OnShellSingular, ThresholdSingular, WorkTraceNoConverge
from .lattice import LatticeSpec, bloch_vector, dispersion_rhs, field_and_derivative
from .numerics import DEFAULT_TOL, Tolerance, find_root, gauss_legendre_panels, integrate, sum_symmetric
from .relativity import FrameBoost, unboost_event

__all__ = [
    "OscillatorSpec",
    "MacroscopicMedium",
    "DualD",
    "WorkTrace",
    "macroscopic_wavenumbers",
    "macroscopic_damping",
    "oscillator_trajectory",
    "lattice_D",
    "lattice_D_closed",
    "green_free",
    "array_green",
    "green_fixed_frequency",
    "green_bloch",
    "green_moving_frame",
    "work_roots",
    "average_work",
    "work_trace",
    "default_eta_levels",
]


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class OscillatorSpec:
    """Harmonic probe coupled to the wave field.

    Parameters
    ----------
    omega0 : float
        Natural frequency in units of ``c/a``.
    kappa : float
        Coupling constant.
    x0 : float
        Position (in the oscillator's own frame).
    X0, Xdot0 : float
        Initial amplitude and velocity for trajectory calculations.
    """

    omega0: float
    kappa: float = 1.0
    x0: float = 0.0
    X0: float = 1.0
    Xdot0: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.omega0) and self.omega0 > 0):
            raise ValueError("omega0 must be positive")
        if not np.isfinite(self.kappa):
            raise ValueError("kappa must be a finite real number")


@dataclass(frozen=True)
class MacroscopicMedium:
    """Uniform medium with refractive index ``n >= 1``."""

    n: float

    def __post_init__(self):
        if not (self.n >= 1.0):
            raise ValueError("refractive index must be >= 1")

    @classmethod
    def from_lattice(cls, spec: LatticeSpec) -> "MacroscopicMedium":
        return cls(spec.index)


@dataclass(frozen=True)
class DualD:
    """Lattice dispersion function from two independent evaluations."""

    sum_value: complex
    closed_value: complex
    error_estimate: float


# --------------------------------------------------------------------------
# uniform medium


def macroscopic_wavenumbers(omega: float, V: float, n: float, eta: float = 0.0):
    """Roots ``k_+-`` of the co-moving dispersion relation of a uniform medium.

    ``k_+- = (omega + i eta)(+-n - V)/(1 -+ n V)``.

    Raises
    ------
    ThresholdSingular
        If ``|1 -+ n V| < 1e-12``.
    """
    z = omega + 1j * eta
    dp, dm = 1.0 - n * V, 1.0 + n * V
    if abs(dp) < 1e-12 or abs(dm) < 1e-12:
        raise ThresholdSingular(f"V={V!r} is on the threshold 1/n={1 / n!r}")
    return z * (n - V) / dp, z * (-n - V) / dm


def macroscopic_damping(omega: float, V: float, n: float, kappa: float) -> float:
    """Radiation damping constant ``(kappa^2/4n)(sign k_+ - sign k_-)``.

    Equals ``kappa^2/(2n)`` below the threshold ``|V| < 1/n`` and exactly zero
    above it, where both roots have the same sign.
    """
    kp, km = macroscopic_wavenumbers(omega, V, n)
    return kappa**2 / (4.0 * n) * (np.sign(kp.real) - np.sign(km.real))


def oscillator_trajectory(spec: OscillatorSpec, Gamma: float, t):
    """Solution of ``X'' + Gamma X' + omega0^2 X = 0`` with the spec's initial data."""
    if Gamma < 0:
        raise ValueError("Gamma must be non-negative")
    t = np.asarray(t, dtype=float)
    w0, X0, V0 = spec.omega0, spec.X0, spec.Xdot0
    lam = 0.5 * Gamma
    disc = w0 * w0 - lam * lam
    if disc > 0:
        W = np.sqrt(disc)
        return np.exp(-lam * t) * (X0 * np.cos(W * t) + (V0 + lam * X0) / W * np.sin(W * t))
    if disc == 0:
        return np.exp(-lam * t) * (X0 + (V0 + lam * X0) * t)
    s = np.sqrt(-disc)
    rp, rm = -lam + s, -lam - s
    A = (V0 - rm * X0) / (rp - rm)
    return A * np.exp(rp * t) + (X0 - A) * np.exp(rm * t)


# --------------------------------------------------------------------------
# lattice dispersion function


def lattice_D_closed(alpha: float, k0, K):
    """``D = 1 - alpha k0 sin k0 / (2 (cos k0 - cos K))``, vectorized and unchecked."""
    k0 = np.asarray(k0)
    return 1.0 - alpha * k0 * np.sin(k0) / (2.0 * (np.cos(k0) - np.cos(K)))


def lattice_D(spec: LatticeSpec, k0: complex, K: float, tol: Tolerance = DEFAULT_TOL) -> DualD:
    """Lattice dispersion function at complex frequency ``k0`` and Bloch vector ``K``.

    Evaluated both as ``1 + alpha k0^2 sum_p 1/(k0^2 - (K + 2 pi p)^2)`` and in
    closed form; its zeros reproduce the band structure.

    Raises
    ------
    OnShellSingular
        If ``|cos k0 - cos K| < 1e-12`` (a pole of the closed form).
    """
    if abs(np.cos(k0) - np.cos(K)) < 1e-12:
        raise OnShellSingular(f"k0={k0!r} is on shell for K={K!r}")
    closed = complex(lattice_D_closed(spec.alpha, k0, K))
    k2 = k0 * k0
    s = sum_symmetric(lambda p: 1.0 / (k2 - (K + 2 * np.pi * p) ** 2), tol)
    summed = 1.0 + spec.alpha * k2 * s.value
    return DualD(complex(summed), closed, abs(spec.alpha * k2) * s.error_estimate)


# --------------------------------------------------------------------------
# Green functions at fixed frequency


def green_free(k0, y):
    """Outgoing free Green function ``exp(i k0 |y|)/(2 i k0)``; solves ``(d^2 + k0^2) G = delta``."""
    y = np.asarray(y, dtype=float)
    return np.exp(1j * k0 * np.abs(y)) / (2j * k0)


def array_green(k0, K, x):
    """Field of a Bloch-phased source array, ``sum_j exp(iKj) G0(x - j)``.

    Equal to ``sum_p exp(i (K + 2 pi p) x) / (k0^2 - (K + 2 pi p)^2)``; the
    closed form below sums the geometric series of outgoing waves and needs
    ``Im k0 > 0`` or off-shell ``K``.
    """
    K = np.asarray(K, dtype=float)
    x = np.asarray(x, dtype=float)
    j = np.floor(x)
    y = x - j
    ep = np.exp(1j * (k0 - K))
    em = np.exp(1j * (k0 + K))
    cell = (np.exp(1j * k0 * y) / (1.0 - ep) + np.exp(-1j * k0 * y) * em / (1.0 - em)) / (2j * k0)
    return np.exp(1j * K * j) * cell


def _scattered_kernel(alpha: float, k0, x: float, x0: float, K):
    return array_green(k0, K, x) * array_green(k0, -K, x0) / lattice_D_closed(alpha, k0, K)


def green_fixed_frequency(
    spec: LatticeSpec, x: float, x0: float, omega: float, eta: float, tol: Tolerance = DEFAULT_TOL
) -> complex:
    """Lattice Green function ``G(x, x0, omega + i eta)``.

    ``G = G0(x - x0) - alpha k0^2 int dK/2pi f_K(x) f_{-K}(x0) / D(k0, K)`` with
    ``f_K`` from :func:`array_green`; the integrand peaks near the real Bloch
    vectors of ``omega``, which are passed to the quadrature as breakpoints.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    k0 = omega + 1j * eta
    free = complex(green_free(k0, x - x0))
    if spec.alpha == 0.0:
        return free
    Kr = abs(float(np.real(bloch_vector(spec, abs(omega))))) if omega != 0 else 0.0
    pts = [p for p in (-Kr, Kr) if -np.pi < p < np.pi]
    f = lambda K: _scattered_kernel(spec.alpha, k0, x, x0, K)
    integral = integrate(f, -np.pi, np.pi, tol, points=pts)
    return free - spec.alpha * k0 * k0 * integral / (2 * np.pi)


def green_bloch(spec: LatticeSpec, x: float, x0: float, omega: float, eta: float) -> complex:
    """Lattice Green function from the two decaying Bloch solutions.

    For ``Im k0 > 0`` the Bloch solutions ``psi_+`` (multiplier ``exp(iK)``,
    ``Im K > 0``) and ``psi_-`` (multiplier ``exp(-iK)``) decay to the right and
    left respectively, so ``G = psi_+(x_>) psi_-(x_<) / W`` with the Wronskian
    ``W = psi_+' psi_- - psi_+ psi_-'``. Exact and cheap; it agrees with
    :func:`green_fixed_frequency`, which is built on the periodic array sum.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    k0 = omega + 1j * eta
    if spec.alpha == 0.0:
        return complex(green_free(k0, x - x0))
    K = np.arccos(complex(dispersion_rhs(spec.alpha, k0)))
    if K.imag < 0:
        K = -K
    hi, lo = (x, x0) if x >= x0 else (x0, x)
    plus = lambda s: field_and_derivative(spec.alpha, k0, K, 1.0, s)
    minus = lambda s: field_and_derivative(spec.alpha, k0, -K, 1.0, s)
    # Wronskian is position independent; evaluate it off the scatterers
    pp, dpp = plus(0.25)
    pm, dpm = minus(0.25)
    wr = dpp * pm - pp * dpm
    return complex(plus(hi)[0] * minus(lo)[0] / wr)


def green_moving_frame(
    spec: LatticeSpec,
    xp: float,
    x0p: float,
    tp: float,
    t0p: float,
    boost: FrameBoost,
    eta: float = 0.1,
    omega_max: float = 40.0,
    K_nodes: int = 512,
) -> complex:
    """Retarded time-domain Green function between two moving-frame events.

    Both events are mapped to the lattice frame, where
    ``G(x, x0, tau) = int domega/2pi exp(-i omega tau) G(x, x0, omega + i eta)``.
    The free part is exact, ``-exp(-eta tau)/2`` inside the light cone. The
    scattered part uses real-symmetry to fold the frequency integral onto
    ``[0, omega_max]``; frequencies above ``omega_max`` are dropped, which
    rounds off the sharp reflection fronts on a time scale ``~1/omega_max``.
    """
    x, t = unboost_event(xp, tp, boost)
    x0, t0 = unboost_event(x0p, t0p, boost)
    tau = float(t - t0)
    y = float(x - x0)
    free = -0.5 * np.exp(-eta * tau) if tau > abs(y) else 0.0
    if spec.alpha == 0.0:
        return complex(free)
    panel = min(0.5 * eta, np.pi / (2 * max(abs(tau), 1e-9)))
    wn, ww = gauss_legendre_panels(np.linspace(0.0, omega_max, int(np.ceil(omega_max / panel)) + 1), 8)
    Kn, wK = gauss_legendre_panels(np.linspace(-np.pi, np.pi, max(1, K_nodes // 16) + 1), 16)
    k0 = wn + 1j * eta
    kern = _scattered_kernel(spec.alpha, k0[:, None], float(x), float(x0), Kn[None, :])
    scat = -spec.alpha * k0**2 * np.einsum("wk,k->w", kern, wK) / (2 * np.pi)
    value = np.sum(ww * np.exp(-1j * wn * tau) * scat) / np.pi
    return complex(free + np.real(value))


# --------------------------------------------------------------------------
# Doppler-shifted lattice dispersion and its roots


def _cot_remainder(z):
    """``cot(z/2)/2 - 1/z``, analytic at 0 (series below |z| = 1e-3)."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    out = 0.5 / np.tan(0.5 * zs) - 1.0 / zs
    return np.where(small, -z / 12.0 - z**3 / 720.0, out)


def _doppler_mismatch(alpha: float, drive: float, V: float, q):
    """``2 cos k0 - 2 cos q - alpha k0 sin k0`` with ``k0 = drive + V q``.

    Its zeros are the zeros of ``D(k0(q), q)`` that are not also poles.
    """
    k0 = drive + V * q
    return 2 * np.cos(k0) - 2 * np.cos(q) - alpha * k0 * np.sin(k0)


def _scan_grid(drive: float, Q: float, h: float = 5e-3) -> np.ndarray:
    uniform = np.linspace(-Q, Q, int(np.ceil(2 * Q / h)) + 1)
    scale = max(drive, 1e-12)
    geo = scale * np.logspace(-3, np.log10(max(Q / scale, 10.0)), 4000)
    return np.unique(np.concatenate([uniform, geo, -geo, [0.0]]))


def _root_window(drive: float, V: float) -> float:
    if V <= 0.0:
        return 100.0
    return float(min(1000.0, max(100.0, (drive + 40.0) / V)))


@dataclass(frozen=True)
class _Root:
    q: float
    k0: float
    slope: float  # dE/dq
    dk0: float  # dE/dk0 = -2 * (1 + alpha/2) sin k0 - alpha k0 cos k0


def work_roots(spec: LatticeSpec, boost: FrameBoost, omega: float, Q: float | None = None) -> list:
    """Real roots ``q`` of ``D(omega/gamma + V q, q) = 0`` within ``|q| <= Q``.

    ``Q`` defaults to ``(omega/gamma + 40)/V`` (at least 100, at most 1000):
    beyond it the residues fall off like ``q^-4``.

    Raises
    ------
    DegenerateRoot
        For a root with vanishing slope or one that coincides with a pole.
    """
    alpha, V = spec.alpha, boost.V
    drive = omega / boost.gamma
    if Q is None:
        Q = _root_window(drive, V)
    grid = _scan_grid(drive, Q)
    E = lambda q: _doppler_mismatch(alpha, drive, V, q)
    vals = E(grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    tol = Tolerance(rel=1e-15, abs=0.0, max_iter=200)
    qs = [find_root(lambda q: float(E(q)), grid[i], grid[i + 1], tol) for i in idx]
    qs += list(grid[vals == 0.0])
    out = []
    for q in sorted(qs):
        k0 = drive + V * q
        d = (1 + 0.5 * alpha) * np.sin(k0) + 0.5 * alpha * k0 * np.cos(k0)
        slope = -2 * d * V + 2 * np.sin(q)
        if abs(slope) < 1e-10:
            raise DegenerateRoot(f"root q={q!r} has vanishing slope (grazing)")
        if abs(np.cos(k0) - np.cos(q)) < 1e-12:
            raise DegenerateRoot(f"root q={q!r} coincides with a pole of D")
        out.append(_Root(float(q), float(k0), float(slope), float(-2 * d)))
    return out


def average_work(spec: LatticeSpec, osc: OscillatorSpec, boost: FrameBoost, omega: float) -> float:
    """Long-time average of the work needed to keep the dipole oscillating at ``omega``.

    Residue sum over the real roots ``q`` of ``D(omega/gamma + V q, q)``:
    ``<W> = (alpha omega^3 kappa^2 / 4 gamma) sum k0^2 t^2 2 C sign(d) / |dE/dq|``
    with ``t = 1/(k0^2 - q^2)``, ``C = cos k0 - cos q`` and ``d`` the band slope
    factor; the sign of ``d`` encodes which side of the real axis each pole
    sits on under the small-damping prescription. With no scatterers the
    free-space value ``kappa^2 omega^2 / 4`` is returned.

    The result is continuous as ``V -> 0+``, where it tends to the average of
    the static value ``-(omega^3 kappa^2 / 2) Im G(x, x, omega + i0)`` over
    the dipole position ``x`` in one cell; a moving dipole samples every
    position. At ``V = 0`` that cell average is returned. The static value at
    a fixed position is what :func:`work_trace` gives for ``V = 0``.

    Raises
    ------
    DegenerateRoot
        If a root is grazing or collides with a pole.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    if boost.V < 0:
        raise ValueError("average_work expects V >= 0 (use parity for V < 0)")
    g = boost.gamma
    if spec.alpha == 0.0:
        return 0.25 * osc.kappa**2 * omega**2
    total = 0.0
    for r in work_roots(spec, boost, omega):
        t = 1.0 / (r.k0**2 - r.q**2)
        C = np.cos(r.k0) - np.cos(r.q)
        # sign(d) = -sign(dE/dk0)
        total += r.k0**2 * t * t * 2 * C * (-np.sign(r.dk0)) / abs(r.slope)
    return float(spec.alpha * omega**3 * osc.kappa**2 / (4 * g) * total)


# --------------------------------------------------------------------------
# frequency-comb representation of the work


def default_eta_levels(omega: float) -> tuple:
    """Damping ladder ``(1e-3, 5e-4, 2.5e-4) * min(1, omega)``.

    The regularization must stay small compared with the drive frequency, so
    the ladder scales down for slow drives.
    """
    s = min(1.0, omega)
    return (1e-3 * s, 5e-4 * s, 2.5e-4 * s)


def _comb_nodes(alpha: float, drive: float, V: float, roots: list, eta_min: float, Q: float):
    """Quadrature nodes over ``[-Q, Q]``, geometrically graded toward each root."""
    base = list(np.linspace(-Q, Q, int(np.ceil(2 * Q / 0.25)) + 1))
    rq = np.array([r.q for r in roots])
    pts = set(base)
    for i, r in enumerate(roots):
        width = eta_min * abs(r.dk0) / abs(r.slope)
        eps = 0.25 * width
        left = rq[i - 1] if i > 0 else -Q
        right = rq[i + 1] if i + 1 < len(rq) else Q
        gap_l, gap_r = 0.5 * (r.q - left), 0.5 * (right - r.q)
        pts.update((r.q - eps, r.q + eps))
        step = eps
        while step < gap_r:
            pts.add(r.q + step)
            step *= 2
        step = eps
        while step < gap_l:
            pts.add(r.q - step)
            step *= 2
    edges = np.array(sorted(p for p in pts if -Q <= p <= Q))
    return gauss_legendre_panels(edges, 16)


def _image_remainder(z, shift):
    """``cot(z/2)/2 - 1/z - 1/(z + shift)`` for a nonzero multiple ``shift`` of 2 pi."""
    near = np.abs(z + shift) < np.abs(z)
    a = _cot_remainder(z + shift) - 1.0 / z
    b = _cot_remainder(z) - 1.0 / (z + shift)
    return np.where(near, a, b)


def _comb_integrands(alpha: float, drive: float, V: float, eta: float, p, harmonics):
    """Integrands of the comb coefficients ``B_l`` on nodes ``p`` (rows) for each ``l`` (columns).

    ``B_l = int dp/2pi [delta_l0 t_p - alpha k0^2 t_p t_{p + 2 pi l} / D(k0, p)]``,
    ``k0 = drive + V p + i eta``; written in forms free of light-line
    cancellations.
    """
    k0 = (drive + V * p + 1j * eta)[:, None]
    pp = p[:, None]
    l = np.asarray(harmonics)[None, :]
    ak2 = alpha * k0 * k0
    da = k0 * k0 - pp * pp
    u, v = k0 - pp, k0 + pp
    out = np.empty((p.size, l.size), dtype=complex)
    zero = (l == 0)[0]
    if np.any(zero):
        R0 = (_cot_remainder(u) + _cot_remainder(v)) / (2 * k0)
        out[:, zero] = (1.0 / (da + ak2 / (1.0 + ak2 * R0)))[:, [0] * int(zero.sum())]
    nz = ~zero
    if np.any(nz):
        s = 2 * np.pi * l[:, nz]
        db = k0 * k0 - (pp + s) ** 2
        R2 = (_image_remainder(u, -s) + _image_remainder(v, s)) / (2 * k0)
        out[:, nz] = -ak2 / ((1.0 + ak2 * R2) * da * db + ak2 * (da + db))
    return out


def _free_tail(drive: float, V: float, eta: float, Q: float) -> complex:
    """``int_{|p|>Q} dp/2pi 1/(k0^2 - p^2)`` for ``k0 = drive + V p + i eta``."""
    b = drive + 1j * eta
    a = V * V - 1.0
    disc = np.sqrt((2 * V * b) ** 2 - 4 * a * b * b + 0j)
    p1 = (-2 * V * b + disc) / (2 * a)
    p2 = (-2 * V * b - disc) / (2 * a)
    F = lambda x: np.log1p((p2 - p1) / (x - p2)) / (a * (p1 - p2))
    return complex((F(-Q) - F(Q)) / (2 * np.pi))


def _extrapolate(levels: np.ndarray, values: np.ndarray) -> tuple:
    """Polynomial extrapolation to ``eta = 0``; returns ``(value, spread)``."""
    def lagrange0(eta, vals):
        w = np.array([np.prod([eta[j] / (eta[j] - eta[i]) for j in range(len(eta)) if j != i]) for i in range(len(eta))])
        return np.tensordot(w, vals, axes=1)

    order = np.argsort(levels)
    eta, vals = levels[order], values[order]
    full = lagrange0(eta, vals)
    if len(eta) < 2:
        return full, np.full(np.shape(full), np.inf)
    lower = lagrange0(eta[:-1], vals[:-1])
    return full, np.abs(full - lower)


@dataclass(frozen=True)
class WorkTrace:
    """Work per unit time needed to hold the dipole at ``cos(omega t')``.

    Attributes
    ----------
    omega, V : float
    samples : ndarray, shape (n, 2)
        Rows of ``(t', W(omega, t'))``.
    collision_times : ndarray
        Scatterer passage times inside the sampled interval, spaced by
        ``a/(gamma V)``.
    error : ndarray
        Extrapolation spread of ``W`` at each sample.
    harmonics : ndarray
        Comb indices ``l`` retained.
    coefficients : ndarray
        Extrapolated comb coefficients ``B_l``.
    """

    omega: float
    V: float
    kappa: float
    position: float
    samples: np.ndarray
    collision_times: np.ndarray
    error: np.ndarray
    harmonics: np.ndarray
    coefficients: np.ndarray
    mean_error: float = field(default=0.0)

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.V**2)

    @property
    def collision_period(self) -> float:
        return np.inf if self.V == 0 else 1.0 / (self.gamma * self.V)

    def _components(self):
        """Frequencies ``mu`` and coefficients ``c`` with ``W(t) = Re sum c exp(i mu t)``."""
        g, w, V = self.gamma, self.omega, self.V
        l = self.harmonics
        B = self.coefficients
        Bminus = B[::-1]  # B_{-l}, harmonics are symmetric
        nu = 2 * np.pi * l * g * V
        phase = np.exp(2j * np.pi * l * g * self.position)
        P = (w + nu) * np.conj(Bminus) * phase
        Qc = (w - nu) * B * phase
        pref = -(w * w * self.kappa**2) / (4j * g)
        mu = np.concatenate([2 * w + nu, nu, nu - 2 * w])
        c = pref * np.concatenate([P, Qc - P, -Qc])
        return mu, c

    def evaluate(self, t) -> np.ndarray:
        """``W(omega, t')`` at arbitrary times from the stored comb."""
        t = np.asarray(t, dtype=float)
        mu, c = self._components()
        # explicit pairwise sum: independent of BLAS threading
        return np.real(np.sum(np.exp(1j * np.multiply.outer(t, mu)) * c, axis=-1))

    def window_average(self, start: float, duration: float, window: str = "boxcar") -> float:
        """Exact average of ``W`` over ``[start, start + duration]``.

        ``window="hann"`` weights the interval with ``sin^2(pi s / duration)``,
        suppressing leakage of comb lines that are not commensurate with the
        window from ``1/(mu T)`` to ``1/(mu T)^3``.
        """
        mu, c = self._components()
        T = float(duration)
        x = mu * T

        def box(x):
            small = np.abs(x) < 1e-12
            xs = np.where(small, 1.0, x)
            return np.where(small, 1.0 + 0j, (np.exp(1j * xs) - 1.0) / (1j * xs))

        if window == "boxcar":
            kern = box(x)
        elif window == "hann":
            kern = 0.5 * box(x) - 0.25 * (box(x + 2 * np.pi) + box(x - 2 * np.pi))
            kern = kern / 0.5
        else:
            raise ValueError(f"unknown window {window!r}")
        return float(np.real(np.sum(c * np.exp(1j * mu * start) * kern)))

    def mean(self) -> float:
        """Infinite-time average (the zero-frequency comb line)."""
        mu, c = self._components()
        return float(np.real(np.sum(c[np.abs(mu) < 1e-14])))


def work_trace(
    spec: LatticeSpec,
    osc: OscillatorSpec,
    boost: FrameBoost,
    omega: float,
    t_grid,
    eta_levels=None,
    harmonics: int = 32,
    Q: float | None = None,
    spread_tol: float = 1e-2,
) -> WorkTrace:
    """Work trace ``W(omega, t')`` for the prescribed motion ``X = cos(omega t')``.

    The oscillator sits at ``x' = osc.x0`` while scatterers stream past with
    period ``a/(gamma V)``. The self-field is a comb of lines at
    ``+-omega + 2 pi l gamma V``; each coefficient is one integral over the
    extended Bloch line, computed at every damping level in ``eta_levels``
    and extrapolated to zero damping.

    Raises
    ------
    WorkTraceNoConverge
        If the extrapolation spread exceeds ``spread_tol`` relative to the
        comb amplitude ``sum |c|``; the exception carries the trace as
        ``partial``.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    g, V = boost.gamma, boost.V
    drive = omega / g
    if Q is None:
        Q = _root_window(drive, V)
    levels = np.asarray(default_eta_levels(omega) if eta_levels is None else eta_levels, dtype=float)
    L = int(harmonics) if V > 0 else 0
    l = np.arange(-L, L + 1)
    roots = [r for r in work_roots(spec, boost, omega, Q)] if spec.alpha > 0 else []
    if spec.alpha == 0.0:
        # free space: grade toward the two light-line poles of 1/(k0^2 - p^2)
        p1, p2 = drive / (1 - V), -drive / (1 + V)
        roots = [_Root(p2, -p2, 2 * (1 + V) * (-p2), -2 * p2), _Root(p1, p1, 2 * (V - 1) * p1, 2 * p1)]
    B = np.empty((levels.size, l.size), dtype=complex)
    if V == 0.0:
        # every comb line sits at omega; their sum is the equal-point Green function
        for i, eta in enumerate(levels):
            B[i, 0] = green_bloch(spec, osc.x0, osc.x0, omega, eta)
    else:
        nodes, weights = _comb_nodes(spec.alpha, drive, V, roots, float(levels.min()), Q)
        for i, eta in enumerate(levels):
            vals = _comb_integrands(spec.alpha, drive, V, eta, nodes, l)
            B[i] = np.einsum("n,nl->l", weights, vals) / (2 * np.pi)
            B[i, L] += _free_tail(drive, V, eta, Q)
    Bx, spread = _extrapolate(levels, B)
    t = np.asarray(t_grid, dtype=float)
    tmp = WorkTrace(omega, V, osc.kappa, osc.x0, np.empty((0, 2)), np.empty(0), np.empty(0), l, Bx)
    W = tmp.evaluate(t)
    # Propagate the extrapolation spread through the comb with absolute values.
    nu = 2 * np.pi * l * g * V
    pref = omega * omega * osc.kappa**2 / (4 * g)
    line_err = np.abs(omega + nu) * spread[::-1] + np.abs(omega - nu) * spread
    err_bound = np.full(t.shape, 2 * pref * float(np.sum(line_err)))
    mean_err = 2 * pref * omega * float(spread[L])
    if V > 0 and t.size:
        Tc = 1.0 / (g * V)
        j0 = np.ceil((t.min() / Tc) + g * osc.x0)
        j1 = np.floor((t.max() / Tc) + g * osc.x0)
        coll = (np.arange(j0, j1 + 1) - g * osc.x0) * Tc
    else:
        coll = np.empty(0)
    trace = WorkTrace(
        omega, V, osc.kappa, osc.x0, np.column_stack([t, W]), coll, err_bound, l, Bx,
        mean_error=mean_err,
    )
    # amplitude bound of the comb: independent of where the trace is sampled
    scale = max(float(np.sum(np.abs(trace._components()[1]))), 1e-300)
    if np.max(err_bound, initial=0.0) > spread_tol * scale:
        raise WorkTraceNoConverge(
            f"damping extrapolation spread {np.max(err_bound):.3g} exceeds {spread_tol:g} of {scale:.3g}",
            partial=trace, spread=float(np.max(err_bound) / scale),
        )
    return trace
