"""Independent reference computations used by the tests.

Nothing here imports the numerical core of :mod:`latticewave`; each oracle
solves the same problem by a different route (finite chains, brute-force
sums, adaptive quadrature from scipy, ODE integration).
"""

from __future__ import annotations

import numpy as np
from scipy import integrate as spi


def dispersion_rhs(alpha, k):
    return np.cos(k) - 0.5 * alpha * k * np.sin(k)


def band_frequency_newton(alpha: float, band: int, K: float) -> float:
    """Solve ``cos K = cos k - (alpha k/2) sin k`` on band ``band`` by bisection then Newton."""
    lo, hi = (band - 1) * np.pi, band * np.pi
    f = lambda k: dispersion_rhs(alpha, k) - np.cos(K)
    grid = np.linspace(lo + 1e-12, hi - 1e-12, 20001)
    vals = f(grid)
    i = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0][0]
    a, b = grid[i], grid[i + 1]
    for _ in range(80):
        m = 0.5 * (a + b)
        if np.sign(f(m)) == np.sign(f(a)):
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def chain_green(alpha: float, k0: complex, x: float, x0: float, sites) -> complex:
    """Green function of a finite chain of delta scatterers, by transfer matrices.

    Solves ``G'' + k0^2 (1 + alpha sum_j delta(x - j)) G = delta(x - x0)`` with
    purely outgoing waves outside the chain. Two homogeneous solutions are
    propagated inward from the ends: ``psi_l`` (``exp(-i k0 x)`` left of the
    chain) and ``psi_r`` (``exp(i k0 x)`` right of it).
    """
    sites = np.sort(np.asarray(sites, dtype=float))

    def free_step(state, h):
        psi, dpsi = state
        c, s = np.cos(k0 * h), np.sin(k0 * h)
        return np.array([psi * c + dpsi * s / k0, -k0 * psi * s + dpsi * c])

    def propagate(start_pos, state, target, forward):
        pos = start_pos
        kicks = sites if forward else sites[::-1]
        for j in kicks:
            if forward and not (pos < j <= target):
                continue
            if not forward and not (target <= j < pos):
                continue
            state = free_step(state, j - pos)
            # derivative jump across a scatterer
            jump = -alpha * k0**2 * state[0]
            state = state + np.array([0.0, jump if forward else -jump])
            pos = j
        return free_step(state, target - pos)

    left_end = sites[0] - 0.5
    right_end = sites[-1] + 0.5
    start_l = np.array([np.exp(-1j * k0 * left_end), -1j * k0 * np.exp(-1j * k0 * left_end)])
    start_r = np.array([np.exp(1j * k0 * right_end), 1j * k0 * np.exp(1j * k0 * right_end)])

    lo, hi = min(x, x0), max(x, x0)
    # evaluate both solutions at x0 (off-site) for the Wronskian
    l_at = propagate(left_end, start_l, x0, True)
    r_at = propagate(right_end, start_r, x0, False)
    wr = l_at[0] * r_at[1] - l_at[1] * r_at[0]
    l_lo = propagate(left_end, start_l, lo, True)[0]
    r_hi = propagate(right_end, start_r, hi, False)[0]
    return complex(l_lo * r_hi / wr)


def brute_lattice_sum(k0: complex, K: float, P: int = 2_000_000) -> complex:
    """``sum_{|p| <= P} 1/(k0^2 - (K + 2 pi p)^2)`` plus the leading ``1/p^2`` tail."""
    p = np.arange(-P, P + 1)
    head = np.sum(1.0 / (k0 * k0 - (K + 2 * np.pi * p) ** 2))
    tail = -2.0 / (4 * np.pi**2 * P)
    return complex(head + tail)


def quad_complex(f, a: float, b: float, points=None, limit: int = 400) -> complex:
    re = spi.quad(lambda x: np.real(f(x)), a, b, points=points, limit=limit, epsabs=1e-13, epsrel=1e-12)[0]
    im = spi.quad(lambda x: np.imag(f(x)), a, b, points=points, limit=limit, epsabs=1e-13, epsrel=1e-12)[0]
    return complex(re, im)


def mode_field_direct(alpha: float, k: float, K: float, x: float) -> complex:
    """Unnormalized Bloch solution built by marching a transfer matrix cell to cell.

    Inside the central cell the solution is fixed by continuity at 0 and the
    Bloch condition; the value is only used in ratios.
    """
    # Two-wave ansatz on (-1/2, 0) and (0, 1/2) with phi(1/2) = exp(iK) phi(-1/2)
    # and the same for the derivative, plus the jump condition at 0.
    A = np.zeros((4, 4), dtype=complex)
    e = lambda y: np.array([np.exp(1j * k * y), np.exp(-1j * k * y)])
    de = lambda y: np.array([1j * k * np.exp(1j * k * y), -1j * k * np.exp(-1j * k * y)])
    # unknowns: left (a, b), right (c, d)
    A[0, :2], A[0, 2:] = e(0.0), -e(0.0)  # continuity at 0
    A[1, :2], A[1, 2:] = alpha * k * k * e(0.0) - de(0.0), de(0.0)  # jump
    A[2, :2], A[2, 2:] = np.exp(1j * K) * e(-0.5), -e(0.5)  # Bloch, value
    A[3, :2], A[3, 2:] = np.exp(1j * K) * de(-0.5), -de(0.5)  # Bloch, slope
    _, _, vh = np.linalg.svd(A)
    coef = np.conj(vh[-1])
    j = np.floor(x + 0.5)
    y = x - j
    local = coef[2:] @ e(y) if y >= 0 else coef[:2] @ e(y)
    return complex(np.exp(1j * K * j) * local)


def ode_trajectory(omega0: float, gamma: float, X0: float, V0: float, t):
    """``X'' + gamma X' + omega0^2 X = 0`` by scipy's adaptive Runge-Kutta."""
    sol = spi.solve_ivp(
        lambda _, y: [y[1], -gamma * y[1] - omega0**2 * y[0]],
        (float(t[0]), float(t[-1])),
        [X0, V0],
        t_eval=t,
        rtol=1e-11,
        atol=1e-13,
        method="DOP853",
    )
    return sol.y[0]
