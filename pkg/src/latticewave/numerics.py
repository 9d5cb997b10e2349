"""Shared numerical kernels: bracketed roots, adaptive quadrature, symmetric sums.

Every routine here is a pure function of its arguments, so any of them can be
called from concurrent workers without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize

from .errors import NoBracket, NoConvergence, QuadratureFail, SumDiverges

__all__ = [
    "Tolerance",
    "TruncatedSum",
    "DEFAULT_TOL",
    "find_root",
    "scan_roots",
    "integrate",
    "gauss_legendre_panels",
    "sum_symmetric",
]


@dataclass(frozen=True)
class Tolerance:
    """Convergence targets for the iterative kernels.

    Parameters
    ----------
    rel : float
        Relative tolerance, strictly positive.
    abs : float
        Absolute tolerance, non-negative.
    max_iter : int
        Iteration budget (root finding) or shell-doubling budget (sums).
    """

    rel: float = 1e-10
    abs: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (self.rel > 0):
            raise ValueError("Tolerance.rel must be positive")
        if not (self.abs >= 0):
            raise ValueError("Tolerance.abs must be non-negative")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("Tolerance.max_iter must be a positive integer")

    def target(self, value: complex) -> float:
        return max(self.abs, self.rel * abs(value))


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class TruncatedSum:
    """Result of :func:`sum_symmetric`.

    Attributes
    ----------
    value : complex
        Converged (possibly extrapolated) value of the series.
    terms_used : int
        Largest shell index ``M`` included, so ``2M + 1`` terms were summed.
    error_estimate : float
        Magnitude of the last included shell for plain summation; for the
        extrapolated mode, the change produced by the final doubling step.
    """

    value: complex
    terms_used: int
    error_estimate: float


# --------------------------------------------------------------------------
# roots


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Locate a sign change of ``f`` inside ``[lo, hi]`` with Brent's method.

    Raises
    ------
    NoBracket
        If ``f(lo)`` and ``f(hi)`` share a sign.
    NoConvergence
        If ``tol.max_iter`` iterations do not shrink the bracket enough.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)) or np.sign(flo) == np.sign(fhi):
        raise NoBracket(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    rtol = max(tol.rel, 4.0 * np.finfo(float).eps)
    xtol = max(tol.abs, 1e-300)
    try:
        return float(optimize.brentq(f, lo, hi, xtol=xtol, rtol=rtol, maxiter=tol.max_iter))
    except RuntimeError as exc:  # brentq signals exhaustion this way
        raise NoConvergence(str(exc)) from exc


def scan_roots(
    f: Callable[[np.ndarray], np.ndarray],
    grid: Sequence[float] | np.ndarray,
    tol: Tolerance = DEFAULT_TOL,
    scalar_f: Callable[[float], float] | None = None,
) -> np.ndarray:
    """Find every sign change of ``f`` visible on ``grid`` and refine it.

    ``f`` must accept an array. Roots closer together than the grid spacing
    are invisible to the scan, so callers pick the grid from the scale of
    the problem.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(f(grid), dtype=float)
    g = scalar_f if scalar_f is not None else (lambda x: float(f(np.asarray([x]))[0]))
    roots = list(grid[vals == 0.0])
    s = np.sign(vals)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    for i in idx:
        roots.append(find_root(g, grid[i], grid[i + 1], tol))
    return np.array(sorted(roots))


# --------------------------------------------------------------------------
# quadrature

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod abscissae.
_WG_FULL = np.zeros(15)
_WG_FULL[[1, 3, 5]] = _WG[:3]
_WG_FULL[7] = _WG[3]
_WG_FULL[[9, 11, 13]] = _WG[:3][::-1]


def _eval(f, x: np.ndarray) -> np.ndarray:
    y = f(x)
    y = np.asarray(y)
    if y.shape != x.shape:
        y = np.array([f(float(t)) for t in x.ravel()]).reshape(x.shape)
    return y


def _gk_panels(f, lo: np.ndarray, hi: np.ndarray):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = _eval(f, x)
    if not np.all(np.isfinite(y)):
        raise QuadratureFail("integrand returned a non-finite value")
    # einsum avoids BLAS, whose threaded reductions are not reproducible
    kron = half * np.einsum("pn,n->p", y, _WK)
    gauss = half * np.einsum("pn,n->p", y, _WG_FULL)
    return kron, np.abs(kron - gauss)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: Tolerance = DEFAULT_TOL,
    points: Iterable[float] | None = None,
    max_panel: float | None = None,
    limit: int = 4000,
) -> complex:
    """Adaptive Gauss-Kronrod (7/15) integral of a possibly complex integrand.

    Parameters
    ----------
    f : callable
        Vectorized integrand; receives a 2-D array of abscissae and must
        return an array of the same shape. Scalar-only callables are
        accepted but slower.
    a, b : float
        Integration limits. ``b < a`` returns the negated integral.
    tol : Tolerance
        Stop when the summed panel error is below ``max(tol.abs, tol.rel*|I|)``.
    points : iterable of float, optional
        Interior breakpoints (kinks, known peaks) that always start a panel.
    max_panel : float, optional
        Upper bound on the initial panel width, typically a quarter period of
        the fastest oscillation in the integrand.
    limit : int
        Maximum number of panels before giving up.

    Returns
    -------
    complex or float
        Real when the integrand is real.

    Raises
    ------
    QuadratureFail
        When ``limit`` panels do not reach the tolerance; the exception
        carries the best estimate.
    """
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol, points, max_panel, limit)
    edges = [a, b]
    if points is not None:
        edges += [p for p in points if a < p < b]
    edges = np.unique(np.asarray(edges, dtype=float))
    if max_panel is not None and max_panel > 0:
        refined = [edges[0]]
        for lo, hi in zip(edges[:-1], edges[1:]):
            n = max(1, int(np.ceil((hi - lo) / max_panel)))
            refined.extend(np.linspace(lo, hi, n + 1)[1:])
        edges = np.asarray(refined)
    lo, hi = edges[:-1], edges[1:]
    val, err = _gk_panels(f, lo, hi)
    width = b - a
    while True:
        total = val.sum()
        target = tol.target(total)
        if err.sum() <= target:
            return total
        share = target * (hi - lo) / width
        bad = err > share
        if not np.any(bad):  # roundoff floor: each panel is already at its share
            bad = err >= np.max(err)
        if lo.size + np.count_nonzero(bad) > limit:
            raise QuadratureFail(
                f"adaptive quadrature exceeded {limit} panels on [{a!r}, {b!r}]",
                estimate=total, error=float(err.sum()),
            )
        blo, bhi = lo[bad], hi[bad]
        bmid = 0.5 * (blo + bhi)
        nlo = np.concatenate([blo, bmid])
        nhi = np.concatenate([bmid, bhi])
        nval, nerr = _gk_panels(f, nlo, nhi)
        keep = ~bad
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        order = np.argsort(lo, kind="stable")  # fixed summation order keeps results reproducible
        lo, hi, val, err = lo[order], hi[order], val[order], err[order]


def gauss_legendre_panels(edges: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on consecutive panels.

    Useful when many integrals share the same breakpoints and a fixed rule
    is cheaper than adapting each one.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


# --------------------------------------------------------------------------
# symmetric sums


def _shell_block(term, start: int, stop: int, vectorized: bool) -> complex:
    """Sum of term(m) + term(-m) for start <= m < stop."""
    if vectorized:
        m = np.arange(start, stop)
        return complex(np.sum(term(m) + term(-m)))
    return complex(sum(term(m) + term(-m) for m in range(start, stop)))


def _is_vectorized(term) -> bool:
    try:
        out = np.asarray(term(np.arange(1, 4)))
    except Exception:
        return False
    return out.shape == (3,)


def sum_symmetric(
    term: Callable,
    tol: Tolerance = DEFAULT_TOL,
    accelerate: bool = True,
    first_shell: int = 8,
    max_shells: int = 1 << 17,
) -> TruncatedSum:
    """Sum ``term(m)`` over all integers in symmetric shells ``m = 0, ±1, ±2, ...``.

    Parameters
    ----------
    term : callable
        ``term(m)`` for integer ``m``; may accept an integer array.
    tol : Tolerance
        Relative/absolute targets. With ``accelerate=False`` summation stops once
        a shell contributes less than the target.
    accelerate : bool
        Series with algebraic tails (terms ~ 1/m^2) converge only like 1/M, so
        by default partial sums at M = 8, 16, 32, ... are Richardson
        extrapolated in 1/M. Exponentially convergent series are unaffected.
    first_shell : int
        Cutoff of the first partial sum in accelerated mode.
    max_shells : int
        Largest cutoff tried before declaring divergence.

    Raises
    ------
    SumDiverges
        If the target is not met by ``max_shells``.
    """
    vec = _is_vectorized(term)
    s0 = complex(np.asarray(term(np.array([0])))[0]) if vec else complex(term(0))
    if not accelerate:
        total = s0
        m = 1
        while m <= max_shells:
            shell = _shell_block(term, m, m + 1, vec)
            total += shell
            if abs(shell) <= tol.target(total):
                return TruncatedSum(total, m, abs(shell))
            m += 1
        raise SumDiverges(f"shell {max_shells} still exceeds tolerance", partial=total)

    depth_cap = 6
    partial = s0 + _shell_block(term, 1, first_shell + 1, vec)
    table: list[complex] = [partial]
    best_prev = partial
    M = first_shell
    while 2 * M <= max_shells:
        partial += _shell_block(term, M + 1, 2 * M + 1, vec)
        M *= 2
        row = [partial]
        for i in range(1, min(len(table), depth_cap) + 1):
            f = 2.0**i
            row.append((f * row[i - 1] - table[i - 1]) / (f - 1.0))
        table = row
        best = row[-1]
        delta = abs(best - best_prev)
        if delta <= tol.target(best) and len(row) > 2:
            return TruncatedSum(best, M, delta)
        best_prev = best
    raise SumDiverges(f"no convergence up to {M} shells", partial=best_prev)
