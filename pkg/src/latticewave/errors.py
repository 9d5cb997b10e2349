"""Exception hierarchy shared by every latticewave module."""

from __future__ import annotations


class LatticeWaveError(Exception):
    """Base class for all recoverable numerical and domain errors."""


class NoBracket(LatticeWaveError):
    """The root-finding interval does not contain a sign change."""


class NoConvergence(LatticeWaveError):
    """An iterative method exhausted its iteration budget."""


class QuadratureFail(LatticeWaveError):
    """Adaptive quadrature could not reach the requested tolerance.

    Attributes
    ----------
    estimate : complex
        Best integral estimate available when the budget ran out.
    error : float
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message: str, estimate: complex = float("nan"), error: float = float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SumDiverges(LatticeWaveError):
    """A symmetric series showed no convergence within its shell budget."""

    def __init__(self, message: str, partial: complex = float("nan")):
        super().__init__(message)
        self.partial = partial


class BandNotFound(LatticeWaveError):
    """The requested band index lies outside the supported search window."""


class EdgeSingular(LatticeWaveError):
    """A Bloch mode sits on a band edge where its normalization diverges."""


class OnShellSingular(LatticeWaveError):
    """A resonant denominator vanishes (pole on the real axis)."""


class ThresholdSingular(LatticeWaveError):
    """The velocity sits exactly on the Cherenkov threshold V = c/n."""


class DegenerateRoot(LatticeWaveError):
    """Two roots collide or a root has vanishing slope, so residues are undefined."""


class WorkTraceNoConverge(LatticeWaveError):
    """The small-damping extrapolation of a work trace did not settle.

    Attributes
    ----------
    partial : object
        The best available :class:`~latticewave.classical.WorkTrace`.
    spread : float
        Relative disagreement between extrapolation orders.
    """

    def __init__(self, message: str, partial=None, spread: float = float("nan")):
        super().__init__(message)
        self.partial = partial
        self.spread = spread
