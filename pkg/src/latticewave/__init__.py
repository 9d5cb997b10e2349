"""Waves in a one-dimensional lattice of point scatterers, seen from rest and in motion.

Submodules
----------
numerics
    Root finding, adaptive quadrature and symmetric series.
lattice
    Band structure, Bloch modes and energy transport of the resting lattice.
relativity
    Boosts, Doppler shifts and the diffracted spectrum seen by a moving observer.
classical
    Damping in a uniform medium, lattice Green functions and the work needed
    to drive an oscillator through the lattice.
quantum
    Excitation rate of a ground-state oscillator dragged through the lattice.
cli
    The ``latticewave`` command-line program.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BandNotFound,
    DegenerateRoot,
    EdgeSingular,
    LatticeWaveError,
    NoBracket,
    NoConvergence,
    OnShellSingular,
    QuadratureFail,
    SumDiverges,
    ThresholdSingular,
    WorkTraceNoConverge,
)
from .numerics import Tolerance, TruncatedSum, find_root, integrate, sum_symmetric  # noqa: F401
from .lattice import (  # noqa: F401
    BlochMode,
    LatticeSpec,
    band_edge,
    band_frequency,
    bloch_mode,
    bloch_vector,
    energy_velocity,
    mode_field,
    normalization,
)
from .relativity import FrameBoost, MovingModeComponent, moving_frame_spectrum  # noqa: F401
from .classical import (  # noqa: F401
    MacroscopicMedium,
    OscillatorSpec,
    WorkTrace,
    average_work,
    green_fixed_frequency,
    lattice_D,
    macroscopic_damping,
    work_trace,
)
from .quantum import AbsorptionRate, ResonanceRoot, absorption_rate, resonance_roots  # noqa: F401
