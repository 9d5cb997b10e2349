"""Work needed to keep an oscillator going while it moves through the lattice.

Run with ``python3 demos/02_moving_oscillator_work.py``. Units: c = a = 1.
"""

import numpy as np

from latticewave import FrameBoost, LatticeSpec, OscillatorSpec, average_work, work_trace
from latticewave.classical import macroscopic_damping
from latticewave.lattice import bloch_mode
from latticewave.relativity import moving_frame_spectrum, negative_frequency_set

# %% Uniform medium first
# Radiation damping switches off once the oscillator outruns light in the
# medium (V > 1/n); from then on the emitted waves feed energy back.
n = np.sqrt(2.0)
for V in (0.0, 0.3, 0.6, 0.75, 0.9):
    print(f"V = {V:4.2f}: Gamma = {macroscopic_damping(1.0, V, n, kappa=0.5):.6f}")

# %% What a moving observer sees of one lattice mode
# Every diffraction order of a Bloch mode is Doppler shifted on its own; in
# the moving frame some of them end up at negative frequency.
mode = bloch_mode(LatticeSpec(1.0), 1, 1.0)
spectrum = moving_frame_spectrum(mode, FrameBoost(0.6), (-4, 4), coverage=0.0)
negative = negative_frequency_set(spectrum)
print("\norders with negative moving-frame frequency at V = 0.6:", sorted(c.m for c in negative))

# %% Average work in a strongly scattering lattice
# Normalized to its value at rest. At low drive frequency the curve is a
# sharp step at the macroscopic threshold 1/sqrt(5); at higher frequency the
# lattice structure smooths the step.
spec = LatticeSpec(4.0)
print(f"\nthreshold 1/n = {1 / spec.index:.4f}")
print("   V     <W>/W0 (omega=0.0005)   <W>/W0 (omega=0.1)")
rest = {w: average_work(spec, OscillatorSpec(w), FrameBoost(0.0), w) for w in (5e-4, 0.1)}
for V in (0.1, 0.3, 0.4, 0.45, 0.5, 0.6, 0.8):
    row = [average_work(spec, OscillatorSpec(w), FrameBoost(V), w) / rest[w] for w in (5e-4, 0.1)]
    print(f"{V:5.2f}   {row[0]:12.6f}            {row[1]:10.6f}")

# %% The time-resolved work
# Each passing scatterer modulates the work; its long-time mean reproduces
# the residue-sum average above.
trace = work_trace(spec, OscillatorSpec(1.0), FrameBoost(0.4), 1.0, np.linspace(0.0, np.pi, 9))
print("\n  t        W(t)")
for t, W in trace.samples:
    print(f"{t:6.3f}  {W: .6e}")
print(f"mean of the trace {trace.mean():.6e}, collision period {trace.collision_period:.4f}")
