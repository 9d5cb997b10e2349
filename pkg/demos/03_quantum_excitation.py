"""Excitation of a ground-state oscillator dragged through the lattice.

Run with ``python3 demos/03_quantum_excitation.py`` (about ten seconds).
Units: c = a = 1.
"""

import numpy as np

from latticewave import FrameBoost, LatticeSpec, OscillatorSpec, absorption_rate, resonance_roots
from latticewave.quantum import finite_time_rate, macroscopic_rate

spec = LatticeSpec(1.0)
kappa = 0.5
uniform = kappa**2 / (4 * np.sqrt(2.0))

# %% Rate against velocity
# A slow oscillator is only excited above the macroscopic threshold 1/sqrt(2),
# where the rate measured on its own clock settles at the uniform-medium value.
# A faster oscillator already picks up energy well below that velocity.
print("   V     omega0=1e-5     omega0=0.1    (in units of the uniform-medium rate)")
for V in (0.2, 0.4, 0.6, 0.69, 0.7, 0.72, 0.8, 0.9):
    row = [absorption_rate(spec, OscillatorSpec(w0, kappa), FrameBoost(V)).rate_oscillator_frame / uniform for w0 in (1e-5, 0.1)]
    print(f"{V:5.2f}   {row[0]:12.4e}   {row[1]:12.4e}")

# %% Where the rate comes from
# Each term belongs to one extended-zone Bloch vector at which the Doppler
# shifted mode frequency cancels the oscillator's own frequency.
b = FrameBoost(0.8)
print("\nresonances at omega0 = 0.1, V = 0.8")
for r in resonance_roots(spec, 0.1, b):
    print(f"  band {r.band}, order {r.m:3d}: K = {r.K_m:9.5f}, omega = {r.k:.5f}, weight {r.weight:.3e}")

# %% Two independent routes to the same number
# Summing the first-order amplitudes of every mode over a long but finite
# passage, and dividing by its duration, approaches the resonance sum.
osc = OscillatorSpec(0.1, kappa)
exact = absorption_rate(spec, osc, b).rate
finite = finite_time_rate(spec, osc, b, N_cells=10001)
print(f"\nresonance sum {exact:.6e}, finite passage {finite:.6e}, ratio {finite / exact:.4f}")
print(f"uniform medium, lattice frame: {macroscopic_rate(osc, b, np.sqrt(2.0)):.6e}")
