"""Band structure and energy transport of a resting lattice of point scatterers.

Run with ``python3 demos/01_band_structure.py``. Units: c = a = 1.
"""

import numpy as np

from latticewave import LatticeSpec, band_edge, bloch_mode, bloch_vector, energy_velocity
from latticewave.lattice import group_velocity_fd, mode_at_frequency

spec = LatticeSpec(alpha=1.0)
print(f"polarizability alpha = {spec.alpha}, long-wavelength index n = {spec.index:.6f}")

# %% Pass bands and gaps
# Inside a band the Bloch vector is real; in a gap it picks up an imaginary
# part and the wave decays from cell to cell.
for band in (1, 2, 3):
    top = band_edge(spec, band)
    print(f"band {band}: omega from {(band - 1) * np.pi:.6f} to {top:.6f}")

for omega in (0.5, 1.5, 2.0, 3.0, 4.0):
    K = bloch_vector(spec, omega)
    kind = "propagating" if K.imag == 0 else "evanescent"
    print(f"omega = {omega:4.1f}: K = {K.real:.6f} + {K.imag:.6f}i  ({kind})")

# %% Energy velocity against the slope of the band
# The ratio of cell-averaged power flow to energy density equals d omega / dK.
# Near a band edge both go to zero. The last row sits closer to the edge
# than the finite-difference step (1e-5), so only the exact value holds there.
edge = band_edge(spec, 1)
print("\n omega      v_energy     d omega/dK (finite difference)")
for omega in np.concatenate([np.linspace(0.001, 1.6, 6), edge - np.array([1e-2, 1e-4, 1e-6])]):
    mode = mode_at_frequency(spec, omega)
    print(f"{omega:9.6f}  {energy_velocity(mode):.8f}  {float(group_velocity_fd(spec, omega)):.8f}")

print(f"\nlong-wavelength limit 1/n = {1 / spec.index:.8f}")

# %% Higher bands carry energy too, at a different speed
mode = bloch_mode(spec, 2, 1.0)
print(f"band 2 at K = 1: omega = {mode.k:.6f}, v = {energy_velocity(mode):.6f}")
