"""Intrinsic and extrinsic OAM of a packet that misses the SPP axis.

A q = 1 phase plate always hands the packet one unit of OAM about its own
axis (extrinsic), but the helical part about the packet centre (intrinsic)
fades as the packet is moved off the singularity.
"""

import numpy as np

import spinorbit as so
from spinorbit.analysis import displaced_mode_probabilities

rho0 = np.linspace(0.0, 6.0, 13)
curves = displaced_mode_probabilities(1, rho0)

print(f"{'rho0':>5}{'P(0,0)':>9}{'P(0,1)':>9}{'P(1,1)':>9}{'intrinsic':>11}{'extrinsic':>11}")
for i, r in enumerate(curves.rho0):
    p = curves.probabilities
    print(
        f"{r:5.2f}{p[(0, 0)][i]:9.4f}{p[(0, 1)][i]:9.4f}{p[(1, 1)][i]:9.4f}"
        f"{curves.intrinsic_oam[i]:11.4f}{curves.extrinsic_oam[i]:11.4f}"
    )

print(f"\nP(0,1) at rho0 = 0 is pi/4 = {np.pi / 4:.4f}; P(1,1) is pi/32 = {np.pi / 32:.4f}")

# Gaussian falloff of the intrinsic part: log(L_int) is linear in rho0^2.
keep = curves.intrinsic_oam > 1e-8
slope, icpt = np.polyfit(curves.rho0[keep] ** 2, np.log(curves.intrinsic_oam[keep]), 1)
print(f"fit: L_int ~ {np.exp(icpt):.3f} exp({slope:.3f} rho0^2)")

# The same split for one packet, directly from the field.
grid = so.make_grid(512, 512, 10.0)
psi = so.apply_spp(so.gaussian_wavepacket(grid, (4.0, 0.0)), 1)
print(f"\npacket at (4, 0): <Lz> about SPP axis {so.extrinsic_oam(psi, (0.0, 0.0)):.4f}, "
      f"about its centre {so.extrinsic_oam(psi, (4.0, 0.0)):.4f}")
