"""Prism pairs as a Trotter approximation of the quadrupole.

Alternating perpendicular gradients only approximate the quadrupole
rotation; splitting them into N thinner pairs shrinks the error inside the
central cell, while the pattern repeats on a lattice of pitch 2 N rho_c.
"""

import numpy as np

import spinorbit as so

grid = so.make_grid(512, 512, 8.0)
up = so.gaussian_wavepacket(grid, (0.0, 0.0), so.UP_Z)
rho_c = so.OPTIMAL_RHO_C
quad = so.apply_quadrupole(up, rho_c)

X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
cell = (np.abs(X) < rho_c) & (np.abs(Y) < rho_c)
area = grid.cell_area

print(f"{'N':>3}{'||LOV - Q|| in cell':>22}{'P(flip)':>10}")
for N in (1, 2, 4, 8):
    lov = so.apply_lov(up, N, rho_c=rho_c)
    diff = np.abs(lov.up - quad.up) ** 2 + np.abs(lov.down - quad.down) ** 2
    err = np.sqrt(np.sum(diff[cell]) * area)
    flip = np.sum(np.abs(lov.down) ** 2) * area
    print(f"{N:3d}{err:22.5f}{flip:10.4f}")
print(f"{'Q':>3}{'':22}{np.sum(np.abs(quad.down) ** 2) * area:10.4f}")

# Quadrupoles commute with each other, so N thin ones are exactly one thick one.
thin = up
for _ in range(4):
    thin = so.apply_quadrupole(thin, rho_c * 4)
print(f"\n4 x Q(4 rho_c) vs Q(rho_c): max |diff| {np.max(np.abs(thin.down - quad.down)):.1e}")
