"""Spinor wavepacket simulator for neutron spin-orbit states.

Fields live on a dimensionless transverse grid (lengths in units of the
coherence length sigma_perp, hbar = 1). Operators prepare spin-orbit states,
``analysis`` and ``tomography`` characterize them.
"""

__version__ = "0.1.0"

from .field import (
    DOWN_X,
    DOWN_Y,
    DOWN_Z,
    UP_X,
    UP_Y,
    UP_Z,
    GridError,
    GridSpec,
    SpinDirection,
    SpinorField,
    gaussian_wavepacket,
    inner_product,
    make_grid,
    norm,
    normalize,
)
from .modes import ModeDecomposition, ModeIndex, decompose, lg_mode, oam_expectation, synthesize
from .operators import (
    OPTIMAL_RHO_C,
    COMPARISON_BETA,
    PhysicalParams,
    apply_bb1,
    apply_gradient,
    apply_higher_order,
    apply_lov,
    apply_magnetic_spp,
    apply_quadrupole,
    apply_spin_rotation,
    apply_spp,
    lattice_constant,
    project_spin,
    rho_c_from_physical,
)
from .pipeline import OperatorStep, run_pipeline
from .analysis import (
    ScalarMap2D,
    extrinsic_oam,
    intensity_map,
    momentum_map,
    radial_overlap,
    rotational_symmetry_order,
    spin_texture,
)
from .tomography import Sinogram, make_sinogram, reconstruct_fbp
