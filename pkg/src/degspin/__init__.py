"""Degenerate Clifford algebra Cl(1,0,3), the Galilei spin group, Newton-Cartan frames and the Levy-Leblond operator."""

from .clifford import Multivector, blade, gp, grade_project, reverse, vector
from .errors import DegSpinError
from .groups import (
    GalileiMatrix,
    So103Element,
    Spin3Element,
    Spin103AlgebraElement,
    Spin103Element,
    d_rho_prime,
    d_rho_prime_inv,
    lie_bracket,
    rho_prime,
    spin_inv,
    spin_mul,
)
from .newton_cartan import (
    FlatField,
    NCPointData,
    NewtonianField,
    SampledField,
    adapted_frame,
    compatibility_check,
    connection_form,
    frame_christoffels,
    gbar,
    hbar,
    hfield,
)
from .spinor import GAMMA, SpinorField, covariant_derivative, dirac, lift, ll_residual, theta

__version__ = "0.1.0"
