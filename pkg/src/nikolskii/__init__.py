"""Sharp constants of weighted Nikolskii-type polynomial inequalities.

Numerical library and CLI for computing, verifying and extrapolating the
sharp constants of inequalities of different metrics for multivariate
polynomials on the cube and the unit ball, together with the generalized
translation operators and reduction identities that organize them.
"""

from .geometry import (
    ConvexBody,
    ExponentSet,
    LatticeCapError,
    lattice_points,
    membership,
    pi_condition_check,
    scale_body,
    tensor_degree_set,
    total_degree_set,
    translate,
)
from .quadrature import (
    QuadratureRule,
    WeightSpec,
    ball_rule,
    cube_rule,
    interval_rule,
    sup_norm,
    weighted_norm,
)
from .polyspace import (
    OrthonormalSystem,
    Polynomial,
    RankDeficiencyError,
    ball_basis,
    evaluate,
    gegenbauer_one,
    gegenbauer_polynomial,
    gegenbauer_values,
    orthonormalize,
    solid_harmonic,
    symmetrize_even,
)
from .sharpconst import (
    SUP,
    ReductionConstants,
    SharpConstResult,
    ball_reduction_check,
    cube_reduction_check,
    exact_ball_p2,
    exact_entire_p2,
    exact_interval_p2,
    haar_symmetrize_axis,
    interval_exponents,
    ratio_at,
    reduction_constants,
    sharp_constant_general_p,
    sharp_constant_p2_at_point,
)
from .gto import (
    GtoSpec,
    apply_ball,
    apply_cube,
    apply_interval,
    contraction_check,
    gto_matrix,
)
from .asymptotics import (
    ChainReport,
    ScanResult,
    ball_limit_scan,
    chain_check,
    cube_limit_scan,
    point_limit_scan,
    richardson_limit,
    scaled_ball_limit,
    substitution_gap_check,
)

__version__ = "0.1.0"
