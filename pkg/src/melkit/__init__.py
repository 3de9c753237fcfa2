"""Melnikov functions of trigonometrically perturbed pendulum systems near the center."""

__version__ = "0.1.0"

from .exact_coeff import (
    ExactCoeff,
    HalfPowerSeries,
    b_coeff,
    c_coeff,
    double_factorial,
    evaluate,
    tilde_b,
    zb_chain_coeffs,
)
from .perturbation import PiecewisePerturbation, SmoothPerturbation
from .quadrature import QuadResult, quad_I, quad_J, quad_melnikov, x_plus
from .melnikov_core import (
    Basis,
    CanonicalForm,
    MelnikovCombination,
    assemble,
    assemble_piecewise,
    assemble_smooth,
    even_part_to_cos_basis,
    expand,
    reduce_to_canonical,
    rewrite_I,
    rewrite_J,
)
from .zero_analysis import (
    BoundQuery,
    count_sign_changes,
    jacobian_rank,
    max_zero_bound,
    rank_D_piecewise,
    rank_D_smooth,
    realize_zeros,
)
from .pendulum_sim import SystemSpec, find_cycles, integrate_orbit, melnikov_agreement, return_map
from .io import load_perturbation
