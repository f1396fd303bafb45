"""Itô integration of Banach-space-valued integrands against scalar martingales.

Everything lives on finite probability spaces and finite time grids, so norms,
conditional expectations and stochastic integrals are computed exactly on
tree martingales and up to sampling error on Monte Carlo paths.
"""

from .integral import (AdaptedProcess, ElementaryProcess, approximate_elementary, continuity_profile,
                       evaluation_commutes, functional_commutes, holder_scaling_check,
                       integrate_elementary, ito_integral, ito_isometry_residual, l2m_norm,
                       m_norm_process, mt_norm, shift_process)
from .martingale import (ScalarMartingale, mc_brownian, mc_compensated_poisson, quadratic_variation,
                         random_tree_martingale, random_walk_martingale, verify_qv_properties)
from .mspace import (FiniteMeasureSpace, LinearOperator, cauchy_schwarz_residual, characterization_norms,
                     circ_multiply, condexp_contraction, fubini_norm_check, m_norm, operator_bounds,
                     product_space_norms)
from .prob import (FiniteProbabilitySpace, Filtration, Partition, RandomElement, cond_expectation,
                   expectation, independent, is_measurable, jensen_gap, random_scalar)
from .spaces import (REAL, DualFunctional, Element, Hilbert, Lp, Product, SeqSup, SupGrid,
                     check_multiplication_axioms, dual_decompose, lattice_abs, lattice_join,
                     lattice_leq, lattice_meet, multiply, norm, norming_functionals)

__version__ = "0.1.0"
