"""Radial ground states of critical Hénon-type equations on R^N."""
from .special import (ConstantsReport, DomainError, ExponentPair, best_constant,
                      bubble_coefficient, constants_report, crit_exponents, gamma_fn,
                      m_tilde, ps_threshold_double, ps_threshold_single, sphere_area,
                      talenti_constant)
from .grid import RadialGrid, build_grid, weighted_integral
from .space import (RadialFunction, bubble, cutoff_bubble, gaussian_seq, h1_norm_sq,
                    riesz_gradient, weighted_lp)
from .energy import (EnergyBreakdown, FiberingDegenerate, ParameterError, ProblemParams,
                     derivative_action, energy, fibering_max, nehari_regularity,
                     nehari_scale, nehari_value)
from .solver import (EigenResult, GroundStateResult, SolverOptions, euler_lagrange_residual,
                     first_eigenpair, ground_state, pohozaev_residual)

__version__ = "0.1.0"
