"""Sub-problem solvers for power, blocklength and RIS phase."""
from .blocklength import solve_cbl, sqrt_bound
from .context import SubproblemContext, tchebyshev_mu
from .phase import (PhaseAux, build_quadratic, dual_objective, fp_objective, solve_phase, solve_qcqp, solve_qcqp_unit,
                    update_kappa, update_xi, weighted_rate)
from .power import grad_L_minus_power, l_minus, solve_power

__all__ = [
    "SubproblemContext", "tchebyshev_mu", "solve_power", "grad_L_minus_power", "l_minus",
    "solve_cbl", "sqrt_bound", "PhaseAux", "update_kappa", "update_xi", "build_quadratic",
    "solve_qcqp", "solve_qcqp_unit", "solve_phase", "weighted_rate", "dual_objective", "fp_objective",
]
