"""Taylor variational integrators.

High-order symplectic one-step methods for mechanical systems, built by
approximating the exact discrete Lagrangian (or discrete Hamiltonian) with a
Taylor expansion of the flow and a quadrature rule.  The step maps live in
:mod:`taylorvi.lagrangian`, :mod:`taylorvi.hamiltonian` and
:mod:`taylorvi.symmetric`; :mod:`taylorvi.harness` and the ``taylorvi``
command drive experiments on the systems in :mod:`taylorvi.problems`.
"""
from .baselines import closed_form_step, taylor_phase_step, taylor_step
from .hamiltonian import step_left, step_right, step_svhd, svhd_config
from .lagrangian import StepError, TviConfig, step
from .problems import MechSystem, ProblemInstance, make_problem
from .quadrature import QuadratureConfigError, QuadratureRule, make_rule
from .solver import JacobianCache, NewtonConfig, NonConvergenceError, SolveReport
from .symmetric import step_sym, sv4_config

__version__ = "0.1.0"

__all__ = [
    "TviConfig",
    "StepError",
    "step",
    "step_right",
    "step_left",
    "step_svhd",
    "svhd_config",
    "step_sym",
    "sv4_config",
    "taylor_step",
    "taylor_phase_step",
    "closed_form_step",
    "MechSystem",
    "ProblemInstance",
    "make_problem",
    "QuadratureRule",
    "QuadratureConfigError",
    "make_rule",
    "NewtonConfig",
    "SolveReport",
    "JacobianCache",
    "NonConvergenceError",
]
