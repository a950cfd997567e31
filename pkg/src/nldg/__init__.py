"""Penalty DG methods for one-dimensional nonlocal diffusion problems."""

from .kernel import KernelSpec, kernel_eval, make_kernel, partial_moment
from .mesh import Mesh, PERIODIC, VOLUME_CONSTRAINT, build_mesh, far_field_breakpoints
from .space import DGField, DGSpace, eval_field, jump, mass_matrix, project, snapshot
from .assembly import (FormSet, PenaltyVariant, assemble_forms, assemble_load,
                       compose_scheme, nbz, nip, nnipg)
from .convection import (FluxKind, cell_entropy_production, convection_matrix,
                         convection_residual, godunov, lax_friedrichs,
                         numerical_flux, upwind_linear)
from .problems import (ProblemSpec, SeparableSource, f_delta_indicator,
                       f_delta_smooth, get_problem, source_ex3)
from .imex import IMEXScheme, get_scheme, imex_evolve, order_selftest
from .steady import (ConvergenceReport, convergence_study, energy_norms,
                     l2_diff, l2_error, solve_steady)
from .diagnostics import (InequalityReport, boundedness_check, lemma_c0,
                          poincare_ratio, stability_constant)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
