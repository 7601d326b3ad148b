"""Mesh-free eigen-analysis with physics-informed extreme learning machines.

Bernstein features, collocation-assembled quadratic forms, exact boundary
enforcement through a null-space map, and one generalized eigensolve.
"""

from .analytic import (beam_exact_frequencies, beam_exact_mode, beam_wavenumbers,
                       cavity_exact_mode, cavity_exact_spectrum, frequency_errors)
from .assembly import (AdmissibleMap, BoundaryMatrix, DesignMatrices, ReducedSystem,
                       assemble_boundary, assemble_design, assemble_design_tensor,
                       nullspace_map, reduce)
from .basis import BasisSpec, bernstein_derivative, bernstein_eval, eval_features, feature_matrix
from .errors import (AssemblyError, ConfigurationError, DegenerateModeError, DomainError,
                     InsufficientModesError, NotSPDError, NumericalError, PielmError,
                     TrivialAdmissibleSpaceError)
from .problem import (BeamProblem, BoundaryCondition, BoundaryConstraint, CavityProblem,
                      CollocationSet, boundary_constraints, eigen_to_frequency,
                      generate_interior, operator_row)
from .solver import (GEPResult, ModeSet, pielm_solve, quadratic_loss, reconstruct_and_normalize,
                     refine_modes, select_modes, solve_gep)

__version__ = "0.1.0"
