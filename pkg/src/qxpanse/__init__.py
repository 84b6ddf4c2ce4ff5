"""Wigner-function dynamics of a 1D particle in a co-moving phase-space frame.

The solver evolves the Wigner function in coordinates attached to the
classical flow of the potential, where only quantum and noise terms act.
See README.md for the CLI and file formats.
"""

from .errors import (AssemblyError, ConfigError, DegenerateStateError,
                     DivergedTrajectoryError, FormatError, InstabilityError,
                     NoInterferenceError, ParameterError, QxpanseError,
                     ResolutionError, StepTooLargeError, SymplecticityError)
from .flow import FlowField, FlowState, backward_point, hierarchy_rhs, yoshida_step
from .grid import FRAME_LAB, FRAME_LIOUVILLE, PhaseGrid, WignerField
from .inverse import (InverseDerivs, extract_p_derivs, flow_tensors,
                      inverse_derivs, inverse_hessian, inverse_third,
                      invert_jacobian)
from .observables import (GridDensity, MarginalAnalysis, Moments,
                          analyze_marginal, grid_density, interference_metrics,
                          moments, moments_lab, position_marginal,
                          resample_lab_frame)
from .operator import (GCoeffs, SparseOperator, assemble_operator,
                       g_coefficients)
from .stepper import SimulationState, StepperConfig, build_operator, expmv
from .units import (DimensionlessParams, PhysicalParams, Potential, UnitSystem,
                    nondimensionalize, potential_derivs)

__version__ = "0.1.0"
