"""
reggecurv: lifted distributional Gauss curvature of Regge metrics on triangle meshes.
"""

from .benchmark import BenchmarkMetric, ConstantMetric, PolynomialMetric, SphereMetric, flat_metric
from .curvature import (
    angle_deficits,
    assemble_gauss_functional,
    assemble_neumann_functional,
    assemble_weighted_mass,
    distributional_inc,
    distributional_rotrot,
    error_representation_check,
    gauss_bonnet_total,
    lift_curvature,
)
from .errors import (
    ConfigurationError,
    DegenerateMeshError,
    IndefiniteMetricError,
    ReggeCurvError,
    SingularMomentSystemError,
    SolverError,
)
from .fields import AnalyticTensorField, LagrangeFunction, ReggeFunction
from .mesh import Mesh, perturb_interior, structured_square, unit_square
from .norms import ErrorRecord, eoc, fit_order, hminus1_error, hminus1_norm, l2_error
from .spaces import LagrangeSpace, ReggeSpace
from .study import StudyConfig, run_convergence, run_verify

__version__ = "0.1.0"
