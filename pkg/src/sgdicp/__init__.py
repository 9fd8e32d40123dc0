"""Rigid point-cloud registration by stochastic-gradient ICP."""
from .correspondence import CorrespondencePairs, NNIndex, build_index, match_batch, nearest
from .errors import (
    DegenerateGeometryError,
    DivergedError,
    EmptyCloudError,
    InvalidArgumentError,
    NoCorrespondencesError,
    ParseError,
    RegistrationFailedError,
    SGDICPError,
    UnsupportedFormatError,
)
from .geometry import (
    NormalizationInfo,
    PointCloud,
    RigidParams,
    apply_transform,
    denormalize_params,
    normalize_pair,
    rotation_from_euler,
    rotation_jacobians,
)
from .optimizer import BatchSampler, OptimizerState, step_adam, step_fixed
from .registration import (
    RegistrationConfig,
    RegistrationResult,
    batch_icp,
    check_convergence,
    compute_gradient,
    sgd_icp,
    svd_align,
)

__version__ = "0.1.0"
