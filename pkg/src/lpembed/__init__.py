"""lpembed: decide, construct, and certify isometric embeddings between
Lp spaces of solutions of second-order homogeneous PDEs."""

__version__ = "0.1.0"

from .classifier import (
    Embeddable,
    NonIsometric,
    WitnessParams,
    classify,
    instantiate_witness,
    validate_coincidence,
    vector_condition_check,
)
from .domains import AffineImage, Ball, Box, DomainSpec
from .errors import (
    ConfigError,
    DomainMismatch,
    GuardViolation,
    InvalidExponent,
    InvalidParams,
    LpEmbedError,
    NotSymmetric,
    SingularMatrix,
    SingularOnDomain,
    SingularPoint,
)
from .geometry import (
    Affine,
    Composed,
    Composition,
    Inversion,
    MappingSpec,
    Similarity,
    TwoDFamily,
    apply_mapping,
    conformality_test,
    jacobian,
    preimage,
    pseudo_norm_sq,
    pseudo_rotation,
)
from .jets import (
    ExpLinear,
    Jet2,
    LogAbs,
    OperatorSpec,
    Polynomial,
    PseudoNormPower,
    ScalarField,
    apply_operator,
)
from .linalg import Diagonalization, diagonalize, signature
from .operators import (
    QuadratureSpec,
    WeightedCompositionOperator,
    assemble,
    certify_isometry,
    certify_pde_mapping,
    check_conformality,
    check_weight_consistency,
    lp_norm,
    special_exponent,
)
from .solutions import (
    ReducedOperator,
    SolutionSet,
    characteristic_check,
    reduce,
    sample_solutions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
