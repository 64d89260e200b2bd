"""Numerical checks of genus-2 G-function vanishing on semisimple Frobenius manifolds."""
from .errors import (
    BranchMismatch, DegenerateMetric, EigensolverFailure, FrobeniusError, JetDegenerate,
    NonConstantEta, NonSemisimplePoint, ParseError, RecursionDepthExceeded, SingularM,
    UndefinedEntry, ValidationFailed,
)
from .frobenius import FrobeniusSpec, SemisimpleFrame, semisimple_frame, validate_spec
from .g2 import G2Report, JetPoint, appendixA_components, g2_total
from .identities import IdentityReport, IdentityRow, check_all, evaluate_F2_small
from .numeric import DD, DOUBLE, Precision
from .registry import certify_conditions, dimension_count, load_manifold
from .rotation import RotationData, rotation_data

__version__ = "0.1.0"
