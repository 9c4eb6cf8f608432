"""Exact traces of finite-potent operators on countable-basis spaces.

Operators are defined by finitely many index rules, applied exactly over the
rationals or a prime field; traces come from image-chain stabilization on an
explicit window, cross-checked against core/nilpotent decompositions.
"""

from .fields import GF, QQ, FieldMismatchError, field_from_spec
from .matrices import FiniteMatrix, matrix_det, matrix_trace
from .operators import (
    BadReachError,
    BasisMismatchError,
    FamilyRule,
    GapError,
    NonIntegerIndexError,
    OverlapError,
    ReachViolationError,
    RuleOperator,
    UncoveredIndexError,
    finite_operator,
    identity_operator,
    op_add,
    op_compose,
    power_apply,
    window_matrix,
    zero_operator,
)
from .basis import BasisChange, conjugate
from .dsl import NotSerializableError, OpSyntaxError, parse, parse_path, print_operator
from .spans import NotInSpanError, NotInvariantError, Subspace, quotient_operator, restrict_operator, span
from .tate import (
    ASTClaim,
    NotStabilizedError,
    TraceCertificate,
    axiom_suite,
    check_nilpotent,
    default_probe,
    find_trace,
    image_chain,
    verify_ast,
)
from .repro import (
    BundleError,
    PaperBundle,
    build_paper_bundle,
    linearity_counterexample_report,
    paper_operator,
    verify_paper,
)
from .vectors import SparseVector

__version__ = "0.1.0"

__all__ = [
    "ASTClaim",
    "axiom_suite",
    "BadReachError",
    "BasisChange",
    "BasisMismatchError",
    "build_paper_bundle",
    "BundleError",
    "check_nilpotent",
    "conjugate",
    "default_probe",
    "FamilyRule",
    "field_from_spec",
    "FieldMismatchError",
    "find_trace",
    "finite_operator",
    "FiniteMatrix",
    "GapError",
    "GF",
    "identity_operator",
    "image_chain",
    "linearity_counterexample_report",
    "matrix_det",
    "matrix_trace",
    "NonIntegerIndexError",
    "NotInSpanError",
    "NotInvariantError",
    "NotSerializableError",
    "NotStabilizedError",
    "op_add",
    "op_compose",
    "OpSyntaxError",
    "OverlapError",
    "paper_operator",
    "PaperBundle",
    "parse",
    "parse_path",
    "power_apply",
    "print_operator",
    "QQ",
    "quotient_operator",
    "ReachViolationError",
    "restrict_operator",
    "RuleOperator",
    "span",
    "SparseVector",
    "Subspace",
    "TraceCertificate",
    "UncoveredIndexError",
    "verify_ast",
    "verify_paper",
    "window_matrix",
    "zero_operator",
    "__version__",
]
