"""Metric surgery on finite metric spaces: glue a subspace S of X onto a
space T along a map f, compute the surgered metric exactly, and certify
pseudo- and quasi-isometry constants for f and for the induced map F."""

from .coarse import (
    CertificateRefused,
    CoarseCertificate,
    CoarseCertifier,
    certify,
    coarse_surjectivity_constant,
    frontier,
    lipschitz_constant,
    min_additive_for,
    theorem_audit,
    verify_certificate,
)
from .metric import (
    FiniteMetricSpace,
    induced_subspace,
    metric_from_graph,
    segment_space,
    tree_ball,
    validate_metric,
)
from .oracle import (
    AdmissibleSequence,
    OracleBudgetExceeded,
    lemma_lower_bound_audit,
    min_sequence_length,
)
from .surgery import (
    Surgery,
    SurgeryInstance,
    build_glued_space,
    induced_map,
    quotient_graph,
    surgered_metric,
)

__version__ = "0.1.0"
