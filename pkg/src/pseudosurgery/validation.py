"""Input validation helpers shared by the estimators and the CLI."""

from .metric import FiniteMetricSpace, validate_metric
from .surgery import SurgeryInstance


def check_metric_space(space, name="space"):
    if not isinstance(space, FiniteMetricSpace):
        raise TypeError(f"{name} must be a FiniteMetricSpace, got {type(space).__name__}")
    report = validate_metric(space)
    if not report.ok:
        kind, witness = report.violations[0]
        raise ValueError(
            f"{name} is not a metric space: {kind} fails at {witness} "
            f"({len(report.violations)} violation(s) in total)"
        )
    return space


def check_instance(instance, validate_metrics=True):
    if not isinstance(instance, SurgeryInstance):
        raise TypeError(f"expected a SurgeryInstance, got {type(instance).__name__}")
    if validate_metrics:
        check_metric_space(instance.X, "X")
        check_metric_space(instance.T, "T")
    return instance


def check_constants(K, C):
    from .rational import to_rational
    K, C = to_rational(K), to_rational(C)
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    if C < 0:
        raise ValueError(f"C must be nonnegative, got {C}")
    return K, C
