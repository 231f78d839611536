"""Cramér-Rao bound computations on (possibly singular) information matrices.

The exact bound for a weighted combination w.x is w^T F^+ w. The cheaper
"weak" bound (w^T P w)^2 / (w^T F w), with P the support projector, never
exceeds it (Cauchy-Schwarz) and is tight exactly when F w is parallel to
P w — that is, when the support component of w is an eigenvector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .fisher import InfoMatrix
from .linalg import TolerancePolicy, eig_sym, pseudoinverse, resolve_tolerance, support_projector
from .reduction import _matrix_of

# Two directions count as parallel when the unit residual is below this (radians).
SATURATION_ANGLE_TOL = 1e-8

# |exact - weak| below this counts as a closed gap.
GAP_ATOL = 1e-10


@dataclass(eq=False)
class BoundReport:
    """Bound values for one estimation scenario.

    ``gap`` is exact minus weak and is nonnegative whenever both are present.
    A weight with a kernel component is flagged ``estimable=False`` and the
    offending component is carried in ``kernel_component`` together with a
    warning that no unbiased estimator exists for that combination.
    """

    scenario: str
    exact_bound: float
    weak_bound: float | None = None
    crb_matrix: np.ndarray | None = None
    weight: np.ndarray | None = None
    estimable: bool = True
    saturation: bool | None = None
    gap: float | None = None
    kernel_component: np.ndarray | None = None
    warning: str | None = None


def crb_matrix(f, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Bound on the covariance of unbiased estimates: F^+ (F^-1 at full rank)."""
    return pseudoinverse(_matrix_of(f), tol)


def trace_bound(f, tol: TolerancePolicy | None = None) -> float:
    """Lower bound on the total variance over all parameters: Tr F^+."""
    return float(np.trace(pseudoinverse(_matrix_of(f), tol)))


def _checked_weight(w, d: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != (d,):
        raise ValueError(f"weight has length {len(w)}, expected {d}")
    if float(np.linalg.norm(w)) == 0.0:
        raise ValueError("weight vector must be nonzero")
    return w


def weighted_bound(f, w, tol: TolerancePolicy | None = None,
                   scenario: str = "distributed") -> BoundReport:
    """Exact bound w^T F^+ w for estimating the combination w.x.

    The weight is used exactly as given (no normalization). If it has a
    component in the kernel of F, the combination admits no unbiased
    estimator; the report says so instead of raising.
    """
    a = _matrix_of(f)
    w = _checked_weight(w, a.shape[0])
    fplus = pseudoinverse(a, tol)
    proj = support_projector(a, tol)
    exact = float(w @ fplus @ w)
    kernel_part = w - proj @ w
    rel = resolve_tolerance(tol, a.shape[0]).relative_value(eig_sym(a).eigenvalues)
    estimable = float(np.linalg.norm(kernel_part)) <= rel * float(np.linalg.norm(w))
    report = BoundReport(scenario=scenario, exact_bound=exact, crb_matrix=fplus,
                         weight=w, estimable=estimable)
    if not estimable:
        report.kernel_component = kernel_part
        report.warning = (
            "weight has a kernel component; no unbiased estimator exists for this "
            "combination and the bound applies only to its support projection"
        )
    return report


def weak_bound(f, w, tol: TolerancePolicy | None = None) -> float:
    """The cheap lower bound (w^T P w)^2 / (w^T F w).

    P = sqrt(F) sqrt(F)^+ is evaluated as the support projector, which is the
    same matrix but far better conditioned near zero eigenvalues. Undefined
    when w lies entirely in the kernel (w^T F w == 0).
    """
    a = _matrix_of(f)
    w = _checked_weight(w, a.shape[0])
    dec = eig_sym(a)
    tau = resolve_tolerance(tol, a.shape[0]).threshold(dec.eigenvalues)
    quad = float(w @ a @ w)
    if quad <= tau * float(w @ w):
        raise NumericsError("weight entirely in kernel; weak bound undefined")
    proj = support_projector(a, tol)
    return float(w @ proj @ w) ** 2 / quad


def saturation_check(f, w, tol: TolerancePolicy | None = None) -> bool:
    """Whether the weak bound is tight: F w parallel to the support part of w."""
    a = _matrix_of(f)
    w = _checked_weight(w, a.shape[0])
    dec = eig_sym(a)
    tau = resolve_tolerance(tol, a.shape[0]).threshold(dec.eigenvalues)
    if float(w @ a @ w) <= tau * float(w @ w):
        raise NumericsError("weight entirely in kernel; weak bound undefined")
    fw = a @ w
    pw = support_projector(a, tol) @ w
    u = fw / np.linalg.norm(fw)
    v = pw / np.linalg.norm(pw)
    # sin of the angle; arccos cannot resolve angles near zero in doubles
    residual = float(np.linalg.norm(u - (u @ v) * v))
    return residual <= SATURATION_ANGLE_TOL


def compare_bounds(f, w, tol: TolerancePolicy | None = None,
                   scenario: str = "distributed") -> BoundReport:
    """Exact and weak bounds side by side, with gap and saturation verdict.

    For a weight lying entirely in the kernel the weak bound does not exist;
    the report then carries only the exact bound and the warning.
    """
    report = weighted_bound(f, w, tol, scenario=scenario)
    try:
        report.weak_bound = weak_bound(f, w, tol)
        report.saturation = saturation_check(f, w, tol)
    except NumericsError:
        return report
    report.gap = report.exact_bound - report.weak_bound
    return report
