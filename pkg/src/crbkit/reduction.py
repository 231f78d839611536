"""Support/kernel split of an information matrix and parameter reduction.

A singular information matrix means some parameter directions carry no
information. Splitting its eigenbasis into support and kernel yields (a) an
affine constraint that pins the dead directions to a nominal point and (b) a
reduced, invertible information matrix on the live combinations. Inverting
the reduced matrix realizes the pseudoinverse of the original one, which is
verified here by computing both routes independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .fisher import InfoMatrix
from .linalg import TolerancePolicy, eig_sym, pseudoinverse, resolve_tolerance


def _matrix_of(f) -> np.ndarray:
    return f.matrix if isinstance(f, InfoMatrix) else np.asarray(f, dtype=float)


@dataclass(eq=False)
class SupportDecomposition:
    """Orthonormal split of parameter space into support and kernel of F.

    ``tolerance_used`` is the eigenvalue cutoff as a fraction of the largest
    eigenvalue magnitude, so ``|F v| <= tolerance_used * lambda_max`` holds
    for every kernel column v.
    """

    rank: int
    support_basis: np.ndarray  # (d, r), orthonormal columns
    kernel_basis: np.ndarray   # (d, d - r), orthonormal columns
    eigenvalues: np.ndarray    # descending
    tolerance_used: float

    @property
    def dim(self) -> int:
        return self.support_basis.shape[0]

    @property
    def kernel_dim(self) -> int:
        return self.kernel_basis.shape[1]


def support_decomposition(f, tol: TolerancePolicy | None = None) -> SupportDecomposition:
    """Split eigenvectors of a PSD matrix by the tolerance policy's threshold."""
    a = _matrix_of(f)
    dec = eig_sym(a)
    policy = resolve_tolerance(tol, dec.dim)
    tau = policy.threshold(dec.eigenvalues)
    if dec.dim and float(dec.eigenvalues[-1]) < -tau:
        raise NumericsError(
            f"matrix is not PSD: eigenvalue {dec.eigenvalues[-1]:.6e} below -{tau:.3e}"
        )
    positive = dec.eigenvalues > tau
    return SupportDecomposition(
        rank=int(np.sum(positive)),
        support_basis=dec.eigenvectors[:, positive].copy(),
        kernel_basis=dec.eigenvectors[:, ~positive].copy(),
        eigenvalues=dec.eigenvalues.copy(),
        tolerance_used=policy.relative_value(dec.eigenvalues),
    )


@dataclass(eq=False)
class ConstraintFunction:
    """Affine constraint ``f(x) = Vbar^T x + c`` that removes dead directions.

    Anchored so that f vanishes at the nominal point supplied when the
    constraint was built; its zero set is the affine slice of parameter space
    on which the remaining combinations are estimable.
    """

    kernel_basis: np.ndarray  # (d, n_constraints)
    constant: np.ndarray      # (n_constraints,)

    @property
    def n_constraints(self) -> int:
        return self.kernel_basis.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.n_constraints == 0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        return self.kernel_basis.T @ x + self.constant


def constraint_function(dec: SupportDecomposition, x0) -> ConstraintFunction:
    """Constraint anchored at x0, i.e. constant = -Vbar^T x0 so f(x0) = 0."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (dec.dim,):
        raise ValueError(f"x0 has length {len(x0)}, expected {dec.dim}")
    vbar = dec.kernel_basis
    return ConstraintFunction(kernel_basis=vbar.copy(), constant=-(vbar.T @ x0))


@dataclass(eq=False)
class ReducedProblem:
    """Invertible restatement of estimation on the support combinations.

    ``reduced_fim`` is V^T F V, the matrix of the live combinations
    theta_j = v_j . x; ``projector`` maps original coordinates onto the
    support; ``kernel_offset`` is the frozen kernel component of the anchor
    point, so x(theta) = support_basis @ theta + kernel_offset.
    """

    reduced_fim: np.ndarray
    reduced_labels: tuple[str, ...]
    projector: np.ndarray
    support_basis: np.ndarray
    kernel_offset: np.ndarray
    reduced_weight: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return self.reduced_fim.shape[0]


def reduce_problem(f, dec: SupportDecomposition, w=None, x0=None) -> ReducedProblem:
    """Project the estimation problem onto the support of its information matrix.

    When a weight vector is given, its support projection is carried along;
    when an anchor x0 is given, the kernel component of x0 is recorded so the
    reduced coordinates can be mapped back to full parameter vectors.
    """
    a = _matrix_of(f)
    v = dec.support_basis
    if a.shape != (dec.dim, dec.dim):
        raise ValueError(f"matrix shape {a.shape} does not match decomposition dim {dec.dim}")
    projector = v @ v.T
    projector = 0.5 * (projector + projector.T)
    reduced = v.T @ a @ v
    reduced = 0.5 * (reduced + reduced.T)
    labels = tuple(f"v{j + 1}^T x" for j in range(dec.rank))
    reduced_weight = None
    if w is not None:
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.shape != (dec.dim,):
            raise ValueError(f"weight has length {len(w)}, expected {dec.dim}")
        reduced_weight = projector @ w
    kernel_offset = np.zeros(dec.dim)
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if x0.shape != (dec.dim,):
            raise ValueError(f"x0 has length {len(x0)}, expected {dec.dim}")
        kernel_offset = x0 - projector @ x0
    return ReducedProblem(
        reduced_fim=reduced,
        reduced_labels=labels,
        projector=projector,
        support_basis=v.copy(),
        kernel_offset=kernel_offset,
        reduced_weight=reduced_weight,
    )


@dataclass(frozen=True)
class TraceConsistency:
    trace_pinv: float
    trace_reduced_inv: float
    consistent: bool


def trace_consistency(f, tol: TolerancePolicy | None = None) -> TraceConsistency:
    """Tr of the pseudoinverse vs reduce-then-invert, computed independently."""
    a = _matrix_of(f)
    trace_pinv = float(np.trace(pseudoinverse(a, tol)))
    dec = support_decomposition(a, tol)
    red = reduce_problem(a, dec)
    if red.rank == 0:
        trace_reduced = 0.0
    else:
        trace_reduced = float(np.trace(np.linalg.inv(red.reduced_fim)))
    ok = abs(trace_pinv - trace_reduced) <= 1e-9 * max(1.0, trace_pinv)
    return TraceConsistency(trace_pinv, trace_reduced, ok)
