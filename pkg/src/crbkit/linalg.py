"""Dense symmetric-matrix primitives with an explicit tolerance policy.

Everything downstream (information matrices, support/kernel splits, bounds)
goes through this module so that "numerically zero" means the same thing
everywhere: an eigenvalue is treated as exactly zero iff its magnitude is
at or below the effective threshold of the active :class:`TolerancePolicy`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError

# Relative symmetry slack accepted on construction of a symmetric matrix.
SYMMETRY_RTOL = 1e-12

# Default relative tolerance per dimension: a conservative multiple of
# double-precision machine epsilon. All closed-form examples shipped with
# the package have spectral gaps many orders of magnitude above this.
_EPS_MULTIPLE = 2.2e-16 * 64


@dataclass(frozen=True)
class TolerancePolicy:
    """How to decide that an eigenvalue is numerically zero.

    mode="relative": threshold is ``value * max(|eigenvalues|)``.
    mode="absolute": threshold is ``value`` as given.
    """

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in ("relative", "absolute"):
            raise ValueError(f"tolerance mode must be 'relative' or 'absolute', got {self.mode!r}")
        if not np.isfinite(self.value) or self.value < 0:
            raise ValueError(f"tolerance value must be a nonnegative real, got {self.value!r}")

    def threshold(self, eigenvalues: np.ndarray) -> float:
        """Effective absolute cutoff for the given spectrum."""
        if self.mode == "absolute":
            return self.value
        lam_max = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
        return self.value * lam_max

    def relative_value(self, eigenvalues: np.ndarray) -> float:
        """The cutoff expressed as a fraction of the largest eigenvalue magnitude."""
        if self.mode == "relative":
            return self.value
        lam_max = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
        return self.value / lam_max if lam_max > 0 else self.value


def default_tolerance(dim: int) -> TolerancePolicy:
    return TolerancePolicy("relative", dim * _EPS_MULTIPLE)


def resolve_tolerance(tol: TolerancePolicy | None, dim: int) -> TolerancePolicy:
    return tol if tol is not None else default_tolerance(dim)


def as_symmetric(m, name: str = "matrix") -> np.ndarray:
    """Validate and return a square real symmetric matrix as float64.

    Rejects non-finite entries and asymmetry beyond
    ``SYMMETRY_RTOL * max(1, max|M|)``; returns the symmetrized copy so that
    harmless last-bit asymmetry cannot leak into eigensolves.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))[0]
        raise ValueError(f"{name} has non-finite entry at ({bad[0]}, {bad[1]})")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and float(np.max(np.abs(a - a.T))) > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} is not symmetric within tolerance {SYMMETRY_RTOL * scale:.3e}")
    return 0.5 * (a + a.T)


@dataclass(eq=False)
class EigenDecomposition:
    """Spectrum of a real symmetric matrix, eigenvalues sorted descending.

    ``eigenvectors[:, k]`` belongs to ``eigenvalues[k]``. The basis is made
    deterministic: each eigenvector's leading nonzero entry is positive, and
    exact eigenvalue ties are ordered by descending lexicographic comparison
    of the sign-fixed eigenvectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def _fix_signs(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        nonzero = np.nonzero(np.abs(col) > 1e-9)[0]
        lead = nonzero[0] if len(nonzero) else int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            v[:, k] = -col
    return v


def eig_sym(m) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix with deterministic ordering."""
    a = as_symmetric(m)
    if a.shape[0] == 0:
        return EigenDecomposition(np.empty(0), np.empty((0, 0)))
    w, v = np.linalg.eigh(a)
    v = _fix_signs(v)
    order = sorted(range(len(w)), key=lambda k: (-w[k], tuple(-v[:, k])))
    return EigenDecomposition(w[order].copy(), v[:, order].copy())


def numerical_rank(m, tol: TolerancePolicy | None = None) -> int:
    """Number of eigenvalues whose magnitude exceeds the effective threshold."""
    dec = eig_sym(m)
    tau = resolve_tolerance(tol, dec.dim).threshold(dec.eigenvalues)
    return int(np.sum(np.abs(dec.eigenvalues) > tau))


def _psd_split(dec: EigenDecomposition, tol: TolerancePolicy | None):
    """Positive part of a PSD-up-to-tolerance spectrum; rejects real negatives."""
    tau = resolve_tolerance(tol, dec.dim).threshold(dec.eigenvalues)
    lam = dec.eigenvalues
    if len(lam) and float(lam[-1]) < -tau:
        raise NumericsError(
            f"matrix is not PSD: eigenvalue {lam[-1]:.6e} below -{tau:.3e}"
        )
    positive = lam > tau
    return positive, tau


def pseudoinverse(m, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a PSD symmetric matrix.

    Eigenvalues within the tolerance band are treated as exactly zero, so the
    result inverts the matrix on its support and vanishes on the kernel.
    Equals the ordinary inverse at full rank; the zero matrix maps to itself.
    """
    dec = eig_sym(m)
    positive, _ = _psd_split(dec, tol)
    v = dec.eigenvectors[:, positive]
    inv_lam = 1.0 / dec.eigenvalues[positive]
    out = (v * inv_lam) @ v.T
    return 0.5 * (out + out.T)


def support_projector(m, tol: TolerancePolicy | None = None) -> np.ndarray:
    """Orthogonal projector onto the span of above-threshold eigenvectors."""
    dec = eig_sym(m)
    positive, _ = _psd_split(dec, tol)
    v = dec.eigenvectors[:, positive]
    out = v @ v.T
    return 0.5 * (out + out.T)


def sherman_morrison_inverse(a_inv, u, v) -> np.ndarray:
    """Inverse of ``A + u v^T`` given ``A^{-1}``, via the rank-one update formula."""
    a_inv = np.asarray(a_inv, dtype=float)
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if a_inv.ndim != 2 or a_inv.shape[0] != a_inv.shape[1]:
        raise ValueError(f"a_inv must be square, got shape {a_inv.shape}")
    if u.shape != (a_inv.shape[0],) or v.shape != (a_inv.shape[0],):
        raise ValueError("u and v must match the dimension of a_inv")
    correction = float(v @ a_inv @ u)
    denom = 1.0 + correction
    if abs(denom) <= 1e-12 * max(1.0, abs(correction)):
        raise NumericsError("rank-one update makes matrix singular (1 + v^T A^-1 u ~ 0)")
    left = a_inv @ u
    right = v @ a_inv
    return a_inv - np.outer(left, right) / denom
