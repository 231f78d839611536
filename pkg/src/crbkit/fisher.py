"""Information matrices: quantum and classical Fisher information.

Four routes are provided and kept deliberately distinct so they can
cross-check one another:

* ``qfim`` — generic pure-state engine driven by analytic state derivatives;
* ``closed_form_qfim`` — the tabulated matrices for the built-in families;
* ``classical_fim`` — Fisher information of a POVM's outcome distribution;
* ``qfim_fd_oracle`` — the generic engine re-derived from finite differences,
  used as an independent verification oracle.

Every matrix is tagged with its provenance so downstream reports never
conflate the routes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .linalg import as_symmetric
from .probes import FamilySpec, LinearPhaseState, Povm, state_derivatives, state_vector

PROVENANCES = ("generic_qfim", "closed_form", "classical_fim", "finite_difference")

# Below this, an outcome probability counts as zero for the classical FIM.
PROB_FLOOR = 1e-12

# Entrywise agreement demanded by the runtime x-independence self-check.
_X_INDEPENDENCE_ATOL = 1e-9


@dataclass(eq=False)
class InfoMatrix:
    """Real symmetric PSD information matrix with parameter labels."""

    matrix: np.ndarray
    param_labels: tuple[str, ...]
    provenance: str
    context: str = ""

    def __post_init__(self):
        self.matrix = as_symmetric(self.matrix, name="information matrix")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        d = self.matrix.shape[0]
        if len(self.param_labels) != d:
            raise ValueError(f"{len(self.param_labels)} labels for a {d}-parameter matrix")
        if d:
            lam = np.linalg.eigvalsh(self.matrix)
            lam_max = float(np.max(np.abs(lam)))
            if float(lam[0]) < -1e-10 * lam_max:
                raise NumericsError(
                    f"information matrix is not PSD: smallest eigenvalue {lam[0]:.6e}"
                )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def default_labels(n: int) -> tuple[str, ...]:
    return tuple(f"x{j + 1}" for j in range(n))


def _resolve_labels(labels, n: int) -> tuple[str, ...]:
    if labels is None:
        return default_labels(n)
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise ValueError(f"{len(labels)} parameter labels for {n} parameters")
    return labels


def _qfim_from_derivatives(psi: np.ndarray, dpsi: np.ndarray) -> np.ndarray:
    """4 Re(<d_j psi|d_k psi> - <d_j psi|psi><psi|d_k psi>)."""
    gram = dpsi.conj() @ dpsi.T
    overlap = dpsi.conj() @ psi
    f = 4.0 * np.real(gram - np.outer(overlap, overlap.conj()))
    return 0.5 * (f + f.T)


def _qfim_at(s: LinearPhaseState, x: np.ndarray) -> np.ndarray:
    return _qfim_from_derivatives(state_vector(s, x), state_derivatives(s, x))


def qfim(s: LinearPhaseState, x, labels=None) -> InfoMatrix:
    """Quantum Fisher information of a pure linear-phase state.

    The result is independent of x for this state class; that is verified at
    runtime by re-evaluating at two fixed pseudo-random points, which guards
    the whole derivative chain at negligible cost.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    f = _qfim_at(s, x)
    scale = max(1.0, float(np.max(np.abs(f))))
    rng = np.random.default_rng(181081)
    for _ in range(2):
        probe = rng.uniform(-np.pi, np.pi, size=s.n_params)
        if float(np.max(np.abs(_qfim_at(s, probe) - f))) > _X_INDEPENDENCE_ATOL * scale:
            raise NumericsError(
                "information matrix of a linear-phase state varied with x; "
                "derivative chain is inconsistent"
            )
    return InfoMatrix(f, _resolve_labels(labels, s.n_params), "generic_qfim",
                      context=f"generic engine at x={x.tolist()}")


def closed_form_qfim(spec: FamilySpec, labels=None) -> InfoMatrix:
    """Tabulated information matrix for a built-in probe family.

    ghz_like:      outer product of the encoding vector with itself.
    noon_like:     4 ((m+1) diag(nu^2) - nu nu^T) / (m+1)^2.
    cyclic_paired: circulant with 2/m on the diagonal and 1/m on each cyclic
                   neighbor; at m=2 the two neighbor directions coincide on
                   one entry, which therefore carries 2/m.
    """
    fam = spec.family
    if fam == "custom":
        raise ValueError("custom family has no closed form; use the generic qfim")
    if fam == "ghz_like":
        nu = np.asarray(spec.nu, dtype=float)
        f = np.outer(nu, nu)
    elif fam == "noon_like":
        nu = np.asarray(spec.nu, dtype=float)
        if np.any(nu == 0):
            raise ValueError("noon_like closed form requires all nu entries nonzero")
        m = len(nu)
        f = 4.0 * ((m + 1) * np.diag(nu**2) - np.outer(nu, nu)) / (m + 1) ** 2
    else:
        if spec.m is None or spec.m < 2:
            raise ValueError(f"cyclic_paired: field 'm' must be an integer >= 2, got {spec.m!r}")
        m = int(spec.m)
        f = np.zeros((m, m))
        for j in range(m):
            f[j, j] = 2.0 / m
            f[j, (j + 1) % m] += 1.0 / m
            f[j, (j - 1) % m] += 1.0 / m
    n = f.shape[0]
    return InfoMatrix(f, _resolve_labels(labels, n), "closed_form", context=f"family={fam}")


def cyclic_spectrum(m: int) -> np.ndarray:
    """Eigenvalues (2/m)(1 + cos(2 pi k / m)) of the cyclic closed form, k = 1..m.

    Exactly one eigenvalue vanishes iff m is even (at k = m/2), so the cyclic
    family is singular for even mode counts and invertible for odd ones.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    k = np.arange(1, m + 1)
    return (2.0 / m) * (1.0 + np.cos(2.0 * np.pi * k / m))


MANY_BODY_MODELS = ("transverse_ising", "xy_three_site")


@dataclass(frozen=True)
class ManyBodySpec:
    """Parameter point for one of the built-in many-body models.

    transverse_ising: fields omega (transverse field), g (uniform coupling),
    n_sites (even, >= 2). xy_three_site: fields lam (uniform coupling),
    gamma (spin anisotropy), h (external field).
    """

    model: str
    omega: float | None = None
    g: float | None = None
    n_sites: int | None = None
    lam: float | None = None
    gamma: float | None = None
    h: float | None = None

    def __post_init__(self):
        if self.model not in MANY_BODY_MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MANY_BODY_MODELS}")
        if self.model == "transverse_ising":
            if self.omega is None or self.g is None or self.n_sites is None:
                raise ValueError("transverse_ising needs fields omega, g, n_sites")
            if self.n_sites < 2 or self.n_sites % 2 != 0:
                raise ValueError(f"n_sites must be even and >= 2, got {self.n_sites}")
        else:
            if self.lam is None or self.gamma is None or self.h is None:
                raise ValueError("xy_three_site needs fields lam, gamma, h")

    def parameter_point(self) -> np.ndarray:
        if self.model == "transverse_ising":
            return np.array([self.omega, self.g], dtype=float)
        return np.array([self.lam, self.gamma], dtype=float)

    def parameter_labels(self) -> tuple[str, str]:
        if self.model == "transverse_ising":
            return ("omega", "g")
        return ("lambda", "gamma")


def many_body_qfim(spec: ManyBodySpec) -> InfoMatrix:
    """Closed-form information matrix of a many-body model at its parameter point."""
    if spec.model == "transverse_ising":
        omega, g, n = float(spec.omega), float(spec.g), int(spec.n_sites)
        f = np.zeros((2, 2))
        for i in range(n // 2):
            k = np.pi * (2 * i + 1) / n
            denom = g**2 + omega**2 - 2 * g * omega * np.cos(k)
            if abs(denom) < 1e-300:
                raise NumericsError(
                    f"QFIM singular at critical point: zero denominator at k={k!r}"
                )
            f += (np.sin(k) ** 2 / denom**2) * np.array(
                [[g**2, -g * omega], [-g * omega, omega**2]]
            )
        context = f"transverse_ising omega={omega} g={g} n_sites={n}"
    else:
        lam, gamma, h = float(spec.lam), float(spec.gamma), float(spec.h)
        denom = (3 * gamma**2 + 1) * lam**2 + 4 * h**2 + 4 * h * lam
        if abs(denom) < 1e-300:
            raise NumericsError(
                "QFIM singular at critical point: zero denominator for "
                f"(lam, gamma, h)=({lam}, {gamma}, {h})"
            )
        off = 6 * gamma * h * lam * (2 * h + lam)
        f = np.array(
            [[12 * gamma**2 * h**2, off], [off, 3 * lam**2 * (lam + 2 * h) ** 2]]
        ) / denom**2
        context = f"xy_three_site lam={lam} gamma={gamma} h={h}"
    return InfoMatrix(f, spec.parameter_labels(), "closed_form", context=context)


def xy_order_parameter_gradient(spec: ManyBodySpec) -> np.ndarray:
    """Gradient in (lam, gamma) of the estimable combination lam*gamma/(2h+lam)."""
    if spec.model != "xy_three_site":
        raise ValueError("order-parameter gradient is defined for the xy_three_site model")
    lam, gamma, h = float(spec.lam), float(spec.gamma), float(spec.h)
    denom = 2 * h + lam
    if abs(denom) < 1e-300:
        raise NumericsError("order parameter undefined: 2h + lam = 0")
    return np.array([2 * h * gamma / denom**2, lam / denom])


def classical_fim(s: LinearPhaseState, povm: Povm, x, labels=None) -> InfoMatrix:
    """Fisher information of the POVM outcome distribution at x.

    Outcomes with probability below ``PROB_FLOOR`` contribute nothing when
    their probability gradient also vanishes; a vanishing probability with a
    nonvanishing gradient makes the information divergent and is rejected
    rather than silently clipped.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if povm.dim != s.n_kets:
        raise ValueError(f"povm dimension {povm.dim} does not match {s.n_kets} kets")
    psi = state_vector(s, x)
    dpsi = state_derivatives(s, x)
    n = s.n_params
    f = np.zeros((n, n))
    for y, elem in enumerate(povm.elements):
        p = float(np.real(psi.conj() @ elem @ psi))
        grad = 2.0 * np.real(dpsi.conj() @ (elem @ psi))
        if p < PROB_FLOOR:
            if float(np.max(np.abs(grad))) < PROB_FLOOR:
                continue
            raise NumericsError(
                f"FIM divergent at this x: outcome {y} has probability {p:.3e} "
                "but a nonvanishing gradient"
            )
        f += np.outer(grad, grad) / p
    return InfoMatrix(f, _resolve_labels(labels, n), "classical_fim",
                      context=f"povm with {povm.n_outcomes} outcomes at x={x.tolist()}")


def qfim_fd_oracle(s: LinearPhaseState, x, h: float = 1e-5, labels=None) -> InfoMatrix:
    """Finite-difference re-derivation of ``qfim``, for independent checks.

    Central differences of the state vector replace the analytic derivatives;
    nothing else is shared with the analytic route. Step sizes outside
    [1e-7, 1e-3] trade truncation against cancellation too poorly to be useful.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"finite-difference step must lie in [1e-7, 1e-3], got {h!r}")
    psi = state_vector(s, x)
    rows = []
    for k in range(s.n_params):
        step = np.zeros(s.n_params)
        step[k] = h
        rows.append((state_vector(s, x + step) - state_vector(s, x - step)) / (2.0 * h))
    dpsi = np.array(rows)
    f = _qfim_from_derivatives(psi, dpsi)
    return InfoMatrix(f, _resolve_labels(labels, s.n_params), "finite_difference",
                      context=f"central differences, h={h}")
