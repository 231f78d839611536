"""Linear-phase probe states and measurement (POVM) containers.

A linear-phase state is a superposition of basis kets whose only parameter
dependence is a phase linear in the parameter vector: component j carries
amplitude ``c_j * exp(i * enc_j . x)``. The three built-in families (a
two-branch entangled state, a per-mode phase state, and a cyclic paired
state) are all of this form, which lets one information-matrix engine cover
them uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORMALIZATION_ATOL = 1e-12

FAMILIES = ("ghz_like", "noon_like", "cyclic_paired", "custom")


@dataclass(frozen=True)
class Ket:
    label: str
    amplitude: complex
    encoding: tuple[float, ...]


@dataclass(eq=False)
class LinearPhaseState:
    """Probe state ``sum_j c_j exp(i enc_j . x) |j>``.

    amplitudes: complex, shape (n_kets,), unit 2-norm.
    encodings:  real, shape (n_kets, n_params), radians per unit parameter.
    """

    n_params: int
    labels: tuple[str, ...]
    amplitudes: np.ndarray
    encodings: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        self.encodings = np.atleast_2d(np.asarray(self.encodings, dtype=float))
        if self.n_params < 1:
            raise ValueError(f"n_params must be positive, got {self.n_params}")
        k = len(self.amplitudes)
        if len(self.labels) != k:
            raise ValueError(f"{len(self.labels)} labels for {k} kets")
        if self.encodings.shape != (k, self.n_params):
            raise ValueError(
                f"encodings shape {self.encodings.shape} does not match "
                f"({k}, {self.n_params})"
            )
        if not np.all(np.isfinite(self.encodings)):
            raise ValueError("encodings contain non-finite values")
        norm_sq = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm_sq - 1.0) > NORMALIZATION_ATOL:
            raise ValueError(f"state not normalized: sum |c|^2 = {norm_sq!r}")

    @property
    def n_kets(self) -> int:
        return len(self.amplitudes)

    @property
    def kets(self) -> tuple[Ket, ...]:
        return tuple(
            Ket(lbl, complex(amp), tuple(enc))
            for lbl, amp, enc in zip(self.labels, self.amplitudes, self.encodings)
        )


@dataclass(frozen=True)
class FamilySpec:
    """Parameters selecting one probe family.

    ghz_like:      ``nu`` is the single encoding vector.
    noon_like:     ``nu`` holds one nonzero factor per mode (m modes, m params).
    cyclic_paired: ``m`` is the mode count (>= 2); parameters pair cyclically.
    custom:        ``kets`` gives explicit (label, amplitude, encoding) records.
    """

    family: str
    nu: tuple[float, ...] | None = None
    m: int | None = None
    kets: tuple[Ket, ...] | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")


def _param_count(spec: FamilySpec) -> int:
    if spec.family == "ghz_like":
        return len(spec.nu)
    if spec.family == "noon_like":
        return len(spec.nu)
    if spec.family == "cyclic_paired":
        return spec.m
    return len(spec.kets[0].encoding)


def build_family(spec: FamilySpec) -> LinearPhaseState:
    """Construct the probe state described by a family spec."""
    fam = spec.family
    if fam == "ghz_like":
        if spec.nu is None or len(spec.nu) == 0:
            raise ValueError("ghz_like: field 'nu' must be a nonempty vector")
        nu = np.asarray(spec.nu, dtype=float)
        n = len(nu)
        amps = np.full(2, 1 / np.sqrt(2), dtype=complex)
        enc = np.vstack([np.zeros(n), nu])
        labels = ("v0", "v1")
    elif fam == "noon_like":
        if spec.nu is None or len(spec.nu) == 0:
            raise ValueError("noon_like: field 'nu' must be a nonempty vector")
        nu = np.asarray(spec.nu, dtype=float)
        if np.any(nu == 0):
            j = int(np.nonzero(nu == 0)[0][0])
            raise ValueError(f"noon_like: field 'nu[{j}]' must be nonzero")
        m = len(nu)
        amps = np.full(m + 1, 1 / np.sqrt(m + 1), dtype=complex)
        enc = np.vstack([np.zeros(m), np.diag(nu)])
        labels = tuple(f"v{j}" for j in range(m + 1))
    elif fam == "cyclic_paired":
        if spec.m is None or spec.m < 2:
            raise ValueError(f"cyclic_paired: field 'm' must be an integer >= 2, got {spec.m!r}")
        m = int(spec.m)
        amps = np.full(2 * m, 1 / np.sqrt(2 * m), dtype=complex)
        enc = np.zeros((2 * m, m))
        for j in range(m):
            enc[m + j, j] += 1.0
            enc[m + j, (j + 1) % m] += 1.0
        labels = tuple(f"0_{j + 1}" for j in range(m)) + tuple(f"1_{j + 1}" for j in range(m))
    elif fam == "custom":
        if not spec.kets:
            raise ValueError("custom: field 'kets' must be a nonempty sequence")
        n = len(spec.kets[0].encoding)
        for i, ket in enumerate(spec.kets):
            if len(ket.encoding) != n:
                raise ValueError(
                    f"custom: field 'kets[{i}].encoding' has length {len(ket.encoding)}, expected {n}"
                )
        amps = np.array([ket.amplitude for ket in spec.kets], dtype=complex)
        enc = np.array([ket.encoding for ket in spec.kets], dtype=float)
        labels = tuple(ket.label for ket in spec.kets)
    else:  # pragma: no cover - guarded by FamilySpec.__post_init__
        raise ValueError(f"unknown family {fam!r}")
    return LinearPhaseState(n_params=enc.shape[1], labels=labels, amplitudes=amps, encodings=enc)


def _check_point(s: LinearPhaseState, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (s.n_params,):
        raise ValueError(f"x has length {len(x)}, state has {s.n_params} parameters")
    return x


def state_vector(s: LinearPhaseState, x) -> np.ndarray:
    """Complex amplitudes of the state at parameter point x."""
    x = _check_point(s, x)
    return s.amplitudes * np.exp(1j * (s.encodings @ x))


def state_derivatives(s: LinearPhaseState, x) -> np.ndarray:
    """Partial derivatives of the state vector, one row per parameter."""
    x = _check_point(s, x)
    psi = state_vector(s, x)
    # d psi_j / d x_k = i * enc[j, k] * psi_j
    return 1j * s.encodings.T * psi[np.newaxis, :]


@dataclass(eq=False)
class Povm:
    """Measurement with Hermitian PSD elements summing to the identity."""

    elements: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if not elems:
            raise ValueError("povm needs at least one element")
        dim = elems[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for i, e in enumerate(elems):
            if e.shape != (dim, dim):
                raise ValueError(f"element {i} has shape {e.shape}, expected ({dim}, {dim})")
            if float(np.max(np.abs(e - e.conj().T))) > 1e-10 * max(1.0, float(np.max(np.abs(e)))):
                raise ValueError(f"element {i} is not Hermitian")
            smallest = float(np.min(np.linalg.eigvalsh(0.5 * (e + e.conj().T))))
            if smallest < -1e-10 * max(1.0, float(np.max(np.abs(e)))):
                raise ValueError(f"element {i} is not PSD (eigenvalue {smallest:.3e})")
            total += e
        if float(np.max(np.abs(total - np.eye(dim)))) > 1e-10:
            raise ValueError("povm elements do not sum to the identity")
        self.elements = elems

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)
