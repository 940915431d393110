"""Exact two-qubit quantum mechanics used as the ground-truth oracle.

Observables are plain ``numpy`` complex arrays. States are small frozen
dataclasses carrying four amplitudes in the basis order |00>, |01>, |10>, |11>.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    NonHermitianError,
    UnsupportedStateError,
)

HERMITIAN_TOL = 1e-10
IMAG_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# total y-angular momentum of the pair, in units of hbar
J_Y = 0.5 * (np.kron(SIGMA_Y, I2) + np.kron(I2, SIGMA_Y))


class StateKind(str, enum.Enum):
    SINGLET = "singlet"
    TRIPLET_PSI_PLUS = "triplet_psi_plus"
    TRIPLET_PHI_MINUS = "triplet_phi_minus"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value: "StateKind | str") -> "StateKind":
        if isinstance(value, cls):
            return value
        aliases = {"psi_minus": "singlet", "psi_plus": "triplet_psi_plus",
                   "phi_minus": "triplet_phi_minus"}
        try:
            return cls(aliases.get(value, value))
        except ValueError:
            raise UnsupportedStateError(f"unknown state kind: {value!r}") from None


_INV_SQRT2 = 1 / math.sqrt(2)
_BELL_AMPLITUDES = {
    StateKind.SINGLET: (0, _INV_SQRT2, -_INV_SQRT2, 0),
    StateKind.TRIPLET_PSI_PLUS: (0, _INV_SQRT2, _INV_SQRT2, 0),
    StateKind.TRIPLET_PHI_MINUS: (_INV_SQRT2, 0, 0, -_INV_SQRT2),
}

# spread of J_Y in each Bell state; cross-checked against the operator in tests
DELTA_L_TABLE = {
    StateKind.SINGLET: 0.0,
    StateKind.TRIPLET_PSI_PLUS: 1.0,
    StateKind.TRIPLET_PHI_MINUS: 1.0,
}


@dataclass(frozen=True)
class TwoQubitState:
    amplitudes: np.ndarray
    kind: StateKind = StateKind.CUSTOM

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (4,):
            raise DimensionError(f"two-qubit state needs 4 amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class MeasurementAngles:
    alpha: float
    beta: float

    @property
    def theta(self) -> float:
        """Detector separation |alpha - beta| folded into [0, 2*pi)."""
        return abs(self.alpha - self.beta) % (2 * math.pi)


def _check_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=tol))


def spin_observable(alpha: float) -> np.ndarray:
    """Spin along a direction in the xz-plane at angle ``alpha`` from z."""
    _check_finite("alpha", alpha)
    return math.sin(alpha) * SIGMA_X + math.cos(alpha) * SIGMA_Z


def spin_eigenstate(alpha: float, sign: int) -> np.ndarray:
    """Eigenvector of ``spin_observable(alpha)`` with eigenvalue ``sign``."""
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    if sign > 0:
        return np.array([c, s], dtype=complex)
    return np.array([-s, c], dtype=complex)


def bell_state(kind: StateKind | str) -> TwoQubitState:
    kind = StateKind.parse(kind)
    if kind is StateKind.CUSTOM:
        raise UnsupportedStateError("custom states are built directly from amplitudes")
    return TwoQubitState(np.array(_BELL_AMPLITUDES[kind], dtype=complex), kind)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    for m in (a, b):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return np.kron(a, b)


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, TwoQubitState):
        return state.amplitudes
    return np.asarray(state, dtype=complex).reshape(-1)


def expectation(obs: np.ndarray, state) -> float:
    """<state|obs|state> for a Hermitian ``obs``; accepts 1- or 2-qubit states."""
    obs = np.asarray(obs)
    psi = _amplitudes(state)
    if obs.ndim != 2 or obs.shape != (psi.size, psi.size):
        raise DimensionError(f"observable {obs.shape} does not act on a {psi.size}-dim state")
    if not is_hermitian(obs):
        raise NonHermitianError("observable is not Hermitian")
    value = np.vdot(psi, obs @ psi)
    if abs(value.imag) > IMAG_TOL:
        raise NonHermitianError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def qm_correlation(kind: StateKind | str, alpha: float, beta: float) -> float:
    """Quantum correlation <sigma_alpha (x) sigma_beta> in a Bell state."""
    obs = tensor(spin_observable(alpha), spin_observable(beta))
    return expectation(obs, bell_state(kind))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"cannot commute shapes {a.shape} and {b.shape}")
    out = a @ b - b @ a
    if is_hermitian(a) and is_hermitian(b) and not np.allclose(
        out, -out.conj().T, rtol=0.0, atol=HERMITIAN_TOL
    ):
        raise NonHermitianError("commutator of Hermitian matrices is not anti-Hermitian")
    return out


def delta_L_state(kind: StateKind | str) -> float:
    """Standard deviation of the pair's J_y in a Bell state."""
    state = bell_state(kind)
    mean = expectation(J_Y, state)
    var = expectation(J_Y @ J_Y, state) - mean**2
    return math.sqrt(max(var, 0.0))


def _complex_expectation(op: np.ndarray, psi: np.ndarray) -> complex:
    return complex(np.vdot(psi, op @ psi))


def way_numerator(kind: StateKind | str, alpha: float, beta: float) -> float:
    """Magnitude of the conserved-charge commutator shift caused by measurement.

    Compares ``<[sigma_a (x) sigma_a, J_y]>`` averaged over the anticorrelated
    outcome states |a+ b->, |a- b+> (Born weights, no interference between
    them) with ``<[sigma_a (x) sigma_b, J_y]>`` in the prepared state.  The
    probe's share of J_y commutes with both system observables and drops out.
    """
    kind = StateKind.parse(kind)
    if kind is not StateKind.SINGLET:
        raise UnsupportedStateError(f"way_numerator supports the singlet only, not {kind.value}")
    _check_finite("alpha", alpha)
    _check_finite("beta", beta)
    psi = bell_state(kind).amplitudes

    pre = _complex_expectation(
        commutator(tensor(spin_observable(alpha), spin_observable(beta)), J_Y), psi
    )

    pointer = commutator(tensor(spin_observable(alpha), spin_observable(alpha)), J_Y)
    outcomes = [np.kron(spin_eigenstate(alpha, s), spin_eigenstate(beta, -s)) for s in (1, -1)]
    weights = np.array([abs(np.vdot(out, psi)) ** 2 for out in outcomes])
    total = weights.sum()
    # at theta = pi both overlaps vanish; every outcome gives the same value then
    weights = weights / total if total > 1e-14 else np.full(len(outcomes), 1 / len(outcomes))
    post = sum(w * _complex_expectation(pointer, out) for w, out in zip(weights, outcomes))
    return abs(post - pre)
