"""CHSH evaluation, settings search and Tsirelson-bound analysis.

A correlation is any callable ``E(alpha, beta)`` that broadcasts over numpy
arrays. :func:`theta_correlation` lifts a response on [0, pi] to that form;
:func:`quantum_correlation` evaluates the exact two-qubit expectation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import lhv_models
from .errors import ParameterError
from .lhv_models import WayParams
from .quantum_kernel import SIGMA_X, SIGMA_Z, StateKind, bell_state

CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
STORZ_2023_S = 2.0747
CLASSIFY_SLACK = 1e-9

Correlation = Callable[[np.ndarray, np.ndarray], np.ndarray]


class Classification(str, enum.Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"
    SUPRA_QUANTUM = "supra-quantum"


@dataclass(frozen=True)
class ChshSettings:
    a: float
    a_prime: float
    b: float
    b_prime: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in self.as_tuple()):
            raise ParameterError("CHSH settings must be finite")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.a_prime, self.b, self.b_prime)

    def shifted(self, delta: float) -> "ChshSettings":
        return ChshSettings(*(x + delta for x in self.as_tuple()))


STANDARD_SETTINGS = ChshSettings(0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)


@dataclass(frozen=True)
class ChshResult:
    s_value: float
    settings: ChshSettings
    per_term: tuple[float, float, float, float]
    classification: Classification


def classify(s: float) -> Classification:
    if s <= CLASSICAL_BOUND + CLASSIFY_SLACK:
        return Classification.CLASSICAL
    if s <= TSIRELSON_BOUND + CLASSIFY_SLACK:
        return Classification.QUANTUM
    return Classification.SUPRA_QUANTUM


def _combine(e_ab, e_abp, e_apb, e_apbp):
    return np.abs(e_ab - e_abp + e_apb + e_apbp)


def chsh_s(correlation: Correlation, settings: ChshSettings = STANDARD_SETTINGS) -> ChshResult:
    """S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|."""
    a, ap, b, bp = settings.as_tuple()
    terms = tuple(float(correlation(x, y)) for x, y in ((a, b), (a, bp), (ap, b), (ap, bp)))
    s = float(_combine(*terms))
    return ChshResult(s, settings, terms, classify(s))


def theta_correlation(response: Callable) -> Correlation:
    """Correlation depending on the settings only through their separation."""

    def correlation(alpha, beta):
        theta = lhv_models.fold_angle(np.asarray(alpha, dtype=float) - np.asarray(beta, dtype=float))
        return lhv_models.extend_symmetry(response, theta)

    return correlation


def quantum_correlation(kind: StateKind | str = StateKind.SINGLET) -> Correlation:
    """Exact <sigma_alpha (x) sigma_beta> in a Bell state, batched over angles."""
    psi = bell_state(kind).amplitudes

    def spin(angle):
        angle = np.asarray(angle, dtype=float)[..., None, None]
        return np.sin(angle) * SIGMA_X + np.cos(angle) * SIGMA_Z

    def correlation(alpha, beta):
        sa, sb = np.broadcast_arrays(spin(alpha), spin(beta))
        # <psi| (A kron B) |psi> with psi reshaped as a 2x2 amplitude array
        m = psi.reshape(2, 2)
        value = np.einsum("ik,...ij,...kl,jl->...", m.conj(), sa, sb, m)
        value = np.real(value)
        return float(value) if value.ndim == 0 else value

    return correlation


def model_correlation(model: str, params: WayParams | None = None) -> Correlation:
    """Correlation for a named model: ``qm``, ``base``, ``way_singlet``, ``way_triplet``."""
    if model == "qm":
        kind = params.kind if params is not None else StateKind.SINGLET
        return quantum_correlation(kind)
    if model == "base":
        return theta_correlation(lhv_models.base_correlation)
    if model in ("way_singlet", "way_triplet"):
        if params is None:
            raise ParameterError(f"model {model!r} needs WayParams")
        if (model == "way_singlet") != (params.kind is StateKind.SINGLET):
            raise ParameterError(f"model {model!r} does not match state {params.kind.value}")
        return theta_correlation(lambda t: lhv_models.way_correlation(t, params))
    raise ParameterError(f"unknown model {model!r}")


def _grid_search(correlation: Correlation, steps: int) -> tuple[float, tuple[float, ...]]:
    grid = 2 * math.pi * np.arange(steps) / steps
    m = np.asarray(correlation(grid[:, None], grid[None, :]), dtype=float)
    # index order (a, a', b, b'); argmax on a C-ordered array picks the
    # lexicographically smallest maximiser
    s = _combine(
        m[:, None, :, None], m[:, None, None, :], m[None, :, :, None], m[None, :, None, :]
    )
    flat = int(np.argmax(s))
    idx = np.unravel_index(flat, s.shape)
    return float(s[idx]), tuple(float(grid[i]) for i in idx)


def _s_at(correlation: Correlation, x) -> float:
    a, ap, b, bp = x
    return float(_combine(correlation(a, b), correlation(a, bp), correlation(ap, b), correlation(ap, bp)))


def max_chsh(
    correlation: Correlation, coarse_grid_steps: int = 32, refine_iterations: int = 50
) -> ChshResult:
    """Maximise S by a coarse 4-D grid followed by coordinate descent.

    The refinement tries +/- one step on each angle in turn and halves the
    step after a sweep without improvement.
    """
    if coarse_grid_steps < 8:
        raise ParameterError("coarse_grid_steps must be at least 8")
    best, x = _grid_search(correlation, coarse_grid_steps)
    x = list(x)
    step = 2 * math.pi / coarse_grid_steps
    for _ in range(refine_iterations):
        improved = False
        for i in range(4):
            for delta in (step, -step):
                trial = list(x)
                trial[i] += delta
                value = _s_at(correlation, trial)
                if value > best:
                    best, x, improved = value, trial, True
                    break
        if not improved:
            step /= 2
    settings = ChshSettings(*(float(np.mod(v, 2 * math.pi)) for v in x))
    result = chsh_s(correlation, settings)
    standard = chsh_s(correlation, STANDARD_SETTINGS)
    return standard if standard.s_value > result.s_value else result


def tsirelson_margin(delta_L: float, coarse_grid_steps: int = 32, refine_iterations: int = 50) -> float:
    """Best singlet-model S minus 2*sqrt(2); positive means a violation."""
    if not math.isfinite(delta_L) or delta_L < lhv_models.PHYSICAL_FLOOR:
        raise ParameterError(f"delta_L must be at least {lhv_models.PHYSICAL_FLOOR}")
    corr = model_correlation("way_singlet", WayParams(delta_L))
    return max_chsh(corr, coarse_grid_steps, refine_iterations).s_value - TSIRELSON_BOUND
