"""Closed-form hidden-variable response functions.

All response functions take the detector separation ``theta`` on [0, pi]
(scalars or numpy arrays) and return the same shape; the full [0, 2*pi]
profile is built with :func:`extend_symmetry`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DegenerateBandError,
    DomainError,
    ModelInconsistencyError,
    ParameterError,
)
from .quantum_kernel import StateKind

PI = math.pi
SQRT3 = math.sqrt(3.0)
PHYSICAL_FLOOR = 0.5
SINGLET_FLOOR = 1 / PI
# slack for angles produced by floating-point arithmetic on pi
_ANGLE_EPS = 1e-12
LIMIT_OFFSET = 1e-6


class BandConvention(str, enum.Enum):
    # band centred on the outcome-flip boundary pi - theta
    BOUNDARY_BAND = "boundary_band"


@dataclass(frozen=True)
class WayParams:
    """Model parameters.

    For the singlet ``delta_L`` is the spread of the conserved J_y; for the
    triplets it is the probe's share only (the state contributes 1).
    """

    delta_L: float
    kind: StateKind = StateKind.SINGLET
    band_convention: BandConvention = BandConvention.BOUNDARY_BAND

    def __post_init__(self):
        object.__setattr__(self, "kind", StateKind.parse(self.kind))
        if self.kind is StateKind.CUSTOM:
            raise ParameterError("WAY models are defined for Bell states only")
        if not math.isfinite(self.delta_L) or self.delta_L <= 0:
            raise ParameterError(f"delta_L must be positive, got {self.delta_L!r}")
        if self.kind is StateKind.SINGLET and self.delta_L <= SINGLET_FLOOR:
            raise ParameterError(
                f"singlet model needs delta_L > 1/pi, got {self.delta_L!r}"
            )

    @property
    def physical(self) -> bool:
        return self.delta_L >= PHYSICAL_FLOOR


@dataclass(frozen=True)
class ResponseCurve:
    thetas: np.ndarray
    values: np.ndarray
    model_id: str
    params: WayParams | None = None

    def __post_init__(self):
        if np.any(np.diff(self.thetas) <= 0):
            raise ValueError("thetas must be strictly increasing")


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_half_domain(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < -_ANGLE_EPS) or np.any(t > PI + _ANGLE_EPS):
        raise DomainError("theta must lie in [0, pi]; use extend_symmetry beyond")
    return np.clip(t, 0.0, PI)


def _sin(t):
    # reflect so that sin(pi) is exactly 0; pi - t is exact for t in [pi/2, pi]
    return np.sin(np.minimum(t, PI - t))


def base_correlation(theta):
    """Bell's piecewise-linear response (2/pi)*theta - 1."""
    t = _check_half_domain(theta)
    return _out(2.0 * t / PI - 1.0)


def extend_symmetry(E: Callable, theta):
    """Continue a response defined on [0, pi] to [0, 2*pi].

    Beyond pi the response is ``-E(theta - pi)``.
    """
    t = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < -_ANGLE_EPS) or np.any(t > 2 * PI + _ANGLE_EPS):
        raise DomainError("theta must lie in [0, 2*pi]")
    t = np.clip(t, 0.0, 2 * PI)
    upper = t > PI
    lower_vals = np.asarray(E(np.where(upper, 0.0, t)), dtype=float)
    upper_vals = -np.asarray(E(np.where(upper, t - PI, 0.0)), dtype=float)
    return _out(np.where(upper, upper_vals, lower_vals))


def fold_angle(theta):
    """Map any separation onto [0, 2*pi)."""
    return np.mod(np.abs(np.asarray(theta, dtype=float)), 2 * PI)


def exclusion_halfwidth(theta, params: WayParams):
    """Half-width of the excluded hidden-variable band."""
    t = _check_half_domain(theta)
    if params.kind is StateKind.SINGLET:
        return _out(_sin(t) / (2.0 * params.delta_L))
    return _out(SQRT3 * _sin(t) / (2.0 * (params.delta_L + 1.0)))


def band_correlation(theta, b):
    """Response with the band of half-width ``b`` removed and renormalized."""
    t = _check_half_domain(theta)
    b = np.asarray(b, dtype=float)
    if np.any(b < 0) or np.any(b >= PI / 2):
        raise DegenerateBandError("band half-width must lie in [0, pi/2)")
    return _out((2.0 * t - PI) / (PI - 2.0 * b))


def way_correlation_singlet(theta, delta_L: float):
    """Supermeasured singlet response dL(2t - pi) / (pi dL - sin t)."""
    t = _check_half_domain(theta)
    if not math.isfinite(delta_L) or delta_L <= SINGLET_FLOOR:
        raise ParameterError(f"singlet model needs delta_L > 1/pi, got {delta_L!r}")
    return _out(delta_L * (2.0 * t - PI) / (PI * delta_L - _sin(t)))


def triplet_sign(kind: StateKind | str) -> int:
    kind = StateKind.parse(kind)
    if kind is StateKind.TRIPLET_PSI_PLUS:
        return 1
    if kind is StateKind.TRIPLET_PHI_MINUS:
        return -1
    raise ParameterError(f"not a triplet state: {kind.value}")


def way_correlation_triplet(theta, delta_L_xi: float, kind: StateKind | str):
    t = _check_half_domain(theta)
    if not math.isfinite(delta_L_xi) or delta_L_xi <= 0:
        raise ParameterError(f"delta_L_xi must be positive, got {delta_L_xi!r}")
    sign = triplet_sign(kind)
    scale = delta_L_xi + 1.0
    return _out(sign * scale * (2.0 * t - PI) / (PI * delta_L_xi - SQRT3 * _sin(t) + PI))


def way_correlation(theta, params: WayParams):
    """Dispatch on ``params.kind``; ``theta`` on [0, pi]."""
    if params.kind is StateKind.SINGLET:
        return way_correlation_singlet(theta, params.delta_L)
    return way_correlation_triplet(theta, params.delta_L, params.kind)


def way_bound(theta, delta_L: float):
    """Lower bound sin^2(theta) / (4 dL^2) on the squared deviation."""
    if not math.isfinite(delta_L) or delta_L <= 0:
        raise ParameterError(f"delta_L must be positive, got {delta_L!r}")
    t = np.asarray(theta, dtype=float)
    return _out(np.sin(t) ** 2 / (4.0 * delta_L**2))


def _required_deltaL_raw(a):
    return np.sin(a) * np.cos(a) / (PI * np.cos(a) - PI + 2.0 * a)


def single_spin_required_deltaL(alpha):
    """Spread that makes the band model exact for a single spin at ``alpha``.

    Solves dL(2a - pi)/(pi dL - sin a) = -cos a.  The removable singularities
    at 0, pi/2 and pi are filled by limits taken at ``LIMIT_OFFSET``: a
    two-sided average at pi/2 and a first-order extrapolation at the ends.
    """
    a = np.asarray(alpha, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < 0) or np.any(a > PI):
        raise DomainError("alpha must lie in (0, pi)")
    h = LIMIT_OFFSET
    near_zero = a < h
    near_pi = a > PI - h
    near_half = np.abs(a - PI / 2) < h
    safe = np.where(near_zero | near_pi | near_half, 1.0, a)
    out = _required_deltaL_raw(safe)
    if np.any(near_zero):
        one_sided = 2.0 * _required_deltaL_raw(h) - _required_deltaL_raw(2 * h)
        out = np.where(near_zero, one_sided, out)
    if np.any(near_pi):
        one_sided = 2.0 * _required_deltaL_raw(PI - h) - _required_deltaL_raw(PI - 2 * h)
        out = np.where(near_pi, one_sided, out)
    if np.any(near_half):
        two_sided = 0.5 * (_required_deltaL_raw(PI / 2 - h) + _required_deltaL_raw(PI / 2 + h))
        out = np.where(near_half, two_sided, out)
    if np.any(out <= 0):
        raise ModelInconsistencyError("required delta_L is not positive")
    return _out(out)


def single_spin_response(alpha, delta_L):
    """Single-spin band response; equals cos(alpha) at the required spread."""
    a = _check_half_domain(alpha)
    b = _sin(a) / (2.0 * np.asarray(delta_L, dtype=float))
    return _out(-np.asarray(band_correlation(a, b)))


def response_curve(model_id: str, thetas, params: WayParams | None = None) -> ResponseCurve:
    """Evaluate a named model over [0, 2*pi] via symmetry extension."""
    thetas = np.asarray(thetas, dtype=float)
    if model_id == "base":
        f = base_correlation
    elif model_id in ("way", "way_singlet", "way_triplet"):
        if params is None:
            raise ParameterError(f"model {model_id!r} needs WayParams")
        f = lambda t: way_correlation(t, params)  # noqa: E731
    else:
        raise ParameterError(f"unknown model {model_id!r}")
    values = np.atleast_1d(extend_symmetry(f, thetas))
    return ResponseCurve(thetas, values, model_id, params)
