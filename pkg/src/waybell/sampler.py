"""Monte-Carlo evaluation of the hidden-variable response integral.

The hidden angle is drawn uniformly on [0, pi). Draw number ``i`` is a pure
function of ``(seed, i)``: it comes from a Philox counter-based stream keyed
by the seed and advanced to ``i``. Chunking and threading therefore change
nothing about which values are drawn, and the estimate is reduced from
integer counts, so results are bit-identical for any chunk size or worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import lhv_models
from .errors import AllRejectedError, DomainError, ParameterError
from .lhv_models import WayParams
from .quantum_kernel import StateKind

MODELS = ("base", "way_singlet", "way_triplet")
DEFAULT_CHUNK = 65536
THREADS_ENV = "WAYBELL_THREADS"
_PHILOX_WORDS = 4  # 64-bit outputs per Philox counter step


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    n_samples: int
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.n_samples < 1:
            raise ParameterError("n_samples must be positive")
        if self.chunk_size < 1:
            raise ParameterError("chunk_size must be positive")


@dataclass(frozen=True)
class CorrelationEstimate:
    mean: float
    std_error: float
    n_accepted: int
    n_rejected: int
    seed: int

    @property
    def n_samples(self) -> int:
        return self.n_accepted + self.n_rejected

    @property
    def rejection_fraction(self) -> float:
        return self.n_rejected / self.n_samples

    def to_dict(self) -> dict:
        return asdict(self)


def lambda_stream(seed: int, start: int, count: int) -> np.ndarray:
    """Hidden angles for draw indices ``start .. start+count-1``."""
    bit_gen = np.random.Philox(key=seed)
    bit_gen.advance(start // _PHILOX_WORDS)
    skip = start % _PHILOX_WORDS
    u = np.random.Generator(bit_gen).random(count + skip)[skip:]
    return math.pi * u


def sample_lambda(rng: np.random.Generator, size=None):
    """Uniform deviate(s) on [0, pi) from a caller-owned generator."""
    return math.pi * rng.random(size)


def joint_product(theta, lam):
    """Product of the two outcomes for the singlet convention.

    -1 below the flip boundary pi - theta, +1 at or above it.
    """
    flip = math.pi - np.asarray(theta, dtype=float)
    out = np.where(np.asarray(lam) < flip, -1, 1)
    return int(out) if out.ndim == 0 else out


def excluded(lam, theta, b):
    """True where the hidden angle falls inside the band around pi - theta."""
    inside = np.abs(np.asarray(lam) - (math.pi - np.asarray(theta, dtype=float))) < b
    return bool(inside) if inside.ndim == 0 else inside


def _band_and_sign(model: str, theta: float, params: WayParams | None) -> tuple[float, int]:
    if model == "base":
        return 0.0, 1
    if params is None:
        raise ParameterError(f"model {model!r} needs WayParams")
    if model == "way_singlet":
        if params.kind is not StateKind.SINGLET:
            raise ParameterError("way_singlet needs singlet params")
        return float(lhv_models.exclusion_halfwidth(theta, params)), 1
    if model == "way_triplet":
        sign = lhv_models.triplet_sign(params.kind)
        return float(lhv_models.exclusion_halfwidth(theta, params)), sign
    raise ParameterError(f"unknown model {model!r}; expected one of {MODELS}")


def _count_chunk(seed, start, count, theta, b):
    lam = lambda_stream(seed, start, count)
    keep = ~excluded(lam, theta, b) if b > 0 else np.ones(count, dtype=bool)
    kept = lam[keep]
    n_plus = int(np.count_nonzero(kept >= math.pi - theta))
    return n_plus, kept.size - n_plus, count - kept.size


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def estimate_correlation(
    model: str,
    theta: float,
    params: WayParams | None,
    config: SamplerConfig,
    workers: int | None = None,
) -> CorrelationEstimate:
    """Rejection-sampled estimate of the response at separation ``theta``."""
    if not (0.0 <= theta <= math.pi):
        raise DomainError("theta must lie in [0, pi]")
    b, sign = _band_and_sign(model, theta, params)

    starts = range(0, config.n_samples, config.chunk_size)
    jobs = [(config.seed, s, min(config.chunk_size, config.n_samples - s), theta, b) for s in starts]
    workers = workers or worker_count()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda job: _count_chunk(*job), jobs))
    else:
        counts = [_count_chunk(*job) for job in jobs]

    n_plus = sum(c[0] for c in counts)
    n_minus = sum(c[1] for c in counts)
    n_rejected = sum(c[2] for c in counts)
    n_acc = n_plus + n_minus
    if n_acc == 0:
        raise AllRejectedError("every sample fell inside the exclusion band")

    mean = sign * (n_plus - n_minus) / n_acc
    if n_acc > 1:
        # unbiased variance of +/-1 outcomes from the counts alone
        var = (n_acc - (n_plus - n_minus) ** 2 / n_acc) / (n_acc - 1)
        std_error = math.sqrt(max(var, 0.0) / n_acc)
    else:
        std_error = 0.0
    return CorrelationEstimate(float(mean), std_error, n_acc, n_rejected, config.seed)
