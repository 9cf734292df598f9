"""Hyperparameter formulas for level-set recovery and sample-size schedules.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MIN_PTS_DEFAULT = 10


@dataclass(frozen=True)
class LevelSetParams:
    lam: float
    delta: float = 0.1
    beta: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")


def unit_ball_volume(D: int) -> float:
    """Volume of the unit ball in ``R^D``: ``pi^(D/2) / Gamma(D/2 + 1)``."""
    if int(D) != D or D < 1:
        raise ValueError(f"dimension must be an integer >= 1, got {D}")
    if D <= 100:
        return math.pi ** (0.5 * D) / math.gamma(0.5 * D + 1.0)
    return math.exp(0.5 * D * math.log(math.pi) - math.lgamma(0.5 * D + 1.0))


def c_delta_n(delta: float, n: int) -> float:
    """Confidence constant ``16 log(2/delta) sqrt(log n)``."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return 16.0 * math.log(2.0 / delta) * math.sqrt(math.log(n))


def epsilon_for_level(lam: float, min_pts: int, n: int, D: int, c: float = 0.0) -> float:
    """Bandwidth that makes core points estimate the ``lam``-level set.

    ``(min_pts / (n v_D (lam - lam c^2 / sqrt(min_pts))))^(1/D)``. Pass
    ``c = c_delta_n(delta, n)`` for the guarantee-bearing value; ``c = 0``
    gives the plug-in bandwidth ``(min_pts / (n v_D lam))^(1/D)``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if not c >= 0:
        raise ValueError(f"c must be >= 0, got {c}")
    if min_pts < 1 or n < 1:
        raise ValueError("min_pts and n must be >= 1")
    shrink = 1.0 - c * c / math.sqrt(min_pts)
    if shrink <= 0:
        raise ValueError(
            f"minPts too small for this confidence level: sqrt({min_pts}) <= c^2 = {c * c:.6g}"
        )
    return (min_pts / (n * unit_ball_volume(D) * lam * shrink)) ** (1.0 / D)


def _clamp(m: int, n: int) -> int:
    return max(1, min(int(m), int(n)))


def m_schedule(n: int, D: int, p: float) -> int:
    """``floor(p * n^(D/(D+4)))`` clamped to ``[1, n]``."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return _clamp(math.floor(p * n ** (D / (D + 4))), n)


def m_minimax(n: int, D: int, beta: float) -> int:
    """Smallest sample size keeping the minimax rate: ``ceil(n^(D/(2 beta + D)))``."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return _clamp(math.ceil(n ** (D / (2.0 * beta + D))), n)


def minpts_default() -> int:
    return MIN_PTS_DEFAULT


def minpts_window(n: int, D: int, beta: float) -> tuple[float, float]:
    """Shape of the admissible ``min_pts`` range with both constants set to 1.

    Diagnostic only: the true constants depend on the unknown density, so
    the returned bounds are not normative.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    logn = math.log(n)
    lower = logn**2
    upper = logn ** (2.0 * D / (2.0 + D)) * n ** (2.0 * beta / (2.0 * beta + D))
    return lower, upper
