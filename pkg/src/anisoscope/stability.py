"""
Closed-form stability restrictions and an empirical probe built on the solver.

Courant numbers follow the convention ``sigma_x >= sigma_y``: callers with a
dominant ``y`` velocity swap the pair (the helpers here do it for them).
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from anisoscope.errors import BoundaryNotFoundError, ValidationError
from anisoscope.schemes import SchemeSpec
from anisoscope.spectral import modified_wavenumber

logger = logging.getLogger(__name__)

STABLE_GROWTH = 1.0 + 1.0e-8
KINDS = ("conventional", "multidimensional")


@dataclass(frozen=True)
class StabilityQuery:
    sigma_x: float
    sigma_y: float
    cfl: float = 1.0
    beta: float = 0.0
    xi_max: float = math.pi

    def __post_init__(self) -> None:
        if self.sigma_x < 0.0 or self.sigma_y < 0.0:
            raise ValidationError("Courant numbers must be non-negative")
        if self.cfl <= 0.0:
            raise ValidationError("CFL constant must be positive")
        if self.beta < 0.0:
            raise ValidationError("beta must be non-negative")
        if self.xi_max <= 0.0:
            raise ValidationError("xi_max must be positive")

    @classmethod
    def from_direction(cls, sigma: float, angle: float, **kw) -> "StabilityQuery":
        """Split a total Courant number along ``angle`` into its components."""
        return cls(sigma * abs(math.cos(angle)), sigma * abs(math.sin(angle)), **kw)

    def ordered(self) -> tuple[float, float]:
        return max(self.sigma_x, self.sigma_y), min(self.sigma_x, self.sigma_y)


def leapfrog_md_factor(beta: float) -> float:
    """Relaxation of the diagonal leap-frog limit gained by the corrector ``beta``."""
    if beta < 0.0:
        raise ValidationError("beta must be non-negative")
    return (2.0 * beta + 2.0) / (beta + 2.0)


def advection_limit(q: StabilityQuery, kind: str = "conventional") -> tuple[bool, float]:
    """``(satisfied, margin)`` with ``margin = rhs - lhs`` of the linear restriction."""
    sx, sy = q.ordered()
    if kind == "conventional":
        lhs, rhs = sx + sy, q.cfl
    elif kind == "multidimensional":
        lhs, rhs = (1.0 + q.beta) * sx + sy, q.cfl * (1.0 + q.beta)
    else:
        raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")
    margin = rhs - lhs
    return margin >= 0.0, margin


def maccormack_diagonal_bound(beta: float, xi_max: float = math.pi) -> float:
    return (1.0 + beta) / (xi_max**1.5 * (1.0 + (1.0 + beta) ** (2.0 / 3.0)) ** 1.5)


def maccormack_limit(q: StabilityQuery) -> tuple[bool, float]:
    """Check the MacCormack restriction; also return the diagonal Courant bound."""
    sx, sy = q.ordered()
    lhs = (sx * (1.0 + q.beta)) ** (2.0 / 3.0) + sy ** (2.0 / 3.0)
    rhs = (1.0 + q.beta) ** (2.0 / 3.0) / q.xi_max
    return lhs <= rhs, maccormack_diagonal_bound(q.beta, q.xi_max)


def maccormack_sigma_limit(angle: float, beta: float = 0.0, xi_max: float = math.pi) -> float:
    """Largest total Courant number allowed by :func:`maccormack_limit` along ``angle``."""
    cx, cy = abs(math.cos(angle)), abs(math.sin(angle))
    cx, cy = max(cx, cy), min(cx, cy)
    lhs = (cx * (1.0 + beta)) ** (2.0 / 3.0) + cy ** (2.0 / 3.0)
    return ((1.0 + beta) ** (2.0 / 3.0) / (xi_max * lhs)) ** 1.5


def closed_form_sigma_limit(cfl: float, angle: float, beta: float = 0.0,
                            kind: str = "conventional") -> float:
    """Largest total Courant number allowed by :func:`advection_limit` along ``angle``."""
    cx, cy = abs(math.cos(angle)), abs(math.sin(angle))
    cx, cy = max(cx, cy), min(cx, cy)
    if kind == "conventional":
        return cfl / (cx + cy)
    if kind == "multidimensional":
        return cfl * (1.0 + beta) / ((1.0 + beta) * cx + cy)
    raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")


def leapfrog_cfl(scheme: SchemeSpec, samples: int = 200_001) -> float:
    """Leap-frog CFL constant ``1 / max K(z)`` of a central scheme."""
    z = np.linspace(0.0, math.pi, samples)
    return float(1.0 / np.max(modified_wavenumber(scheme, z)))


def thread_count() -> int:
    """Worker cap from ``ANISOSCOPE_THREADS`` (0 or unset means automatic)."""
    raw = os.environ.get("ANISOSCOPE_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"ANISOSCOPE_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValidationError("ANISOSCOPE_THREADS must be >= 0")
    return value or (os.cpu_count() or 1)


def empirical_stability_boundary(config, sigma_grid: Sequence[float]) -> float:
    """Largest ``sigma`` of the leading stable run of ``sigma_grid``.

    Each point reruns ``config`` with ``k = sigma h / c`` from the same seeded
    random field and calls it stable when the per-step growth stays at or
    below ``1 + 1e-8``.
    """
    from anisoscope.solver import MIN_GROWTH_STEPS, growth_rate

    grid = [float(s) for s in sigma_grid]
    if not grid or any(s <= 0.0 for s in grid):
        raise ValidationError("sigma grid must be non-empty and positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("sigma grid must be strictly ascending")
    if config.c == 0.0:
        return grid[-1]
    steps = max(config.steps, MIN_GROWTH_STEPS)

    def rate(sigma):
        return growth_rate(config.replace(k=sigma * config.h / config.c, steps=steps))

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rates = list(pool.map(rate, grid))
    best = None
    for sigma, g in zip(grid, rates):
        if g > STABLE_GROWTH:
            break
        best = sigma
    if best is None:
        raise BoundaryNotFoundError(f"unstable at every sigma (growth {rates[0]:.6g} at {grid[0]})")
    return best
