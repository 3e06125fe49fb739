"""Seeded randomness for the perturbed iteration scheme.

Provides uniform sphere sampling, square-summable radius schedules, and the
retry loop that re-draws a perturbation until the active gradient at the
perturbed point is a singleton.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import RetryExhaustedError

__all__ = [
    "PerturbationSchedule",
    "PerturbOutcome",
    "sample_unit_sphere",
    "schedule_alpha",
    "perturb_until_singleton",
]

_KINDS = ("harmonic", "geometric", "constant-then-harmonic", "constant")


@dataclass
class PerturbationSchedule:
    """Rule producing the perturbation radii alpha_k.

    kind
        * ``harmonic``: alpha_k = alpha0 / (k + 1)
        * ``geometric``: alpha_k = alpha0 * rho**k, 0 < rho < 1
        * ``constant-then-harmonic``: alpha0 for k < hold_steps, then
          harmonic decay starting from the switch point
        * ``constant``: alpha_k = alpha0; ablation only. Its squared radii
          are not summable, so runs using it are labeled non-conforming.
    """

    kind: str = "harmonic"
    alpha0: float = 1e-6
    rho: float = 0.5
    hold_steps: int = 10

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.alpha0 <= 0:
            raise ValueError("alpha0 must be positive")
        if self.kind == "geometric" and not (0.0 < self.rho < 1.0):
            raise ValueError("geometric decay needs 0 < rho < 1")
        if self.kind == "constant-then-harmonic" and self.hold_steps < 1:
            raise ValueError("hold_steps must be at least 1")

    @property
    def conforming(self) -> bool:
        """Whether sum_k alpha_k^2 is finite."""
        return self.kind != "constant"

    def squared_sum_limit(self) -> float:
        """Analytic value (or bound) of sum_k alpha_k^2 for conforming kinds."""
        a2 = self.alpha0**2
        if self.kind == "harmonic":
            return a2 * np.pi**2 / 6.0
        if self.kind == "geometric":
            return a2 / (1.0 - self.rho**2)
        if self.kind == "constant-then-harmonic":
            return a2 * (self.hold_steps + np.pi**2 / 6.0)
        return np.inf


def schedule_alpha(schedule, k):
    """Radius alpha_k of the schedule at iteration k >= 0; strictly positive."""
    if k < 0:
        raise ValueError("iteration index must be nonnegative")
    if schedule.kind == "harmonic":
        return schedule.alpha0 / (k + 1)
    if schedule.kind == "geometric":
        return schedule.alpha0 * schedule.rho**k
    if schedule.kind == "constant-then-harmonic":
        if k < schedule.hold_steps:
            return schedule.alpha0
        return schedule.alpha0 / (k - schedule.hold_steps + 2)
    return schedule.alpha0


def sample_unit_sphere(rng, n):
    """Uniform draw from the unit sphere in R^n (normalized standard normal)."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    while True:
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


@dataclass
class PerturbOutcome:
    """Accepted perturbed point with its unique active gradient."""

    x_hat: np.ndarray
    gradient: np.ndarray
    piece: Any
    retries: int = 0


def perturb_until_singleton(problem, x, alpha, rng, max_retries=32):
    """Draw x_hat = x + alpha * xi until the active gradient there is unique.

    `retries` counts re-draws (0 when the first draw is accepted). Exhausting
    `max_retries` raises RetryExhaustedError: ties should almost surely vanish
    under perturbation, so persistent ambiguity flags a degenerate encoding or
    a tie-tolerance misconfiguration.
    """
    if max_retries < 1:
        raise ValueError("max_retries must be at least 1")
    x = np.asarray(x, dtype=float)
    for attempt in range(max_retries):
        xi = sample_unit_sphere(rng, problem.dim)
        x_hat = x + alpha * xi
        sel = problem.singleton_gradient(x_hat)
        if not sel.ambiguous:
            return PerturbOutcome(
                x_hat=x_hat, gradient=sel.gradient, piece=sel.piece, retries=attempt
            )
    raise RetryExhaustedError(
        f"no singleton active gradient after {max_retries} perturbations",
        retries=max_retries,
    )
