"""Problem abstraction and the shared evaluation / termination machinery.

A DC program here is  zeta(x) = phi1(x) + phi2(x) - max_i psi_i(x)  with
phi1 proper closed convex and prox-capable, phi2 smooth convex, and finitely
many smooth convex pieces psi_i. Problems expose value/gradient oracles per
piece plus active-piece queries; every solver in :mod:`dcprog.algorithms`
works against this interface only.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import ActiveSetOverflowError, InfeasibleIterateError

__all__ = [
    "DcProblem",
    "PieceSelection",
    "SolverState",
    "StopConfig",
    "StopDecision",
    "DEFAULT_PIECE_CAP",
    "objective",
    "stationarity_residual",
    "residual_certificate",
    "check_stop",
]

# combinatorial piece families stop enumerating beyond this many pieces
DEFAULT_PIECE_CAP = 4096


@dataclass
class PieceSelection:
    """Outcome of identifying the active gradient at a point.

    Either a singleton (`gradient` and `piece` set, `ambiguous` False) or an
    ambiguity report (`ambiguous` True, `detail` describes the tie: tied index
    groups, boundary coordinates, or equidistant data points).
    """

    ambiguous: bool
    gradient: Optional[np.ndarray] = None
    piece: Optional[Any] = None
    detail: Optional[Any] = None


class DcProblem(ABC):
    """Capability set a DC problem instance must provide.

    Iterates are flat float vectors of length `dim`; problems over matrix
    variables (clustering centers) pack and unpack internally.
    """

    dim: int
    # Lipschitz bound on the piece gradients; 0 for (piecewise-)affine pieces.
    smoothness_bound: float = 0.0

    # --- convex part -------------------------------------------------------
    @abstractmethod
    def phi1_value(self, x) -> float: ...

    @abstractmethod
    def prox_phi1(self, v, t) -> np.ndarray:
        """argmin_w phi1(w) + ||w - v||^2 / (2 t), t > 0."""

    @abstractmethod
    def phi2_value(self, x) -> float: ...

    @abstractmethod
    def phi2_grad(self, x) -> np.ndarray: ...

    # --- concave part ------------------------------------------------------
    @abstractmethod
    def psi_value(self, x) -> float:
        """Dedicated oracle for max_i psi_i(x) (not an enumeration)."""

    @abstractmethod
    def piece_value(self, piece, x) -> float: ...

    @abstractmethod
    def piece_grad(self, piece, x) -> np.ndarray: ...

    @abstractmethod
    def active_pieces(self, x, tol, cap=DEFAULT_PIECE_CAP) -> list:
        """All pieces with psi_i(x) >= psi(x) - tol, raising
        ActiveSetOverflowError past `cap`."""

    @abstractmethod
    def singleton_gradient(self, x) -> PieceSelection:
        """Unique active gradient at x, or an ambiguity report."""

    # --- solver hooks ------------------------------------------------------
    @abstractmethod
    def solve_subproblem(self, g, x_hat, sigma, carry=None):
        """Minimize phi(x) - <g, x - x_hat> + (sigma/2)||x - x_hat||^2.

        Returns (x_plus, carry); `carry` is opaque warm-start data threaded
        through consecutive calls of one solver run (None when unused).
        """

    def piece_label(self, piece) -> str:
        """Short stable identifier for reports."""
        return str(piece)

    def piece_sort_key(self, piece):
        """Canonical ordering used for deterministic tie-breaking."""
        return self.piece_label(piece)

    def default_active_tol(self, x) -> float:
        """Relative tolerance for active-set membership at float iterates."""
        return 1e-10 * (1.0 + abs(self.psi_value(x)))


class StopDecision(enum.Enum):
    CONTINUE = "continue"
    CONVERGED = "converged"
    ITER_BUDGET = "iter_budget"
    UNCERTIFIABLE = "uncertifiable"


@dataclass
class StopConfig:
    """Termination rule: residual < tau, or more than max_iter iterations.

    The residual is expensive, so with `cheap_check_first` it is only
    evaluated once the relative step ||x(k+1) - x(k)|| / max(1, ||x(k+1)||)
    has dropped below tau. `active_tol` = None means the problem's relative
    default for active-set membership inside the residual.
    """

    tau: float = 1e-6
    max_iter: int = 100_000
    active_tol: Optional[float] = None
    cheap_check_first: bool = True
    piece_cap: int = DEFAULT_PIECE_CAP

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.active_tol is not None and self.active_tol < 0:
            raise ValueError("active_tol must be nonnegative")


@dataclass
class SolverState:
    """Mutable per-run bookkeeping; confined to a single solver run."""

    x: np.ndarray
    zeta: float
    k: int = 0
    subproblem_count: int = 0
    perturb_retry_count: int = 0
    rng: Optional[np.random.Generator] = None
    carry: Any = field(default=None, repr=False)


def objective(problem, x):
    """zeta(x) = phi1(x) + phi2(x) - max_i psi_i(x).

    Raises InfeasibleIterateError when phi1(x) is not finite (iterate outside
    dom(phi1)).
    """
    p1 = problem.phi1_value(x)
    if not np.isfinite(p1):
        raise InfeasibleIterateError("phi1 is infinite: iterate outside its domain")
    return p1 + problem.phi2_value(x) - problem.psi_value(x)


def stationarity_residual(problem, x, active_tol=None, cap=DEFAULT_PIECE_CAP):
    """Normalized prox fixed-point gap, maximized over the active pieces.

    For every active piece i,

        || x - prox_phi1(x - (grad phi2(x) - grad psi_i(x))) ||
        -----------------------------------------------------------
        1 + ||x|| + ||grad phi2(x)|| + ||grad psi_i(x)||

    with the prox at unit scaling; the maximum over i is zero exactly at
    d-stationary points. Membership in the active set uses `active_tol`
    (problem's relative default when None); enumeration beyond `cap` raises
    ActiveSetOverflowError so the caller can report an uncertifiable
    residual instead of silently truncating.
    """
    return residual_certificate(problem, x, active_tol=active_tol, cap=cap)[0]


def residual_certificate(problem, x, active_tol=None, cap=DEFAULT_PIECE_CAP):
    """Residual plus the size of the active set it maximized over."""
    x = np.asarray(x, dtype=float)
    if active_tol is None:
        active_tol = problem.default_active_tol(x)
    pieces = problem.active_pieces(x, active_tol, cap=cap)
    g2 = problem.phi2_grad(x)
    n2 = float(np.linalg.norm(g2))
    nx = float(np.linalg.norm(x))
    worst = 0.0
    for piece in pieces:
        gi = problem.piece_grad(piece, x)
        step = problem.prox_phi1(x - (g2 - gi), 1.0)
        num = float(np.linalg.norm(x - step))
        den = 1.0 + nx + n2 + float(np.linalg.norm(gi))
        worst = max(worst, num / den)
    return worst, len(pieces)


def check_stop(state, prev_x, cfg, problem):
    """Termination decision for the current iterate in `state`.

    Returns CONVERGED when the residual (gated by the relative step if
    `cheap_check_first`) falls below tau, ITER_BUDGET past max_iter, and
    UNCERTIFIABLE when the active-set enumeration inside the residual
    overflows; CONTINUE otherwise.
    """
    x = state.x
    gate_open = True
    if cfg.cheap_check_first:
        rel_step = float(np.linalg.norm(x - prev_x)) / max(1.0, float(np.linalg.norm(x)))
        gate_open = rel_step < cfg.tau
    if gate_open and state.k <= cfg.max_iter:
        try:
            r = stationarity_residual(
                problem, x, active_tol=cfg.active_tol, cap=cfg.piece_cap
            )
        except ActiveSetOverflowError:
            return StopDecision.UNCERTIFIABLE
        if r < cfg.tau:
            return StopDecision.CONVERGED
    if state.k > cfg.max_iter:
        return StopDecision.ITER_BUDGET
    return StopDecision.CONTINUE
