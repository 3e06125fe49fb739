"""Inner convex solvers shared by the DC iteration schemes.

Solves the two subproblem families the shipped problems produce:

* quadratic-plus-l1 subproblems  min 0.5*||A x||^2 + lam*||x||_1 + <c, x>
  + (sigma/2)*||x - x_tilde||^2, handled by a globalized semismooth Newton
  method on the dual (`ssn_solve`) with an accelerated proximal-gradient
  oracle (`prox_grad_solve`) for cross-checking;
* strictly convex one-dimensional piecewise quadratics
  (1/n)*sum_i |x - b_i| + (sigma/2)*x^2 - c*x, minimized exactly
  (`solve_1d_pwq`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import LineSearchError, NewtonBudgetError, SubproblemSolverError

__all__ = [
    "QuadL1Subproblem",
    "SsnConfig",
    "SsnStats",
    "Pwq1dProblem",
    "prox_l1",
    "moreau_env_l1",
    "ssn_solve",
    "prox_grad_solve",
    "solve_1d_pwq",
    "operator_norm_est",
]


def prox_l1(v, t):
    """Proximal map of t*||.||_1: componentwise soft threshold by t >= 0."""
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def moreau_env_l1(v, t):
    """Moreau envelope of t*||.||_1 at unit prox parameter.

    Returns sum_i h_t(v_i) with the Huber value
    h_t(v) = v^2/2 for |v| <= t and t*|v| - t^2/2 otherwise; its gradient is
    v - prox_l1(v, t).
    """
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    quad = a <= t
    out = np.where(quad, 0.5 * v * v, t * a - 0.5 * t * t)
    return float(np.sum(out))


def operator_norm_est(A, tol=1e-12, max_iter=1000, seed=0):
    """Spectral norm of a dense matrix by power iteration on A^T A."""
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    s_prev = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw <= 1e-300:
            return 0.0
        v = w / nw
        s = np.linalg.norm(A @ v)
        if abs(s - s_prev) <= tol * max(1.0, s):
            return s
        s_prev = s
    return s_prev


@dataclass
class QuadL1Subproblem:
    """Data of min 0.5*||Ax||^2 + lam*||x||_1 + <c,x> + (sigma/2)*||x - x_tilde||^2.

    sigma > 0 makes the objective strongly convex, so the minimizer is unique.
    """

    A: np.ndarray
    c: np.ndarray
    x_tilde: np.ndarray
    sigma: float
    lam: float

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        self.x_tilde = np.asarray(self.x_tilde, dtype=float)
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        m, n = self.A.shape
        if self.c.shape != (n,) or self.x_tilde.shape != (n,):
            raise ValueError("inconsistent dimensions in QuadL1Subproblem")

    def primal_value(self, x):
        r = self.A @ x
        return (
            0.5 * float(r @ r)
            + self.lam * float(np.sum(np.abs(x)))
            + float(self.c @ x)
            + 0.5 * self.sigma * float(np.sum((x - self.x_tilde) ** 2))
        )


@dataclass
class SsnConfig:
    """Knobs of the globalized semismooth Newton solver."""

    grad_tol: float = 1e-10
    max_newton: int = 100
    armijo_slope: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 50
    cg_tol: float = 1e-12
    cg_max: int = 500
    jacobian_reg: float = 1e-12
    dense_m_limit: int = 2000
    woodbury_frac: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.backtrack < 1.0):
            raise ValueError("backtrack factor must lie in (0, 1)")
        if min(self.grad_tol, self.armijo_slope, self.cg_tol) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SsnStats:
    newton_iters: int = 0
    backtracks: int = 0
    grad_norms: list = field(default_factory=list)
    reduced_solves: int = 0
    cg_solves: int = 0


def _ssn_grad_and_x(sub, z):
    """Dual residual grad F(z) = z - A prox(u) and the primal recovery point."""
    u = sub.x_tilde - (sub.c + sub.A.T @ z) / sub.sigma
    x = prox_l1(u, sub.lam / sub.sigma)
    return z - sub.A @ x, x, u


def _ssn_objective(sub, z):
    u = sub.x_tilde - (sub.c + sub.A.T @ z) / sub.sigma
    lin = sub.c + sub.A.T @ z
    return (
        0.5 * float(z @ z)
        - sub.sigma * moreau_env_l1(u, sub.lam / sub.sigma)
        - (float(sub.x_tilde @ lin) - 0.5 / sub.sigma * float(lin @ lin))
    )


def _newton_direction(sub, u, grad, cfg, stats):
    """Solve (I + (1/sigma) A D A^T + reg I) d = -grad.

    D is the 0/1 diagonal generalized Jacobian of the prox, active where
    |u_i| > lam/sigma strictly; at kinks the zero element is chosen so the
    system stays as small as possible.
    """
    m = sub.A.shape[0]
    gamma = 1.0 + cfg.jacobian_reg
    support = np.flatnonzero(np.abs(u) > sub.lam / sub.sigma)
    k = support.size
    if k == 0:
        return -grad / gamma
    AJ = sub.A[:, support]
    if k < cfg.woodbury_frac * m:
        # second-order sparsity: reduce to a k x k system over the support

        W = sub.sigma * gamma * np.eye(k) + AJ.T @ AJ
        rhs = AJ.T @ grad
        sol = scipy.linalg.cho_solve(scipy.linalg.cho_factor(W), rhs)
        stats.reduced_solves += 1
        return (-grad + AJ @ sol) / gamma
    if m <= cfg.dense_m_limit:
        H = gamma * np.eye(m) + (AJ @ AJ.T) / sub.sigma
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(H), -grad)
    op = scipy.sparse.linalg.LinearOperator(
        (m, m),
        matvec=lambda v: gamma * v + AJ @ (AJ.T @ v) / sub.sigma,
    )
    d, info = scipy.sparse.linalg.cg(
        op, -grad, rtol=cfg.cg_tol, atol=0.0, maxiter=cfg.cg_max
    )
    stats.cg_solves += 1
    if info != 0:
        raise SubproblemSolverError(
            f"conjugate gradient failed with info={info}",
            residual_norm=float(np.linalg.norm(grad)),
        )
    return d


def ssn_solve(sub, z0=None, cfg=None):
    """Globalized semismooth Newton method for a QuadL1Subproblem.

    Finds the unique dual root z* of grad F(z) = z - A prox(x_tilde -
    (c + A^T z)/sigma) and recovers the primal minimizer
    x* = prox(x_tilde - (c + A^T z*)/sigma). Newton systems exploit the
    sparse active diagonal of the prox Jacobian; Armijo backtracking on the
    dual objective globalizes the iteration.

    Parameters
    ----------
    sub : QuadL1Subproblem
    z0 : ndarray(m), optional
        Warm-start dual point, zero by default.
    cfg : SsnConfig, optional

    Returns
    -------
    (x_star, z_star, stats)

    Raises
    ------
    NewtonBudgetError, LineSearchError
        Both carry the last iterate and residual norm for diagnostics.
    """
    cfg = cfg or SsnConfig()
    m = sub.A.shape[0]
    z = np.zeros(m) if z0 is None else np.asarray(z0, dtype=float).copy()
    if z.shape != (m,):
        raise ValueError("z0 has wrong dimension")
    stats = SsnStats()
    grad, x, u = _ssn_grad_and_x(sub, z)
    gnorm = float(np.linalg.norm(grad))
    stats.grad_norms.append(gnorm)
    fz = None
    for _ in range(cfg.max_newton):
        if gnorm <= cfg.grad_tol:
            return x, z, stats
        d = _newton_direction(sub, u, grad, cfg, stats)
        slope = float(grad @ d)
        if slope >= 0.0:
            # fall back to steepest descent if the model direction degenerates
            d = -grad
            slope = -gnorm**2
        if fz is None:
            fz = _ssn_objective(sub, z)
        t = 1.0
        for _bt in range(cfg.max_backtracks + 1):
            z_new = z + t * d
            f_new = _ssn_objective(sub, z_new)
            if f_new <= fz + cfg.armijo_slope * t * slope:
                break
            stats.backtracks += 1
            t *= cfg.backtrack
        else:
            raise LineSearchError(
                "Armijo backtracking failed in semismooth Newton",
                last_iterate=z,
                residual_norm=gnorm,
            )
        z, fz = z_new, f_new
        grad, x, u = _ssn_grad_and_x(sub, z)
        gnorm = float(np.linalg.norm(grad))
        stats.grad_norms.append(gnorm)
        stats.newton_iters += 1
        if len(stats.grad_norms) > 20 and gnorm > 0.5 * stats.grad_norms[-21]:
            # kink straddling can stall the iteration; a locally superlinear
            # method that has not halved the residual in 20 steps is stuck
            break
    if gnorm <= cfg.grad_tol:
        return x, z, stats
    raise NewtonBudgetError(
        f"semismooth Newton stalled at residual {gnorm:.3e} "
        f"(tolerance {cfg.grad_tol:g})",
        last_iterate=z,
        residual_norm=gnorm,
    )


def prox_grad_solve(sub, tol, max_iter=1_000_000):
    """Accelerated proximal gradient (with function restarts) on a QuadL1Subproblem.

    Independent first-order oracle for `ssn_solve`: runs until the unit-step
    fixed-point residual ||x - prox(x - grad q(x)/L)|| drops below tol, with
    step 1/L from a power-iteration estimate of ||A||.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    L = operator_norm_est(sub.A) ** 2 * (1.0 + 1e-9) + sub.sigma
    step = 1.0 / L
    thresh = sub.lam * step

    def grad_q(x):
        return sub.A.T @ (sub.A @ x) + sub.c + sub.sigma * (x - sub.x_tilde)

    x = sub.x_tilde.copy()
    x_prev = x.copy()
    t_prev = 1.0
    f_prev = np.inf
    for _ in range(max_iter):
        t = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_prev**2))
        y = x + ((t_prev - 1.0) / t) * (x - x_prev)
        x_new = prox_l1(y - step * grad_q(y), thresh)
        f_new = sub.primal_value(x_new)
        if f_new > f_prev:
            # restart the momentum; keeps the scheme monotone enough to certify
            t = 1.0
            x_new = prox_l1(x - step * grad_q(x), thresh)
            f_new = sub.primal_value(x_new)
        x_prev, x, t_prev, f_prev = x, x_new, t, f_new
        fp = x - prox_l1(x - step * grad_q(x), thresh)
        if np.linalg.norm(fp) <= tol:
            return x
    raise SubproblemSolverError(
        "proximal gradient budget exhausted",
        last_iterate=x,
        residual_norm=float(np.linalg.norm(fp)),
    )


@dataclass
class Pwq1dProblem:
    """One-dimensional piecewise quadratic (1/n)*sum|x - b_i| + (sigma/2)x^2 - cx."""

    b: np.ndarray
    sigma: float
    c: float

    def __post_init__(self):
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def value(self, x):
        return (
            float(np.mean(np.abs(x - self.b)))
            + 0.5 * self.sigma * x * x
            - self.c * x
        )


def _pwq_prefix(b_sorted):
    return np.concatenate(([0.0], np.cumsum(b_sorted)))


def _pwq_values(b_sorted, prefix, sigma, c, xs):
    """f at the points xs, via prefix sums of the sorted breakpoints: O(log n) each."""
    n = b_sorted.size
    m = np.searchsorted(b_sorted, xs, side="right")
    abs_sum = xs * (2 * m - n) + prefix[n] - 2.0 * prefix[m]
    return abs_sum / n + 0.5 * sigma * xs * xs - c * xs


def _pwq_minimize_sorted(b_sorted, prefix, sigma, c):
    """Exact minimizer given pre-sorted breakpoints and their prefix sums."""
    n = b_sorted.size
    ms = np.arange(n + 1)
    cand = (c - (2.0 * ms - n) / n) / sigma
    lo = np.concatenate(([-np.inf], b_sorted))
    hi = np.concatenate((b_sorted, [np.inf]))
    interior = cand[(cand > lo) & (cand < hi)]
    xs = np.concatenate((b_sorted, interior))
    xs = np.sort(xs)  # exact value ties then resolve toward the smaller x
    vals = _pwq_values(b_sorted, prefix, sigma, c, xs)
    return float(xs[np.argmin(vals)])


def solve_1d_pwq(p):
    """Exact global minimizer of a strictly convex 1-D piecewise quadratic.

    Sorts the breakpoints, forms the stationary candidate of every open
    interval between consecutive sorted points (with -inf/+inf sentinels),
    keeps those strictly inside their interval, evaluates the objective at
    all valid candidates and at every breakpoint, and returns the argmin;
    exact ties break toward the smaller point.
    """
    b_sorted = np.sort(p.b)
    return _pwq_minimize_sorted(b_sorted, _pwq_prefix(b_sorted), p.sigma, p.c)
