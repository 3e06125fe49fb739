"""The three DC iteration schemes.

* `run_dca`: proximal linearization at the current iterate with one
  (randomly tie-broken) active piece per step; converges to critical points,
  so it terminates on the relative-step gate alone and labels its limit
  ``critical`` while still recording the d-stationarity residual.
* `run_active_set_dca`: enumerates every epsilon-active piece, solves one
  unit-weight proximal subproblem per piece, and keeps the candidate with the
  smallest proximal objective value; drives the residual below tau at the
  cost of many subproblems per iteration.
* `run_pdca`: linearizes at a randomly perturbed point where the active
  gradient is unique almost surely, hence exactly one subproblem per
  iteration, and still terminates at d-stationary points.

All three produce a `RunReport` with a per-iteration trace and a final
certificate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    SolverState,
    StopConfig,
    StopDecision,
    check_stop,
    objective,
    residual_certificate,
)
from .errors import ActiveSetOverflowError, BoundednessError
from .perturbation import (
    PerturbationSchedule,
    perturb_until_singleton,
    schedule_alpha,
)

__all__ = ["AlgoConfig", "IterationRecord", "RunReport", "run_dca", "run_pdca",
           "run_active_set_dca"]


@dataclass
class AlgoConfig:
    """Shared solver configuration.

    sigma is the proximal weight of the subproblems (the epsilon-active
    scheme always uses 1, which its subproblem definition hard-codes).
    An optional sigma_schedule overrides sigma per iteration and must stay
    within the declared positive `sigma_bounds`. `schedule` is the
    perturbation-radius rule; None means harmonic decay from
    1e-6 * (1 + ||x0||), a tiny relative radius that breaks ties without
    disturbing the iteration.
    """

    sigma: float = 1.0
    sigma_schedule: Optional[Callable[[int], float]] = None
    sigma_bounds: Optional[tuple] = None
    epsilon: float = 1e-3
    stop: StopConfig = field(default_factory=StopConfig)
    schedule: Optional[PerturbationSchedule] = None
    seed: int = 0
    max_retries: int = 32
    norm_ceiling: float = 1e8
    trace_iterates: bool = False

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.sigma_bounds is not None:
            lo, hi = self.sigma_bounds
            if not (0 < lo <= hi < np.inf):
                raise ValueError("sigma bounds must be finite and positive")

    def sigma_at(self, k):
        if self.sigma_schedule is None:
            return self.sigma
        s = float(self.sigma_schedule(k))
        if s <= 0:
            raise ValueError(f"sigma schedule produced {s} at k={k}")
        if self.sigma_bounds is not None:
            lo, hi = self.sigma_bounds
            if not lo <= s <= hi:
                raise ValueError(f"sigma {s} outside declared bounds at k={k}")
        return s


@dataclass
class IterationRecord:
    """One completed iteration k, which produced the iterate x^(k+1)."""

    k: int
    zeta: float
    step_norm: float
    subproblems: int
    piece: str
    alpha: Optional[float] = None
    retries: int = 0
    x: Optional[np.ndarray] = None


@dataclass
class RunReport:
    """Per-iteration trace plus the final certificate of one solver run."""

    algorithm: str
    records: list
    x_final: np.ndarray
    zeta_initial: float
    zeta_final: float
    residual: Optional[float]
    total_subproblems: int
    iterations: int
    decision: str
    seconds: float
    schedule_conforming: Optional[bool] = None
    residual_active_size: Optional[int] = None
    note: str = ""

    def __post_init__(self):
        assert self.total_subproblems == sum(r.subproblems for r in self.records)
        assert all(np.isfinite(r.zeta) for r in self.records)

    def to_json_dict(self):
        return {
            "algorithm": self.algorithm,
            "decision": self.decision,
            "iterations": self.iterations,
            "total_subproblems": self.total_subproblems,
            "zeta_initial": self.zeta_initial,
            "zeta_final": self.zeta_final,
            "residual": self.residual,
            "residual_active_size": self.residual_active_size,
            "seconds": self.seconds,
            "schedule_conforming": self.schedule_conforming,
            "note": self.note,
            "x_final": [float(v) for v in np.asarray(self.x_final).ravel()],
            "trace": [
                {
                    "k": r.k,
                    "zeta": r.zeta,
                    "step_norm": r.step_norm,
                    "subproblems": r.subproblems,
                    "piece": r.piece,
                    "alpha": r.alpha,
                    "retries": r.retries,
                    **({"x": [float(v) for v in r.x]} if r.x is not None else {}),
                }
                for r in self.records
            ],
        }

    TRACE_COLUMNS = ("k", "zeta", "step_norm", "subproblems", "piece", "alpha")

    def trace_rows(self):
        for r in self.records:
            yield (r.k, r.zeta, r.step_norm, r.subproblems, r.piece,
                   "" if r.alpha is None else r.alpha)

    FINAL_COLUMNS = ("algorithm", "iterations", "subproblems", "zeta",
                     "residual", "decision", "seconds")

    def final_row(self):
        return (self.algorithm, self.iterations, self.total_subproblems,
                self.zeta_final, "" if self.residual is None else self.residual,
                self.decision, self.seconds)


def _guard_norm(x, cfg, k):
    if float(np.linalg.norm(x)) > cfg.norm_ceiling:
        raise BoundednessError(
            f"iterate norm exceeded ceiling {cfg.norm_ceiling:g} at iteration {k}"
        )


def _final_residual(problem, x, cfg):
    """Recompute the certificate; None (with a note) when not certifiable."""
    try:
        r, size = residual_certificate(
            problem, x, active_tol=cfg.stop.active_tol, cap=cfg.stop.piece_cap
        )
        return r, size, ""
    except ActiveSetOverflowError as exc:
        return None, None, f"residual not certifiable: {exc}"


def run_dca(problem, x0, cfg, rng):
    """Classical proximal DCA: one active piece, one subproblem per iteration.

    The piece is drawn uniformly at random among the exactly-active ones.
    Terminates when the relative step drops below tau (the residual gate may
    never fire at a merely critical limit); the returned report labels such a
    limit ``critical`` and separately records the residual there.
    """
    t0 = time.perf_counter()
    x = np.asarray(x0, dtype=float).copy()
    zeta0 = objective(problem, x)
    records = []
    carry = None
    decision = StopDecision.ITER_BUDGET.value
    for k in range(cfg.stop.max_iter + 1):
        pieces = problem.active_pieces(x, 0.0, cap=cfg.stop.piece_cap)
        piece = pieces[int(rng.integers(len(pieces)))] if len(pieces) > 1 else pieces[0]
        g = problem.piece_grad(piece, x)
        x_new, carry = problem.solve_subproblem(g, x, cfg.sigma_at(k), carry)
        step = float(np.linalg.norm(x_new - x))
        records.append(IterationRecord(
            k=k, zeta=objective(problem, x_new), step_norm=step,
            subproblems=1, piece=problem.piece_label(piece),
            x=x_new.copy() if cfg.trace_iterates else None,
        ))
        _guard_norm(x_new, cfg, k)
        rel_step = step / max(1.0, float(np.linalg.norm(x_new)))
        x = x_new
        if rel_step < cfg.stop.tau:
            decision = "critical"
            break
    residual, r_size, note = _final_residual(problem, x, cfg)
    return RunReport(
        algorithm="dca", records=records, x_final=x, zeta_initial=zeta0,
        zeta_final=objective(problem, x), residual=residual,
        total_subproblems=len(records), iterations=len(records),
        decision=decision, seconds=time.perf_counter() - t0,
        residual_active_size=r_size, note=note,
    )


def run_pdca(problem, x0, cfg, rng):
    """Perturbed DCA: linearize at x + alpha_k * xi with a unique active
    gradient; exactly one strongly convex subproblem per iteration."""
    t0 = time.perf_counter()
    x = np.asarray(x0, dtype=float).copy()
    zeta0 = objective(problem, x)
    schedule = cfg.schedule
    if schedule is None:
        schedule = PerturbationSchedule(
            kind="harmonic", alpha0=1e-6 * (1.0 + float(np.linalg.norm(x)))
        )
    records = []
    carry = None
    retry_total = 0
    decision = StopDecision.ITER_BUDGET
    state = SolverState(x=x, zeta=zeta0, rng=rng)
    for k in range(cfg.stop.max_iter + 1):
        alpha = schedule_alpha(schedule, k)
        out = perturb_until_singleton(
            problem, x, alpha, rng, max_retries=cfg.max_retries
        )
        retry_total += out.retries
        x_new, carry = problem.solve_subproblem(
            out.gradient, out.x_hat, cfg.sigma_at(k), carry
        )
        zeta_new = objective(problem, x_new)
        records.append(IterationRecord(
            k=k, zeta=zeta_new, step_norm=float(np.linalg.norm(x_new - x)),
            subproblems=1, piece=problem.piece_label(out.piece),
            alpha=alpha, retries=out.retries,
            x=x_new.copy() if cfg.trace_iterates else None,
        ))
        _guard_norm(x_new, cfg, k)
        state.x, state.zeta, state.k = x_new, zeta_new, k + 1
        state.subproblem_count = k + 1
        state.perturb_retry_count = retry_total
        dec = check_stop(state, x, cfg.stop, problem)
        x = x_new
        if dec is not StopDecision.CONTINUE:
            decision = dec
            break
    residual, r_size, note = _final_residual(problem, x, cfg)
    return RunReport(
        algorithm="pdca", records=records, x_final=x, zeta_initial=zeta0,
        zeta_final=objective(problem, x), residual=residual,
        total_subproblems=len(records), iterations=len(records),
        decision=decision.value, seconds=time.perf_counter() - t0,
        schedule_conforming=schedule.conforming, residual_active_size=r_size,
        note=note,
    )


def run_active_set_dca(problem, x0, cfg):
    """Multi-subproblem scheme over the epsilon-active pieces.

    Every iteration solves one unit-weight proximal subproblem per
    epsilon-active piece and keeps the candidate minimizing
    zeta(cand) + 0.5*||cand - x||^2; exact score ties break toward the
    smallest piece id. Deterministic: no randomness enters.

    An enumeration overflow aborts the run with a partial report marked
    ``uncertifiable``.
    """
    t0 = time.perf_counter()
    x = np.asarray(x0, dtype=float).copy()
    zeta0 = objective(problem, x)
    records = []
    carry = None
    total_sub = 0
    note = ""
    decision = StopDecision.ITER_BUDGET
    state = SolverState(x=x, zeta=zeta0)
    for k in range(cfg.stop.max_iter + 1):
        try:
            pieces = problem.active_pieces(x, cfg.epsilon, cap=cfg.stop.piece_cap)
        except ActiveSetOverflowError as exc:
            decision = StopDecision.UNCERTIFIABLE
            note = f"epsilon-active enumeration overflowed at iteration {k}: {exc}"
            break
        pieces = sorted(pieces, key=problem.piece_sort_key)
        best = None
        for piece in pieces:
            g = problem.piece_grad(piece, x)
            cand, cand_carry = problem.solve_subproblem(g, x, 1.0, carry)
            score = objective(problem, cand) + 0.5 * float(
                np.sum((cand - x) ** 2)
            )
            if best is None or score < best[0]:
                best = (score, cand, piece, cand_carry)
        total_sub += len(pieces)
        _, x_new, piece, carry = best
        zeta_new = objective(problem, x_new)
        records.append(IterationRecord(
            k=k, zeta=zeta_new, step_norm=float(np.linalg.norm(x_new - x)),
            subproblems=len(pieces), piece=problem.piece_label(piece),
            x=x_new.copy() if cfg.trace_iterates else None,
        ))
        _guard_norm(x_new, cfg, k)
        state.x, state.zeta, state.k = x_new, zeta_new, k + 1
        state.subproblem_count = total_sub
        dec = check_stop(state, x, cfg.stop, problem)
        x = x_new
        if dec is not StopDecision.CONTINUE:
            decision = dec
            break
    residual, r_size, res_note = _final_residual(problem, x, cfg)
    return RunReport(
        algorithm="active-set-dca", records=records, x_final=x,
        zeta_initial=zeta0, zeta_final=objective(problem, x),
        residual=residual, total_subproblems=total_sub,
        iterations=len(records), decision=decision.value,
        seconds=time.perf_counter() - t0, residual_active_size=r_size,
        note=note or res_note,
    )
