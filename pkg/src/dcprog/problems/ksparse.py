"""Sparse regression with the top-K-norm penalty.

    min 0.5*||A x - b||^2 + lam * (||x||_1 - ||x||_(K))

where ||x||_(K) sums the K largest absolute entries. The concave part is a
pointwise maximum of linear pieces <lam*nu, x> over sign vectors nu in
{-1,0,1}^n with exactly K nonzeros, so a piece is encoded as a sorted tuple
of (index, sign) pairs.
"""

from __future__ import annotations

import numpy as np

from ..core import DcProblem, PieceSelection, DEFAULT_PIECE_CAP
from ..errors import ActiveSetOverflowError, SubproblemSolverError
from ..subsolvers import QuadL1Subproblem, SsnConfig, prox_grad_solve, prox_l1, ssn_solve

__all__ = ["KsparseProblem", "vector_k_norm"]


def vector_k_norm(x, K):
    """Sum of the K largest absolute entries of x (partial selection)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 1 <= K <= n:
        raise ValueError(f"K must lie in [1, {n}], got {K}")
    a = np.abs(x)
    if K == n:
        return float(np.sum(a))
    return float(np.sum(np.partition(a, n - K)[n - K:]))


def _enumerate_near_max_pieces(x, K, slack, cap):
    """All sign-support pieces nu with <nu, x> >= ||x||_(K) - slack.

    Iterative branch-and-bound over indices sorted by decreasing magnitude:
    at each index the piece may skip it, take it with the aligned sign, or
    take it flipped; branches whose best completion falls short of the
    threshold are pruned. Zero entries admit both signs as distinct pieces.
    """
    n = x.size
    order = np.lexsort((np.arange(n), -np.abs(x)))
    y = np.abs(x)[order]
    cum = np.concatenate(([0.0], np.cumsum(y)))
    target = float(cum[K]) - slack
    results = []
    stack = [(0, 0, 0.0, ())]
    while stack:
        pos, taken, val, chosen = stack.pop()
        if taken == K:
            if val >= target:
                results.append(tuple(sorted(chosen)))
                if len(results) > cap:
                    raise ActiveSetOverflowError(
                        f"more than {cap} near-maximal top-K pieces",
                        cap=cap,
                        count=len(results),
                    )
            continue
        rem = K - taken
        if n - pos < rem:
            continue
        if val + (cum[pos + rem] - cum[pos]) < target:
            continue
        i = int(order[pos])
        yi = float(y[pos])
        if x[i] == 0.0:
            stack.append((pos + 1, taken + 1, val, chosen + ((i, -1),)))
            stack.append((pos + 1, taken + 1, val, chosen + ((i, 1),)))
        else:
            si = 1 if x[i] > 0 else -1
            stack.append((pos + 1, taken + 1, val - yi, chosen + ((i, -si),)))
            stack.append((pos + 1, taken + 1, val + yi, chosen + ((i, si),)))
        stack.append((pos + 1, taken, val, chosen))
    return results


class KsparseProblem(DcProblem):
    """K-sparse regularized least squares as a DC problem."""

    smoothness_bound = 0.0  # pieces are linear

    def __init__(self, A, b, lam, K):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise ValueError("b must have one entry per row of A")
        if lam <= 0:
            raise ValueError("lam must be positive")
        if not 1 <= K <= n:
            raise ValueError(f"K must lie in [1, {n}]")
        self.lam = float(lam)
        self.K = int(K)
        self.dim = n
        self._Atb = self.A.T @ self.b

    # --- convex part -------------------------------------------------------
    def phi1_value(self, x):
        return self.lam * float(np.sum(np.abs(x)))

    def prox_phi1(self, v, t):
        return prox_l1(v, t * self.lam)

    def phi2_value(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r)

    def phi2_grad(self, x):
        return self.A.T @ (self.A @ x - self.b)

    # --- concave part ------------------------------------------------------
    def psi_value(self, x):
        return self.lam * vector_k_norm(x, self.K)

    def piece_value(self, piece, x):
        return self.lam * float(sum(s * x[i] for i, s in piece))

    def piece_grad(self, piece, x):
        g = np.zeros(self.dim)
        for i, s in piece:
            g[i] = self.lam * s
        return g

    def active_pieces(self, x, tol, cap=DEFAULT_PIECE_CAP):
        x = np.asarray(x, dtype=float)
        return _enumerate_near_max_pieces(x, self.K, tol / self.lam, cap)

    def singleton_gradient(self, x):
        """Active gradient from the K largest magnitudes of x.

        Unique exactly when the K-th largest magnitude strictly exceeds the
        (K+1)-th and is strictly positive; otherwise reports the tied index
        groups (or the sign-undetermined zero entries).
        """
        x = np.asarray(x, dtype=float)
        a = np.abs(x)
        order = np.argsort(-a, kind="stable")
        kth = a[order[self.K - 1]]
        if kth == 0.0:
            return PieceSelection(
                True, detail={"reason": "kth magnitude is zero"}
            )
        if self.K < self.dim and a[order[self.K]] == kth:
            tied = [int(i) for i in np.flatnonzero(a == kth)]
            return PieceSelection(True, detail={"tied_indices": tied})
        top = order[: self.K]
        g = np.zeros(self.dim)
        g[top] = self.lam * np.sign(x[top])
        piece = tuple(sorted((int(i), int(np.sign(x[i]))) for i in top))
        return PieceSelection(False, gradient=g, piece=piece)

    # --- solver hooks ------------------------------------------------------
    def solve_subproblem(self, g, x_hat, sigma, carry=None):
        sub = QuadL1Subproblem(
            A=self.A, c=-self._Atb - g, x_tilde=np.asarray(x_hat, dtype=float),
            sigma=sigma, lam=self.lam,
        )
        try:
            x, z, _ = ssn_solve(sub, z0=carry, cfg=SsnConfig())
            return x, z
        except SubproblemSolverError:
            x = prox_grad_solve(sub, tol=1e-10)
            return x, None

    def piece_label(self, piece):
        return ",".join(f"{'+' if s > 0 else '-'}{i}" for i, s in piece)

    def piece_sort_key(self, piece):
        return piece
