"""Least squares with the capped absolute-value penalty.

    min 0.5*||A x - b||^2 + lam * sum_i min{|x_i|, theta}

written as a DC program with phi1 = lam*||.||_1 and the concave part

    psi(x) = lam * sum_i max{x_i - theta, -x_i - theta, 0},

a pointwise maximum over sign vectors s in {-1,0,1}^n of
lam * sum_{i in supp(s)} (s_i x_i - theta). Pieces are encoded as sorted
tuples of (index, sign) pairs over their support.
"""

from __future__ import annotations

import numpy as np

from ..core import DcProblem, PieceSelection, DEFAULT_PIECE_CAP
from ..errors import SubproblemSolverError
from ..subsolvers import QuadL1Subproblem, SsnConfig, prox_grad_solve, prox_l1, ssn_solve
from ._select import budgeted_choice_product

__all__ = ["CappedL1Problem"]


class CappedL1Problem(DcProblem):

    smoothness_bound = 0.0

    def __init__(self, A, b, lam, theta):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise ValueError("b must have one entry per row of A")
        if lam <= 0 or theta <= 0:
            raise ValueError("lam and theta must be positive")
        self.lam = float(lam)
        self.theta = float(theta)
        self.dim = n
        self._Atb = self.A.T @ self.b

    def phi1_value(self, x):
        return self.lam * float(np.sum(np.abs(x)))

    def prox_phi1(self, v, t):
        return prox_l1(v, t * self.lam)

    def phi2_value(self, x):
        r = self.A @ x - self.b
        return 0.5 * float(r @ r)

    def phi2_grad(self, x):
        return self.A.T @ (self.A @ x - self.b)

    def psi_value(self, x):
        x = np.asarray(x, dtype=float)
        return self.lam * float(np.sum(np.maximum(np.abs(x) - self.theta, 0.0)))

    def piece_value(self, piece, x):
        return self.lam * float(sum(s * x[i] - self.theta for i, s in piece))

    def piece_grad(self, piece, x):
        g = np.zeros(self.dim)
        for i, s in piece:
            g[i] = self.lam * s
        return g

    def active_pieces(self, x, tol, cap=DEFAULT_PIECE_CAP):
        """Per coordinate, choosing s_i costs the gap to that coordinate's best
        contribution; combinations within the total budget are the tol-active
        pieces."""
        x = np.asarray(x, dtype=float)
        options = []
        for i in range(self.dim):
            best = max(abs(x[i]) - self.theta, 0.0)
            opts = [(self.lam * best, (i, 0))]
            for s in (1, -1):
                gap = best - (s * x[i] - self.theta)
                opts.append((self.lam * gap, (i, s)))
            options.append(opts)
        combos = budgeted_choice_product(options, tol, cap)
        return [
            tuple((i, s) for i, s in combo if s != 0) for combo in combos
        ]

    def singleton_gradient(self, x):
        """Componentwise gradient lam*sgn(x_i) past the cap, zero inside it;
        unique unless some |x_i| equals theta exactly."""
        x = np.asarray(x, dtype=float)
        a = np.abs(x)
        boundary = np.flatnonzero(a == self.theta)
        if boundary.size:
            return PieceSelection(
                True, detail={"boundary_coordinates": [int(i) for i in boundary]}
            )
        outside = a > self.theta
        g = np.where(outside, self.lam * np.sign(x), 0.0)
        piece = tuple(
            (int(i), int(np.sign(x[i]))) for i in np.flatnonzero(outside)
        )
        return PieceSelection(False, gradient=g, piece=piece)

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
        if not piece:
            return "interior"
        return ",".join(f"{'+' if s > 0 else '-'}{i}" for i, s in piece)

    def piece_sort_key(self, piece):
        return piece
