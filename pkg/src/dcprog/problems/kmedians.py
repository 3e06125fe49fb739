"""DC reformulation of K-medians clustering.

For data a_1..a_n in R^d and K centers mu_1..mu_K,

    (1/n) sum_i min_j ||mu_j - a_i||_1
  =  underbrace{(1/n) sum_i sum_l ||mu_l - a_i||_1}_{phi1(mu)}
   - underbrace{(1/n) sum_i max_j sum_{l != j} ||mu_l - a_i||_1}_{psi(mu)}.

A concave piece is an assignment pi of points to centers; its value drops
each point's distance to its assigned center from the full sum. Center
matrices are packed row-major into flat vectors of length K*d; phi2 is
identically zero so the shared residual formula applies unchanged.

The proximal map of phi1 and the strongly convex subproblems both separate
into K*d one-dimensional piecewise quadratics over the (pre-sorted) data
coordinates, solved exactly.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..core import DcProblem, PieceSelection, DEFAULT_PIECE_CAP
from ..subsolvers import _pwq_minimize_sorted, _pwq_prefix
from ._select import budgeted_choice_product

__all__ = ["KmediansProblem"]


class KmediansProblem(DcProblem):

    smoothness_bound = 0.0  # pieces are piecewise affine

    def __init__(self, data, K):
        self.data = np.asarray(data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("data must be an n x d matrix")
        self.n_points, self.n_features = self.data.shape
        if not 1 <= K <= self.n_points:
            raise ValueError("need 1 <= K <= number of points")
        self.K = int(K)
        self.dim = self.K * self.n_features
        # per-coordinate sorted breakpoints and prefix sums, shared by every
        # 1-D subproblem and by the prox of phi1
        self._sorted_cols = [np.sort(self.data[:, r]) for r in range(self.n_features)]
        self._prefixes = [_pwq_prefix(col) for col in self._sorted_cols]

    # --- packing -----------------------------------------------------------
    def pack(self, mu):
        return np.asarray(mu, dtype=float).reshape(self.dim)

    def unpack(self, x):
        return np.asarray(x, dtype=float).reshape(self.K, self.n_features)

    def _distances(self, mu):
        """l1 distances, shape (n_points, K)."""
        return np.abs(mu[None, :, :] - self.data[:, None, :]).sum(axis=2)

    # --- convex part -------------------------------------------------------
    def phi1_value(self, x):
        mu = self.unpack(x)
        return float(self._distances(mu).sum()) / self.n_points

    def prox_phi1(self, v, t):
        mu = self.unpack(v)
        out = np.empty_like(mu)
        sigma = 1.0 / t
        for r in range(self.n_features):
            col, pre = self._sorted_cols[r], self._prefixes[r]
            for l in range(self.K):
                out[l, r] = _pwq_minimize_sorted(col, pre, sigma, mu[l, r] / t)
        return self.pack(out)

    def phi2_value(self, x):
        return 0.0

    def phi2_grad(self, x):
        return np.zeros(self.dim)

    # --- concave part ------------------------------------------------------
    def psi_value(self, x):
        d = self._distances(self.unpack(x))
        return float((d.sum(axis=1) - d.min(axis=1)).sum()) / self.n_points

    def piece_value(self, piece, x):
        d = self._distances(self.unpack(x))
        idx = np.asarray(piece, dtype=int)
        rows = np.arange(self.n_points)
        return float((d.sum(axis=1) - d[rows, idx]).sum()) / self.n_points

    def piece_grad(self, piece, x):
        mu = self.unpack(x)
        sgn = np.sign(mu[None, :, :] - self.data[:, None, :])  # sgn(0) = 0
        total = sgn.sum(axis=0)
        idx = np.asarray(piece, dtype=int)
        G = np.empty_like(mu)
        for l in range(self.K):
            members = idx == l
            G[l] = total[l] - sgn[members, l, :].sum(axis=0)
        return self.pack(G / self.n_points)

    def active_pieces(self, x, tol, cap=DEFAULT_PIECE_CAP):
        """Assignments whose per-point extra distance over the nearest center
        sums to at most tol (value scale, weight 1/n per point)."""
        d = self._distances(self.unpack(x))
        m = d.min(axis=1)
        options = [
            [((d[i, j] - m[i]) / self.n_points, j) for j in range(self.K)]
            for i in range(self.n_points)
        ]
        return budgeted_choice_product(options, tol, cap)

    def singleton_gradient(self, x):
        """Unique active gradient when every point has a strictly nearest
        center (exact float comparison); ambiguity lists the tied points."""
        d = self._distances(self.unpack(x))
        nearest = d.argmin(axis=1)
        rows = np.arange(self.n_points)
        tie_counts = (d == d[rows, nearest][:, None]).sum(axis=1)
        tied = np.flatnonzero(tie_counts > 1)
        if tied.size:
            return PieceSelection(
                True, detail={"tied_points": [int(i) for i in tied]}
            )
        piece = tuple(int(j) for j in nearest)
        return PieceSelection(
            False, gradient=self.piece_grad(piece, x), piece=piece
        )

    # --- solver hooks ------------------------------------------------------
    def solve_subproblem(self, g, x_hat, sigma, carry=None):
        """K*d independent exact 1-D minimizations with c = g + sigma*mu_hat."""
        C = self.unpack(g) + sigma * self.unpack(x_hat)
        out = np.empty_like(C)
        for r in range(self.n_features):
            col, pre = self._sorted_cols[r], self._prefixes[r]
            for l in range(self.K):
                out[l, r] = _pwq_minimize_sorted(col, pre, sigma, C[l, r])
        return self.pack(out), None

    def clustering_objective(self, mu):
        """(1/n) sum_i min_j ||mu_j - a_i||_1 for an unpacked center matrix."""
        mu = np.asarray(mu, dtype=float).reshape(self.K, self.n_features)
        return float(self._distances(mu).min(axis=1).sum()) / self.n_points

    def piece_label(self, piece):
        raw = np.asarray(piece, dtype=np.int64).tobytes()
        return "asg-" + hashlib.sha1(raw).hexdigest()[:12]

    def piece_sort_key(self, piece):
        return piece
