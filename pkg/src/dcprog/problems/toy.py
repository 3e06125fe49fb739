"""Fixed one-dimensional instance zeta(x) = x^2/2 - max{-x, 0}.

Pieces are psi_1(x) = -x and psi_2(x) = 0; phi1 = 0 (identity prox) and
phi2(x) = x^2/2. The instance has a spurious critical point at 0 and a
single d-stationary point at -1 with value -0.5, which makes it a minimal
separator between the plain and the perturbed iteration schemes.
"""

from __future__ import annotations

import numpy as np

from ..core import DcProblem, PieceSelection

__all__ = ["Toy1dProblem"]


class Toy1dProblem(DcProblem):

    dim = 1
    smoothness_bound = 0.0  # both pieces are affine

    def phi1_value(self, x):
        return 0.0

    def prox_phi1(self, v, t):
        return np.asarray(v, dtype=float).copy()

    def phi2_value(self, x):
        return 0.5 * float(x[0]) ** 2

    def phi2_grad(self, x):
        return np.asarray(x, dtype=float).copy()

    def psi_value(self, x):
        return max(-float(x[0]), 0.0)

    def piece_value(self, piece, x):
        return -float(x[0]) if piece == 1 else 0.0

    def piece_grad(self, piece, x):
        return np.array([-1.0]) if piece == 1 else np.array([0.0])

    def active_pieces(self, x, tol, cap=4096):
        psi = self.psi_value(x)
        return [p for p in (1, 2) if self.piece_value(p, x) >= psi - tol]

    def singleton_gradient(self, x):
        v = float(x[0])
        if v < 0:
            return PieceSelection(False, gradient=np.array([-1.0]), piece=1)
        if v > 0:
            return PieceSelection(False, gradient=np.array([0.0]), piece=2)
        return PieceSelection(True, detail="both pieces active at 0")

    def solve_subproblem(self, g, x_hat, sigma, carry=None):
        # minimizer of x^2/2 - g*(x - x_hat) + (sigma/2)(x - x_hat)^2
        x_plus = (float(g[0]) + sigma * float(x_hat[0])) / (1.0 + sigma)
        return np.array([x_plus]), None

    def piece_label(self, piece):
        return f"psi{piece}"

    def piece_sort_key(self, piece):
        return piece
