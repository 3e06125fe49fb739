"""Problem instances: decompositions, active-piece machinery, subproblems."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcprog.core import objective
from dcprog.data import KsparseInstanceSpec, gen_ksparse
from dcprog.problems import (
    CappedL1Problem,
    KmediansProblem,
    KsparseProblem,
    Toy1dProblem,
    vector_k_norm,
)
from dcprog.subsolvers import prox_grad_solve, QuadL1Subproblem

from conftest import brute_force_topk_pieces, fd_grad


class TestVectorKNorm:
    def test_definition(self):
        assert vector_k_norm([3.0, -1.0, 2.0], 2) == 5.0

    def test_full_k_is_l1(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(9)
        assert vector_k_norm(x, 9) == pytest.approx(np.sum(np.abs(x)))

    def test_zero_vector(self):
        for K in (1, 3, 5):
            assert vector_k_norm(np.zeros(5), K) == 0.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            vector_k_norm([1.0, 2.0], 0)
        with pytest.raises(ValueError):
            vector_k_norm([1.0, 2.0], 3)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 10))
    @settings(max_examples=40, deadline=None)
    def test_sparsity_identity(self, seed, K):
        # ||x||_0 <= K iff the l1 norm equals the top-K norm
        rng = np.random.default_rng(seed)
        n = 10
        nnz = int(rng.integers(0, n + 1))
        x = np.zeros(n)
        idx = rng.choice(n, size=nnz, replace=False)
        x[idx] = rng.standard_normal(nnz)
        gap = np.sum(np.abs(x)) - vector_k_norm(x, K)
        assert gap >= -1e-12
        assert (np.count_nonzero(x) <= K) == (gap <= 1e-12)


class TestKsparseActiveGradient:
    def test_strict_ordering_singleton(self):
        prob = KsparseProblem(np.zeros((2, 3)), np.zeros(2), lam=1.0, K=2)
        sel = prob.singleton_gradient(np.array([0.5, -2.0, 1.0]))
        assert not sel.ambiguous
        np.testing.assert_array_equal(sel.gradient, [0.0, -1.0, 1.0])
        assert sel.piece == ((1, -1), (2, 1))

    def test_exact_tie_is_ambiguous(self):
        prob = KsparseProblem(np.zeros((2, 3)), np.zeros(2), lam=1.0, K=1)
        sel = prob.singleton_gradient(np.array([1.0, 1.0, 0.0]))
        assert sel.ambiguous
        assert sel.detail["tied_indices"] == [0, 1]

    def test_zero_kth_magnitude_is_ambiguous(self):
        prob = KsparseProblem(np.zeros((2, 3)), np.zeros(2), lam=1.0, K=2)
        sel = prob.singleton_gradient(np.array([1.0, 0.0, 0.0]))
        assert sel.ambiguous
        # brute force: more than one piece attains the top-2 value
        pieces = brute_force_topk_pieces(np.array([1.0, 0.0, 0.0]), 2)
        assert len(pieces) > 1

    def test_singleton_flag_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 8))
            K = int(rng.integers(1, n + 1))
            x = np.round(rng.standard_normal(n), 1)  # provoke ties
            prob = KsparseProblem(np.zeros((2, n)), np.zeros(2), lam=1.0, K=K)
            sel = prob.singleton_gradient(x)
            pieces = brute_force_topk_pieces(x, K)
            grads = {tuple(prob.piece_grad(p, x)) for p in pieces}
            assert sel.ambiguous == (len(grads) > 1)
            if not sel.ambiguous:
                np.testing.assert_array_equal(sel.gradient, list(grads)[0])


class TestKsparseEpsilonActive:
    def setup_method(self):
        self.prob3 = KsparseProblem(np.zeros((2, 3)), np.zeros(2), lam=1.0, K=1)

    def test_two_pieces_within_slack(self):
        pieces = self.prob3.active_pieces(np.array([1.0, 0.95, 0.5]), 0.1)
        assert sorted(pieces) == [((0, 1),), ((1, 1),)]

    def test_strict_separation_gives_one_piece(self):
        pieces = self.prob3.active_pieces(np.array([1.0, 0.95, 0.5]), 0.0)
        assert pieces == [((0, 1),)]

    def test_zero_vector_enumerates_all_signed_singletons(self):
        prob = KsparseProblem(np.zeros((2, 2)), np.zeros(2), lam=1.0, K=1)
        pieces = prob.active_pieces(np.zeros(2), 0.0)
        assert sorted(pieces) == [((0, -1),), ((0, 1),), ((1, -1),), ((1, 1),)]

    def test_matches_brute_force_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(150):
            n = int(rng.integers(2, 7))
            K = int(rng.integers(1, n + 1))
            lam = float(rng.uniform(0.2, 2.0))
            x = np.round(rng.standard_normal(n), 1)
            eps = float(rng.choice([0.0, 0.05, 0.3, 1.0]))
            prob = KsparseProblem(np.zeros((2, n)), np.zeros(2), lam=lam, K=K)
            got = sorted(prob.active_pieces(x, eps))
            want = brute_force_topk_pieces(x, K, slack=eps / lam)
            assert got == want


class TestProxScaling:
    def test_ksparse_prox_threshold_scales_with_t(self):
        prob = KsparseProblem(np.zeros((2, 3)), np.zeros(2), lam=0.5, K=1)
        v = np.array([2.0, -0.6, 0.1])
        np.testing.assert_allclose(prob.prox_phi1(v, 1.0), [1.5, -0.1, 0.0])
        np.testing.assert_allclose(prob.prox_phi1(v, 2.0), [1.0, 0.0, 0.0])

    def test_toy_prox_is_identity(self):
        toy = Toy1dProblem()
        v = np.array([3.7])
        assert toy.prox_phi1(v, 5.0)[0] == 3.7


class TestKsparseSubproblem:
    def test_pure_prox_case(self):
        prob = KsparseProblem(np.zeros((2, 2)), np.zeros(2), lam=1.0, K=1)
        x, _ = prob.solve_subproblem(np.zeros(2), np.array([2.0, 0.5]), 1.0)
        np.testing.assert_allclose(x, [1.0, 0.0], atol=1e-12)

    def test_one_step_matches_prox_grad_oracle(self):
        A, b, _ = gen_ksparse(KsparseInstanceSpec(m=50, n=100, K=2, seed=3))
        prob = KsparseProblem(A, b, lam=0.1, K=2)
        rng = np.random.default_rng(3)
        x_hat = 1e-6 * rng.standard_normal(100)
        g = prob.piece_grad(prob.singleton_gradient(x_hat).piece, x_hat)
        x1, _ = prob.solve_subproblem(g, x_hat, 1.0)
        sub = QuadL1Subproblem(A=A, c=-A.T @ b - g, x_tilde=x_hat, sigma=1.0, lam=0.1)
        x2 = prox_grad_solve(sub, tol=1e-12)
        assert np.linalg.norm(x1 - x2) <= 1e-8


class TestCappedL1:
    def setup_method(self):
        A, b, _ = gen_ksparse(KsparseInstanceSpec(m=10, n=6, K=2, seed=9))
        self.prob = CappedL1Problem(A, b, lam=0.8, theta=0.6)

    def test_dc_identity(self):
        # sum_i min(|x_i|, theta) = ||x||_1 - sum_i max(|x_i| - theta, 0)
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.standard_normal(6) * 2
            lhs = np.minimum(np.abs(x), self.prob.theta).sum()
            rhs = np.abs(x).sum() - np.maximum(np.abs(x) - self.prob.theta, 0).sum()
            assert lhs == pytest.approx(rhs, abs=1e-12)
            zeta = objective(self.prob, x)
            direct = self.prob.phi2_value(x) + self.prob.lam * lhs
            assert zeta == pytest.approx(direct, abs=1e-9)

    def test_gradient_strict_case(self):
        prob = CappedL1Problem(np.zeros((2, 3)), np.zeros(2), lam=1.0, theta=1.0)
        sel = prob.singleton_gradient(np.array([2.0, 0.5, -3.0]))
        assert not sel.ambiguous
        np.testing.assert_array_equal(sel.gradient, [1.0, 0.0, -1.0])

    def test_boundary_coordinate_ambiguous(self):
        prob = CappedL1Problem(np.zeros((2, 2)), np.zeros(2), lam=1.0, theta=1.0)
        sel = prob.singleton_gradient(np.array([1.0, 0.0]))
        assert sel.ambiguous
        assert sel.detail["boundary_coordinates"] == [0]

    def test_origin_is_singleton_zero(self):
        prob = CappedL1Problem(np.zeros((2, 2)), np.zeros(2), lam=1.0, theta=1.0)
        sel = prob.singleton_gradient(np.zeros(2))
        assert not sel.ambiguous
        np.testing.assert_array_equal(sel.gradient, [0.0, 0.0])
        assert sel.piece == ()

    def test_active_pieces_respect_tolerance(self):
        x = np.array([1.5, 0.59, -0.3, 0.0, 2.0, -0.61])
        exact = self.prob.active_pieces(x, 0.0)
        assert len(exact) == 1
        # 0.59 and -0.61 sit within 0.02 of theta = 0.6: widening the value
        # tolerance above lam*0.02 must add those coordinate choices
        wide = self.prob.active_pieces(x, self.prob.lam * 0.025)
        assert len(wide) == 4

    def test_piece_gradients_match_fd(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            x = rng.standard_normal(6) * 2
            for piece in self.prob.active_pieces(x, 0.0):
                fd = fd_grad(lambda v, p=piece: self.prob.piece_value(p, v), x)
                assert np.linalg.norm(self.prob.piece_grad(piece, x) - fd) <= 1e-5


class TestKmedians:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.pts = rng.standard_normal((30, 2)) * 2
        self.prob = KmediansProblem(self.pts, K=2)

    def test_reformulation_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            mu = rng.standard_normal((2, 2)) * 2
            zeta = objective(self.prob, self.prob.pack(mu))
            direct = self.prob.clustering_objective(mu)
            assert zeta == pytest.approx(direct, abs=1e-9)

    def test_single_cluster_psi_vanishes(self):
        prob = KmediansProblem(self.pts, K=1)
        rng = np.random.default_rng(5)
        for _ in range(5):
            mu = prob.pack(rng.standard_normal((1, 2)))
            assert prob.psi_value(mu) == 0.0
            piece = prob.active_pieces(mu, 0.0)[0]
            np.testing.assert_array_equal(prob.piece_grad(piece, mu), np.zeros(2))

    def test_two_point_instance_gradient_matches_fd(self):
        pts = np.array([[0.0], [10.0]])
        prob = KmediansProblem(pts, K=2)
        sel = prob.singleton_gradient(prob.pack([[0.0], [10.0]]))
        assert not sel.ambiguous
        mu = prob.pack([[1.3], [8.2]])
        piece = prob.active_pieces(mu, 0.0)[0]
        fd = fd_grad(lambda v, p=piece: prob.piece_value(p, v), mu)
        assert np.linalg.norm(prob.piece_grad(piece, mu) - fd) <= 1e-5

    def test_generic_gradient_matches_fd(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            mu = self.prob.pack(rng.standard_normal((2, 2)) * 2)
            sel = self.prob.singleton_gradient(mu)
            assert not sel.ambiguous
            fd = fd_grad(lambda v: self.prob.piece_value(sel.piece, v), mu)
            assert np.linalg.norm(sel.gradient - fd) <= 1e-5

    def test_equidistant_point_flagged(self):
        pts = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 5.0]])
        prob = KmediansProblem(pts, K=2)
        mu = prob.pack([[0.0, 0.0], [2.0, 0.0]])  # point 2 is l1-equidistant
        sel = prob.singleton_gradient(mu)
        assert sel.ambiguous
        assert 2 in sel.detail["tied_points"]
        # and the tol-0 active set then holds both assignments
        assert len(prob.active_pieces(mu, 0.0)) == 2

    def test_subproblem_huge_sigma_returns_center(self):
        rng = np.random.default_rng(7)
        mu_hat = self.prob.pack(rng.standard_normal((2, 2)))
        out, _ = self.prob.solve_subproblem(np.zeros(4), mu_hat, 1e6)
        assert np.linalg.norm(out - mu_hat) <= 1e-5

    def test_subproblem_single_coordinate_kink(self):
        prob = KmediansProblem(np.array([[0.0]]), K=1)
        out, _ = prob.solve_subproblem(np.zeros(1), np.zeros(1), 1.0)
        assert out[0] == 0.0

    def test_subproblem_beats_random_search(self):
        rng = np.random.default_rng(8)
        G = self.prob.pack(rng.uniform(-0.5, 0.5, (2, 2)))
        mu_hat = self.prob.pack(rng.standard_normal((2, 2)))
        sigma = 0.8
        out, _ = self.prob.solve_subproblem(G, mu_hat, sigma)

        def sub_obj(v):
            return (
                self.prob.phi1_value(v)
                - float(G @ (v - mu_hat))
                + 0.5 * sigma * float(np.sum((v - mu_hat) ** 2))
            )

        best = sub_obj(out)
        for _ in range(10_000):
            trial = mu_hat + rng.uniform(-3, 3, 4)
            assert best <= sub_obj(trial) + 1e-12

    def test_prox_phi1_matches_definition(self):
        rng = np.random.default_rng(9)
        v = self.prob.pack(rng.standard_normal((2, 2)))
        t = 0.7
        out = self.prob.prox_phi1(v, t)
        def prox_obj(w):
            return self.prob.phi1_value(w) + float(np.sum((w - v) ** 2)) / (2 * t)
        base = prox_obj(out)
        for _ in range(2000):
            assert base <= prox_obj(out + rng.uniform(-1, 1, 4)) + 1e-12


class TestToyOps:
    def test_subproblem_closed_form(self):
        toy = Toy1dProblem()
        x, _ = toy.solve_subproblem(np.array([0.0]), np.array([1.5]), 1.0)
        assert x[0] == pytest.approx(0.75)
        # 1-d grid verification
        grid = np.linspace(-3, 3, 200_001)
        vals = 0.5 * grid**2 - 0.0 * (grid - 1.5) + 0.5 * (grid - 1.5) ** 2
        assert abs(grid[np.argmin(vals)] - x[0]) <= 1e-4

    def test_fixed_point_of_linear_piece(self):
        toy = Toy1dProblem()
        x, _ = toy.solve_subproblem(np.array([-1.0]), np.array([-1.0]), 1.0)
        assert x[0] == pytest.approx(-1.0, abs=1e-15)

    def test_value_at_solution(self):
        assert objective(Toy1dProblem(), np.array([-1.0])) == pytest.approx(-0.5)


def _all_problems():
    rng = np.random.default_rng(12)
    A, b, _ = gen_ksparse(KsparseInstanceSpec(m=12, n=7, K=2, seed=6))
    return [
        ("toy", Toy1dProblem()),
        ("ksparse", KsparseProblem(A, b, lam=0.6, K=2)),
        ("capped", CappedL1Problem(A, b, lam=0.6, theta=0.8)),
        ("kmedians", KmediansProblem(rng.standard_normal((9, 2)), K=2)),
    ]


@pytest.mark.parametrize("name,prob", _all_problems())
def test_psi_oracle_equals_piece_maximum(name, prob):
    # the dedicated psi oracle and the enumerated active pieces must agree,
    # and every tol-0 piece attains the maximum exactly
    rng = np.random.default_rng(13)
    for _ in range(15):
        x = rng.standard_normal(prob.dim)
        psi = prob.psi_value(x)
        pieces = prob.active_pieces(x, 0.0, cap=512)
        assert pieces
        vals = [prob.piece_value(piece, x) for piece in pieces]
        assert max(vals) == pytest.approx(psi, abs=1e-9 * (1 + abs(psi)))
        for v in vals:
            assert v == pytest.approx(psi, abs=1e-9 * (1 + abs(psi)))


class TestSingletonAfterPerturbation:
    def test_generic_rate_is_full(self):
        from dcprog.perturbation import perturb_until_singleton

        A, b, _ = gen_ksparse(KsparseInstanceSpec(m=20, n=40, K=3, seed=2))
        prob = KsparseProblem(A, b, lam=0.3, K=3)
        rng = np.random.default_rng(10)
        x = rng.standard_normal(40)
        for _ in range(500):
            out = perturb_until_singleton(prob, x, 1e-6, rng)
            assert out.retries == 0
