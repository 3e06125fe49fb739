"""The three iteration schemes and their run reports."""

import numpy as np
import pytest

from dcprog.algorithms import AlgoConfig, run_active_set_dca, run_dca, run_pdca
from dcprog.core import StopConfig, objective, stationarity_residual
from dcprog.data import KsparseInstanceSpec, gen_ksparse
from dcprog.errors import BoundednessError
from dcprog.perturbation import PerturbationSchedule
from dcprog.problems import KsparseProblem, Toy1dProblem


def toy_cfg(tau=1e-8, **kw):
    return AlgoConfig(stop=StopConfig(tau=tau), **kw)


def small_instance(seed=0, m=50, n=100, K=2, lam=0.1):
    A, b, _ = gen_ksparse(KsparseInstanceSpec(m=m, n=n, K=K, seed=seed))
    return KsparseProblem(A, b, lam=lam, K=K)


class TestDca:
    def test_trapped_at_critical_point(self):
        rep = run_dca(Toy1dProblem(), np.array([1.5]), toy_cfg(),
                      np.random.default_rng(0))
        assert abs(rep.x_final[0]) <= 1e-6
        assert rep.decision == "critical"

    def test_negative_start_reaches_d_stationary_point(self):
        # hand iteration: the -x piece stays active, fixed point at -1
        rep = run_dca(Toy1dProblem(), np.array([-0.5]), toy_cfg(),
                      np.random.default_rng(0))
        assert abs(rep.x_final[0] + 1.0) <= 1e-6

    def test_one_step_at_fixed_point(self):
        rep = run_dca(Toy1dProblem(), np.array([-1.0]), toy_cfg(),
                      np.random.default_rng(0))
        assert rep.iterations == 1
        assert abs(rep.x_final[0] + 1.0) <= 1e-8

    def test_strict_monotonicity(self):
        rep = run_dca(Toy1dProblem(), np.array([1.5]), toy_cfg(),
                      np.random.default_rng(0))
        zetas = [rep.zeta_initial] + [r.zeta for r in rep.records]
        assert all(z1 <= z0 + 1e-12 for z0, z1 in zip(zetas, zetas[1:]))

    def test_subproblem_accounting(self):
        rep = run_dca(Toy1dProblem(), np.array([1.5]), toy_cfg(),
                      np.random.default_rng(0))
        assert rep.total_subproblems == rep.iterations

    def test_random_tie_selection_at_kink(self):
        # at exactly 0 both pieces are active; the uniformly random pick
        # either keeps the iterate at 0 or sends it to -1
        outcomes = set()
        for seed in range(8):
            rep = run_dca(Toy1dProblem(), np.array([0.0]), toy_cfg(),
                          np.random.default_rng(seed))
            outcomes.add(round(float(rep.x_final[0]), 4))
        assert outcomes == {0.0, -1.0}


class TestPdca:
    def test_escapes_to_d_stationary_point(self):
        rep = run_pdca(Toy1dProblem(), np.array([1.5]), toy_cfg(),
                       np.random.default_rng(0))
        assert abs(rep.x_final[0] + 1.0) <= 1e-6
        assert abs(rep.zeta_final + 0.5) <= 1e-8
        assert rep.decision == "converged"

    def test_one_subproblem_per_iteration(self):
        prob = small_instance()
        rep = run_pdca(prob, np.zeros(prob.dim),
                       AlgoConfig(stop=StopConfig(tau=1e-6)),
                       np.random.default_rng(1))
        assert rep.total_subproblems == rep.iterations
        assert all(r.subproblems == 1 for r in rep.records)
        assert rep.residual is not None and rep.residual < 1e-6

    def test_quick_convergence_from_d_stationary_start(self):
        toy = Toy1dProblem()
        rep = run_pdca(toy, np.array([-1.0]), toy_cfg(tau=1e-6),
                       np.random.default_rng(2))
        assert rep.iterations <= 2
        assert rep.residual < 1e-6

    def test_near_monotone_descent(self):
        # zeta may rise per step by at most (L + sigma/2) * alpha_k^2
        toy = Toy1dProblem()
        cfg = toy_cfg()
        rep = run_pdca(toy, np.array([1.5]), cfg, np.random.default_rng(3))
        bound = toy.smoothness_bound + cfg.sigma / 2.0
        zetas = [rep.zeta_initial] + [r.zeta for r in rep.records]
        for z0, rec in zip(zetas, rep.records):
            assert rec.zeta <= z0 + bound * rec.alpha**2 + 1e-12

    def test_certificate_recomputes(self):
        prob = small_instance(seed=4)
        rep = run_pdca(prob, np.zeros(prob.dim),
                       AlgoConfig(stop=StopConfig(tau=1e-6)),
                       np.random.default_rng(4))
        assert rep.decision == "converged"
        r = stationarity_residual(prob, rep.x_final)
        assert r < 1e-6
        assert r == pytest.approx(rep.residual, abs=1e-15)

    def test_boundedness_ceiling_fails_run(self):
        class Runaway(Toy1dProblem):
            def solve_subproblem(self, g, x_hat, sigma, carry=None):
                return np.asarray(x_hat) * 2.0 + 1.0, None

        with pytest.raises(BoundednessError):
            run_pdca(Runaway(), np.array([1.5]),
                     AlgoConfig(stop=StopConfig(tau=1e-6), norm_ceiling=100.0),
                     np.random.default_rng(0))

    def test_seed_determinism(self):
        prob = small_instance(seed=5)
        reps = [
            run_pdca(prob, np.zeros(prob.dim),
                     AlgoConfig(stop=StopConfig(tau=1e-6)),
                     np.random.default_rng(42))
            for _ in range(2)
        ]
        assert np.array_equal(reps[0].x_final, reps[1].x_final)
        t0 = [(r.k, r.zeta, r.step_norm, r.piece, r.alpha, r.retries)
              for r in reps[0].records]
        t1 = [(r.k, r.zeta, r.step_norm, r.piece, r.alpha, r.retries)
              for r in reps[1].records]
        assert t0 == t1

    def test_sigma_schedule_respected_and_validated(self):
        toy = Toy1dProblem()
        cfg = AlgoConfig(
            stop=StopConfig(tau=1e-8),
            sigma_schedule=lambda k: 1.0 + 0.5 * (k % 2),
            sigma_bounds=(0.5, 2.0),
        )
        rep = run_pdca(toy, np.array([1.5]), cfg, np.random.default_rng(6))
        assert abs(rep.x_final[0] + 1.0) <= 1e-6
        bad = AlgoConfig(stop=StopConfig(tau=1e-8),
                         sigma_schedule=lambda k: 5.0, sigma_bounds=(0.5, 2.0))
        with pytest.raises(ValueError):
            run_pdca(toy, np.array([1.5]), bad, np.random.default_rng(6))

    def test_nonconforming_schedule_labeled(self):
        cfg = AlgoConfig(
            stop=StopConfig(tau=1e-6, max_iter=30),
            schedule=PerturbationSchedule(kind="constant", alpha0=1e-8),
        )
        rep = run_pdca(Toy1dProblem(), np.array([-1.0]), cfg,
                       np.random.default_rng(7))
        assert rep.schedule_conforming is False


class TestActiveSetDca:
    def test_toy_escape_with_wide_epsilon(self):
        rep = run_active_set_dca(Toy1dProblem(), np.array([1.5]),
                                 toy_cfg(tau=1e-8, epsilon=0.1))
        assert abs(rep.x_final[0] + 1.0) <= 1e-6
        assert rep.decision == "converged"

    def test_proximal_value_selection_by_hand(self):
        # at x = 0.05 both pieces are 0.1-active; candidate of the linear
        # piece wins the proximal objective comparison
        toy = Toy1dProblem()
        x = np.array([0.05])
        pieces = toy.active_pieces(x, 0.1)
        assert pieces == [1, 2]
        cands = {}
        for p in pieces:
            c, _ = toy.solve_subproblem(toy.piece_grad(p, x), x, 1.0)
            cands[p] = objective(toy, c) + 0.5 * float(np.sum((c - x) ** 2))
        assert cands[1] < cands[2]

    def test_multi_subproblem_accounting(self):
        prob = small_instance(seed=0)
        eps = 1e-3
        atb = prob.A.T @ prob.b
        x0 = (2 * eps / prob.lam) * atb / np.abs(atb).max()
        cfg = AlgoConfig(epsilon=eps, stop=StopConfig(tau=1e-6))
        rep = run_active_set_dca(prob, x0, cfg)
        assert rep.decision == "converged"
        assert rep.total_subproblems == sum(r.subproblems for r in rep.records)
        assert rep.total_subproblems > rep.iterations
        rep_p = run_pdca(prob, x0, cfg, np.random.default_rng(8))
        assert rep_p.total_subproblems == rep_p.iterations
        assert rep.total_subproblems >= rep_p.total_subproblems
        assert abs(rep.zeta_final - rep_p.zeta_final) <= 1e-5

    def test_strict_monotonicity(self):
        rep = run_active_set_dca(Toy1dProblem(), np.array([1.5]),
                                 toy_cfg(epsilon=0.1))
        zetas = [rep.zeta_initial] + [r.zeta for r in rep.records]
        assert all(z1 <= z0 + 1e-12 for z0, z1 in zip(zetas, zetas[1:]))

    def test_zero_epsilon_singleton_matches_prox_step(self):
        prob = small_instance(seed=6)
        rng = np.random.default_rng(9)
        x = rng.standard_normal(prob.dim)
        cfg = AlgoConfig(epsilon=0.0, stop=StopConfig(tau=1e-6, max_iter=1))
        rep = run_active_set_dca(prob, x, cfg)
        assert rep.records[0].subproblems == 1
        g = prob.piece_grad(prob.active_pieces(x, 0.0)[0], x)
        direct, _ = prob.solve_subproblem(g, x, 1.0)
        first_step = rep.records[0].step_norm
        assert first_step == pytest.approx(float(np.linalg.norm(direct - x)), abs=1e-9)

    def test_capped_l1_instance_converges(self):
        from dcprog.data import KsparseInstanceSpec, gen_ksparse
        from dcprog.problems import CappedL1Problem

        A, b, _ = gen_ksparse(KsparseInstanceSpec(m=25, n=12, K=3, seed=3))
        prob = CappedL1Problem(A, b, lam=0.4, theta=0.5)
        cfg = AlgoConfig(epsilon=1e-3, stop=StopConfig(tau=1e-6))
        rng = np.random.default_rng(4)
        x0 = 0.02 * rng.standard_normal(12)
        rep = run_active_set_dca(prob, x0, cfg)
        assert rep.decision == "converged"
        assert rep.residual < 1e-6
        rep_p = run_pdca(prob, x0, cfg, np.random.default_rng(4))
        assert rep_p.decision == "converged"
        assert abs(rep.zeta_final - rep_p.zeta_final) <= 1e-5

    def test_overflow_aborts_with_partial_report(self):
        prob = small_instance(seed=0)
        cfg = AlgoConfig(epsilon=1e-3, stop=StopConfig(tau=1e-6))
        rep = run_active_set_dca(prob, np.zeros(prob.dim), cfg)
        assert rep.decision == "uncertifiable"
        assert "overflow" in rep.note
        assert rep.iterations == 0


class TestRunReport:
    def test_json_round_trip(self):
        import json

        rep = run_pdca(Toy1dProblem(), np.array([1.5]), toy_cfg(),
                       np.random.default_rng(0))
        doc = json.loads(json.dumps(rep.to_json_dict()))
        assert doc["iterations"] == rep.iterations
        assert len(doc["trace"]) == rep.iterations
        assert doc["trace"][0]["k"] == 0

    def test_final_row_matches_columns(self):
        rep = run_dca(Toy1dProblem(), np.array([1.5]), toy_cfg(),
                      np.random.default_rng(0))
        assert len(rep.final_row()) == len(rep.FINAL_COLUMNS)
