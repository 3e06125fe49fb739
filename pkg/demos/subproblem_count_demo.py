"""Single-subproblem iterations vs exhaustive active-set enumeration.

Both schemes below reach a d-stationary point of the same sparse-regression
instance from the same dense start. The epsilon-active scheme solves one
proximal subproblem per near-maximal piece each iteration - expensive when
many pieces nearly tie - while the perturbed scheme always solves exactly
one, because the perturbation makes the active gradient unique almost
surely.
"""

import numpy as np

from dcprog import (
    AlgoConfig,
    KsparseInstanceSpec,
    KsparseProblem,
    StopConfig,
    gen_ksparse,
    run_active_set_dca,
    run_pdca,
)
from dcprog.cli import compare_start_point

A, b, _ = gen_ksparse(KsparseInstanceSpec(m=50, n=100, K=2, noise_std=0.01, seed=0))
problem = KsparseProblem(A, b, lam=0.1, K=2)
cfg = AlgoConfig(sigma=1.0, epsilon=1e-3, stop=StopConfig(tau=1e-6))
x0 = compare_start_point(problem, cfg.epsilon)

multi = run_active_set_dca(problem, x0, cfg)
single = run_pdca(problem, x0, cfg, np.random.default_rng(0))

print(f"{'method':>16} {'iters':>6} {'subproblems':>12} {'residual':>10} {'zeta':>10}")
for name, rep in (("active-set", multi), ("perturbed", single)):
    print(f"{name:>16} {rep.iterations:>6} {rep.total_subproblems:>12} "
          f"{rep.residual:>10.2e} {rep.zeta_final:>10.6f}")

print("\nper-iteration subproblem counts of the active-set scheme:")
print(" ", [r.subproblems for r in multi.records])
print("the dense start puts many pieces within epsilon of the maximum, so")
print("the first iteration alone solves", multi.records[0].subproblems,
      "subproblems; the perturbed scheme solved", single.total_subproblems,
      "in total.")
assert abs(multi.zeta_final - single.zeta_final) <= 1e-6
print("\nboth certified the same objective value to 1e-6.")
