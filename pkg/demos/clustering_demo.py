"""K-medians clustering: from an alternating baseline to a certified point.

The clustering objective (1/n) sum_i min_j ||mu_j - a_i||_1 is rewritten as
a difference of convex functions; the perturbed scheme then either certifies
the baseline centers as d-stationary (residual exactly zero) or improves
them. Uses the bundled Iris data when present, synthetic blobs otherwise.
"""

from pathlib import Path

import numpy as np

from dcprog import AlgoConfig, KmediansProblem, StopConfig, kmedians_baseline, load_csv, run_pdca
from dcprog.core import objective, stationarity_residual

iris = Path(__file__).resolve().parents[1] / "data" / "iris.csv"
if iris.exists():
    ds = load_csv(iris, label_column=-1, name="iris")
    points, K = ds.points, 3
    print("dataset: iris (150 x 4), K = 3")
else:
    rng = np.random.default_rng(0)
    points = np.vstack([rng.normal((0, 0), 0.5, (40, 2)),
                        rng.normal((4, 3), 0.5, (40, 2)),
                        rng.normal((0, 5), 0.5, (40, 2))])
    K = 3
    print("dataset: synthetic blobs (120 x 2), K = 3")

problem = KmediansProblem(points, K=K)
mu0 = kmedians_baseline(points, K=K, replicates=5, seed=0)
x0 = problem.pack(mu0)
z0 = objective(problem, x0)
r0 = stationarity_residual(problem, x0)
print(f"baseline (5 restarts of assign/median): zeta = {z0:.4f}, residual = {r0:.2e}")

if r0 < 1e-6:
    print("the baseline is already d-stationary; nothing to improve.")
else:
    rep = run_pdca(problem, x0, AlgoConfig(stop=StopConfig(tau=1e-6)),
                   np.random.default_rng(1))
    print(f"perturbed scheme: {rep.iterations} iterations, "
          f"zeta = {rep.zeta_final:.4f}, residual = {rep.residual:.2e}")

# a deliberately bad start shows the solver doing real work
rng = np.random.default_rng(7)
bad = points[rng.choice(len(points), K, replace=False)] + 0.25
xb = problem.pack(bad)
print(f"\nrandom-rows start: zeta = {objective(problem, xb):.4f}, "
      f"residual = {stationarity_residual(problem, xb):.2e}")
rep = run_pdca(problem, xb, AlgoConfig(stop=StopConfig(tau=1e-6)),
               np.random.default_rng(2))
print(f"after the perturbed scheme: zeta = {rep.zeta_final:.4f}, "
      f"residual = {rep.residual:.2e} ({rep.iterations} iterations)")
print("a residual of exactly zero is expected: every center coordinate ends")
print("on a data value (a kink) or an interior point whose gradient balance")
print("holds in exact rational arithmetic.")
