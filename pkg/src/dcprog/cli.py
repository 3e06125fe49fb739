"""Command-line experiment harness.

Four experiment kinds, each emitting machine-readable reports into --out:

* ``toy-compare``: plain vs perturbed scheme on the 1-D escape example,
  with per-iteration trace CSVs (iterate path, objective, selected piece).
* ``ksparse``: sparse-regression sweep; one summary row per
  (K, lambda, tau, trial) with iterations, objective, support size.
* ``ksparse-compare``: epsilon-active-set scheme vs perturbed scheme on one
  small instance, reporting iterations/subproblems/residual/objective.
* ``kmedians``: clustering baseline vs perturbed scheme on a CSV
  dataset, reporting both objectives and both residuals.

Every flag can also be supplied through ``--config FILE`` holding
``key = value`` lines (same names as the long flags, without the dashes);
explicit flags override the file. Exit code 0 means every run terminated at
a certified point (converged, or the plain scheme's critical limit); 2, 3
and 4 distinguish iteration budget, uncertifiable enumeration, and solver
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algorithms import AlgoConfig, run_active_set_dca, run_dca, run_pdca
from .core import StopConfig, objective, residual_certificate
from .data import KsparseInstanceSpec, gen_ksparse, kmedians_baseline, load_csv
from .errors import DcprogError
from .perturbation import PerturbationSchedule
from .problems import KmediansProblem, KsparseProblem, Toy1dProblem

EXPERIMENTS = ("toy-compare", "ksparse", "ksparse-compare", "kmedians")

# exit codes, worst one wins
EXIT_OK = 0
EXIT_ITER_BUDGET = 2
EXIT_UNCERTIFIABLE = 3
EXIT_SOLVER_FAILURE = 4

_SUCCESS_DECISIONS = {"converged", "critical"}

# schema of the per-run JSON reports (field name -> type); timing fields are
# excluded from the determinism guarantee
RUN_JSON_SCHEMA = {
    "experiment": str,
    "config": dict,
    "algorithm": str,
    "decision": str,
    "iterations": int,
    "total_subproblems": int,
    "zeta_initial": float,
    "zeta_final": float,
    "residual": (float, type(None)),
    "residual_active_size": (int, type(None)),
    "seconds": float,
    "schedule_conforming": (bool, type(None)),
    "note": str,
    "x_final": list,
    "trace": list,
}
TIMING_FIELDS = ("seconds",)


def validate_run_json(doc):
    """Check a per-run JSON report against RUN_JSON_SCHEMA; returns doc."""
    for key, typ in RUN_JSON_SCHEMA.items():
        if key not in doc:
            raise ValueError(f"run report missing field {key!r}")
        if not isinstance(doc[key], typ):
            raise ValueError(f"run report field {key!r} has type "
                             f"{type(doc[key]).__name__}")
    return doc


_KIND_DEFAULTS = {
    # problem-size defaults per experiment kind
    "ksparse": {"m": 500, "n": 1000, "k": "20", "lam": "0.1"},
    "ksparse-compare": {"m": 50, "n": 100, "k": "2", "lam": "0.1"},
    "kmedians": {"k": "3"},
    "toy-compare": {},
}


@dataclass
class ExperimentConfig:
    """Validated settings of one CLI invocation."""

    experiment: str
    m: int | None = None
    n: int | None = None
    k: str | None = None
    lam: str | None = None
    theta: float = 0.5
    tau: float | None = None
    sigma: float | None = None
    epsilon: float = 1e-3
    alpha0: float | None = None
    schedule: str = "harmonic"
    rho: float = 0.5
    seed: int = 0
    trials: int = 1
    noise_std: float = 0.01
    dataset: str | None = None
    label_column: int | None = -1
    replicates: int = 5
    max_iter: int = 100_000
    out: str = "dcprog-results"
    formats: tuple = ("csv", "json")

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for key, val in _KIND_DEFAULTS[self.experiment].items():
            if getattr(self, key) is None:
                setattr(self, key, val)
        if isinstance(self.label_column, str):
            self.label_column = (None if self.label_column.lower() == "none"
                                 else int(self.label_column))
        if self.experiment == "kmedians" and not self.dataset:
            raise ValueError("kmedians requires --dataset")
        for fmt in self.formats:
            if fmt not in ("csv", "json"):
                raise ValueError(f"unknown report format {fmt!r}")
        if self.schedule not in ("harmonic", "geometric"):
            raise ValueError("schedule must be harmonic or geometric")

    def k_values(self):
        return [int(v) for v in str(self.k).split(",")]

    def lam_values(self):
        return [float(v) for v in str(self.lam).split(",")]

    def make_schedule(self, x0):
        alpha0 = self.alpha0
        if alpha0 is None:
            alpha0 = 1e-6 * (1.0 + float(np.linalg.norm(x0)))
        return PerturbationSchedule(kind=self.schedule, alpha0=alpha0, rho=self.rho)

    def algo_config(self, x0, tau, sigma, active_tol=None):
        return AlgoConfig(
            sigma=sigma,
            epsilon=self.epsilon,
            stop=StopConfig(tau=tau, max_iter=self.max_iter, active_tol=active_tol),
            schedule=self.make_schedule(x0),
            seed=self.seed,
        )


# --- report writing ---------------------------------------------------------

def _write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_run_json(path, experiment, cfg_echo, report, extra=None):
    doc = {"experiment": experiment, "config": cfg_echo}
    doc.update(report.to_json_dict())
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
    return doc


def _trace_csv(path, report, with_iterate=False):
    cols = list(report.TRACE_COLUMNS)
    if with_iterate:
        cols.insert(1, "x")
    rows = []
    for rec, raw in zip(report.records, report.trace_rows()):
        row = list(raw)
        if with_iterate:
            row.insert(1, float(rec.x[0]) if rec.x is not None else "")
        rows.append(row)
    _write_csv(path, cols, rows)


def _decision_exit(decision):
    return {
        "converged": EXIT_OK,
        "critical": EXIT_OK,
        "iter_budget": EXIT_ITER_BUDGET,
        "uncertifiable": EXIT_UNCERTIFIABLE,
    }.get(decision, EXIT_SOLVER_FAILURE)


# --- experiments ------------------------------------------------------------

def cmd_toy_compare(cfg):
    """Plain vs perturbed scheme from x0 = 1.5 on the escape example."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = Toy1dProblem()
    x0 = np.array([1.5])
    tau = cfg.tau if cfg.tau is not None else 1e-8
    sigma = cfg.sigma if cfg.sigma is not None else 1.0
    # report the residual with activity resolved at the tau scale: the plain
    # scheme stalls near the kink and exact activity there would hide it
    acfg = cfg.algo_config(x0, tau, sigma, active_tol=tau)
    acfg.trace_iterates = True
    reports = {
        "dca": run_dca(problem, x0, acfg, np.random.default_rng([cfg.seed, 0])),
        "pdca": run_pdca(problem, x0, acfg, np.random.default_rng([cfg.seed, 1])),
    }
    cfg_echo = {"x0": 1.5, "tau": tau, "sigma": sigma, "seed": cfg.seed,
                "schedule": cfg.schedule}
    rows = []
    code = EXIT_OK
    for name, rep in reports.items():
        if "csv" in cfg.formats:
            _trace_csv(out / f"toy_compare_trace_{name}.csv", rep, with_iterate=True)
        if "json" in cfg.formats:
            _write_run_json(out / f"toy_compare_{name}.json", "toy-compare",
                            cfg_echo, rep)
        rows.append((name, rep.iterations, rep.total_subproblems,
                     float(rep.x_final[0]), rep.zeta_final,
                     "" if rep.residual is None else rep.residual,
                     rep.decision, rep.seconds))
        code = max(code, _decision_exit(rep.decision))
    if "csv" in cfg.formats:
        _write_csv(out / "toy_compare_summary.csv",
                   ("algorithm", "iterations", "subproblems", "x_final", "zeta",
                    "residual", "decision", "seconds"), rows)
    return reports, code


def cmd_ksparse(cfg):
    """Sparse-regression sweep over (K, lambda, tau, trial)."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    taus = (cfg.tau,) if cfg.tau is not None else (1e-6, 1e-8)
    sigma = cfg.sigma if cfg.sigma is not None else 0.1
    rows = []
    reports = []
    code = EXIT_OK
    for K in cfg.k_values():
        for lam in cfg.lam_values():
            for trial in range(cfg.trials):
                spec = KsparseInstanceSpec(
                    m=cfg.m, n=cfg.n, K=K, noise_std=cfg.noise_std,
                    seed=int(np.random.default_rng(
                        [cfg.seed, K, trial]).integers(2**32)),
                )
                A, b, _ = gen_ksparse(spec)
                problem = KsparseProblem(A, b, lam=lam, K=K)
                x0 = np.zeros(cfg.n)
                for tau in taus:
                    acfg = cfg.algo_config(x0, tau, sigma)
                    rng = np.random.default_rng([cfg.seed, K, trial, 17])
                    tag = f"K{K}_lam{lam:g}_tau{tau:g}_trial{trial}"
                    try:
                        rep = run_pdca(problem, x0, acfg, rng)
                    except DcprogError as exc:
                        rows.append((cfg.m, cfg.n, K, lam, tau, trial, "", "",
                                     "", "", "", f"failed: {exc}", ""))
                        code = max(code, EXIT_SOLVER_FAILURE)
                        continue
                    nnz = int(np.count_nonzero(rep.x_final))
                    rows.append((cfg.m, cfg.n, K, lam, tau, trial,
                                 rep.iterations, rep.total_subproblems,
                                 rep.zeta_final, nnz,
                                 "" if rep.residual is None else rep.residual,
                                 rep.decision, rep.seconds))
                    reports.append((tag, rep))
                    code = max(code, _decision_exit(rep.decision))
                    if "json" in cfg.formats:
                        _write_run_json(
                            out / f"ksparse_{tag}.json", "ksparse",
                            {"m": cfg.m, "n": cfg.n, "K": K, "lam": lam,
                             "tau": tau, "trial": trial, "sigma": sigma,
                             "noise_std": cfg.noise_std, "seed": cfg.seed},
                            rep, extra={"support_size": nnz})
    if "csv" in cfg.formats:
        _write_csv(out / "ksparse_results.csv",
                   ("m", "n", "K", "lambda", "tau", "trial", "iterations",
                    "subproblems", "zeta", "support_size", "residual",
                    "decision", "seconds"), rows)
    return reports, code


def compare_start_point(problem, epsilon):
    """Dense deterministic x0 for the comparison experiment.

    The epsilon-active enumeration is degenerate at 0 (every piece ties), so
    the comparison starts from the normalized least-squares direction scaled
    to twice the activity slack epsilon/lambda.
    """
    g = problem.A.T @ problem.b
    scale = np.abs(g).max()
    if scale == 0.0:
        raise ValueError("zero data: no informative start available")
    return (2.0 * epsilon / problem.lam) * g / scale


def cmd_ksparse_compare(cfg):
    """Epsilon-active-set scheme vs perturbed scheme on one instance."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    K = cfg.k_values()[0]
    lam = cfg.lam_values()[0]
    tau = cfg.tau if cfg.tau is not None else 1e-6
    sigma = cfg.sigma if cfg.sigma is not None else 1.0
    spec = KsparseInstanceSpec(m=cfg.m, n=cfg.n, K=K, noise_std=cfg.noise_std,
                               seed=cfg.seed)
    A, b, _ = gen_ksparse(spec)
    problem = KsparseProblem(A, b, lam=lam, K=K)
    x0 = compare_start_point(problem, cfg.epsilon)
    acfg = cfg.algo_config(x0, tau, sigma)
    reports = {
        "active-set-dca": run_active_set_dca(problem, x0, acfg),
        "pdca": run_pdca(problem, x0, acfg, np.random.default_rng([cfg.seed, 1])),
    }
    cfg_echo = {"m": cfg.m, "n": cfg.n, "K": K, "lam": lam, "tau": tau,
                "sigma": sigma, "epsilon": cfg.epsilon, "seed": cfg.seed}
    rows = []
    code = EXIT_OK
    for name, rep in reports.items():
        rows.append((name, rep.iterations, rep.total_subproblems,
                     "" if rep.residual is None else rep.residual,
                     rep.zeta_final, rep.decision, rep.seconds, rep.note))
        code = max(code, _decision_exit(rep.decision))
        if "json" in cfg.formats:
            _write_run_json(out / f"ksparse_compare_{name}.json",
                            "ksparse-compare", cfg_echo, rep)
    if "csv" in cfg.formats:
        _write_csv(out / "ksparse_compare.csv",
                   ("method", "iterations", "subproblems", "residual", "zeta",
                    "decision", "seconds", "note"), rows)
    return reports, code


def cmd_kmedians(cfg):
    """Clustering baseline vs perturbed scheme on a CSV dataset."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tau = cfg.tau if cfg.tau is not None else 1e-6
    sigma = cfg.sigma if cfg.sigma is not None else 1.0
    ds = load_csv(cfg.dataset, label_column=cfg.label_column)
    K = cfg.k_values()[0]
    problem = KmediansProblem(ds.points, K=K)
    mu0 = kmedians_baseline(ds, K=K, replicates=cfg.replicates, seed=cfg.seed)
    x0 = problem.pack(mu0)
    zeta0 = objective(problem, x0)
    r0, r0_size = residual_certificate(problem, x0)
    if r0 < tau:
        # the baseline already certifies; the run terminates at iteration 0
        from .algorithms import RunReport

        rep = RunReport(
            algorithm="pdca", records=[], x_final=x0, zeta_initial=zeta0,
            zeta_final=zeta0, residual=r0, total_subproblems=0, iterations=0,
            decision="converged", seconds=0.0, schedule_conforming=True,
            residual_active_size=r0_size,
            note="baseline start already below tau",
        )
    else:
        acfg = cfg.algo_config(x0, tau, sigma)
        rep = run_pdca(problem, x0, acfg, np.random.default_rng([cfg.seed, 1]))
    cfg_echo = {"dataset": ds.name, "n": ds.n, "d": ds.d, "K": K, "tau": tau,
                "sigma": sigma, "replicates": cfg.replicates, "seed": cfg.seed}
    code = _decision_exit(rep.decision)
    if "json" in cfg.formats:
        _write_run_json(out / f"kmedians_{ds.name}.json", "kmedians", cfg_echo,
                        rep, extra={"zeta_baseline": zeta0,
                                    "residual_baseline": r0})
    if "csv" in cfg.formats:
        _write_csv(out / f"kmedians_{ds.name}.csv",
                   ("dataset", "n", "d", "K", "zeta_baseline", "zeta_final",
                    "residual_baseline", "residual_final", "iterations",
                    "subproblems", "decision", "seconds"),
                   [(ds.name, ds.n, ds.d, K, zeta0, rep.zeta_final, r0,
                     "" if rep.residual is None else rep.residual,
                     rep.iterations, rep.total_subproblems, rep.decision,
                     rep.seconds)])
    return {"baseline": (zeta0, r0), "pdca": rep}, code


# --- argument handling -------------------------------------------------------

def _read_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


_FIELD_TYPES = {
    "experiment": str, "m": int, "n": int, "k": str, "lam": str,
    "theta": float, "tau": float, "sigma": float, "epsilon": float,
    "alpha0": float, "schedule": str, "rho": float, "seed": int,
    "trials": int, "noise_std": float, "dataset": str, "label_column": str,
    "replicates": int, "max_iter": int, "out": str, "format": str,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="dcprog",
        description="experiment harness for the DC solvers",
    )
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="key = value file mirroring the flags")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", help="cluster count / sparsity level (comma list allowed)")
    p.add_argument("--lambda", dest="lam", help="penalty weight (comma list allowed)")
    p.add_argument("--theta", type=float, help="cap of the capped-l1 penalty")
    p.add_argument("--tau", type=float, help="residual tolerance")
    p.add_argument("--sigma", type=float, help="proximal weight")
    p.add_argument("--epsilon", type=float, help="activity slack of the multi-piece scheme")
    p.add_argument("--alpha0", type=float, help="initial perturbation radius")
    p.add_argument("--schedule", choices=("harmonic", "geometric"))
    p.add_argument("--rho", type=float, help="geometric decay factor")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, help="instances per configuration")
    p.add_argument("--noise-std", dest="noise_std", type=float)
    p.add_argument("--dataset", help="CSV file for clustering")
    p.add_argument("--label-column", dest="label_column",
                   help="0-based label column of the CSV; 'none' if unlabeled")
    p.add_argument("--replicates", type=int, help="baseline restarts")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--out", help="report directory")
    p.add_argument("--format", help="csv, json, or csv,json")
    return p


def parse_config(argv=None):
    args = vars(build_parser().parse_args(argv))
    file_vals = _read_config_file(args.pop("config")) if args.get("config") else {}
    args.pop("config", None)
    merged = {}
    for key, val in file_vals.items():
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        merged[key] = _FIELD_TYPES[key](val)
    for key, val in args.items():
        if val is not None:
            merged[key] = val
    fmt = merged.pop("format", None)
    kwargs = dict(merged)
    if fmt is not None:
        kwargs["formats"] = tuple(s.strip() for s in fmt.split(","))
    if "experiment" not in kwargs or kwargs["experiment"] is None:
        raise ValueError("--experiment is required")
    return ExperimentConfig(**kwargs)


def main(argv=None):
    try:
        cfg = parse_config(argv)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    runner = {
        "toy-compare": cmd_toy_compare,
        "ksparse": cmd_ksparse,
        "ksparse-compare": cmd_ksparse_compare,
        "kmedians": cmd_kmedians,
    }[cfg.experiment]
    try:
        _, code = runner(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{cfg.experiment}: reports written to {cfg.out} (exit {code})")
    return code


if __name__ == "__main__":
    sys.exit(main())
