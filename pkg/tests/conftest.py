"""Shared fixtures and independent oracles for the test suite."""

import itertools
from pathlib import Path

import numpy as np
import pytest

REPO = Path(__file__).resolve().parents[1]
DATA_DIR = REPO / "data"


@pytest.fixture(scope="session")
def iris_path():
    return DATA_DIR / "iris.csv"


@pytest.fixture(scope="session")
def wine_path():
    return DATA_DIR / "wine.csv"


def fd_grad(f, x, h=1e-6):
    """Central-difference gradient of a scalar function of a flat vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def pwq_oracle(b, sigma, c, lo=None, hi=None, coarse=100_001):
    """Independent minimizer of mean|x - b_i| + (sigma/2)x^2 - cx.

    A coarse vectorized value grid brackets the minimizer (the function is
    convex, so the grid argmin's neighbors enclose it); bisection on the
    sign of the derivative  mean(sgn(x - b_i)) + sigma*x - c  then refines
    the bracket to machine precision, kinks included.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    # the minimizer can sit far outside the data range when sigma is small:
    # the exterior stationary points are (c -+ 1)/sigma
    ext = [(c - 1.0) / sigma, (c + 1.0) / sigma]
    lo = min(b.min(), *ext) - 5.0 if lo is None else lo
    hi = max(b.max(), *ext) + 5.0 if hi is None else hi
    xs = np.linspace(lo, hi, coarse)
    vals = np.abs(xs[:, None] - b[None, :]).mean(axis=1) + 0.5 * sigma * xs**2 - c * xs
    i = int(np.argmin(vals))
    a, z = xs[max(i - 1, 0)], xs[min(i + 1, coarse - 1)]

    def fprime(x):
        return float(np.mean(np.sign(x - b))) + sigma * x - c

    for _ in range(200):
        mid = 0.5 * (a + z)
        if mid == a or mid == z:
            break
        if fprime(mid) < 0:
            a = mid
        else:
            z = mid
    candidates = np.array([a, z, 0.5 * (a + z)])
    cvals = np.abs(candidates[:, None] - b[None, :]).mean(axis=1) \
        + 0.5 * sigma * candidates**2 - c * candidates
    return float(candidates[int(np.argmin(cvals))])


def brute_force_topk_pieces(x, K, slack=0.0):
    """All (index, sign) pieces within `slack` of the top-K value, by full
    enumeration; exponential, for n <= 8 only."""
    x = np.asarray(x, dtype=float)
    n = x.size
    best = -np.inf
    pieces = {}
    for idx in itertools.combinations(range(n), K):
        for signs in itertools.product((1, -1), repeat=K):
            val = sum(s * x[i] for i, s in zip(idx, signs))
            pieces[tuple(sorted(zip(idx, signs)))] = val
            best = max(best, val)
    return sorted(p for p, v in pieces.items() if v >= best - slack)


def random_quadl1(rng, m=None, n=None):
    """Random strongly convex quadratic-plus-l1 subproblem."""
    from dcprog.subsolvers import QuadL1Subproblem

    m = m if m is not None else int(rng.integers(5, 60))
    n = n if n is not None else int(rng.integers(5, 60))
    return QuadL1Subproblem(
        A=rng.standard_normal((m, n)),
        c=rng.standard_normal(n),
        x_tilde=rng.standard_normal(n),
        sigma=float(rng.uniform(0.5, 2.0)),
        lam=float(rng.uniform(0.05, 1.0)),
    )
