"""Shared generators and small independent numeric utilities for the tests."""

import math

import numpy as np
import pytest

from fracbethe import GaussianModel, normalize


def random_connected_model(rng, n, lam_target=None, density=0.6):
    """Random symmetric unit-diagonal model with |R|'s top eigenvalue placed.

    Defaults to a random placement in [0.3, 1.3] (mixing bounded and
    unbounded instances); redraws until connected and positive definite.
    Independent of the package's random_model.
    """
    while True:
        target = lam_target if lam_target is not None else rng.uniform(0.3, 1.3)
        R = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < density:
                    R[i, j] = R[j, i] = rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0])
        absR = np.abs(R)
        lam = np.linalg.eigvalsh(absR)[-1]
        if lam <= 0.0:
            continue
        R *= target / lam
        J = np.eye(n) + R
        if np.linalg.eigvalsh(J)[0] <= 1e-10:
            continue
        if not _connected(R):
            continue
        return GaussianModel(n, rng.normal(size=n), J)


def random_tree_model(rng, n, lam_target=0.8):
    """Random spanning-tree model with |R| eigenvalue placed at lam_target."""
    R = np.zeros((n, n))
    for child in range(1, n):
        parent = int(rng.integers(0, child))
        w = rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
        R[child, parent] = R[parent, child] = w
    lam = np.linalg.eigvalsh(np.abs(R))[-1]
    R *= lam_target / lam
    return GaussianModel(n, rng.normal(size=n), np.eye(n) + R)


def _connected(R):
    n = R.shape[0]
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in range(n):
            if R[v, w] != 0.0 and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def golden_minimize(fn, lo, hi, tol):
    """Golden-section minimization of a unimodal function on [lo, hi].

    Test-side oracle: kept deliberately independent of the package.
    """
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def kreg_figure_model():
    """The 8-node 4-regular model with coupling 0.27 used throughout."""
    from fracbethe import make_k_regular

    return normalize(make_k_regular(8, 4, 0.27))
