"""Spectral analysis of the absolute coupling matrix and boundedness classification.

The profiled free energies are bounded below exactly when the dominant
eigenvalue of |R| is below 1; above 1 they are unbounded for every edge
weight; on the boundary the verdict is decided by the sign of
sum_edges 1/alpha_ij - n.  The dominant pair is computed by shifted power
iteration, which is guaranteed to converge on nonnegative matrices and
returns an entrywise-positive eigenvector on connected models.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import SpectralConvergenceError
from .model import AlphaAssignment, NormalizedModel, connected_components


@dataclass(frozen=True)
class ComponentSpectral:
    nodes: tuple[int, ...]
    lambda_max: float
    u: np.ndarray


@dataclass(frozen=True)
class SpectralResult:
    lambda_max: float
    u_max: np.ndarray
    iterations: int
    residual: float
    connected: bool
    components: tuple[ComponentSpectral, ...]


class Boundedness(enum.Enum):
    BOUNDED = "Bounded"
    UNBOUNDED = "Unbounded"
    BOUNDARY_BOUNDED = "BoundaryBounded"
    BOUNDARY_UNBOUNDED = "BoundaryUnbounded"


@dataclass(frozen=True)
class BoundednessVerdict:
    verdict: Boundedness
    lambda_max: float
    boundary_margin: float
    pairwise_normalizable: bool


def _power_iteration(M: np.ndarray, tol: float, cap: int):
    """Dominant eigenpair of a nonnegative symmetric matrix.

    Iterates on M + shift*I so the dominant eigenvalue is strictly largest in
    magnitude even when the plain spectrum is symmetric (bipartite supports).
    A positive start keeps the iterate entrywise positive throughout.
    """
    k = M.shape[0]
    if k == 1 or not M.any():
        return 0.0, np.full(k, 1.0 / math.sqrt(k)), 0, 0.0
    shift = max(1.0, float(M.sum(axis=1).max()))
    shifted = M + shift * np.eye(k)
    v = np.full(k, 1.0 / math.sqrt(k))
    residual = math.inf
    it = 0
    # batch matvecs between residual checks; growth per batch is bounded by
    # (2 * shift)^batch, far inside float range for desk-scale row sums
    batch = 16
    while it < cap:
        for _ in range(min(batch, cap - it)):
            v = shifted @ v
            it += 1
        v = v / np.linalg.norm(v)
        Mv = M @ v
        lam = float(v @ Mv)
        residual = float(np.linalg.norm(Mv - lam * v))
        if residual <= tol:
            return lam, v, it, residual
    raise SpectralConvergenceError(
        f"power iteration did not reach residual {tol} in {cap} iterations", residual
    )


def spectral(
    model: NormalizedModel, tol: float = 1e-12, max_iterations: int = 100_000
) -> SpectralResult:
    """Dominant eigenpair of |R|, computed per connected component.

    On a disconnected model the reported eigenvector is the winning
    component's, embedded with zeros elsewhere, and ``connected`` is False.
    """
    absR = np.abs(model.R)
    comps = connected_components(model.n, model.edges)
    results = []
    iterations = 0
    for nodes in comps:
        idx = np.asarray(nodes, dtype=int)
        lam, u, its, res = _power_iteration(absR[np.ix_(idx, idx)], tol, max_iterations)
        iterations += its
        results.append((ComponentSpectral(tuple(nodes), lam, u), res))
    best, best_res = max(results, key=lambda pair: pair[0].lambda_max)
    u_global = np.zeros(model.n)
    u_global[np.asarray(best.nodes, dtype=int)] = best.u
    return SpectralResult(
        lambda_max=best.lambda_max,
        u_max=u_global,
        iterations=iterations,
        residual=best_res,
        connected=len(comps) == 1,
        components=tuple(r for r, _ in results),
    )


def boundary_margin(model: NormalizedModel, alphas: AlphaAssignment) -> float:
    """Half the degree-weighted sum of inverse edge weights minus the node count.

    Each undirected edge is seen from both endpoints, so the half-sum counts
    every edge once: uniform weights give E/alpha - n.
    """
    alphas.require_edges(model.edges)
    return float(np.sum(1.0 / alphas.values)) - model.n


# Verdict severity used when a disconnected model mixes classes per component.
_WORST_ORDER = [
    Boundedness.BOUNDED,
    Boundedness.BOUNDARY_BOUNDED,
    Boundedness.BOUNDARY_UNBOUNDED,
    Boundedness.UNBOUNDED,
]


def classify(
    model: NormalizedModel, alphas: AlphaAssignment, epsilon: float = 1e-9
) -> BoundednessVerdict:
    """Boundedness class from the dominant eigenvalue, per connected component.

    A tolerance band of ``epsilon`` around 1 selects the boundary branch,
    where the verdict flips on the sign of the inverse-weight margin.
    """
    alphas.require_edges(model.edges)
    spec = spectral(model)
    inv_alpha = {e: 1.0 / a for e, a in zip(model.edges, alphas.values)}
    verdicts = []
    for comp in spec.components:
        members = set(comp.nodes)
        if comp.lambda_max < 1.0 - epsilon:
            verdicts.append(Boundedness.BOUNDED)
        elif comp.lambda_max > 1.0 + epsilon:
            verdicts.append(Boundedness.UNBOUNDED)
        else:
            margin = sum(v for e, v in inv_alpha.items() if e[0] in members) - len(members)
            verdicts.append(
                Boundedness.BOUNDARY_BOUNDED if margin >= 0.0 else Boundedness.BOUNDARY_UNBOUNDED
            )
    worst = max(verdicts, key=_WORST_ORDER.index)
    return BoundednessVerdict(
        verdict=worst,
        lambda_max=spec.lambda_max,
        boundary_margin=boundary_margin(model, alphas),
        pairwise_normalizable=spec.lambda_max < 1.0 - epsilon,
    )


def critical_r(K: int, alpha: float) -> float:
    """Coupling below which the symmetric ray keeps a local minimum (K-regular, Kr > 1)."""
    if not 0.0 < alpha < K:
        raise ValueError(f"alpha must lie in (0, {K}) for degree {K}")
    return 1.0 / (2.0 * math.sqrt(alpha * (K - alpha)))


def critical_alpha(K: int, r: float) -> float:
    """Edge weight below which the symmetric ray keeps a local minimum (K-regular, Kr >= 1)."""
    if K * r < 1.0:
        raise ValueError("critical alpha is defined for K*r >= 1")
    return 0.5 * K * (1.0 - math.sqrt(1.0 - 1.0 / (K * r) ** 2))


def detect_k_regular(model: NormalizedModel) -> tuple[int, float] | None:
    """Return (K, r) when every node has degree K >= 1 and all couplings equal r."""
    degrees = model.base.degrees
    if model.n == 0 or not model.edges:
        return None
    K = int(degrees[0])
    if K < 1 or np.any(degrees != K):
        return None
    ei = [e[0] for e in model.edges]
    ej = [e[1] for e in model.edges]
    weights = model.R[ei, ej]
    r = float(weights[0])
    if np.max(np.abs(weights - r)) > 1e-12 * max(1.0, abs(r)):
        return None
    return K, r


def diagnostics_report(
    model: NormalizedModel, alphas: AlphaAssignment, epsilon: float = 1e-9
) -> dict:
    """JSON-ready diagnostics: spectrum, verdict, and critical parameters when K-regular."""
    spec = spectral(model)
    verdict = classify(model, alphas, epsilon)
    report = {
        "lambda_max": spec.lambda_max,
        "u_max": spec.u_max.tolist(),
        "verdict": verdict.verdict.value,
        "boundary_margin": verdict.boundary_margin,
        "pairwise_normalizable": verdict.pairwise_normalizable,
    }
    kreg = detect_k_regular(model)
    if kreg is not None:
        K, r = kreg
        uniform = np.all(alphas.values == alphas.values[0])
        if uniform and 0.0 < alphas.values[0] < K:
            report["critical_r"] = critical_r(K, float(alphas.values[0]))
        if K * r >= 1.0:
            report["critical_alpha"] = critical_alpha(K, r)
    return report
