"""Gaussian Markov random field instances: validation, normalization, generators, file I/O.

A model is the canonical parameterization p(x) ~ exp(h'x - x'Jx/2) with J
symmetric positive definite.  Most of the package works on the normalized
form J = I + R with zero-diagonal coupling matrix R.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, InvalidModelError

Edge = tuple[int, int]


def _edges_from_matrix(J: np.ndarray) -> tuple[Edge, ...]:
    n = J.shape[0]
    return tuple(
        (i, j) for i in range(n) for j in range(i + 1, n) if J[i, j] != 0.0
    )


@dataclass(frozen=True)
class GaussianModel:
    """Canonical parameters (h, J) plus the off-diagonal sparsity pattern."""

    n: int
    h: np.ndarray
    J: np.ndarray
    edges: tuple[Edge, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float).reshape(self.n)
        J = np.asarray(self.J, dtype=float).reshape(self.n, self.n)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        if self.edges is None:
            object.__setattr__(self, "edges", _edges_from_matrix(J))
        else:
            object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(frozen=True)
class NormalizedModel:
    """Unit-diagonal model J = I + R together with the diagonal scale that produced it.

    ``scale[k]`` is sqrt of the original J_kk; marginal moments of the
    normalized model map back to the original one via m_k -> m_k / scale[k],
    sigma_k -> sigma_k / scale[k].
    """

    base: GaussianModel
    R: np.ndarray
    scale: np.ndarray

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def h(self) -> np.ndarray:
        return self.base.h

    @property
    def J(self) -> np.ndarray:
        return self.base.J

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.base.edges

    def denormalize(self) -> GaussianModel:
        """Reconstruct the original model from the stored scale."""
        d = self.scale
        J = self.base.J * np.outer(d, d)
        h = self.base.h * d
        return GaussianModel(self.n, h, J, self.base.edges)

    def moments_to_original(self, m: np.ndarray, sigma: np.ndarray):
        """Map marginal means/standard deviations back to the original coordinates."""
        return m / self.scale, sigma / self.scale


@dataclass(frozen=True)
class AlphaAssignment:
    """Positive per-edge weights for the fractional pair-entropy terms."""

    edges: tuple[Edge, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        values = np.asarray(self.values, dtype=float).reshape(len(self.edges))
        if np.any(values <= 0.0):
            raise ValueError("edge weights must be strictly positive")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, model: GaussianModel | NormalizedModel, alpha: float) -> "AlphaAssignment":
        if alpha <= 0.0:
            raise ValueError("alpha must be strictly positive")
        edges = model.edges
        return cls(edges, np.full(len(edges), float(alpha)))

    def require_edges(self, edges: tuple[Edge, ...]) -> None:
        if self.edges != tuple(edges):
            raise ValueError("alpha assignment does not cover the model's edge set")


@dataclass(frozen=True)
class ValidationReport:
    symmetric: bool
    symmetry_defect: float
    positive_definite: bool
    edges_consistent: bool

    @property
    def ok(self) -> bool:
        return self.symmetric and self.positive_definite and self.edges_consistent

    def as_dict(self) -> dict:
        return {
            "symmetric": self.symmetric,
            "symmetry_defect": self.symmetry_defect,
            "positive_definite": self.positive_definite,
            "edges_consistent": self.edges_consistent,
            "ok": self.ok,
        }


def is_positive_definite(J: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(J)
        return True
    except np.linalg.LinAlgError:
        return False


def validate(model: GaussianModel) -> ValidationReport:
    """Report symmetry, positive definiteness and edge-set consistency."""
    J = model.J
    defect = float(np.max(np.abs(J - J.T))) if model.n > 0 else 0.0
    symmetric = defect == 0.0
    pd = symmetric and is_positive_definite(J)
    edges_consistent = model.edges == _edges_from_matrix(J)
    return ValidationReport(symmetric, defect, pd, edges_consistent)


def normalize(model: GaussianModel) -> NormalizedModel:
    """Rescale to unit diagonal: J' = D^-1/2 J D^-1/2, h' = D^-1/2 h, D = diag(J)."""
    diag = np.diag(model.J).copy()
    if np.any(diag <= 0.0):
        raise InvalidModelError("information matrix has a non-positive diagonal entry")
    d = np.sqrt(diag)
    inv = 1.0 / d
    J = model.J * np.outer(inv, inv)
    np.fill_diagonal(J, 1.0)  # kill round-off on the diagonal
    h = model.h * inv
    base = GaussianModel(model.n, h, J, model.edges)
    R = J - np.eye(model.n)
    return NormalizedModel(base, R, d)


def connected_components(n: int, edges: tuple[Edge, ...]) -> list[list[int]]:
    """Connected components of the edge graph, each sorted, in index order."""
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _circulant_jumps(n: int, K: int) -> list[int]:
    if K < 0 or K >= n:
        raise ValueError(f"degree K={K} infeasible on {n} nodes")
    if (n * K) % 2 != 0:
        raise ValueError(f"no {K}-regular graph on {n} nodes (nK odd)")
    if K % 2 == 0:
        return list(range(1, K // 2 + 1))
    if n % 2 != 0:
        raise ValueError(f"odd degree K={K} needs an even node count, got n={n}")
    return list(range(1, (K - 1) // 2 + 1)) + [n // 2]


def make_k_regular(n: int, K: int, r: float, h: np.ndarray | None = None) -> GaussianModel:
    """Unit-diagonal model on the circulant K-regular graph with equal couplings r.

    Node i connects to i +- 1 ... i +- K/2 (mod n); odd K adds the antipodal
    jump n/2 and therefore needs even n.  Row sums of |R| all equal K*|r|.
    """
    jumps = _circulant_jumps(n, K)
    J = np.eye(n)
    for i in range(n):
        for jump in jumps:
            j = (i + jump) % n
            J[i, j] = r
            J[j, i] = r
    hv = np.zeros(n) if h is None else np.asarray(h, dtype=float).reshape(n)
    return GaussianModel(n, hv, J)


def r_valid(n: int, K: int) -> float:
    """Supremum of couplings r for which I + r*A stays positive definite."""
    adjacency = make_k_regular(n, K, 1.0).J - np.eye(n)
    if K == 0:
        return float("inf")
    lam_min = float(np.linalg.eigvalsh(adjacency)[0])
    return -1.0 / lam_min


def random_model(
    n: int,
    density: float,
    target_lambda: float,
    seed: int,
    max_retries: int = 200,
) -> GaussianModel:
    """Random connected unit-diagonal model with lambda_max(|R|) placed exactly.

    Draws a symmetric sparsity pattern at the given edge density with signed
    weights, then rescales the couplings so the largest eigenvalue of the
    entrywise-absolute coupling matrix equals ``target_lambda``.  Redraws when
    I + R fails positive definiteness or the graph is disconnected.
    """
    if target_lambda <= 0.0:
        raise ValueError("target_lambda must be strictly positive")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        R = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < density:
                    w = rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
                    R[i, j] = R[j, i] = w
        absR = np.abs(R)
        lam = float(np.linalg.eigvalsh(absR)[-1])
        if lam <= 0.0:
            continue
        R *= target_lambda / lam
        J = np.eye(n) + R
        h = rng.normal(size=n)
        model = GaussianModel(n, h, J)
        if not is_positive_definite(J):
            continue
        if len(connected_components(n, model.edges)) != 1:
            continue
        return model
    raise GenerationError(
        f"could not draw a valid model in {max_retries} tries "
        f"(n={n}, density={density}, target={target_lambda}, seed={seed})"
    )


def save_model(model: GaussianModel, path: str, sparse: bool = False) -> None:
    """Write a model as JSON; sparse form stores the strict upper triangle only.

    The sparse form implies a unit diagonal, so it is rejected for models that
    have not been normalized.
    """
    if sparse:
        if not np.allclose(np.diag(model.J), 1.0, rtol=0.0, atol=0.0):
            raise ValueError("sparse model files assume a unit diagonal; normalize first")
        ii, jj, vv = [], [], []
        for i, j in model.edges:  # already sorted with i < j
            ii.append(i)
            jj.append(j)
            vv.append(model.J[i, j])
        payload = {"n": model.n, "h": model.h.tolist(), "J": {"i": ii, "j": jj, "v": vv}}
    else:
        payload = {"n": model.n, "h": model.h.tolist(), "J": model.J.tolist()}
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path: str) -> GaussianModel:
    """Read a model from JSON (dense row-major J, or sparse upper-triangle form)."""
    with open(path) as fh:
        payload = json.load(fh)
    try:
        n = int(payload["n"])
        h = np.asarray(payload["h"], dtype=float)
        raw = payload["J"]
    except (KeyError, TypeError) as exc:
        raise InvalidModelError(f"{path}: missing model field ({exc})") from exc
    if h.shape != (n,):
        raise InvalidModelError(f"{path}: h has length {h.size}, expected {n}")
    if isinstance(raw, dict):
        J = np.eye(n)
        for i, j, v in zip(raw["i"], raw["j"], raw["v"]):
            i, j = int(i), int(j)
            if i == j:
                J[i, i] = float(v)
                continue
            if i > j:
                i, j = j, i
            J[i, j] = J[j, i] = float(v)
    else:
        J = np.asarray(raw, dtype=float)
        if J.shape != (n, n):
            raise InvalidModelError(f"{path}: J has shape {J.shape}, expected ({n}, {n})")
    return GaussianModel(n, h, J)
