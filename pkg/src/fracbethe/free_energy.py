"""Free energies of factorized and pairwise Gaussian approximations in moment form.

All functions work on a unit-diagonal (normalized) model and share one
additive-constant convention: every term is the exact Gaussian evaluation of
its defining integral.  The energy term uses the unnormalized density
exp(h'x - x'Jx/2), each node entropy carries its log(2*pi*e*sigma^2)/2, and
each pairwise term is the Gaussian mutual information -log(1 - rho^2)/2,
which carries no constant.  Under this convention the mean-field value, the
fractional values and the large-weight lower bound are directly comparable
numbers: mean_field >= fractional(alpha) >= mean_field - sum |R_ij| s_i s_j,
with the fractional family non-increasing in a uniform alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainBoundaryError
from .model import AlphaAssignment, NormalizedModel

EXACT_CONSTANT_CONVENTION = "exact-gaussian-integrals"

# Correlations this close to +-1 are treated as outside the evaluation domain.
RHO_SQ_LIMIT = 1.0 - 1e-14


@dataclass(frozen=True)
class Moments:
    """Variational parameters of the pairwise approximation.

    ``sigma_pair`` is aligned with the model's sorted edge list.
    """

    m: np.ndarray
    sigma: np.ndarray
    sigma_pair: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "sigma_pair", np.asarray(self.sigma_pair, dtype=float))


@dataclass(frozen=True)
class FreeEnergyValue:
    value: float
    constant_convention: str = EXACT_CONSTANT_CONVENTION

    def __float__(self) -> float:
        return self.value


def _edge_arrays(model: NormalizedModel):
    edges = model.edges
    if not edges:
        empty = np.zeros(0)
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int), empty
    ei = np.fromiter((e[0] for e in edges), dtype=int, count=len(edges))
    ej = np.fromiter((e[1] for e in edges), dtype=int, count=len(edges))
    r = model.R[ei, ej]
    return ei, ej, r


def _check_sigma(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0.0):
        raise ValueError("standard deviations must be strictly positive")
    return sigma


def _mean_field_value(model: NormalizedModel, m: np.ndarray, sigma: np.ndarray) -> float:
    quad = 0.5 * float(m @ model.J @ m) - float(model.h @ m)
    const = -0.5 * model.n * math.log(2.0 * math.pi * math.e)
    return quad + 0.5 * float(sigma @ sigma) - float(np.sum(np.log(sigma))) + const


def f_mean_field(model: NormalizedModel, m: np.ndarray, sigma: np.ndarray) -> FreeEnergyValue:
    """Free energy of the fully factorized approximation; minimal at m = J^-1 h, sigma = 1."""
    sigma = _check_sigma(sigma)
    m = np.asarray(m, dtype=float)
    return FreeEnergyValue(_mean_field_value(model, m, sigma))


def sigma_star(alpha: float, R_ij: float, sigma_i: float, sigma_j: float) -> float:
    """Stationary pairwise covariance of the fractional edge term.

    Root of  alpha*R*c^2 - c - alpha*R*(s_i*s_j)^2 = 0  lying strictly inside
    (-s_i*s_j, s_i*s_j).  Written in rationalized form, which is free of
    cancellation for small couplings and returns exactly 0 at R_ij = 0.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be strictly positive")
    x = 2.0 * alpha * R_ij * sigma_i * sigma_j
    root = math.sqrt(1.0 + x * x)
    return -2.0 * alpha * R_ij * (sigma_i * sigma_j) ** 2 / (1.0 + root)


def _sigma_star_array(alpha: np.ndarray, r: np.ndarray, si: np.ndarray, sj: np.ndarray) -> np.ndarray:
    x = 2.0 * alpha * r * si * sj
    root = np.sqrt(1.0 + x * x)
    return -2.0 * alpha * r * (si * sj) ** 2 / (1.0 + root)


def f_fractional(model: NormalizedModel, alphas: AlphaAssignment, moments: Moments) -> FreeEnergyValue:
    """Fractional pairwise free energy at explicit pair covariances.

    With all pair covariances zero this reduces exactly (same floats) to the
    mean-field value; with all edge weights 1 it is the Bethe free energy.
    """
    alphas.require_edges(model.edges)
    sigma = _check_sigma(moments.sigma)
    m = np.asarray(moments.m, dtype=float)
    ei, ej, r = _edge_arrays(model)
    sij = np.asarray(moments.sigma_pair, dtype=float).reshape(len(model.edges))
    rho_sq = sij**2 / (sigma[ei] ** 2 * sigma[ej] ** 2)
    if np.any(rho_sq >= RHO_SQ_LIMIT):
        raise DomainBoundaryError("pair correlation at or beyond the unit boundary")
    value = _mean_field_value(model, m, sigma)
    value += float(np.sum(r * sij))
    value -= 0.5 * float(np.sum(np.log1p(-rho_sq) / alphas.values))
    return FreeEnergyValue(value)


def _constrained_edge_terms(alpha: np.ndarray, r: np.ndarray, si: np.ndarray, sj: np.ndarray):
    """Per-edge value of the profiled edge term and the stable sqrt(1+x^2)-1.

    x = 2*alpha*R*s_i*s_j; the term is (log((1+s)/2) - (s-1)) / (2*alpha)
    with s = sqrt(1+x^2).  Always <= 0, decreasing in alpha.
    """
    x_sq = (2.0 * alpha * r * si * sj) ** 2
    sm1 = x_sq / (1.0 + np.sqrt(1.0 + x_sq))
    term = (np.log1p(0.5 * sm1) - sm1) / (2.0 * alpha)
    return term, sm1


def constrained_value(
    model: NormalizedModel, alphas: AlphaAssignment, m: np.ndarray, sigma: np.ndarray
) -> float:
    """Plain-float fast path for the profiled free energy (optimizer inner loop)."""
    value = _mean_field_value(model, m, sigma)
    ei, ej, _ = _edge_arrays(model)
    if len(ei):
        r = model.R[ei, ej]
        term, _ = _constrained_edge_terms(alphas.values, r, sigma[ei], sigma[ej])
        value += float(np.sum(term))
    return value


def f_constrained(
    model: NormalizedModel, alphas: AlphaAssignment, m: np.ndarray, sigma: np.ndarray
) -> FreeEnergyValue:
    """Fractional free energy with each pair covariance profiled out at its optimum.

    Numerically equals ``f_fractional`` evaluated at the stationary pair
    covariances for the given node standard deviations.
    """
    alphas.require_edges(model.edges)
    sigma = _check_sigma(sigma)
    m = np.asarray(m, dtype=float)
    return FreeEnergyValue(constrained_value(model, alphas, m, sigma))


def f_lower_bound(model: NormalizedModel, m: np.ndarray, sigma: np.ndarray) -> FreeEnergyValue:
    """Large-weight limit of the profiled family: mean field minus sigma'|R|sigma/2."""
    sigma = _check_sigma(sigma)
    m = np.asarray(m, dtype=float)
    value = _mean_field_value(model, m, sigma)
    ei, ej, r = _edge_arrays(model)
    if len(ei):
        value -= float(np.sum(np.abs(r) * sigma[ei] * sigma[ej]))
    return FreeEnergyValue(value)


def gradient_constrained(
    model: NormalizedModel, alphas: AlphaAssignment, m: np.ndarray, sigma: np.ndarray
):
    """Exact partials of the profiled free energy in (m, sigma).

    The pair optimum makes the profiled sigma-derivative equal the partial of
    the unprofiled energy at fixed pair covariance; per edge end it collapses
    to -(sqrt(1+x^2)-1) / (2*alpha*sigma).
    """
    alphas.require_edges(model.edges)
    sigma = _check_sigma(sigma)
    m = np.asarray(m, dtype=float)
    grad_m = model.J @ m - model.h
    grad_sigma = sigma - 1.0 / sigma
    ei, ej, r = _edge_arrays(model)
    if len(ei):
        _, sm1 = _constrained_edge_terms(alphas.values, r, sigma[ei], sigma[ej])
        contrib = sm1 / (2.0 * alphas.values)
        np.subtract.at(grad_sigma, ei, contrib / sigma[ei])
        np.subtract.at(grad_sigma, ej, contrib / sigma[ej])
    return grad_m, grad_sigma


def hessian_constrained_sigma(
    model: NormalizedModel, alphas: AlphaAssignment, sigma: np.ndarray
) -> np.ndarray:
    """Analytic Hessian of the profiled free energy in sigma (m block is just J)."""
    alphas.require_edges(model.edges)
    sigma = _check_sigma(sigma)
    n = model.n
    H = np.zeros((n, n))
    diag = 1.0 + 1.0 / sigma**2
    ei, ej, r = _edge_arrays(model)
    if len(ei):
        a = alphas.values
        p = sigma[ei] * sigma[ej]
        x_sq = (2.0 * a * r * p) ** 2
        s = np.sqrt(1.0 + x_sq)
        sm1 = x_sq / (1.0 + s)
        off = -2.0 * a * r**2 * p / s
        H[ei, ej] = off
        H[ej, ei] = off
        np.subtract.at(diag, ei, sm1 / (2.0 * a * s * sigma[ei] ** 2))
        np.subtract.at(diag, ej, sm1 / (2.0 * a * s * sigma[ej] ** 2))
    H[np.diag_indices(n)] = diag
    return H


def ray_scan(
    model: NormalizedModel,
    alphas: AlphaAssignment,
    direction: np.ndarray,
    t_grid: np.ndarray,
) -> list[tuple[float, float]]:
    """Profiled free-energy values along sigma = t * direction, mean held at J^-1 h."""
    direction = np.asarray(direction, dtype=float)
    if np.any(direction <= 0.0):
        raise ValueError("scan direction must be entrywise positive")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0.0):
        raise ValueError("scan grid must be positive")
    m = np.linalg.solve(model.J, model.h)
    return [(float(t), constrained_value(model, alphas, m, t * direction)) for t in t_grid]
