"""Dense exact inference, used as ground truth for every approximation error metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidModelError
from .model import GaussianModel, NormalizedModel


@dataclass(frozen=True)
class ExactMarginals:
    m: np.ndarray
    sigma: np.ndarray
    cov: np.ndarray


def exact_marginals(model: GaussianModel | NormalizedModel) -> ExactMarginals:
    """Exact marginal means, standard deviations and the full covariance J^-1."""
    if isinstance(model, NormalizedModel):
        model = model.base
    J, h = model.J, model.h
    try:
        np.linalg.cholesky(J)
    except np.linalg.LinAlgError as exc:
        raise InvalidModelError("information matrix is not positive definite") from exc
    cov = np.linalg.solve(J, np.eye(model.n))
    cov = 0.5 * (cov + cov.T)
    m = np.linalg.solve(J, h)
    sigma = np.sqrt(np.diag(cov))
    return ExactMarginals(m, sigma, cov)


def sigma_error(approx_sigma: np.ndarray, exact: ExactMarginals) -> float:
    """Euclidean norm of the per-node standard-deviation error."""
    approx_sigma = np.asarray(approx_sigma, dtype=float)
    if approx_sigma.shape != exact.sigma.shape:
        raise ValueError(
            f"length mismatch: {approx_sigma.shape} vs {exact.sigma.shape}"
        )
    return float(np.linalg.norm(approx_sigma - exact.sigma))


def log_partition(model: GaussianModel | NormalizedModel) -> float:
    """log of the normalizer of exp(h'x - x'Jx/2)."""
    if isinstance(model, NormalizedModel):
        model = model.base
    sign, logdet = np.linalg.slogdet(model.J)
    if sign <= 0:
        raise InvalidModelError("information matrix is not positive definite")
    m = np.linalg.solve(model.J, model.h)
    return 0.5 * float(model.h @ m) + 0.5 * model.n * np.log(2.0 * np.pi) - 0.5 * logdet
