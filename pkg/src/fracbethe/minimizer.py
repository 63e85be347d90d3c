"""Direct minimization of the profiled free energy over node standard deviations.

The mean block is quadratic with a closed-form minimizer, so only sigma is
optimized: a damped Newton method in log coordinates (sigma = exp(s)), which
makes positivity free and turns the sigma -> 0 barrier into a plain slope.
Unbounded instances reveal themselves by the objective falling through a
configurable floor; that is reported as divergence rather than raised.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exact import exact_marginals
from .free_energy import (
    FreeEnergyValue,
    Moments,
    _sigma_star_array,
    constrained_value,
    gradient_constrained,
    hessian_constrained_sigma,
)
from .model import AlphaAssignment, NormalizedModel
from .diagnostics import SpectralResult

# log-sigma beyond this is treated as +inf objective; it keeps all edge-term
# intermediates finite, and the divergence floor triggers long before any
# iterate could legitimately get here.
_LOG_SIGMA_CAP = 150.0


class MinimizeStatus(enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    ITERATION_CAP = "IterationCap"
    DOMAIN_ESCAPE = "DomainEscape"  # unreachable in log coordinates; kept for API parity


@dataclass(frozen=True)
class NewtonOptions:
    tolerance: float = 1e-9
    max_iterations: int = 500
    value_floor: float = -1e12
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    trace: bool = False


@dataclass(frozen=True)
class MinimizeResult:
    status: MinimizeStatus
    moments: Moments
    value: FreeEnergyValue
    iterations: int
    grad_norm: float
    trace: tuple[tuple[int, float, float], ...] | None = None


def _fill_pair_moments(model: NormalizedModel, alphas: AlphaAssignment, m, sigma) -> Moments:
    edges = model.edges
    if edges:
        ei = np.asarray([e[0] for e in edges])
        ej = np.asarray([e[1] for e in edges])
        pair = _sigma_star_array(alphas.values, model.R[ei, ej], sigma[ei], sigma[ej])
    else:
        pair = np.zeros(0)
    return Moments(m, sigma, pair)


def newton_minimize(
    model: NormalizedModel,
    alphas: AlphaAssignment,
    init_sigma: np.ndarray,
    opts: NewtonOptions | None = None,
) -> MinimizeResult:
    """Damped Newton descent on the profiled free energy, mean set analytically.

    Converges when the log-coordinate gradient drops below ``opts.tolerance``
    in max norm; reports divergence when the value falls below
    ``opts.value_floor``, the signature of an unbounded descent ray.
    """
    opts = opts or NewtonOptions()
    alphas.require_edges(model.edges)
    init_sigma = np.asarray(init_sigma, dtype=float)
    if np.any(init_sigma <= 0.0):
        raise ValueError("initial standard deviations must be strictly positive")
    if opts.max_iterations < 1 or not 0.0 < opts.shrink < 1.0:
        raise ValueError("invalid options")

    m = np.linalg.solve(model.J, model.h)

    def objective(s: np.ndarray) -> float:
        if np.max(s) > _LOG_SIGMA_CAP:
            return math.inf
        with np.errstate(all="ignore"):
            return constrained_value(model, alphas, m, np.exp(s))

    s = np.log(init_sigma)
    value = objective(s)
    trace: list[tuple[int, float, float]] = []
    status = MinimizeStatus.ITERATION_CAP
    grad_norm = math.inf
    iterations = 0

    for iterations in range(1, opts.max_iterations + 1):
        sigma = np.exp(s)
        _, grad_sigma = gradient_constrained(model, alphas, m, sigma)
        grad_s = sigma * grad_sigma
        grad_norm = float(np.max(np.abs(grad_s)))
        if opts.trace:
            trace.append((iterations, value, grad_norm))
        if grad_norm <= opts.tolerance:
            status = MinimizeStatus.CONVERGED
            break
        if value <= opts.value_floor:
            status = MinimizeStatus.DIVERGED
            break

        H_sigma = hessian_constrained_sigma(model, alphas, sigma)
        # chain rule to log coordinates
        H = H_sigma * np.outer(sigma, sigma)
        H[np.diag_indices(model.n)] += grad_s
        step_dir = _solve_descent(H, grad_s)

        accepted = False
        step = 1.0
        slope = float(grad_s @ step_dir)
        for _ in range(opts.max_backtracks):
            candidate = s + step * step_dir
            cand_value = objective(candidate)
            if math.isfinite(cand_value) and cand_value <= value + opts.armijo * step * slope:
                s = candidate
                value = cand_value
                accepted = True
                break
            step *= opts.shrink
        if not accepted:
            # stalled line search: no further progress possible at this scale
            status = MinimizeStatus.ITERATION_CAP
            break

    sigma = np.exp(s)
    moments = _fill_pair_moments(model, alphas, m, sigma)
    return MinimizeResult(
        status=status,
        moments=moments,
        value=FreeEnergyValue(value),
        iterations=iterations,
        grad_norm=grad_norm,
        trace=tuple(trace) if opts.trace else None,
    )


def _solve_descent(H: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Newton direction with Levenberg regularization when H is not positive definite."""
    scale = max(1.0, float(np.max(np.abs(np.diag(H)))))
    mu = 0.0
    for _ in range(40):
        try:
            np.linalg.cholesky(H + mu * np.eye(H.shape[0]))
        except np.linalg.LinAlgError:
            mu = 1e-10 * scale if mu == 0.0 else mu * 10.0
            continue
        direction = -np.linalg.solve(H + mu * np.eye(H.shape[0]), grad)
        if float(grad @ direction) < 0.0:
            return direction
        mu = 1e-10 * scale if mu == 0.0 else mu * 10.0
    return -grad  # fall back to steepest descent


def make_inits(
    model: NormalizedModel, spectral: SpectralResult, t_values
) -> list[np.ndarray]:
    """Starting points: each t * u_max ray point, the unit vector, and the exact sigmas."""
    t_values = np.asarray(t_values, dtype=float)
    if np.any(t_values <= 0.0):
        raise ValueError("ray scales must be strictly positive")
    u = spectral.u_max
    if np.any(u <= 0.0):
        raise ValueError("ray inits need an entrywise-positive eigenvector (connected model)")
    inits = [t * u for t in t_values]
    inits.append(np.ones(model.n))
    inits.append(exact_marginals(model).sigma.copy())
    return inits


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section(fn, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def find_local_minimum_on_ray(
    model: NormalizedModel,
    alphas: AlphaAssignment,
    direction: np.ndarray,
    t_range: tuple[float, float] = (1e-1, 1e3),
    num: int = 400,
    refine_tol: float = 1e-10,
) -> tuple[float, float] | None:
    """Interior local minimum of the profiled energy along sigma = t * direction.

    Scans a log-spaced grid for a sign change of the discrete slope from
    negative to positive and refines it by golden section; returns (t, value)
    or None when the restriction decreases monotonically past the barrier.
    """
    direction = np.asarray(direction, dtype=float)
    if np.any(direction <= 0.0):
        raise ValueError("direction must be entrywise positive")
    m = np.linalg.solve(model.J, model.h)

    def g(t: float) -> float:
        return constrained_value(model, alphas, m, t * direction)

    ts = np.geomspace(t_range[0], t_range[1], num)
    values = np.array([g(t) for t in ts])
    for i in range(1, num - 1):
        if values[i] < values[i - 1] and values[i] < values[i + 1]:
            t_star = _golden_section(g, float(ts[i - 1]), float(ts[i + 1]), refine_tol)
            return t_star, g(t_star)
    return None
