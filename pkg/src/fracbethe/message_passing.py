"""Fractional Gaussian message passing on pair factors with factorized beliefs.

The joint density is split into one 2x2 pair factor per edge (which absorbs a
share of each endpoint's diagonal and linear term) and a residual node factor.
Each pair factor is approximated by a product of two single-node Gaussian
messages in canonical form (precision, precision-mean).  One factor update:

  1. remove the alpha-fraction of the factor's current approximation from
     both endpoint beliefs (the cavity),
  2. multiply the cavity by the pair factor raised to alpha (the tilt),
  3. moment-match the tilted pair with a factorized Gaussian,
  4. set the new messages to the (projection / cavity) ratio raised to 1/alpha,
  5. optionally damp in canonical parameters.

With all edge weights equal to 1 this is standard Gaussian belief propagation
on the partitioned factors.  A converged state is a stationary point of the
fractional free energy: the belief means solve Jm = h, the pair-belief
covariances sit at the profiled optimum for the belief standard deviations,
and the sigma-gradient of the profiled energy vanishes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BeliefNotNormalizableError, PartitionError
from .free_energy import Moments
from .model import AlphaAssignment, Edge, NormalizedModel
from .diagnostics import SpectralResult


@dataclass(frozen=True)
class Partition:
    """Split of the unit-diagonal density into pair factors and node residuals.

    ``gamma[e, 0]`` / ``gamma[e, 1]`` are the diagonal shares the factor of
    edge e = (i, j) takes at i and j; ``eta`` the linear shares; ``a``/``b``
    the per-node residual diagonal and linear coefficients.  Shares sum back
    to the model coefficients exactly.
    """

    edges: tuple[Edge, ...]
    gamma: np.ndarray
    eta: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def reconstruction_defect(self, model: NormalizedModel) -> tuple[float, float]:
        """Max deviation of (diagonal, linear) coefficient sums from the model's."""
        diag = self.a.copy()
        lin = self.b.copy()
        for e, (i, j) in enumerate(self.edges):
            diag[i] += self.gamma[e, 0]
            diag[j] += self.gamma[e, 1]
            lin[i] += self.eta[e, 0]
            lin[j] += self.eta[e, 1]
        return (
            float(np.max(np.abs(diag - np.diag(model.J)))) if model.n else 0.0,
            float(np.max(np.abs(lin - model.h))) if model.n else 0.0,
        )


@dataclass
class MessageSet:
    """Canonical-form messages per directed edge: column 0 flows to i, 1 to j."""

    edges: tuple[Edge, ...]
    lam: np.ndarray
    nu: np.ndarray
    iteration: int = 0

    def copy(self) -> "MessageSet":
        return MessageSet(self.edges, self.lam.copy(), self.nu.copy(), self.iteration)


class MPStatus(enum.Enum):
    CONVERGED = "Converged"
    OSCILLATING = "Oscillating"
    ITERATION_CAP = "IterationCap"
    BELIEF_NOT_NORMALIZABLE = "BeliefNotNormalizable"


class Schedule(enum.Enum):
    SYNCHRONOUS = "synchronous"
    ROUND_ROBIN = "round_robin"


class InitScheme(enum.Enum):
    UNIT = "unit"
    SYMMETRIC_NORMALIZING = "symmetric_normalizing"


@dataclass(frozen=True)
class MPOptions:
    schedule: Schedule = Schedule.SYNCHRONOUS
    damping: float = 0.0
    tolerance: float = 1e-10
    max_sweeps: int = 10_000

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.tolerance <= 0.0 or self.max_sweeps < 1:
            raise ValueError("invalid options")


@dataclass(frozen=True)
class MPResult:
    status: MPStatus
    beliefs: Moments | None
    residual: float
    iterations: int
    messages: MessageSet


def partition_symmetric(model: NormalizedModel) -> Partition:
    """Equal split of each node's diagonal and linear term across incident edges."""
    deg = model.base.degrees
    E = len(model.edges)
    gamma = np.zeros((E, 2))
    eta = np.zeros((E, 2))
    a = np.zeros(model.n)
    b = np.zeros(model.n)
    for k in range(model.n):
        if deg[k] == 0:
            a[k] = 1.0
            b[k] = model.h[k]
    for e, (i, j) in enumerate(model.edges):
        gamma[e, 0] = 1.0 / deg[i]
        gamma[e, 1] = 1.0 / deg[j]
        eta[e, 0] = model.h[i] / deg[i]
        eta[e, 1] = model.h[j] / deg[j]
    return Partition(model.edges, gamma, eta, a, b)


def partition_normalizable(model: NormalizedModel, spectral: SpectralResult) -> Partition:
    """Pair factors that are individually proper Gaussians; needs lambda_max(|R|) < 1.

    Per component, gamma at edge end i is c * |R_ij| * u_j / u_i with the
    component's dominant eigenpair (lambda, u) and c halfway between 1 and
    1/lambda.  Then each 2x2 factor determinant is (c^2 - 1) R_ij^2 > 0 and
    the eigen-relation leaves every node residual at 1 - c*lambda > 0.
    """
    if spectral.lambda_max >= 1.0:
        raise PartitionError(
            f"model is not pairwise normalizable (lambda_max = {spectral.lambda_max})"
        )
    deg = model.base.degrees
    E = len(model.edges)
    gamma = np.zeros((E, 2))
    eta = np.zeros((E, 2))
    a = np.ones(model.n)
    b = np.zeros(model.n)
    edge_index = {e: k for k, e in enumerate(model.edges)}
    comp_c = {}
    comp_u = np.zeros(model.n)
    for comp in spectral.components:
        c = 0.5 * (1.0 + 1.0 / comp.lambda_max) if comp.lambda_max > 0.0 else 0.0
        for local, node in enumerate(comp.nodes):
            comp_c[node] = c
            comp_u[node] = comp.u[local]
    for (i, j), e in edge_index.items():
        c = comp_c[i]
        gamma[e, 0] = c * abs(model.R[i, j]) * comp_u[j] / comp_u[i]
        gamma[e, 1] = c * abs(model.R[i, j]) * comp_u[i] / comp_u[j]
        a[i] -= gamma[e, 0]
        a[j] -= gamma[e, 1]
        eta[e, 0] = model.h[i] / deg[i]
        eta[e, 1] = model.h[j] / deg[j]
    for k in range(model.n):
        b[k] = model.h[k] if deg[k] == 0 else 0.0
    return Partition(model.edges, gamma, eta, a, b)


def _pair_proper(partition: Partition, model: NormalizedModel) -> bool:
    for e, (i, j) in enumerate(partition.edges):
        gi, gj = partition.gamma[e]
        if gi <= 0.0 or gj <= 0.0 or gi * gj - model.R[i, j] ** 2 <= 0.0:
            return False
    return True


def init_messages(
    partition: Partition,
    scheme: InitScheme,
    model: NormalizedModel | None = None,
) -> MessageSet:
    """Initial messages: identity messages, or one shared proper-making precision.

    The unit scheme needs every factor of the partition to be proper on its
    own (identity messages leave the beliefs equal to the node factors).  The
    symmetric scheme puts the same precision lambda0 on every directed edge,
    large enough that all step-0 node beliefs and pair blocks are proper.
    """
    E = len(partition.edges)
    if scheme is InitScheme.UNIT:
        if model is None or not _pair_proper(partition, model) or np.any(partition.a <= 0.0):
            raise PartitionError("unit initialization requires a normalizable partition")
        return MessageSet(partition.edges, np.zeros((E, 2)), np.zeros((E, 2)))
    if scheme is not InitScheme.SYMMETRIC_NORMALIZING:
        raise PartitionError(f"unknown initialization scheme: {scheme}")
    if model is None:
        raise PartitionError("symmetric initialization needs the model's couplings")

    deg = model.base.degrees
    deficit = 0.0
    for k in range(model.n):
        if deg[k] > 0:
            deficit = max(deficit, -partition.a[k] / deg[k])
    lam0 = max(0.0, deficit) + 1.0
    # grow until the step-0 pair blocks (full-factor convention) are proper
    for _ in range(64):
        ok = True
        for e, (i, j) in enumerate(partition.edges):
            cav_i = partition.a[i] + (deg[i] - 1) * lam0
            cav_j = partition.a[j] + (deg[j] - 1) * lam0
            A = cav_i + partition.gamma[e, 0]
            B = cav_j + partition.gamma[e, 1]
            if A <= 0.0 or B <= 0.0 or A * B - model.R[i, j] ** 2 <= 0.0:
                ok = False
                break
        if ok:
            break
        lam0 *= 2.0
    else:
        raise PartitionError("could not find a proper shared initial precision")
    return MessageSet(partition.edges, np.full((E, 2), lam0), np.zeros((E, 2)))


def _node_totals(partition: Partition, messages: MessageSet):
    P = partition.a.copy()
    V = partition.b.copy()
    for e, (i, j) in enumerate(partition.edges):
        P[i] += messages.lam[e, 0]
        P[j] += messages.lam[e, 1]
        V[i] += messages.nu[e, 0]
        V[j] += messages.nu[e, 1]
    return P, V


def _factor_update(partition, model, alpha, e, i, j, lam, nu, P, V):
    """New undamped messages for one pair factor from the current belief totals."""
    cav_Pi = P[i] - alpha * lam[e, 0]
    cav_Pj = P[j] - alpha * lam[e, 1]
    cav_Vi = V[i] - alpha * nu[e, 0]
    cav_Vj = V[j] - alpha * nu[e, 1]
    A = cav_Pi + alpha * partition.gamma[e, 0]
    B = cav_Pj + alpha * partition.gamma[e, 1]
    C = alpha * model.R[i, j]
    det = A * B - C * C
    ti = cav_Vi + alpha * partition.eta[e, 0]
    tj = cav_Vj + alpha * partition.eta[e, 1]
    new_lam_i = (det / B - cav_Pi) / alpha
    new_lam_j = (det / A - cav_Pj) / alpha
    new_nu_i = ((B * ti - C * tj) / B - cav_Vi) / alpha
    new_nu_j = ((A * tj - C * ti) / A - cav_Vj) / alpha
    return new_lam_i, new_lam_j, new_nu_i, new_nu_j


def mp_run(
    model: NormalizedModel,
    alphas: AlphaAssignment,
    partition: Partition,
    messages: MessageSet,
    opts: MPOptions | None = None,
) -> MPResult:
    """Iterate the fractional factor updates until the message residual settles.

    The residual is the largest undamped parameter change in a sweep, so a
    converged state stays converged under any damping.  Beliefs that lose
    positive precision are reported as a status, not raised: that is the
    divergence mechanism of the unbounded regime.
    """
    opts = opts or MPOptions()
    alphas.require_edges(model.edges)
    if partition.edges != model.edges or messages.edges != model.edges:
        raise PartitionError("partition/messages do not match the model's edge set")

    lam = messages.lam
    nu = messages.nu
    E = len(model.edges)
    keep = opts.damping
    prev2_lam = prev2_nu = None
    residual = np.inf
    status = MPStatus.ITERATION_CAP
    sweeps = 0

    with np.errstate(all="ignore"):
        for sweeps in range(1, opts.max_sweeps + 1):
            before_lam = lam.copy()
            before_nu = nu.copy()
            residual = 0.0
            if opts.schedule is Schedule.SYNCHRONOUS:
                P, V = _node_totals(partition, messages)
                new_lam = np.empty_like(lam)
                new_nu = np.empty_like(nu)
                for e, (i, j) in enumerate(model.edges):
                    li, lj, ni, nj = _factor_update(
                        partition, model, alphas.values[e], e, i, j, lam, nu, P, V
                    )
                    new_lam[e] = (li, lj)
                    new_nu[e] = (ni, nj)
                residual = max(
                    float(np.max(np.abs(new_lam - lam))) if E else 0.0,
                    float(np.max(np.abs(new_nu - nu))) if E else 0.0,
                )
                lam[...] = (1.0 - keep) * new_lam + keep * lam
                nu[...] = (1.0 - keep) * new_nu + keep * nu
            else:
                P, V = _node_totals(partition, messages)
                for e, (i, j) in enumerate(model.edges):
                    li, lj, ni, nj = _factor_update(
                        partition, model, alphas.values[e], e, i, j, lam, nu, P, V
                    )
                    residual = max(
                        residual,
                        abs(li - lam[e, 0]),
                        abs(lj - lam[e, 1]),
                        abs(ni - nu[e, 0]),
                        abs(nj - nu[e, 1]),
                    )
                    updates = (
                        (1.0 - keep) * li + keep * lam[e, 0],
                        (1.0 - keep) * lj + keep * lam[e, 1],
                        (1.0 - keep) * ni + keep * nu[e, 0],
                        (1.0 - keep) * nj + keep * nu[e, 1],
                    )
                    P[i] += updates[0] - lam[e, 0]
                    P[j] += updates[1] - lam[e, 1]
                    V[i] += updates[2] - nu[e, 0]
                    V[j] += updates[3] - nu[e, 1]
                    lam[e, 0], lam[e, 1], nu[e, 0], nu[e, 1] = updates
            messages.iteration += 1

            P, _ = _node_totals(partition, messages)
            if (
                not np.all(np.isfinite(lam))
                or not np.all(np.isfinite(nu))
                or np.any(P <= 0.0)
            ):
                status = MPStatus.BELIEF_NOT_NORMALIZABLE
                break
            if residual <= opts.tolerance:
                status = MPStatus.CONVERGED
                break
            prev2_lam, prev2_nu = before_lam, before_nu

    # distinguish a genuine period-2 orbit from a plain cap-out: damped
    # oscillations converge before the cap, a true cycle persists at it
    if status is MPStatus.ITERATION_CAP and prev2_lam is not None:
        cycle = max(
            float(np.max(np.abs(lam - prev2_lam))) if E else 0.0,
            float(np.max(np.abs(nu - prev2_nu))) if E else 0.0,
        )
        if cycle <= opts.tolerance < residual:
            status = MPStatus.OSCILLATING

    result_beliefs = None
    if status in (MPStatus.CONVERGED, MPStatus.ITERATION_CAP, MPStatus.OSCILLATING):
        try:
            result_beliefs = beliefs(model, partition, messages, alphas)
        except BeliefNotNormalizableError:
            if status is MPStatus.CONVERGED:
                status = MPStatus.BELIEF_NOT_NORMALIZABLE
    return MPResult(
        status=status,
        beliefs=result_beliefs,
        residual=residual,
        iterations=sweeps,
        messages=messages,
    )


def beliefs(
    model: NormalizedModel,
    partition: Partition,
    messages: MessageSet,
    alphas: AlphaAssignment | None = None,
) -> Moments:
    """Node and pair moments implied by the current messages.

    Pair moments come from the tilted pair of each factor (cavity times the
    alpha-weighted factor), which at a fixed point places the pair covariance
    exactly at the profiled optimum.  Without an alpha assignment the full
    factor is used (the standard belief-propagation readout).
    """
    P, V = _node_totals(partition, messages)
    if np.any(P <= 0.0) or not np.all(np.isfinite(P)):
        raise BeliefNotNormalizableError("a node belief has non-positive precision")
    m = V / P
    sigma = 1.0 / np.sqrt(P)
    E = len(model.edges)
    pair = np.zeros(E)
    for e, (i, j) in enumerate(model.edges):
        alpha = 1.0 if alphas is None else alphas.values[e]
        A = P[i] - alpha * messages.lam[e, 0] + alpha * partition.gamma[e, 0]
        B = P[j] - alpha * messages.lam[e, 1] + alpha * partition.gamma[e, 1]
        C = alpha * model.R[i, j]
        det = A * B - C * C
        if A <= 0.0 or det <= 0.0:
            raise BeliefNotNormalizableError("a pair belief has an improper precision block")
        pair[e] = -C / det
    return Moments(m, sigma, pair)
