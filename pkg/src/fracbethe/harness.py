"""Experiment drivers: model resolution, ray sweeps, method comparison, CSV/JSON output.

Outputs are plain CSV with a one-line header plus a JSON sidecar of the
exact configuration; rows are emitted in a fixed sort order and floats are
formatted with shortest round-trip repr, so reruns are byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import classify, critical_alpha, critical_r, detect_k_regular, spectral
from .exact import exact_marginals, sigma_error
from .errors import InvalidModelError
from .free_energy import (
    AlphaAssignment,
    constrained_value,
    f_lower_bound,
    f_mean_field,
    ray_scan,
)
from .message_passing import (
    InitScheme,
    MPOptions,
    MPStatus,
    init_messages,
    mp_run,
    partition_normalizable,
    partition_symmetric,
)
from .minimizer import MinimizeStatus, NewtonOptions, make_inits, newton_minimize
from .model import (
    GaussianModel,
    NormalizedModel,
    load_model,
    make_k_regular,
    normalize,
    r_valid,
    random_model,
    validate,
)

DEFAULT_T_GRID = tuple(float(t) for t in np.geomspace(1e-1, 1e3, 200))
DEFAULT_ALPHA_GRID = tuple(float(a) for a in np.geomspace(1e-2, 1e2, 25))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    gen: str | None = None
    model_path: str | None = None
    alpha: float = 1.0
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    t_grid: tuple[float, ...] = DEFAULT_T_GRID
    r_grid: tuple[float, ...] | None = None
    seed: int = 0
    out_dir: str = "."
    newton: NewtonOptions = field(default_factory=NewtonOptions)
    mp: MPOptions = field(default_factory=MPOptions)

    def as_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["newton"] = dataclasses.asdict(self.newton)
        mp = dataclasses.asdict(self.mp)
        mp["schedule"] = self.mp.schedule.value
        payload["mp"] = mp
        return payload


@dataclass(frozen=True)
class ComparisonRow:
    alpha: float
    r: float | None
    verdict: str
    newton_status: str
    newton_value: float | None
    mp_status: str
    mp_value: float | None
    newton_sigma_error: float | None
    mp_sigma_error: float | None
    agreement_gap: float | None


def parse_gen_spec(spec: str) -> GaussianModel:
    """Build a model from a generator spec like ``kregular:n=8,k=4,r=0.27``.

    Supported kinds: ``kregular`` (n, k, r) and ``random`` (n, lambda, seed,
    optional density, default 0.5).
    """
    try:
        kind, _, rest = spec.partition(":")
        params = {}
        if rest:
            for item in rest.split(","):
                key, _, value = item.partition("=")
                params[key.strip()] = value.strip()
        if kind == "kregular":
            return make_k_regular(int(params["n"]), int(params["k"]), float(params["r"]))
        if kind == "random":
            return random_model(
                int(params["n"]),
                float(params.get("density", 0.5)),
                float(params["lambda"]),
                int(params.get("seed", 0)),
            )
    except (KeyError, ValueError) as exc:
        raise InvalidModelError(f"bad generator spec {spec!r}: {exc}") from exc
    raise InvalidModelError(f"unknown generator kind in spec {spec!r}")


def resolve_model(gen: str | None, model_path: str | None) -> GaussianModel:
    if (gen is None) == (model_path is None):
        raise InvalidModelError("exactly one of --gen and --model is required")
    model = parse_gen_spec(gen) if gen is not None else load_model(model_path)
    report = validate(model)
    if not report.ok:
        raise InvalidModelError(f"model failed validation: {report.as_dict()}")
    return model


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # builtin-float repr, also for numpy scalars
    return str(value)


def write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_config(path: str, config: ExperimentConfig) -> None:
    with open(path, "w") as fh:
        json.dump(config.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_mp_setup(nmodel: NormalizedModel, spec):
    """Partition/init pairing: proper pair factors below the spectral boundary,
    shared-precision start on the symmetric split at or above it."""
    if spec.lambda_max < 1.0:
        partition = partition_normalizable(nmodel, spec)
        msgs = init_messages(partition, InitScheme.UNIT, nmodel)
    else:
        partition = partition_symmetric(nmodel)
        msgs = init_messages(partition, InitScheme.SYMMETRIC_NORMALIZING, nmodel)
    return partition, msgs


def run_mp(nmodel: NormalizedModel, alphas: AlphaAssignment, opts: MPOptions):
    spec = spectral(nmodel)
    partition, msgs = default_mp_setup(nmodel, spec)
    return mp_run(nmodel, alphas, partition, msgs, opts)


def run_fig1(config: ExperimentConfig) -> dict[str, str]:
    """Symmetric-ray free-energy curves of a K-regular family.

    Left block sweeps the edge weight alpha at fixed coupling; right block
    sweeps the coupling at fixed alpha.  A summary table marks detected
    interior ray minima next to the critical-parameter predictions.
    """
    model = resolve_model(config.gen, config.model_path)
    nmodel = normalize(model)
    kreg = detect_k_regular(nmodel)
    if kreg is None:
        raise InvalidModelError("fig1 requires a K-regular equal-coupling model")
    K, r_fixed = kreg
    n = nmodel.n
    rv = r_valid(n, K)
    direction = np.ones(n)
    ts = np.asarray(config.t_grid)
    from .minimizer import find_local_minimum_on_ray

    curve_rows = []
    summary_rows = []
    for alpha in config.alpha_grid:
        alphas = AlphaAssignment.uniform(nmodel, alpha)
        for t, value in ray_scan(nmodel, alphas, direction, ts):
            curve_rows.append(("left", alpha, r_fixed, t, value))
        located = find_local_minimum_on_ray(nmodel, alphas, direction)
        ac = critical_alpha(K, r_fixed) if K * r_fixed >= 1.0 else None
        rc = critical_r(K, alpha) if 0.0 < alpha < K else None
        summary_rows.append(
            (
                "left",
                alpha,
                r_fixed,
                located is not None,
                located[0] if located else None,
                located[1] if located else None,
                ac,
                rc,
                rv,
            )
        )

    r_grid = config.r_grid
    if r_grid is None:
        hi = min(1.4 / K, 0.98 * rv)
        r_grid = tuple(np.linspace(0.6 / K, hi, 9))
    alphas = AlphaAssignment.uniform(nmodel, config.alpha)
    ac_fixed_alpha = critical_r(K, config.alpha) if 0.0 < config.alpha < K else None
    for r in r_grid:
        swept = normalize(make_k_regular(n, K, r, model.h))
        sw_alphas = AlphaAssignment.uniform(swept, config.alpha)
        for t, value in ray_scan(swept, sw_alphas, direction, ts):
            curve_rows.append(("right", config.alpha, r, t, value))
        located = find_local_minimum_on_ray(swept, sw_alphas, direction)
        ac = critical_alpha(K, r) if K * r >= 1.0 else None
        summary_rows.append(
            (
                "right",
                config.alpha,
                r,
                located is not None,
                located[0] if located else None,
                located[1] if located else None,
                ac,
                ac_fixed_alpha,
                rv,
            )
        )

    os.makedirs(config.out_dir, exist_ok=True)
    curves_path = os.path.join(config.out_dir, "fig1_curves.csv")
    summary_path = os.path.join(config.out_dir, "fig1_summary.csv")
    config_path = os.path.join(config.out_dir, "fig1_config.json")
    write_csv(curves_path, ["panel", "alpha", "r", "t", "value"], curve_rows)
    write_csv(
        summary_path,
        [
            "panel",
            "alpha",
            "r",
            "local_min_found",
            "local_min_t",
            "local_min_value",
            "critical_alpha",
            "critical_r",
            "r_valid",
        ],
        summary_rows,
    )
    write_config(config_path, config)
    return {"curves": curves_path, "summary": summary_path, "config": config_path}


def run_fig2(config: ExperimentConfig) -> dict[str, str]:
    """Dominant-ray curves, Newton endpoints per starting point, and error table.

    Missing values (non-converged runs) are written as empty cells.
    """
    model = resolve_model(config.gen, config.model_path)
    nmodel = normalize(model)
    spec = spectral(nmodel)
    oracle = exact_marginals(nmodel)
    ts = np.asarray(config.t_grid)
    direction = spec.u_max
    m_star = np.linalg.solve(nmodel.J, nmodel.h)

    curve_rows = []
    for t in ts:
        sig = t * direction
        curve_rows.append(
            ("mean_field", None, float(t), f_mean_field(nmodel, m_star, sig).value)
        )
        curve_rows.append(
            ("lower_bound", None, float(t), f_lower_bound(nmodel, m_star, sig).value)
        )
    bethe = AlphaAssignment.uniform(nmodel, 1.0)
    for t, value in ray_scan(nmodel, bethe, direction, ts):
        curve_rows.append(("bethe", 1.0, t, value))
    for alpha in config.alpha_grid:
        alphas = AlphaAssignment.uniform(nmodel, alpha)
        for t, value in ray_scan(nmodel, alphas, direction, ts):
            curve_rows.append(("fractional", alpha, t, value))

    init_ts = np.geomspace(1e-1, 1e3, 18)
    inits = make_inits(nmodel, spec, init_ts)
    init_labels = [("ray", float(t)) for t in init_ts] + [("unit", None), ("oracle", None)]

    newton_rows = []
    error_rows = []
    for alpha in config.alpha_grid:
        alphas = AlphaAssignment.uniform(nmodel, alpha)
        for (kind, t0), sigma0 in zip(init_labels, inits):
            res = newton_minimize(nmodel, alphas, sigma0, config.newton)
            converged = res.status is MinimizeStatus.CONVERGED
            newton_rows.append(
                (
                    alpha,
                    kind,
                    t0,
                    res.status.value,
                    res.value.value if converged else None,
                    res.grad_norm,
                    res.iterations,
                )
            )
        newton_res = newton_minimize(nmodel, alphas, oracle.sigma.copy(), config.newton)
        mp_res = run_mp(nmodel, alphas, config.mp)
        n_ok = newton_res.status is MinimizeStatus.CONVERGED
        m_ok = mp_res.status is MPStatus.CONVERGED
        error_rows.append(
            (
                alpha,
                newton_res.status.value,
                sigma_error(newton_res.moments.sigma, oracle) if n_ok else None,
                mp_res.status.value,
                sigma_error(mp_res.beliefs.sigma, oracle) if m_ok else None,
            )
        )

    os.makedirs(config.out_dir, exist_ok=True)
    paths = {
        "curves": os.path.join(config.out_dir, "fig2_curves.csv"),
        "newton": os.path.join(config.out_dir, "fig2_newton.csv"),
        "errors": os.path.join(config.out_dir, "fig2_errors.csv"),
        "config": os.path.join(config.out_dir, "fig2_config.json"),
    }
    write_csv(paths["curves"], ["curve", "alpha", "t", "value"], curve_rows)
    write_csv(
        paths["newton"],
        ["alpha", "init_kind", "init_t", "status", "value", "grad_norm", "iterations"],
        newton_rows,
    )
    write_csv(
        paths["errors"],
        ["alpha", "newton_status", "newton_sigma_error", "mp_status", "mp_sigma_error"],
        error_rows,
    )
    write_config(paths["config"], config)
    return paths


def run_compare(
    model: GaussianModel,
    alpha_grid,
    newton_opts: NewtonOptions | None = None,
    mp_opts: MPOptions | None = None,
) -> list[ComparisonRow]:
    """Run direct minimization and message passing per edge weight and tabulate.

    A row where exactly one method converged is worth inspecting, not an
    error; the agreement gap is only defined when both converged.
    """
    newton_opts = newton_opts or NewtonOptions()
    mp_opts = mp_opts or MPOptions()
    nmodel = normalize(model)
    oracle = exact_marginals(nmodel)
    kreg = detect_k_regular(nmodel)
    rows = []
    for alpha in alpha_grid:
        alphas = AlphaAssignment.uniform(nmodel, alpha)
        verdict = classify(nmodel, alphas)
        newton_res = newton_minimize(nmodel, alphas, oracle.sigma.copy(), newton_opts)
        mp_res = run_mp(nmodel, alphas, mp_opts)
        n_ok = newton_res.status is MinimizeStatus.CONVERGED
        m_ok = mp_res.status is MPStatus.CONVERGED
        mp_value = None
        if m_ok:
            mp_value = constrained_value(
                nmodel, alphas, mp_res.beliefs.m, mp_res.beliefs.sigma
            )
        gap = None
        if n_ok and m_ok:
            gap = abs(newton_res.value.value - mp_value)
        rows.append(
            ComparisonRow(
                alpha=float(alpha),
                r=kreg[1] if kreg else None,
                verdict=verdict.verdict.value,
                newton_status=newton_res.status.value,
                newton_value=newton_res.value.value if n_ok else None,
                mp_status=mp_res.status.value,
                mp_value=mp_value,
                newton_sigma_error=sigma_error(newton_res.moments.sigma, oracle) if n_ok else None,
                mp_sigma_error=sigma_error(mp_res.beliefs.sigma, oracle) if m_ok else None,
                agreement_gap=gap,
            )
        )
    return rows


COMPARE_HEADER = [
    "alpha",
    "r",
    "verdict",
    "newton_status",
    "newton_value",
    "mp_status",
    "mp_value",
    "newton_sigma_error",
    "mp_sigma_error",
    "agreement_gap",
]


def comparison_rows_as_tuples(rows: list[ComparisonRow]) -> list[tuple]:
    return [dataclasses.astuple(row) for row in rows]
