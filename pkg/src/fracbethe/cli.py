"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid model, 3 numeric failure
(a command whose contract requires convergence did not converge).
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import harness
from .diagnostics import diagnostics_report, spectral
from .errors import (
    GenerationError,
    InvalidModelError,
    NumericFailureError,
    SpectralConvergenceError,
)
from .exact import exact_marginals
from .free_energy import AlphaAssignment, ray_scan
from .message_passing import MPOptions, MPStatus, Schedule
from .minimizer import MinimizeStatus, NewtonOptions, newton_minimize
from .model import load_model, normalize, validate


def parse_grid(text: str) -> tuple[float, ...]:
    """Grid syntax: comma list ``0.5,1,2`` or ``logspace:1e-2,1e2,25``."""
    if text.startswith("logspace:"):
        lo, hi, num = text[len("logspace:") :].split(",")
        return tuple(np.geomspace(float(lo), float(hi), int(num)))
    return tuple(float(v) for v in text.split(","))


model_option = click.option("--model", "model_path", type=click.Path(), default=None,
                            help="Model JSON file.")
gen_option = click.option("--gen", default=None,
                          help='Generator spec, e.g. "kregular:n=8,k=4,r=0.27" or '
                               '"random:n=8,lambda=0.9,seed=1".')


@click.group()
def cli():
    """Free energies, boundedness diagnostics, direct minimization and
    fractional message passing for Gaussian Markov random fields."""


@cli.command("validate")
@model_option
@gen_option
def cmd_validate(model_path, gen):
    """Check symmetry, positive definiteness and edge-set consistency."""
    if (gen is None) == (model_path is None):
        raise click.UsageError("exactly one of --gen and --model is required")
    model = harness.parse_gen_spec(gen) if gen else load_model(model_path)
    report = validate(model)
    click.echo(json.dumps(report.as_dict()))
    if not report.ok:
        raise InvalidModelError("model failed validation")


@cli.command("diagnose")
@model_option
@gen_option
@click.option("--alpha", default=1.0, show_default=True, help="Uniform edge weight.")
def cmd_diagnose(model_path, gen, alpha):
    """Spectral diagnostics and the boundedness verdict as JSON."""
    nmodel = normalize(harness.resolve_model(gen, model_path))
    alphas = AlphaAssignment.uniform(nmodel, alpha)
    click.echo(json.dumps(diagnostics_report(nmodel, alphas)))


@cli.command("minimize")
@model_option
@gen_option
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--init", "init_spec", default="unit", show_default=True,
              help='Start point: "unit", "oracle", or a ray scale t (float).')
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--max-iter", default=500, show_default=True)
@click.option("--trace", is_flag=True, default=False)
def cmd_minimize(model_path, gen, alpha, init_spec, tol, max_iter, trace):
    """Minimize the profiled free energy; non-convergence exits with code 3."""
    nmodel = normalize(harness.resolve_model(gen, model_path))
    alphas = AlphaAssignment.uniform(nmodel, alpha)
    if init_spec == "unit":
        sigma0 = np.ones(nmodel.n)
    elif init_spec == "oracle":
        sigma0 = exact_marginals(nmodel).sigma.copy()
    else:
        try:
            t0 = float(init_spec)
        except ValueError:
            raise click.UsageError(f"bad --init value {init_spec!r}")
        spec = spectral(nmodel)
        sigma0 = t0 * spec.u_max
    opts = NewtonOptions(tolerance=tol, max_iterations=max_iter, trace=trace)
    res = newton_minimize(nmodel, alphas, sigma0, opts)
    payload = {
        "status": res.status.value,
        "value": res.value.value,
        "iterations": res.iterations,
        "grad_norm": res.grad_norm,
        "m": res.moments.m.tolist(),
        "sigma": res.moments.sigma.tolist(),
    }
    if trace:
        payload["trace"] = [list(entry) for entry in res.trace]
    click.echo(json.dumps(payload))
    if res.status is not MinimizeStatus.CONVERGED:
        raise NumericFailureError(f"minimization did not converge: {res.status.value}")


@cli.command("mp")
@model_option
@gen_option
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--schedule", type=click.Choice(["synchronous", "round_robin"]),
              default="synchronous", show_default=True)
@click.option("--damping", default=0.0, show_default=True)
@click.option("--tol", default=1e-10, show_default=True)
@click.option("--max-iter", "max_sweeps", default=10_000, show_default=True)
def cmd_mp(model_path, gen, alpha, schedule, damping, tol, max_sweeps):
    """Run fractional message passing; non-convergence exits with code 3."""
    nmodel = normalize(harness.resolve_model(gen, model_path))
    alphas = AlphaAssignment.uniform(nmodel, alpha)
    opts = MPOptions(schedule=Schedule(schedule), damping=damping,
                     tolerance=tol, max_sweeps=max_sweeps)
    res = harness.run_mp(nmodel, alphas, opts)
    payload = {
        "status": res.status.value,
        "residual": res.residual,
        "iterations": res.iterations,
    }
    if res.beliefs is not None:
        payload["m"] = res.beliefs.m.tolist()
        payload["sigma"] = res.beliefs.sigma.tolist()
    click.echo(json.dumps(payload))
    if res.status is not MPStatus.CONVERGED:
        raise NumericFailureError(f"message passing did not converge: {res.status.value}")


@cli.command("scan")
@model_option
@gen_option
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--direction", type=click.Choice(["umax", "ones"]), default="umax",
              show_default=True)
@click.option("--t-min", default=1e-1, show_default=True)
@click.option("--t-max", default=1e3, show_default=True)
@click.option("--t-points", default=200, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="CSV destination (stdout when omitted).")
def cmd_scan(model_path, gen, alpha, direction, t_min, t_max, t_points, out_path):
    """Profiled free-energy values along a positive ray, as CSV (t,value,alpha)."""
    nmodel = normalize(harness.resolve_model(gen, model_path))
    alphas = AlphaAssignment.uniform(nmodel, alpha)
    dir_vec = spectral(nmodel).u_max if direction == "umax" else np.ones(nmodel.n)
    rows = [(t, v, alpha) for t, v in
            ray_scan(nmodel, alphas, dir_vec, np.geomspace(t_min, t_max, t_points))]
    if out_path:
        harness.write_csv(out_path, ["t", "value", "alpha"], rows)
    else:
        click.echo("t,value,alpha")
        for row in rows:
            click.echo(",".join(repr(float(v)) for v in row))


@cli.command("fig1")
@gen_option
@click.option("--alpha", default=1.0, show_default=True,
              help="Fixed edge weight for the coupling sweep.")
@click.option("--alpha-grid", default=None, help="Grid for the weight sweep.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
def cmd_fig1(gen, alpha, alpha_grid, out_dir):
    """Symmetric-ray curves and local-minimum summary for a K-regular family."""
    config = harness.ExperimentConfig(
        experiment="fig1",
        gen=gen or "kregular:n=8,k=4,r=0.27",
        alpha=alpha,
        alpha_grid=parse_grid(alpha_grid) if alpha_grid else harness.DEFAULT_ALPHA_GRID,
        out_dir=out_dir,
    )
    paths = harness.run_fig1(config)
    click.echo(json.dumps(paths))


@cli.command("fig2")
@gen_option
@click.option("--alpha-grid", default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def cmd_fig2(gen, alpha_grid, out_dir):
    """Dominant-ray curves, Newton endpoints per init, and the error table."""
    config = harness.ExperimentConfig(
        experiment="fig2",
        gen=gen or "random:n=8,lambda=0.9,seed=0",
        alpha_grid=parse_grid(alpha_grid) if alpha_grid else harness.DEFAULT_ALPHA_GRID,
        out_dir=out_dir,
    )
    paths = harness.run_fig2(config)
    click.echo(json.dumps(paths))


@cli.command("compare")
@model_option
@gen_option
@click.option("--alpha-grid", default="logspace:1e-2,1e2,25", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="CSV destination (stdout when omitted).")
def cmd_compare(model_path, gen, alpha_grid, out_path):
    """Direct minimization vs message passing per edge weight."""
    model = harness.resolve_model(gen, model_path)
    rows = harness.run_compare(model, parse_grid(alpha_grid))
    tuples = harness.comparison_rows_as_tuples(rows)
    if out_path:
        harness.write_csv(out_path, harness.COMPARE_HEADER, tuples)
    else:
        click.echo(",".join(harness.COMPARE_HEADER))
        for row in tuples:
            click.echo(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v)
                                for v in row))


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        return 1
    except (InvalidModelError, GenerationError) as exc:
        click.echo(f"invalid model: {exc}", err=True)
        return 2
    except (NumericFailureError, SpectralConvergenceError) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
