#!/usr/bin/env python3
"""
Experiment command line

Runs single coupled solves, viscosity sweeps, slope fits, log-log plots and
the kernel self checks from an INI configuration.
"""

import json
import os
import sys
from functools import wraps
from typing import List, Optional

import click
from dotenv import load_dotenv

import validators
from analysis import GridPolicy, default_jobs, l2_spacetime, run_sweep, slopes_by_method
from couplings import solve as solve_coupled
from couplings.stages import reference_field
from error_handling_decorators import SolverError
from error_tracking import ErrorTracker
from health_checks import CheckCatalog
from models import subdomain_grids
from run_config import ConfigError, RunConfig, load
from structured_logging import ErrorContext, init_logging
from svg_plot import render_all
from table_io import (TableFormatError, interface_series, read_errors, records_from_csv, write_errors,
                      write_fields, write_slopes, write_snapshots, write_traces)

# Exit code of each failure family; checked in order
EXIT_CODES = [
    (ConfigError, 2),
    (validators.ValidationError, 3),
    (SolverError, 4),
    (TableFormatError, 5),
    (OSError, 5),
    (ValueError, 3),
]
EXIT_UNHEALTHY = 4


def exit_code_for(error: BaseException) -> Optional[int]:
    for kind, code in EXIT_CODES:
        if isinstance(error, kind):
            return code
    return None


def guarded(command: str):
    """Set up logging for a subcommand and map known failures to exit codes"""
    def decorator(f):
        @wraps(f)
        def wrapper(*args, **kwargs):
            load_dotenv()
            init_logging(os.getenv('FDD_LOG_DIR') or None, os.getenv('FDD_LOG_LEVEL', 'INFO'), command)
            try:
                with ErrorContext(f'cli_{command}'):
                    return f(*args, **kwargs)
            except tuple(kind for kind, _ in EXIT_CODES) as e:
                click.echo(f"Error: {e}", err=True)
                sys.exit(exit_code_for(e))
        return wrapper
    return decorator


def _config(ctx: click.Context) -> RunConfig:
    config = load(ctx.obj['config'], ctx.obj['overrides'])
    if ctx.obj['out'] is not None:
        config.set('output', 'out_dir', ctx.obj['out'])
    return config


def _out_dir(config: RunConfig) -> str:
    out = config.get('output', 'out_dir')
    os.makedirs(out, exist_ok=True)
    return out


def _policy(config: RunConfig) -> GridPolicy:
    g = config.values['grid']
    if g['n_cells'] is None or g['n_cells'] < 1:
        raise ConfigError("grid.n_cells must be a positive integer")
    return GridPolicy(g['n_cells'], g['n_steps'], g['peclet_limit'], g['layer_cells'])


@click.group()
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='INI configuration or manifest')
@click.option('--jobs', type=int, default=None, help='Worker processes for sweeps')
@click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory')
@click.option('--override', 'overrides', multiple=True, help='section.key=value, repeatable')
@click.pass_context
def cli(ctx, config_path, jobs, out, overrides):
    """Heterogeneous domain decomposition experiments"""
    ctx.ensure_object(dict)
    ctx.obj.update({
        'config': config_path,
        'jobs': jobs if jobs is not None else default_jobs(),
        'out': out,
        'overrides': list(overrides),
    })


@cli.command()
@click.pass_context
@guarded('solve')
def solve(ctx):
    """Solve one coupled problem and write fields, traces and snapshots"""
    config = _config(ctx)
    spec = config.problem()
    policy = _policy(config)
    grid, time = policy.grids(spec)
    validators.check(spec, grid, time)
    method = config.method
    out = _out_dir(config)

    reference = reference_field(spec, grid, time)
    solution = solve_coupled(spec, grid, time, method, **config.coupling_options)

    write_fields(solution, os.path.join(out, f'fields_{method.label}.csv'))
    write_traces(interface_series(solution, reference), os.path.join(out, 'trace_interface.csv'))
    write_snapshots(reference, solution, config.snapshot_times, os.path.join(out, 'snapshots.csv'))
    config.write_manifest(os.path.join(out, 'manifest.txt'))

    omega1, omega2 = subdomain_grids(grid)
    err1 = l2_spacetime(reference.restrict(omega1) - solution.u_ad)
    err2 = l2_spacetime(reference.restrict(omega2) - solution.u_a)
    click.echo(f"{method.label} nu={spec.nu:g} N={grid.n_cells} peclet={policy.peclet(spec, grid):.3g}")
    click.echo(f"  iterations: {solution.diagnostics.iterations}")
    click.echo(f"  err_omega1: {err1:.6e}")
    click.echo(f"  err_omega2: {err2:.6e}")
    click.echo(f"Wrote results to {out}")


@cli.command()
@click.pass_context
@guarded('sweep')
def sweep(ctx):
    """Run every method over the viscosity list and write errors.csv"""
    config = _config(ctx)
    template = config.problem()
    policy = _policy(config)
    nu_list = config.nu_list
    methods = config.methods
    for nu in nu_list:
        spec = template.with_nu(nu)
        validators.check(spec, *policy.grids(spec))
    out = _out_dir(config)

    tracker = ErrorTracker()
    records = run_sweep(template, nu_list, methods, policy, jobs=ctx.obj['jobs'], tracker=tracker,
                        **config.coupling_options)
    write_errors(records, os.path.join(out, 'errors.csv'))
    config.write_manifest(os.path.join(out, 'manifest.txt'))

    click.echo(f"Swept {len(nu_list)} viscosities x {len(methods)} methods")
    for record in records:
        flag = '' if record.resolved else ' (unresolved)'
        click.echo(f"  nu={record.nu:g} {record.label}: "
                   f"{record.err_omega1:.3e} / {record.err_omega2:.3e}{flag}")
    if tracker.has_errors():
        summary = tracker.get_summary()
        click.echo(f"Warning: {summary['total_errors']} runs failed", err=True)
    click.echo(f"Wrote {os.path.join(out, 'errors.csv')}")


def _errors_path(ctx: click.Context, errors: Optional[str]) -> str:
    if errors:
        return errors
    return os.path.join(_config(ctx).get('output', 'out_dir'), 'errors.csv')


@cli.command()
@click.option('--errors', type=click.Path(dir_okay=False), default=None, help='errors.csv to fit')
@click.option('--above-floor', is_flag=True, help='Drop small nu pairs sitting on the discretization floor')
@click.pass_context
@guarded('slopes')
def slopes(ctx, errors, above_floor):
    """Fit log-log slopes per method from an errors.csv"""
    path = _errors_path(ctx, errors)
    records = records_from_csv(path)
    fits = {region: slopes_by_method(records, region, above_floor=above_floor) for region in ('omega1', 'omega2')}
    out = os.path.dirname(os.path.abspath(path)) if ctx.obj['out'] is None else ctx.obj['out']
    os.makedirs(out, exist_ok=True)
    target = os.path.join(out, 'slopes.csv')
    write_slopes(fits, target)
    for region, by_method in fits.items():
        for method, fit in by_method.items():
            click.echo(f"{region} {method}: slope {fit.slope:.3f}")
    click.echo(f"Wrote {target}")


@cli.command()
@click.option('--errors', type=click.Path(dir_okay=False), default=None, help='errors.csv to plot')
@click.pass_context
@guarded('plot')
def plot(ctx, errors):
    """Draw the two log-log error panels as SVG"""
    path = _errors_path(ctx, errors)
    df = read_errors(path)
    out = os.path.dirname(os.path.abspath(path)) if ctx.obj['out'] is None else ctx.obj['out']
    os.makedirs(out, exist_ok=True)
    for written in render_all(df, out):
        click.echo(f"Wrote {written}")


@cli.command()
@click.option('--only', 'names', multiple=True, help='Run only the named checks')
@click.option('--seed', type=int, default=0, help='Seed of the randomized checks')
@guarded('check')
def check(names, seed):
    """Run the kernel self checks and print a JSON report"""
    catalog = CheckCatalog(seed=seed)
    report = catalog.run_all_checks(list(names) or None)
    click.echo(json.dumps(report, indent=2, default=float))
    if report['status'] != 'healthy':
        sys.exit(EXIT_UNHEALTHY)


def main(argv: Optional[List[str]] = None):
    cli(args=argv, obj={})


if __name__ == '__main__':
    main()
