"""
Error analysis across viscosity sweeps

Space-time norms, the (nu, method) sweep against the monodomain reference,
log-log slope fits and the discrete transport energy estimate.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from couplings import solve
from couplings.stages import reference_field
from error_handling_decorators import SolverError, handle_errors
from error_tracking import ErrorTracker
from hyperbolic import TransportSpec, tabulate
from models import CouplingMethod, Field, Grid, MethodKind, ProblemSpec, TimeGrid, build_grids, subdomain_grids
from structured_logging import ErrorContext, get_logger

logger = get_logger(__name__)

# Per-pair slope under which a sweep is taken to sit on the discretization floor
FLOOR_SLOPE = 1.0


def l2_spacetime(f: Field) -> float:
    """Trapezoidal L2 norm over space and time"""
    inner = trapezoid(f.values ** 2, dx=f.grid.dx, axis=1)
    return float(np.sqrt(trapezoid(inner, dx=f.time.dt)))


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    pair_slopes: Tuple[float, ...]


def fit_slope(points: Sequence[Tuple[float, float]]) -> SlopeFit:
    """
    Least-squares line through (log nu, log err).

    Args:
        points: (nu, err) pairs, both strictly positive

    Returns:
        SlopeFit with the consecutive pair slopes in increasing nu order

    Raises:
        ValueError: With fewer than 2 points or nonpositive values
    """
    if len(points) < 2:
        raise ValueError(f"need at least 2 points, got {len(points)}")
    data = np.array(sorted(points), dtype=float)
    if not np.all(np.isfinite(data)) or np.any(data <= 0):
        raise ValueError("nu and err must be finite and strictly positive")
    if np.unique(data[:, 0]).size < 2:
        raise ValueError("need at least 2 distinct nu values")
    log_nu, log_err = np.log(data[:, 0]), np.log(data[:, 1])
    slope, intercept = np.polyfit(log_nu, log_err, 1)
    pairs = tuple(float(s) for s in np.diff(log_err) / np.diff(log_nu))
    return SlopeFit(float(slope), float(intercept), pairs)


def fit_slope_above_floor(points: Sequence[Tuple[float, float]], floor_slope: float = FLOOR_SLOPE) -> SlopeFit:
    """
    Fit after dropping the smallest nu values whose pair slope falls below
    `floor_slope`, keeping at least two points.
    """
    data = sorted(points)
    while len(data) > 2:
        pair = fit_slope(data[:2]).slope
        if pair >= floor_slope:
            break
        data = data[1:]
    return fit_slope(data)


@dataclass(frozen=True)
class GridPolicy:
    """
    Grid choice for a sweep and the resolution test of each (nu, grid) pair.

    A run is unresolved when the cell Peclet number exceeds `peclet_limit`,
    or for a < 0 when the boundary layer nu/|a| is thinner than
    `layer_cells` cells.
    """

    n_cells: int
    n_steps: Optional[int] = None
    peclet_limit: float = 2.0
    layer_cells: float = 5.0

    def grids(self, spec: ProblemSpec) -> Tuple[Grid, TimeGrid]:
        return build_grids(spec, self.n_cells, self.n_steps)

    def peclet(self, spec: ProblemSpec, grid: Grid) -> float:
        return abs(spec.a) * grid.dx / spec.nu

    def is_resolved(self, spec: ProblemSpec, grid: Grid) -> bool:
        if self.peclet(spec, grid) > self.peclet_limit:
            return False
        if spec.a < 0 and spec.nu / abs(spec.a) < self.layer_cells * grid.dx:
            return False
        return True


@dataclass
class ErrorRecord:
    """Errors of one (nu, method) run against the monodomain reference"""

    nu: float
    method: CouplingMethod
    err_omega1: float
    err_omega2: float
    peclet: float
    resolved: bool
    n_cells: int = 0
    n_steps: int = 0
    iterations: int = 0
    error: Optional[str] = None

    @property
    def label(self) -> str:
        return self.method.label

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_row(self) -> Dict[str, Any]:
        return {
            'nu': self.nu,
            'method': self.label,
            'err_omega1': self.err_omega1,
            'err_omega2': self.err_omega2,
            'peclet': self.peclet,
            'resolved': self.resolved,
        }


@dataclass
class SweepResult:
    records: List[ErrorRecord] = field(default_factory=list)
    errors: List[Dict[str, Any]] = field(default_factory=list)


def _method_record(spec: ProblemSpec, grid: Grid, time: TimeGrid, reference: Field,
                   method: CouplingMethod, options: Dict[str, Any]) -> ErrorRecord:
    omega1, omega2 = subdomain_grids(grid)
    if method.kind is MethodKind.MONODOMAIN:
        err1 = err2 = 0.0
        iterations = 0
    else:
        solution = solve(spec, grid, time, method, **options)
        err1 = l2_spacetime(reference.restrict(omega1) - solution.u_ad)
        err2 = l2_spacetime(reference.restrict(omega2) - solution.u_a)
        iterations = solution.diagnostics.iterations
    return ErrorRecord(spec.nu, method, err1, err2, 0.0, True, grid.n_cells, time.n_steps, iterations)


def _sweep_nu(template: ProblemSpec, nu: float, methods: Sequence[CouplingMethod], policy: GridPolicy,
              options: Dict[str, Any]) -> SweepResult:
    """All methods at one nu, sharing one reference solve"""
    spec = template.with_nu(nu)
    grid, time = policy.grids(spec)
    peclet = policy.peclet(spec, grid)
    resolved = policy.is_resolved(spec, grid)
    if not resolved:
        logger.log_solver_warning('unresolved', nu=nu, peclet=peclet, dx=grid.dx)

    tracker = ErrorTracker()
    result = SweepResult()
    with ErrorContext('sweep_nu', nu=nu, n_cells=grid.n_cells):
        reference = reference_field(spec, grid, time)
        for method in methods:
            context = {'nu': nu, 'method': method.label}
            guarded = handle_errors(
                (SolverError, ValueError),
                on_error=lambda e, _, context=context: tracker.track_error(e, context)
            )(_method_record)
            record = guarded(spec, grid, time, reference, method, options)
            if record is None:
                record = ErrorRecord(nu, method, math.nan, math.nan, 0.0, resolved,
                                     grid.n_cells, time.n_steps, 0, tracker.errors[-1]['message'])
            result.records.append(replace(record, peclet=peclet, resolved=resolved))
    result.errors = tracker.errors
    return result


def default_jobs() -> int:
    if hasattr(os, 'sched_getaffinity'):
        return max(1, len(os.sched_getaffinity(0)))
    return os.cpu_count() or 1


def run_sweep(template: ProblemSpec, nu_list: Sequence[float], methods: Sequence[CouplingMethod],
              policy: GridPolicy, jobs: int = 1, tracker: Optional[ErrorTracker] = None,
              **options) -> List[ErrorRecord]:
    """
    Errors of every method against the monodomain reference for each nu.

    Args:
        template: Problem setup; nu is replaced by each sweep value
        nu_list: Viscosities, in output order
        methods: Coupling methods, in output order
        policy: Grid choice and resolution test
        jobs: Worker processes; 1 runs in-process
        tracker: Receives the failures of individual runs
        **options: Coupling options (initial_guess, neg_data)

    Returns:
        Records ordered by (nu position, method position); failed runs keep
        nan errors and their message
    """
    if not nu_list:
        return []
    methods = list(methods)
    if jobs > 1 and len(nu_list) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(nu_list))) as pool:
            futures = [pool.submit(_sweep_nu, template, nu, methods, policy, options) for nu in nu_list]
            results = [future.result() for future in futures]
    else:
        results = [_sweep_nu(template, nu, methods, policy, options) for nu in nu_list]

    records: List[ErrorRecord] = []
    for result in results:
        records.extend(result.records)
        if tracker is not None:
            tracker.merge(result.errors)
    logger.info("Sweep finished", event_type='operation_complete', operation='run_sweep',
                records=len(records), failed=sum(r.failed for r in records))
    return records


def slopes_by_method(records: Sequence[ErrorRecord], region: str, resolved_only: bool = True,
                     above_floor: bool = False) -> Dict[str, SlopeFit]:
    """
    Slope fits of one error column per method label.

    Methods with fewer than two usable points (positive, finite, resolved)
    are left out.
    """
    column = {'omega1': 'err_omega1', 'omega2': 'err_omega2'}[region]
    grouped: Dict[str, List[Tuple[float, float]]] = {}
    for record in records:
        if resolved_only and not record.resolved:
            continue
        err = getattr(record, column)
        grouped.setdefault(record.label, [])
        if np.isfinite(err) and err > 0:
            grouped[record.label].append((record.nu, err))

    fits = {}
    for label, points in grouped.items():
        if len({nu for nu, _ in points}) < 2:
            continue
        fits[label] = fit_slope_above_floor(points) if above_floor else fit_slope(points)
    return fits


def transport_energy_ratio(spec: TransportSpec, field: Field) -> float:
    """
    Ratio of the two sides of the transport energy estimate

        eta ||v||^2 <= ||p||^2/eta + ||h||^2 + |b| ||g||^2

    with trapezoidal norms; at most about 1 for a stable solve.
    """
    if not spec.eta > 0:
        raise ValueError("the energy estimate needs eta > 0")
    dx, dt = field.grid.dx, field.time.dt
    lhs = spec.eta * l2_spacetime(field) ** 2
    p = tabulate(spec.rhs, spec.grid, spec.time)
    rhs = (trapezoid(trapezoid(p ** 2, dx=dx, axis=1), dx=dt) / spec.eta
           + trapezoid(spec.initial ** 2, dx=dx)
           + abs(spec.b) * trapezoid(spec.inflow.values ** 2, dx=dt))
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return float(lhs / rhs)
