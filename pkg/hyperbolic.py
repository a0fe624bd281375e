"""
Implicit upwind solver for the transport problem

    dv/dt + b dv/dx + eta v = p   on (x_min, x_max) x (0, T)

with inflow data at x_min (b > 0) or x_max (b < 0), plus the exact solution
along characteristics used as an oracle.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numba import njit
from scipy import integrate

from error_handling_decorators import NonFiniteError, QuadratureError, ensure_finite, performance_monitor
from models import Field, Grid, TimeGrid, Trace
from structured_logging import get_logger

logger = get_logger(__name__)

# Sampler p(x_nodes, t) -> values, or a table of shape (n_levels, n_nodes)
Source = Union[Callable[[np.ndarray, float], np.ndarray], np.ndarray, None]

CORNER_TOL = 1e-10


def tabulate(source: Source, grid: Grid, time: TimeGrid) -> np.ndarray:
    """Nodal table of a source, shape (n_levels, n_nodes)"""
    shape = (time.n_levels, grid.n_nodes)
    if source is None:
        return np.zeros(shape)
    if isinstance(source, np.ndarray):
        if source.shape != shape:
            raise ValueError(f"source table has shape {source.shape}, expected {shape}")
        return source
    nodes = grid.nodes
    table = np.empty(shape)
    for n, t in enumerate(time.times):
        table[n] = source(nodes, t)
    return table


@dataclass(frozen=True, eq=False)
class TransportSpec:
    """
    Transport problem on one interval.

    `inflow_fn` and `initial_fn` are the exact data used by the
    characteristics oracle; without them the oracle interpolates the
    nodal `inflow` and `initial` linearly.
    """

    b: float
    eta: float
    grid: Grid
    time: TimeGrid
    inflow: Trace
    initial: np.ndarray
    rhs: Source = None
    inflow_fn: Optional[Callable[[float], float]] = None
    initial_fn: Optional[Callable[[float], float]] = None
    rhs_fn: Optional[Callable[[float, float], float]] = None

    def __post_init__(self):
        if self.b == 0 or not np.isfinite(self.b):
            raise ValueError("transport speed b must be nonzero")
        if self.eta < 0:
            raise ValueError("reaction eta must be nonnegative")
        if self.inflow.time != self.time:
            raise ValueError("inflow trace lives on a different time grid")
        if not np.isclose(self.inflow.location, self.inflow_location, rtol=0.0, atol=1e-12):
            raise ValueError(
                f"inflow located at {self.inflow.location}, expected {self.inflow_location} for b={self.b}"
            )
        initial = np.asarray(self.initial, dtype=float)
        if initial.shape != (self.grid.n_nodes,):
            raise ValueError("initial values do not match the grid")
        object.__setattr__(self, 'initial', initial)

    @property
    def inflow_location(self) -> float:
        return self.grid.x_min if self.b > 0 else self.grid.x_max

    @property
    def inflow_index(self) -> int:
        return 0 if self.b > 0 else self.grid.n_cells


@njit(cache=True)
def _upwind_sweeps(values, rhs, inflow, sigma, eta_dt, dt):
    """
    Backward Euler upwind steps for a positive speed, in place.

    values[0] holds the initial condition; inflow node is column 0.
    """
    n_levels, n_nodes = values.shape
    denom = 1.0 + sigma + eta_dt
    for n in range(1, n_levels):
        values[n, 0] = inflow[n]
        for j in range(1, n_nodes):
            values[n, j] = (values[n - 1, j] + dt * rhs[n, j] + sigma * values[n, j - 1]) / denom


@ensure_finite('solve_transport')
@performance_monitor(threshold_ms=2000.0)
def solve_transport(spec: TransportSpec) -> Field:
    """
    Implicit upwind solution of the transport problem.

    For b > 0 each step solves, for j = 1..n_cells,
        (v_j^{n+1} - v_j^n)/dt + b (v_j^{n+1} - v_{j-1}^{n+1})/dx + eta v_j^{n+1} = p(x_j, t_{n+1})
    with v_0^{n+1} = inflow(t_{n+1}) by one sweep from the inflow node; the
    stencil is mirrored for b < 0.

    Args:
        spec: Transport problem

    Returns:
        Field whose row 0 is the initial condition

    Raises:
        NonFiniteError: If the sweep produced NaN/inf
    """
    grid, time = spec.grid, spec.time
    corner = spec.initial[spec.inflow_index] - spec.inflow.values[0]
    if abs(corner) > CORNER_TOL * max(1.0, float(np.max(np.abs(spec.initial), initial=0.0))):
        logger.log_solver_warning(
            'corner_incompatibility',
            location=spec.inflow_location,
            mismatch=float(corner)
        )

    rhs = tabulate(spec.rhs, grid, time)
    values = np.empty((time.n_levels, grid.n_nodes))
    values[0] = spec.initial
    sigma = abs(spec.b) * time.dt / grid.dx
    inflow = np.ascontiguousarray(spec.inflow.values)

    if spec.b > 0:
        _upwind_sweeps(values, np.ascontiguousarray(rhs), inflow, sigma, spec.eta * time.dt, time.dt)
    else:
        # Mirror so that the inflow node comes first
        mirrored = np.ascontiguousarray(values[:, ::-1])
        _upwind_sweeps(mirrored, np.ascontiguousarray(rhs[:, ::-1]), inflow, sigma,
                       spec.eta * time.dt, time.dt)
        values = np.ascontiguousarray(mirrored[:, ::-1])

    if not np.all(np.isfinite(values)):
        raise NonFiniteError("transport sweep produced non-finite values")
    return Field(grid, time, values)


def _exact_inflow(spec: TransportSpec) -> Callable[[float], float]:
    if spec.inflow_fn is not None:
        return spec.inflow_fn
    times, data = spec.time.times, spec.inflow.values
    return lambda t: float(np.interp(t, times, data))


def _exact_initial(spec: TransportSpec) -> Callable[[float], float]:
    if spec.initial_fn is not None:
        return spec.initial_fn
    nodes, data = spec.grid.nodes, spec.initial
    return lambda x: float(np.interp(x, nodes, data))


def characteristics_oracle(spec: TransportSpec, x: float, t: float, tol: float = 1e-10,
                           breaks: Sequence[float] = ()) -> float:
    """
    Exact weak solution along characteristics.

        v(x, t) = h(x - b t) e^{-eta t}                   for t < tau(x)
                  g(t - tau(x)) e^{-eta tau(x)}          for t > tau(x)
                  + int_{(t - tau(x))^+}^t p(x - b (t - s), s) e^{-eta (t - s)} ds

    with tau(x) = (x - x_inflow)/b the travel time from the inflow boundary.

    Args:
        spec: Transport problem; `rhs_fn(x, t)` gives the exact source
        x: Position in the closed domain
        t: Time in [0, T]
        tol: Absolute and relative quadrature tolerance
        breaks: Times where the source has a kink, passed to the quadrature

    Returns:
        v(x, t)

    Raises:
        QuadratureError: If the adaptive quadrature does not converge
    """
    b, eta = spec.b, spec.eta
    tau = (x - spec.inflow_location) / b
    if t < tau:
        value = _exact_initial(spec)(x - b * t) * np.exp(-eta * t)
    else:
        value = _exact_inflow(spec)(t - tau) * np.exp(-eta * tau)

    start = max(t - tau, 0.0)
    if spec.rhs_fn is None or t <= start:
        return float(value)

    p = spec.rhs_fn

    def integrand(s):
        return p(x - b * (t - s), s) * np.exp(-eta * (t - s))

    points = [s for s in breaks if start < s < t] or None
    result = integrate.quad(integrand, start, t, epsabs=tol, epsrel=tol, limit=200,
                            points=points, full_output=1)
    if len(result) > 3:
        raise QuadratureError(f"quadrature failed at x={x}, t={t}: {result[3]}")
    return float(value + result[0])
