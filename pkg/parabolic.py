"""
Crank-Nicolson solver for the advection reaction diffusion operator

    du/dt - nu d2u/dx2 + a du/dx + c u = f   on (x_min, x_max) x (0, T)

with a Dirichlet condition at x_min and a choice of boundary operators at
x_max, plus the tridiagonal kernel each time step reduces to.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numba import njit

from error_handling_decorators import NonFiniteError, SingularMatrixError, ensure_finite, performance_monitor
from hyperbolic import Source, tabulate
from models import Field, Grid, TimeGrid, Trace
from structured_logging import get_logger

logger = get_logger(__name__)

PECLET_LIMIT = 2.0

# Discretizations of the operator conditions at x_max
BOUNDARY_ROWS = ('ghost', 'one_sided')


@dataclass(frozen=True, eq=False)
class Tridiagonal:
    """Tridiagonal matrix stored by its three diagonals"""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        for name in ('sub', 'diag', 'sup'):
            object.__setattr__(self, name, np.ascontiguousarray(getattr(self, name), dtype=float))
        n = self.diag.shape[0]
        if n < 1 or self.sub.shape != (n - 1,) or self.sup.shape != (n - 1,):
            raise ValueError(
                f"inconsistent diagonals: sub {self.sub.shape}, diag {self.diag.shape}, sup {self.sup.shape}"
            )

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def dot(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.diag * x
        out[1:] += self.sub * x[:-1]
        out[:-1] += self.sup * x[1:]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)


@njit(cache=True)
def _thomas(sub, diag, sup, rhs, out, work):
    """
    Forward elimination and back substitution into `out`.

    Returns the row of the first zero pivot, or -1.
    """
    n = diag.shape[0]
    pivot = diag[0]
    if pivot == 0.0:
        return 0
    out[0] = rhs[0] / pivot
    for i in range(1, n):
        work[i] = sup[i - 1] / pivot
        pivot = diag[i] - sub[i - 1] * work[i]
        if pivot == 0.0:
            return i
        out[i] = (rhs[i] - sub[i - 1] * out[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        out[i] -= work[i + 1] * out[i + 1]
    return -1


def thomas_solve(m: Tridiagonal, rhs: np.ndarray) -> np.ndarray:
    """
    Solve m x = rhs by the Thomas algorithm.

    Raises:
        SingularMatrixError: On a zero pivot
    """
    rhs = np.ascontiguousarray(rhs, dtype=float)
    if rhs.shape != (m.n,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({m.n},)")
    out = np.empty(m.n)
    row = _thomas(m.sub, m.diag, m.sup, rhs, out, np.empty(m.n))
    if row >= 0:
        raise SingularMatrixError(f"zero pivot in row {row}", row=row)
    return out


@dataclass(frozen=True, eq=False)
class Dirichlet:
    """u = g"""
    trace: Trace


@dataclass(frozen=True, eq=False)
class Absorbing:
    """(d/dt + a d/dx + c) u = g, the outflow condition for a > 0"""
    trace: Trace


@dataclass(frozen=True, eq=False)
class AdvectionFlux:
    """(d/dt + a d/dx + c) u = g at the interface"""
    trace: Trace


@dataclass(frozen=True, eq=False)
class TransportRobin:
    """(d/dt - a d/dx + c + a^2/nu) u = g at the interface"""
    trace: Trace


@dataclass(frozen=True, eq=False)
class Neumann:
    """du/dx = g"""
    trace: Trace


@dataclass(frozen=True, eq=False)
class Robin:
    """-nu du/dx + a u = g"""
    trace: Trace


BoundaryCondition = Union[Dirichlet, Absorbing, AdvectionFlux, TransportRobin, Neumann, Robin]


@dataclass(frozen=True, eq=False)
class AdvDiffSpec:
    """Advection reaction diffusion problem on one interval"""

    a: float
    nu: float
    c: float
    grid: Grid
    time: TimeGrid
    left_bc: Dirichlet
    right_bc: BoundaryCondition
    initial: np.ndarray
    rhs: Source = None
    boundary_rows: str = 'ghost'

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not isinstance(self.left_bc, Dirichlet):
            raise ValueError("left boundary must be Dirichlet")
        if self.grid.n_cells < 2:
            raise ValueError("at least two cells are needed")
        if self.boundary_rows not in BOUNDARY_ROWS:
            raise ValueError(f"boundary_rows must be one of {BOUNDARY_ROWS}, got {self.boundary_rows!r}")
        for side, bc in (('left', self.left_bc), ('right', self.right_bc)):
            if bc.trace.time != self.time:
                raise ValueError(f"{side} boundary trace lives on a different time grid")
        # Operator conditions at x_max must transport out of the interval
        if isinstance(self.right_bc, (Absorbing, AdvectionFlux)) and not self.a > 0:
            raise ValueError(f"{type(self.right_bc).__name__} condition at x_max needs a > 0, got a={self.a}")
        if isinstance(self.right_bc, TransportRobin) and not self.a < 0:
            raise ValueError(f"TransportRobin condition at x_max needs a < 0, got a={self.a}")
        initial = np.asarray(self.initial, dtype=float)
        if initial.shape != (self.grid.n_nodes,):
            raise ValueError("initial values do not match the grid")
        object.__setattr__(self, 'initial', initial)

    @property
    def peclet(self) -> float:
        return abs(self.a) * self.grid.dx / self.nu


def _operator_row(spec: AdvDiffSpec, speed: float, eta: float) -> Tuple[float, float, float, float]:
    """
    Boundary row for (d/dt + speed d/dx + eta) u = g, speed > 0.

    'ghost': the ghost value beyond x_max is eliminated between the
    interior equation and the boundary condition, which leaves
        (1 - k) u_t + 2 nu/dx^2 (u_N - u_{N-1}) + (c - k eta) u_N = f - k g,
        k = (a - 2 nu/dx) / speed,
    normalized here by 1 - k > 0. For speed = a this is the one-sided row
    below with right-hand side (Pe/2) f + (1 - Pe/2) g.

    'one_sided': the condition itself with a backward difference,
        u_t + speed (u_N - u_{N-1}) / dx + eta u_N = g.
    """
    dx = spec.grid.dx
    if spec.boundary_rows == 'one_sided':
        return (speed / dx, eta, 0.0, 1.0)
    kappa = (spec.a - 2.0 * spec.nu / dx) / speed
    scale = 1.0 - kappa
    return (2.0 * spec.nu / dx ** 2 / scale, (spec.c - kappa * eta) / scale, 1.0 / scale, -kappa / scale)


def _boundary_row(spec: AdvDiffSpec) -> Tuple[float, float, float, float]:
    """
    Coefficients (p, q, w_f, w_g) of the right boundary row

        u_t + p (u_N - u_{N-1}) + q u_N = w_f f_N + w_g g
    """
    bc, a, nu, c, dx = spec.right_bc, spec.a, spec.nu, spec.c, spec.grid.dx
    if isinstance(bc, (Absorbing, AdvectionFlux)):
        return _operator_row(spec, a, c)
    if isinstance(bc, TransportRobin):
        return _operator_row(spec, -a, c + a ** 2 / nu)
    if isinstance(bc, Neumann):
        return (2.0 * nu / dx ** 2, c, 1.0, 2.0 * nu / dx - a)
    if isinstance(bc, Robin):
        return (2.0 * nu / dx ** 2, c - 2.0 * a / dx + a ** 2 / nu, 1.0, a / nu - 2.0 / dx)
    raise TypeError(f"unsupported boundary condition {type(bc).__name__}")


def step_matrices(spec: AdvDiffSpec) -> Tuple[Tridiagonal, Tridiagonal]:
    """
    Implicit and explicit Crank-Nicolson matrices (I/dt + M/2, I/dt - M/2).

    Dirichlet rows are identity rows in the implicit matrix and zero rows in
    the explicit one.
    """
    n = spec.grid.n_nodes
    dx, dt = spec.grid.dx, spec.time.dt
    nu, a, c = spec.nu, spec.a, spec.c

    lower = -nu / dx ** 2 - a / (2.0 * dx)
    centre = 2.0 * nu / dx ** 2 + c
    upper = -nu / dx ** 2 + a / (2.0 * dx)

    m_sub = np.full(n - 1, lower)
    m_diag = np.full(n, centre)
    m_sup = np.full(n - 1, upper)
    m_sub[-1] = m_diag[-1] = m_sup[0] = 0.0
    m_diag[0] = 0.0

    if not isinstance(spec.right_bc, Dirichlet):
        p, q, _, _ = _boundary_row(spec)
        m_sub[-1] = -p
        m_diag[-1] = p + q

    implicit = Tridiagonal(0.5 * m_sub, 1.0 / dt + 0.5 * m_diag, 0.5 * m_sup)
    explicit = Tridiagonal(-0.5 * m_sub, 1.0 / dt - 0.5 * m_diag, -0.5 * m_sup)

    # Dirichlet rows
    implicit.diag[0], implicit.sup[0] = 1.0, 0.0
    explicit.diag[0], explicit.sup[0] = 0.0, 0.0
    if isinstance(spec.right_bc, Dirichlet):
        implicit.diag[-1], implicit.sub[-1] = 1.0, 0.0
        explicit.diag[-1], explicit.sub[-1] = 0.0, 0.0
    return implicit, explicit


@njit(cache=True)
def _cn_steps(values, forcing, sub, diag, sup, e_sub, e_diag, e_sup):
    """
    March values[0] forward; forcing[n] is the full right-hand side
    contribution of step n -> n+1 except the explicit matrix product.

    Returns the failing (step, row) or (-1, -1).
    """
    n_levels, n = values.shape
    rhs = np.empty(n)
    work = np.empty(n)
    out = np.empty(n)
    for k in range(n_levels - 1):
        prev = values[k]
        for i in range(n):
            acc = e_diag[i] * prev[i] + forcing[k, i]
            if i > 0:
                acc += e_sub[i - 1] * prev[i - 1]
            if i < n - 1:
                acc += e_sup[i] * prev[i + 1]
            rhs[i] = acc
        row = _thomas(sub, diag, sup, rhs, out, work)
        if row >= 0:
            return k, row
        values[k + 1, :] = out
    return -1, -1


@ensure_finite('solve_advdiff')
@performance_monitor(threshold_ms=2000.0)
def solve_advdiff(spec: AdvDiffSpec) -> Field:
    """
    Crank-Nicolson solution of the advection reaction diffusion problem.

    Interior rows use centered differences for both spatial derivatives.
    Non-Dirichlet conditions at x_max are imposed through a ghost node
    eliminated with the boundary condition, or for the transport operator
    conditions with spec.boundary_rows='one_sided' by a backward
    difference. Each step is a single tridiagonal solve.

    Args:
        spec: Problem on one interval

    Returns:
        Field whose row 0 is the initial condition

    Raises:
        SingularMatrixError: If a step matrix has a zero pivot
        NonFiniteError: If the solution holds NaN/inf
    """
    grid, time = spec.grid, spec.time
    if spec.peclet > PECLET_LIMIT:
        logger.log_solver_warning('peclet', peclet=spec.peclet, nu=spec.nu, dx=grid.dx)

    implicit, explicit = step_matrices(spec)
    f = tabulate(spec.rhs, grid, time)
    forcing = 0.5 * (f[1:] + f[:-1])

    g_left = spec.left_bc.trace.values
    g_right = spec.right_bc.trace.values
    forcing[:, 0] = g_left[1:]
    if isinstance(spec.right_bc, Dirichlet):
        forcing[:, -1] = g_right[1:]
    else:
        _, _, w_f, w_g = _boundary_row(spec)
        forcing[:, -1] = w_f * forcing[:, -1] + 0.5 * w_g * (g_right[1:] + g_right[:-1])

    values = np.empty((time.n_levels, grid.n_nodes))
    values[0] = spec.initial
    step, row = _cn_steps(values, np.ascontiguousarray(forcing), implicit.sub, implicit.diag, implicit.sup,
                          explicit.sub, explicit.diag, explicit.sup)
    if step >= 0:
        raise SingularMatrixError(f"zero pivot in row {row} at step {step}", row=row)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("Crank-Nicolson step produced non-finite values")
    return Field(grid, time, values)
