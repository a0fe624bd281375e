"""
Domain types shared by every solver

Problem setup, uniform space and time grids, space-time fields, interface
traces, coupling method tags and the coupled solution container.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from data_functions import DataSpec, Zero

# Relative tolerance used to decide that a length is an integer number of cells
ALIGNMENT_TOL = 1e-9


class MethodKind(Enum):
    """Enumeration for the coupling strategies"""
    MONODOMAIN = "monodomain"
    FACTORIZATION = "factorization"
    VARIATIONAL = "variational"
    NON_VARIATIONAL = "non_variational"


@dataclass(frozen=True)
class ProblemSpec:
    """
    Physical setup of the advection reaction diffusion problem on
    (-l1, l2) x (0, t_final).
    """

    a: float
    nu: float
    c: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    t_final: float = 1.0
    f: DataSpec = field(default_factory=Zero)
    g1: DataSpec = field(default_factory=Zero)
    g2: DataSpec = field(default_factory=Zero)
    h: DataSpec = field(default_factory=Zero)

    @property
    def eta_modified(self) -> float:
        """Reaction coefficient of the modified advection operator, c + a^2/nu"""
        return self.c + self.a ** 2 / self.nu

    @property
    def domain(self) -> Tuple[float, float, float]:
        return (-self.l1, self.l2, self.t_final)

    def with_nu(self, nu: float) -> 'ProblemSpec':
        return replace(self, nu=nu)


@dataclass(frozen=True)
class Grid:
    """Uniform subdivision of [x_min, x_max] into n_cells cells"""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be a positive integer")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def nodes(self) -> np.ndarray:
        nodes = self.x_min + self.dx * np.arange(self.n_nodes)
        nodes[-1] = self.x_max
        return nodes

    def cells_to(self, x: float) -> float:
        """Distance from x_min to x in units of dx"""
        return (x - self.x_min) / self.dx

    def is_node(self, x: float) -> bool:
        k = self.cells_to(x)
        return abs(k - round(k)) <= ALIGNMENT_TOL * max(1.0, abs(k)) and 0 <= round(k) <= self.n_cells

    def index_of(self, x: float) -> int:
        """Index of the node at x"""
        if not self.is_node(x):
            raise ValueError(f"x={x} is not a node of the grid")
        return int(round(self.cells_to(x)))

    def restrict(self, x_lo: float, x_hi: float) -> 'Grid':
        """Sub-grid over [x_lo, x_hi] sharing the nodes of this grid"""
        i_lo = self.index_of(x_lo)
        i_hi = self.index_of(x_hi)
        return Grid(x_lo, x_hi, i_hi - i_lo)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time levels t_n = n dt, n = 0..n_steps, with t_{n_steps} = t_final"""

    t_final: float
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be a positive integer")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps

    @property
    def n_levels(self) -> int:
        return self.n_steps + 1

    @property
    def times(self) -> np.ndarray:
        times = self.dt * np.arange(self.n_levels)
        times[-1] = self.t_final
        return times

    def nearest_level(self, t: float) -> int:
        return int(min(max(round(t / self.dt), 0), self.n_steps))


def _readonly(values: np.ndarray) -> np.ndarray:
    # Solvers hand their arrays over; no copy is taken
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class Trace:
    """Time series sampled at a fixed location"""

    time: TimeGrid
    values: np.ndarray
    location: float

    def __post_init__(self):
        object.__setattr__(self, 'values', _readonly(self.values))
        if self.values.shape != (self.time.n_levels,):
            raise ValueError(
                f"trace length {self.values.shape} does not match {self.time.n_levels} time levels"
            )

    @classmethod
    def zeros(cls, time: TimeGrid, location: float) -> 'Trace':
        return cls(time, np.zeros(time.n_levels), location)

    @classmethod
    def from_data(cls, data: DataSpec, time: TimeGrid, location: float) -> 'Trace':
        return cls(time, np.asarray(data.value(location, time.times), dtype=float), location)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values over one (sub)domain, one row per time level"""

    grid: Grid
    time: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _readonly(self.values))
        expected = (self.time.n_levels, self.grid.n_nodes)
        if self.values.shape != expected:
            raise ValueError(f"field shape {self.values.shape} does not match grid {expected}")

    @classmethod
    def zeros(cls, grid: Grid, time: TimeGrid) -> 'Field':
        return cls(grid, time, np.zeros((time.n_levels, grid.n_nodes)))

    def trace_at(self, x: float) -> Trace:
        """Time series at the node x"""
        return Trace(self.time, self.values[:, self.grid.index_of(x)], x)

    def restrict(self, grid: Grid) -> 'Field':
        """Field restricted to a sub-grid sharing its nodes"""
        i_lo = self.grid.index_of(grid.x_min)
        i_hi = self.grid.index_of(grid.x_max)
        return Field(grid, self.time, self.values[:, i_lo:i_hi + 1])

    def __sub__(self, other: 'Field') -> 'Field':
        if self.grid != other.grid or self.time != other.time:
            raise ValueError("fields live on different grids")
        return Field(self.grid, self.time, self.values - other.values)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True)
class CouplingMethod:
    """
    Tagged choice of coupling strategy.

    Labels: monodomain, factorization_k<k>, variational, non_variational.
    A theta of None selects the heuristic relaxation 1/(450 sqrt(nu)).
    """

    kind: MethodKind
    k_iters: int = 1
    theta: Optional[float] = None
    max_iters: int = 200
    tol: float = 1e-8

    def __post_init__(self):
        if self.kind is MethodKind.FACTORIZATION and self.k_iters < 1:
            raise ValueError("factorization needs k_iters >= 1")
        if self.kind is MethodKind.NON_VARIATIONAL:
            if not self.tol > 0:
                raise ValueError("non-variational tolerance must be positive")
            if self.max_iters < 1:
                raise ValueError("non-variational max_iters must be positive")
            if self.theta is not None and not 0.0 < self.theta <= 1.0:
                raise ValueError("relaxation theta must lie in (0, 1]")

    @classmethod
    def monodomain(cls) -> 'CouplingMethod':
        return cls(MethodKind.MONODOMAIN)

    @classmethod
    def factorization(cls, k_iters: int = 1) -> 'CouplingMethod':
        return cls(MethodKind.FACTORIZATION, k_iters=k_iters)

    @classmethod
    def variational(cls) -> 'CouplingMethod':
        return cls(MethodKind.VARIATIONAL)

    @classmethod
    def non_variational(cls, theta: Optional[float] = None, max_iters: int = 200,
                        tol: float = 1e-8) -> 'CouplingMethod':
        return cls(MethodKind.NON_VARIATIONAL, theta=theta, max_iters=max_iters, tol=tol)

    @classmethod
    def from_label(cls, label: str, **options) -> 'CouplingMethod':
        """
        Parse a method label.

        Args:
            label: e.g. 'factorization_k2' or 'non_variational'
            **options: theta, max_iters, tol for the non-variational method

        Returns:
            CouplingMethod

        Raises:
            ValueError: If the label is unknown
        """
        label = label.strip().lower()
        if label == 'monodomain':
            return cls.monodomain()
        if label == 'variational':
            return cls.variational()
        if label == 'non_variational':
            return cls.non_variational(**options)
        if label == 'factorization':
            return cls.factorization(1)
        if label.startswith('factorization_k'):
            try:
                return cls.factorization(int(label[len('factorization_k'):]))
            except ValueError:
                pass
        raise ValueError(f"Unknown coupling method: {label}")

    @property
    def label(self) -> str:
        if self.kind is MethodKind.FACTORIZATION:
            return f"factorization_k{self.k_iters}"
        return self.kind.value

    def relaxation(self, nu: float) -> float:
        """Relaxation parameter, clamped to (0, 1]"""
        theta = self.theta if self.theta is not None else 1.0 / (450.0 * math.sqrt(nu))
        return min(max(theta, np.finfo(float).tiny), 1.0)


@dataclass
class CouplingDiagnostics:
    """Per-iteration interface data of a coupled solve"""

    iterations: int = 0
    converged: bool = True
    interface_traces: List[Trace] = field(default_factory=list)
    increments: List[float] = field(default_factory=list)
    auxiliary_traces: dict = field(default_factory=dict)


@dataclass
class CoupledSolution:
    """u_ad on (-l1, 0) and u_a on (0, l2), abutting at x = 0"""

    u_ad: Field
    u_a: Field
    diagnostics: CouplingDiagnostics = field(default_factory=CouplingDiagnostics)

    def __post_init__(self):
        if self.u_ad.time != self.u_a.time:
            raise ValueError("subdomain fields must share the time grid")
        if not math.isclose(self.u_ad.grid.x_max, self.u_a.grid.x_min, abs_tol=1e-12):
            raise ValueError("subdomain grids must abut at the interface")


def build_grids(spec: ProblemSpec, n_cells: int, n_steps: Optional[int] = None) -> Tuple[Grid, TimeGrid]:
    """
    Global grid over (-l1, l2) and time grid; dt = dx unless n_steps is given.
    """
    grid = Grid(-spec.l1, spec.l2, n_cells)
    if n_steps is None:
        n_steps = max(1, int(round(spec.t_final / grid.dx)))
    return grid, TimeGrid(spec.t_final, n_steps)


def subdomain_grids(grid: Grid) -> Tuple[Grid, Grid]:
    """Restrictions of the global grid to (x_min, 0) and (0, x_max)"""
    return grid.restrict(grid.x_min, 0.0), grid.restrict(0.0, grid.x_max)
