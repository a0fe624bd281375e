"""
Building blocks shared by the coupling strategies

Samplers for the problem data, the transport solve on the right subdomain,
the viscous solve on the left subdomain and the monodomain reference.
"""

from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid

from data_functions import DataSpec
from hyperbolic import Source, TransportSpec, solve_transport
from models import Field, Grid, ProblemSpec, TimeGrid, Trace
from parabolic import Absorbing, AdvDiffSpec, BoundaryCondition, Dirichlet, solve_advdiff


def sampler(data: DataSpec) -> Callable[[np.ndarray, float], np.ndarray]:
    """Nodal sampler x_nodes, t -> data(x_nodes, t)"""
    def sample(nodes: np.ndarray, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(data.value(nodes, t), dtype=float), nodes.shape)
    return sample


def trace_norm(trace: Trace) -> float:
    """Trapezoidal L2 norm in time"""
    return float(np.sqrt(trapezoid(trace.values ** 2, dx=trace.time.dt)))


def initial_values(data: DataSpec, grid: Grid) -> np.ndarray:
    nodes = grid.nodes
    return np.broadcast_to(np.asarray(data.value(nodes, 0.0), dtype=float), nodes.shape).copy()


def transport_right(spec: ProblemSpec, omega2: Grid, time: TimeGrid, speed: float, eta: float,
                    inflow: Trace, initial: np.ndarray, rhs: Source) -> Field:
    """Implicit upwind solve of (d/dt + speed d/dx + eta) v = rhs on the right subdomain"""
    return solve_transport(TransportSpec(
        b=speed, eta=eta, grid=omega2, time=time, inflow=inflow, initial=initial, rhs=rhs
    ))


def inviscid_right(spec: ProblemSpec, omega2: Grid, time: TimeGrid, inflow: Trace,
                   forcing: Source = None) -> Field:
    """L_a u_a = f on the right subdomain, initial h; `forcing` is an optional table of f"""
    return transport_right(spec, omega2, time, spec.a, spec.c, inflow, initial_values(spec.h, omega2),
                           sampler(spec.f) if forcing is None else forcing)


def viscous_left(spec: ProblemSpec, omega1: Grid, time: TimeGrid, right_bc: BoundaryCondition,
                 forcing: Source = None) -> Field:
    """L_ad u_ad = f on the left subdomain with Dirichlet g1 and the given interface condition"""
    return solve_advdiff(AdvDiffSpec(
        a=spec.a, nu=spec.nu, c=spec.c, grid=omega1, time=time,
        left_bc=Dirichlet(Trace.from_data(spec.g1, time, omega1.x_min)),
        right_bc=right_bc,
        initial=initial_values(spec.h, omega1),
        rhs=sampler(spec.f) if forcing is None else forcing
    ))


def reference_field(spec: ProblemSpec, grid: Grid, time: TimeGrid) -> Field:
    """
    Viscous solution on the whole domain.

    Dirichlet g1 on the left; on the right the absorbing condition for a > 0
    and Dirichlet g2 for a < 0.
    """
    g2 = Trace.from_data(spec.g2, time, grid.x_max)
    right_bc: BoundaryCondition = Absorbing(g2) if spec.a > 0 else Dirichlet(g2)
    return viscous_left(spec, grid, time, right_bc)


def inflow_trace(spec: ProblemSpec, time: TimeGrid, location: float,
                 guess: Optional[Trace] = None) -> Trace:
    if guess is None:
        return Trace.zeros(time, location)
    if guess.time != time:
        raise ValueError("initial guess lives on a different time grid")
    return Trace(time, guess.values, location)
