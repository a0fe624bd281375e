"""
Factorization coupling

For a > 0 the interface condition of the viscous subdomain is the trace of
an auxiliary modified advection solve, iterated k times from an initial
guess of the interface trace. For a < 0 the same idea runs once, with the
auxiliary solve in the direction of the flow.
"""

from typing import Optional

import numpy as np

from couplings.base_coupling import BaseCoupling
from couplings.operators import apply_remainder
from couplings.stages import (inflow_trace, inviscid_right, reference_field, sampler,
                              trace_norm, transport_right, viscous_left)
from error_handling_decorators import DataSpecError
from hyperbolic import tabulate
from models import (CoupledSolution, CouplingDiagnostics, CouplingMethod, Field, Grid, ProblemSpec, TimeGrid,
                    Trace, subdomain_grids)
from parabolic import AdvectionFlux, TransportRobin
from structured_logging import get_logger

logger = get_logger(__name__)

NEG_DATA_MODES = ('closed_form', 'numerical')


def _modified_rhs(spec: ProblemSpec, u_a: Field) -> np.ndarray:
    """(a^2/nu) f + R u_a as a nodal table"""
    forcing = tabulate(sampler(spec.f), u_a.grid, u_a.time)
    return spec.a ** 2 / spec.nu * forcing + apply_remainder(u_a, spec.c).values


def solve_factorization_pos(spec: ProblemSpec, grid: Grid, time: TimeGrid, k_iters: int = 1,
                            initial_guess: Optional[Trace] = None) -> CoupledSolution:
    """
    Iterative factorization coupling for a > 0.

    Each sweep k:
      1. L_a u_a^k = f on (0, l2), u_a^k(0, .) = u_ad^{k-1}(0, .), u_a^k(., 0) = h
      2. L_ma u_ma^k = (a^2/nu) f + R u_a^k on (0, l2), inflow g2 at l2,
         u_ma^k(., 0) = f(., 0) + nu h''
      3. L_ad u_ad^k = f on (-l1, 0), Dirichlet g1, L_a u_ad^k(0, .) = u_ma^k(0, .)

    Args:
        spec: Problem setup with a > 0
        grid: Global grid over (-l1, l2)
        time: Shared time grid
        k_iters: Number of sweeps
        initial_guess: Interface trace u_ad^0(0, .); zero when None

    Returns:
        CoupledSolution (u_ad^k, u_a^k); diagnostics hold u_ad^k(0, .) per
        sweep and the u_ma^k(0, .) traces under 'u_ma'
    """
    if spec.a <= 0:
        raise ValueError("the iterative factorization needs a > 0")
    if k_iters < 1:
        raise ValueError("k_iters must be at least 1")
    omega1, omega2 = subdomain_grids(grid)
    eta_ma = spec.eta_modified

    guess = inflow_trace(spec, time, 0.0, initial_guess)
    g2 = Trace.from_data(spec.g2, time, omega2.x_max)
    nodes2 = omega2.nodes
    ma_initial = np.broadcast_to(
        np.asarray(spec.f.value(nodes2, 0.0) + spec.nu * spec.h.dxx(nodes2, 0.0), dtype=float), nodes2.shape
    ).copy()

    diagnostics = CouplingDiagnostics(auxiliary_traces={'u_ma': []})
    for k in range(1, k_iters + 1):
        u_a = inviscid_right(spec, omega2, time, guess)
        u_ma = transport_right(spec, omega2, time, -spec.a, eta_ma, g2, ma_initial, _modified_rhs(spec, u_a))
        ma_trace = u_ma.trace_at(0.0)
        u_ad = viscous_left(spec, omega1, time, AdvectionFlux(ma_trace))

        interface = u_ad.trace_at(0.0)
        increment = trace_norm(Trace(time, interface.values - guess.values, 0.0))
        diagnostics.interface_traces.append(interface)
        diagnostics.auxiliary_traces['u_ma'].append(ma_trace)
        diagnostics.increments.append(increment)
        diagnostics.iterations = k
        logger.log_iteration('factorization', k, increment=increment, nu=spec.nu)
        guess = interface

    return CoupledSolution(u_ad, u_a, diagnostics)


def _closed_form_data(spec: ProblemSpec, omega2: Grid, time: TimeGrid):
    """
    L_ma u at x = l2 and t = 0 from the exact data:
        2 g2' + (2c + a^2/nu) g2 - f(l2, .)   and   f(., 0) - 2a h' + a^2 h/nu
    """
    a, c, nu = spec.a, spec.c, spec.nu
    times, x_right, nodes = time.times, omega2.x_max, omega2.nodes
    try:
        boundary = (2.0 * np.asarray(spec.g2.dt(x_right, times))
                    + (2.0 * c + a ** 2 / nu) * np.asarray(spec.g2.value(x_right, times))
                    - np.asarray(spec.f.value(x_right, times)))
        initial = (np.asarray(spec.f.value(nodes, 0.0)) - 2.0 * a * np.asarray(spec.h.dx(nodes, 0.0))
                   + a ** 2 / nu * np.asarray(spec.h.value(nodes, 0.0)))
    except DataSpecError as e:
        raise DataSpecError(f"closed-form data for a < 0 needs exact derivatives: {e}") from e
    return np.broadcast_to(boundary, times.shape).astype(float), np.broadcast_to(initial, nodes.shape).astype(float)


def _numerical_data(spec: ProblemSpec, u_a: Field):
    """L_ma u_a evaluated on the computed field at x = l2 and t = 0 by second-order differences"""
    a, eta = spec.a, spec.eta_modified
    values, dt, dx = u_a.values, u_a.time.dt, u_a.grid.dx
    if u_a.grid.n_cells < 2:
        raise ValueError("numerical data needs at least two cells on the right subdomain")
    u_t = np.gradient(values, dt, axis=0, edge_order=2)
    u_x = np.gradient(values, dx, axis=1, edge_order=2)
    modified = u_t - a * u_x + eta * values
    return modified[:, -1].copy(), modified[0].copy()


def solve_factorization_neg(spec: ProblemSpec, grid: Grid, time: TimeGrid,
                            neg_data: str = 'closed_form') -> CoupledSolution:
    """
    One-shot factorization coupling for a < 0.

      1. L_a u_a^1 = f on (0, l2), inflow g2 at l2, initial h
      2. L_a u_a^2 = (a^2/nu) f + R u_a^1 on (0, l2), inflow and initial
         values of L_ma u from `neg_data`
      3. L_ad u_ad = f on (-l1, 0), Dirichlet g1, L_ma u_ad(0, .) = u_a^2(0, .)

    Args:
        spec: Problem setup with a < 0
        grid: Global grid over (-l1, l2)
        time: Shared time grid
        neg_data: 'closed_form' (exact data derivatives) or 'numerical'
            (differences of u_a^1)

    Returns:
        CoupledSolution (u_ad, u_a^1); the u_a^2(0, .) trace is kept under
        'u_a2' in the diagnostics

    Raises:
        DataSpecError: If closed-form data lacks a required derivative
    """
    if spec.a >= 0:
        raise ValueError("the one-shot factorization needs a < 0")
    if neg_data not in NEG_DATA_MODES:
        raise ValueError(f"neg_data must be one of {NEG_DATA_MODES}, got {neg_data!r}")
    omega1, omega2 = subdomain_grids(grid)

    u_a1 = inviscid_right(spec, omega2, time, Trace.from_data(spec.g2, time, omega2.x_max))
    if neg_data == 'closed_form':
        boundary, initial = _closed_form_data(spec, omega2, time)
    else:
        boundary, initial = _numerical_data(spec, u_a1)

    u_a2 = transport_right(spec, omega2, time, spec.a, spec.c, Trace(time, boundary, omega2.x_max),
                           initial, _modified_rhs(spec, u_a1))
    a2_trace = u_a2.trace_at(0.0)
    u_ad = viscous_left(spec, omega1, time, TransportRobin(a2_trace))

    diagnostics = CouplingDiagnostics(
        iterations=1,
        interface_traces=[u_ad.trace_at(0.0)],
        auxiliary_traces={'u_a2': [a2_trace]}
    )
    return CoupledSolution(u_ad, u_a1, diagnostics)


class FactorizationCoupling(BaseCoupling):

    @property
    def name(self) -> str:
        return 'factorization'

    @property
    def description(self) -> str:
        return 'Factorization of the viscous operator into two transport operators'

    def _solve(self, spec: ProblemSpec, grid: Grid, time: TimeGrid,
               method: CouplingMethod, **options) -> CoupledSolution:
        """
        Options:
            initial_guess: 'zero', 'reference' or a Trace (a > 0)
            neg_data: 'closed_form' or 'numerical' (a < 0)
        """
        if spec.a < 0:
            return solve_factorization_neg(spec, grid, time, options.get('neg_data', 'closed_form'))

        guess = options.get('initial_guess', 'zero')
        if guess == 'zero':
            guess = None
        elif guess == 'reference':
            guess = reference_field(spec, grid, time).trace_at(0.0)
        elif not isinstance(guess, Trace):
            raise ValueError(f"initial_guess must be 'zero', 'reference' or a Trace, got {guess!r}")
        return solve_factorization_pos(spec, grid, time, method.k_iters, guess)
