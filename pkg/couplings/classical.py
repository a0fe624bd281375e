"""
Classical couplings used as baselines

Variational conditions conserve the flux across the interface, non
variational ones match the interface value (and for a > 0 its derivative).
"""

import numpy as np

from couplings.base_coupling import BaseCoupling
from couplings.stages import inviscid_right, sampler, trace_norm, viscous_left
from error_handling_decorators import ConvergenceError
from hyperbolic import tabulate
from models import (CoupledSolution, CouplingDiagnostics, CouplingMethod, Grid, MethodKind, ProblemSpec, TimeGrid,
                    Trace, subdomain_grids)
from parabolic import Dirichlet, Neumann, Robin
from structured_logging import get_logger

logger = get_logger(__name__)


def _right_slope(field) -> np.ndarray:
    """One-sided difference at x_min of a field, per time level"""
    return (field.values[:, 1] - field.values[:, 0]) / field.grid.dx


def _variational_pos(spec: ProblemSpec, omega1: Grid, omega2: Grid, time: TimeGrid) -> CoupledSolution:
    u_ad = viscous_left(spec, omega1, time, Neumann(Trace.zeros(time, 0.0)))
    interface = u_ad.trace_at(0.0)
    u_a = inviscid_right(spec, omega2, time, interface)
    return CoupledSolution(u_ad, u_a, CouplingDiagnostics(iterations=1, interface_traces=[interface]))


def _non_variational_pos(spec: ProblemSpec, omega1: Grid, omega2: Grid, time: TimeGrid,
                         method: CouplingMethod) -> CoupledSolution:
    """
    Relaxed Dirichlet-Neumann iteration on the interface value lambda:
    transport with inflow lambda, viscous solve with the matching slope,
    then lambda <- theta u_ad(0, .) + (1 - theta) lambda.
    """
    theta = method.relaxation(spec.nu)
    current = Trace.zeros(time, 0.0)
    diagnostics = CouplingDiagnostics(converged=False)
    forcing1 = tabulate(sampler(spec.f), omega1, time)
    forcing2 = tabulate(sampler(spec.f), omega2, time)

    for k in range(1, method.max_iters + 1):
        u_a = inviscid_right(spec, omega2, time, current, forcing2)
        u_ad = viscous_left(spec, omega1, time, Neumann(Trace(time, _right_slope(u_a), 0.0)), forcing1)
        updated = Trace(time, theta * u_ad.values[:, -1] + (1.0 - theta) * current.values, 0.0)

        increment = trace_norm(Trace(time, updated.values - current.values, 0.0))
        diagnostics.interface_traces.append(updated)
        diagnostics.increments.append(increment)
        diagnostics.iterations = k
        logger.log_iteration('non_variational', k, increment=increment, theta=theta, nu=spec.nu)

        current = updated
        if increment <= method.tol * trace_norm(updated):
            diagnostics.converged = True
            break

    if not diagnostics.converged:
        raise ConvergenceError(
            f"non-variational iteration did not converge in {method.max_iters} iterations "
            f"(theta={theta:.4g}, last increment {diagnostics.increments[-1]:.3e})",
            history=list(diagnostics.increments)
        )
    return CoupledSolution(u_ad, u_a, diagnostics)


def solve_classical(spec: ProblemSpec, grid: Grid, time: TimeGrid, method: CouplingMethod) -> CoupledSolution:
    """
    Classical couplings.

      a > 0, variational:      nu u_ad'(0) = 0, then transport from u_ad(0)
      a > 0, non variational:  u_ad(0) = u_a(0) and u_ad'(0) = u_a'(0), relaxed iteration
      a < 0, variational:      -nu u_ad'(0) + a u_ad(0) = a u_a(0)
      a < 0, non variational:  u_ad(0) = u_a(0)

    For a < 0 the transport solve comes first, with inflow g2 at l2.

    Raises:
        ConvergenceError: If the a > 0 non-variational iteration stalls;
            the increments are kept in its history
    """
    if method.kind not in (MethodKind.VARIATIONAL, MethodKind.NON_VARIATIONAL):
        raise ValueError(f"{method.label} is not a classical coupling")
    omega1, omega2 = subdomain_grids(grid)

    if spec.a > 0:
        if method.kind is MethodKind.VARIATIONAL:
            return _variational_pos(spec, omega1, omega2, time)
        return _non_variational_pos(spec, omega1, omega2, time, method)

    u_a = inviscid_right(spec, omega2, time, Trace.from_data(spec.g2, time, omega2.x_max))
    interface = u_a.trace_at(0.0)
    if method.kind is MethodKind.VARIATIONAL:
        right_bc = Robin(Trace(time, spec.a * interface.values, 0.0))
    else:
        right_bc = Dirichlet(interface)
    u_ad = viscous_left(spec, omega1, time, right_bc)
    return CoupledSolution(u_ad, u_a, CouplingDiagnostics(iterations=1, interface_traces=[u_ad.trace_at(0.0)]))


class VariationalCoupling(BaseCoupling):

    @property
    def name(self) -> str:
        return 'variational'

    @property
    def description(self) -> str:
        return 'Flux conserving transmission conditions'

    def _solve(self, spec: ProblemSpec, grid: Grid, time: TimeGrid,
               method: CouplingMethod, **options) -> CoupledSolution:
        return solve_classical(spec, grid, time, method)


class NonVariationalCoupling(BaseCoupling):

    @property
    def name(self) -> str:
        return 'non_variational'

    @property
    def description(self) -> str:
        return 'Value and slope matching transmission conditions'

    def _solve(self, spec: ProblemSpec, grid: Grid, time: TimeGrid,
               method: CouplingMethod, **options) -> CoupledSolution:
        return solve_classical(spec, grid, time, method)
