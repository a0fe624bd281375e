"""
Tests for the tridiagonal solver and the Crank-Nicolson advection diffusion solver
"""

import pytest
import sys
import os
from unittest.mock import patch

import numpy as np
from scipy.integrate import trapezoid

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import parabolic
from couplings.stages import sampler
from data_functions import GaussianBump, ReferenceForcing
from error_handling_decorators import SingularMatrixError
from health_checks import manufactured_error
from models import Grid, TimeGrid, Trace
from parabolic import (Absorbing, AdvDiffSpec, AdvectionFlux, Dirichlet, Neumann, Tridiagonal, TransportRobin,
                       solve_advdiff, step_matrices, thomas_solve)


pytestmark = pytest.mark.unit


def make_spec(a=1.0, nu=0.1, c=1.0, n_cells=20, n_steps=20, right=Dirichlet, initial=None, rhs=None):
    grid = Grid(-1.0, 0.0, n_cells)
    time = TimeGrid(0.5, n_steps)
    initial = np.zeros(grid.n_nodes) if initial is None else initial
    return AdvDiffSpec(
        a=a, nu=nu, c=c, grid=grid, time=time,
        left_bc=Dirichlet(Trace.zeros(time, -1.0)),
        right_bc=right(Trace.zeros(time, 0.0)),
        initial=initial, rhs=rhs
    )


class TestThomas:
    """Tridiagonal elimination against dense solves"""

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(42)
        for n in (1, 2, 3, 10, 50):
            sub, sup = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
            diag = rng.uniform(2.5, 4.0, n)
            m = Tridiagonal(sub, diag, sup)
            rhs = rng.uniform(-1, 1, n)
            expected = np.linalg.solve(m.to_dense(), rhs)
            assert np.max(np.abs(thomas_solve(m, rhs) - expected)) <= 1e-12

    def test_dot_matches_dense(self):
        m = Tridiagonal(np.array([1.0, 2.0]), np.array([3.0, 4.0, 5.0]), np.array([6.0, 7.0]))
        x = np.array([1.0, -1.0, 2.0])
        assert np.allclose(m.dot(x), m.to_dense() @ x)

    def test_zero_pivot(self):
        m = Tridiagonal(np.array([1.0]), np.array([0.0, 1.0]), np.array([1.0]))
        with pytest.raises(SingularMatrixError) as exc:
            thomas_solve(m, np.ones(2))
        assert exc.value.row == 0

    def test_inconsistent_diagonals(self):
        with pytest.raises(ValueError):
            Tridiagonal(np.ones(2), np.ones(2), np.ones(1))

    def test_rhs_shape(self):
        m = Tridiagonal(np.ones(1), np.full(2, 3.0), np.ones(1))
        with pytest.raises(ValueError):
            thomas_solve(m, np.ones(3))


class TestAdvDiffSpec:

    def test_needs_two_cells(self):
        with pytest.raises(ValueError):
            make_spec(n_cells=1)

    def test_positive_viscosity(self):
        with pytest.raises(ValueError):
            make_spec(nu=0.0)

    def test_absorbing_needs_positive_speed(self):
        with pytest.raises(ValueError):
            make_spec(a=-1.0, right=Absorbing)

    def test_advection_flux_needs_positive_speed(self):
        with pytest.raises(ValueError, match='AdvectionFlux'):
            make_spec(a=-1.0, right=AdvectionFlux)

    def test_transport_robin_needs_negative_speed(self):
        with pytest.raises(ValueError, match='TransportRobin'):
            make_spec(a=1.0, right=TransportRobin)

    def test_unknown_boundary_rows(self):
        grid, time = Grid(-1.0, 0.0, 4), TimeGrid(1.0, 4)
        with pytest.raises(ValueError):
            AdvDiffSpec(a=1.0, nu=0.1, c=1.0, grid=grid, time=time,
                        left_bc=Dirichlet(Trace.zeros(time, -1.0)),
                        right_bc=Absorbing(Trace.zeros(time, 0.0)), initial=np.zeros(5),
                        boundary_rows='upwind')

    def test_left_must_be_dirichlet(self):
        grid, time = Grid(-1.0, 0.0, 4), TimeGrid(1.0, 4)
        with pytest.raises(ValueError):
            AdvDiffSpec(a=1.0, nu=0.1, c=1.0, grid=grid, time=time,
                        left_bc=Neumann(Trace.zeros(time, -1.0)),
                        right_bc=Dirichlet(Trace.zeros(time, 0.0)), initial=np.zeros(5))

    def test_trace_on_other_time_grid(self):
        grid, time = Grid(-1.0, 0.0, 4), TimeGrid(1.0, 4)
        other = TimeGrid(1.0, 8)
        with pytest.raises(ValueError):
            AdvDiffSpec(a=1.0, nu=0.1, c=1.0, grid=grid, time=time,
                        left_bc=Dirichlet(Trace.zeros(time, -1.0)),
                        right_bc=Dirichlet(Trace.zeros(other, 0.0)), initial=np.zeros(5))


class TestCrankNicolson:
    """Crank-Nicolson time stepping"""

    @pytest.mark.parametrize('right', [Dirichlet, Absorbing, AdvectionFlux, Neumann])
    def test_zero_data_gives_zero(self, right):
        field = solve_advdiff(make_spec(right=right))
        assert np.all(field.values == 0.0)

    def test_initial_row_and_dirichlet_columns(self):
        x = np.linspace(-1, 0, 21)
        initial = np.sin(np.pi * (x + 1))
        field = solve_advdiff(make_spec(initial=initial))
        assert np.array_equal(field.values[0], initial)
        assert np.all(field.values[1:, 0] == 0.0)
        assert np.all(field.values[1:, -1] == 0.0)

    def test_pure_diffusion_decay(self):
        # sin(pi (x+1)) decays like exp(-(nu pi^2 + c) t) with Dirichlet ends
        nu, c = 0.05, 1.0
        x = np.linspace(-1, 0, 201)
        initial = np.sin(np.pi * (x + 1))
        spec = AdvDiffSpec(a=0.0, nu=nu, c=c, grid=Grid(-1.0, 0.0, 200), time=TimeGrid(0.5, 200),
                           left_bc=Dirichlet(Trace.zeros(TimeGrid(0.5, 200), -1.0)),
                           right_bc=Dirichlet(Trace.zeros(TimeGrid(0.5, 200), 0.0)),
                           initial=initial)
        field = solve_advdiff(spec)
        expected = initial * np.exp(-(nu * np.pi ** 2 + c) * 0.5)
        assert np.max(np.abs(field.values[-1] - expected)) < 1e-4

    def test_step_matrices_dirichlet_rows(self):
        implicit, explicit = step_matrices(make_spec())
        assert implicit.diag[0] == 1.0 and implicit.sup[0] == 0.0
        assert implicit.diag[-1] == 1.0 and implicit.sub[-1] == 0.0
        assert explicit.diag[0] == 0.0 and explicit.diag[-1] == 0.0

    def test_step_matrices_operator_row(self):
        implicit, _ = step_matrices(make_spec(right=Absorbing))
        assert implicit.diag[-1] != 1.0
        assert implicit.sub[-1] < 0.0

    def test_peclet_warning(self):
        with patch.object(parabolic.logger, 'log_solver_warning') as warn:
            solve_advdiff(make_spec(nu=1e-3))
        warn.assert_called_once()
        assert warn.call_args[0][0] == 'peclet'

    def test_no_warning_when_resolved(self):
        with patch.object(parabolic.logger, 'log_solver_warning') as warn:
            solve_advdiff(make_spec(nu=0.1))
        warn.assert_not_called()


class TestManufacturedConvergence:
    """Second-order convergence for every right boundary kind"""

    @pytest.mark.parametrize('kind', ['dirichlet', 'absorbing', 'advection_flux', 'transport_robin'])
    def test_second_order(self, kind):
        ratio = manufactured_error(kind, 20) / manufactured_error(kind, 40)
        assert 3.3 <= ratio <= 4.7

    @pytest.mark.parametrize('kind', ['neumann', 'robin'])
    def test_second_order_flux_conditions(self, kind):
        ratio = manufactured_error(kind, 40) / manufactured_error(kind, 80)
        assert 3.0 <= ratio <= 5.0

    def test_transport_robin_right_of_interface_speed(self):
        # (d/dt - a d/dx + c + a^2/nu) is an outflow operator for a < 0
        field = solve_advdiff(make_spec(a=-1.0, right=TransportRobin))
        assert field.is_finite()


def discrete_norms(field):
    return np.sqrt(trapezoid(field.values ** 2, dx=field.grid.dx, axis=1))


def bump_spec(right, n_cells, t_final, n_steps, x_max=1.0, boundary_rows='ghost', rhs=None):
    grid, time = Grid(-1.0, x_max, n_cells), TimeGrid(t_final, n_steps)
    return AdvDiffSpec(
        a=1.0, nu=1e-2, c=1.0, grid=grid, time=time,
        left_bc=Dirichlet(Trace.zeros(time, -1.0)),
        right_bc=right(Trace.zeros(time, x_max)),
        initial=GaussianBump(x0=-0.6).value(grid.nodes, 0.0),
        rhs=rhs, boundary_rows=boundary_rows
    )


class TestStability:
    """Energy behaviour of the Crank-Nicolson steps"""

    def test_absorbing_outflow_decays(self):
        field = solve_advdiff(bump_spec(Absorbing, 400, 0.5, 200))
        norms = discrete_norms(field)
        assert np.all(np.diff(norms) <= 1e-12 * norms[0])
        assert norms[-1] < np.exp(-0.5) * norms[0] * 1.01

    def test_large_time_step_stays_bounded(self):
        # dt = 10 dx
        spec = bump_spec(Dirichlet, 100, 1.0, 10, x_max=0.0)
        assert spec.time.dt == pytest.approx(10.0 * spec.grid.dx)
        field = solve_advdiff(spec)
        norms = discrete_norms(field)
        assert field.is_finite()
        assert np.all(norms <= norms[0] * (1.0 + 1e-12))


class TestOneSidedRows:
    """Backward difference rows for the transport operator conditions"""

    def test_row_satisfies_condition(self):
        grid, time = Grid(-1.0, 0.0, 20), TimeGrid(0.5, 40)
        g = Trace(time, np.sin(3.0 * time.times), 0.0)
        spec = AdvDiffSpec(a=1.0, nu=0.1, c=1.0, grid=grid, time=time,
                           left_bc=Dirichlet(Trace.zeros(time, -1.0)), right_bc=Absorbing(g),
                           initial=np.cos(np.pi * grid.nodes / 2.0) ** 2, boundary_rows='one_sided')
        u = solve_advdiff(spec).values
        slope = (u[:, -1] - u[:, -2]) / grid.dx
        residual = (np.diff(u[:, -1]) / time.dt + 0.5 * (slope[1:] + slope[:-1])
                    + 0.5 * (u[1:, -1] + u[:-1, -1]) - 0.5 * (g.values[1:] + g.values[:-1]))
        assert np.max(np.abs(residual)) < 1e-10

    def test_step_matrix_row(self):
        spec = make_spec(right=Absorbing)
        one_sided = AdvDiffSpec(a=spec.a, nu=spec.nu, c=spec.c, grid=spec.grid, time=spec.time,
                                left_bc=spec.left_bc, right_bc=spec.right_bc, initial=spec.initial,
                                boundary_rows='one_sided')
        implicit, _ = step_matrices(one_sided)
        p = spec.a / spec.grid.dx
        assert implicit.sub[-1] == pytest.approx(-0.5 * p)
        assert implicit.diag[-1] == pytest.approx(1.0 / spec.time.dt + 0.5 * (p + spec.c))

    def test_outflow_row_barely_matters(self):
        # Upstream of x_max the two rows agree to rounding, near it within O(Pe f)
        forcing = sampler(ReferenceForcing(t0=0.1))
        ghost = solve_advdiff(bump_spec(Absorbing, 1000, 1.0, 1000, rhs=forcing))
        one_sided = solve_advdiff(bump_spec(Absorbing, 1000, 1.0, 1000, rhs=forcing, boundary_rows='one_sided'))
        difference = np.abs(ghost.values - one_sided.values)
        assert np.max(difference) < 1e-4
        upstream = ghost.grid.nodes <= 0.0
        assert np.max(difference[:, upstream]) < 1e-10 * np.max(np.abs(ghost.values))
