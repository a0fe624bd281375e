"""
Self checks of the numerical kernels

A catalog of fast oracle comparisons run by the `check` command: each check
returns a status with its measured metrics, and the catalog aggregates them
into an overall healthy/unhealthy report.
"""

import time
from datetime import datetime, timezone
from typing import Any, Callable, Dict, Optional

import numpy as np

from analysis import l2_spacetime, transport_energy_ratio
from couplings.operators import factorization_identity_check
from data_functions import (DataSpec, GaussianBump, LinearOperatorData, ReferenceForcing, SineManufactured,
                            advection_diffusion_of, transport_of)
from hyperbolic import TransportSpec, characteristics_oracle, solve_transport
from models import Field, Grid, TimeGrid, Trace
from parabolic import (Absorbing, AdvDiffSpec, AdvectionFlux, Dirichlet, Neumann, Robin, Tridiagonal,
                       TransportRobin, solve_advdiff, thomas_solve)
from structured_logging import get_logger

RATE_WINDOWS = {'first': (1.7, 2.3), 'second': (3.3, 4.7)}

# Speed used for each boundary kind; operator rows need the outflow sign
BOUNDARY_SPEEDS = {
    'dirichlet': 1.0, 'absorbing': 1.0, 'advection_flux': 1.0, 'neumann': 1.0,
    'transport_robin': -1.0, 'robin': -1.0,
}


def manufactured_error(kind: str, n_cells: int, nu: float = 0.1, c: float = 1.0, t_final: float = 0.5) -> float:
    """
    L2 space-time error of Crank-Nicolson on (-1, 0) against
    u*(x, t) = exp(-t) sin(pi (x + 1) / 2), forced by L_ad u* with the
    boundary data of the given right boundary kind applied to u*.
    """
    a = BOUNDARY_SPEEDS[kind]
    exact = SineManufactured(x_left=-1.0, length=2.0)
    grid = Grid(-1.0, 0.0, n_cells)
    time_grid = TimeGrid(t_final, n_cells)

    right_data: Dict[str, DataSpec] = {
        'dirichlet': exact,
        'absorbing': transport_of(exact, a, c),
        'advection_flux': transport_of(exact, a, c),
        'transport_robin': transport_of(exact, -a, c + a ** 2 / nu),
        'neumann': LinearOperatorData(exact, d_x=1.0),
        'robin': LinearOperatorData(exact, d_x=-nu, d_0=a),
    }
    kinds = {
        'dirichlet': Dirichlet, 'absorbing': Absorbing, 'advection_flux': AdvectionFlux,
        'transport_robin': TransportRobin, 'neumann': Neumann, 'robin': Robin,
    }
    forcing = advection_diffusion_of(exact, a, nu, c)
    spec = AdvDiffSpec(
        a=a, nu=nu, c=c, grid=grid, time=time_grid,
        left_bc=Dirichlet(Trace.from_data(exact, time_grid, grid.x_min)),
        right_bc=kinds[kind](Trace.from_data(right_data[kind], time_grid, grid.x_max)),
        initial=np.asarray(exact.value(grid.nodes, 0.0)),
        rhs=lambda x, t: forcing.value(x, t)
    )
    numerical = solve_advdiff(spec)
    xs, ts = np.meshgrid(grid.nodes, time_grid.times)
    return l2_spacetime(numerical - Field(grid, time_grid, exact.value(xs, ts)))


def transport_error(n_cells: int, t_final: float = 0.4) -> float:
    """Max-norm error of implicit upwind at t_final for a bump advected at b=1, eta=1"""
    bump = GaussianBump(x0=0.5, scale=40.0)
    grid = Grid(0.0, 1.0, n_cells)
    time_grid = TimeGrid(t_final, int(round(n_cells * t_final)))
    spec = TransportSpec(
        b=1.0, eta=1.0, grid=grid, time=time_grid,
        inflow=Trace.zeros(time_grid, 0.0),
        initial=np.asarray(bump.value(grid.nodes, 0.0)),
        inflow_fn=lambda t: 0.0,
        initial_fn=lambda x: float(bump.value(x, 0.0))
    )
    numerical = solve_transport(spec).values[-1]
    exact = np.array([characteristics_oracle(spec, x, t_final) for x in grid.nodes])
    return float(np.max(np.abs(numerical - exact)))


def _within(ratio: float, window: str) -> bool:
    lo, hi = RATE_WINDOWS[window]
    return lo <= ratio <= hi


class CheckCatalog:
    """Registry of named oracle checks"""

    def __init__(self, seed: int = 0):
        self.logger = get_logger('checks')
        self.seed = seed
        self.checks: Dict[str, Callable[[], Dict[str, Any]]] = {}
        self.register_check('tridiagonal', self._check_tridiagonal)
        self.register_check('transport', self._check_transport)
        self.register_check('crank_nicolson', self._check_crank_nicolson)
        self.register_check('factorization_identity', self._check_factorization_identity)
        self.register_check('stiff_maximum_principle', self._check_stiff_maximum_principle)
        self.register_check('data_derivatives', self._check_data_derivatives)
        self.register_check('transport_energy', self._check_transport_energy)

    def register_check(self, name: str, check_func: Callable[[], Dict[str, Any]]):
        self.checks[name] = check_func

    def run_check(self, name: str) -> Dict[str, Any]:
        """Run one check; exceptions turn into an error status"""
        if name not in self.checks:
            return {'name': name, 'status': 'unknown', 'message': f'Check {name} not found'}
        start = time.time()
        try:
            result = self.checks[name]()
        except Exception as e:
            self.logger.error(f"Check {name} failed: {e}", check=name, error_type=type(e).__name__)
            result = {'status': 'error', 'message': str(e)}
        result.setdefault('status', 'unknown')
        result.update({'name': name, 'duration_ms': round((time.time() - start) * 1000, 2)})
        return result

    def run_all_checks(self, names: Optional[list] = None) -> Dict[str, Any]:
        """
        Run the catalog (or a subset).

        Returns:
            Report with overall status 'healthy' when every check passed,
            'unhealthy' otherwise
        """
        results = {name: self.run_check(name) for name in (names or self.checks)}
        healthy = all(r['status'] == 'healthy' for r in results.values())
        return {
            'status': 'healthy' if healthy else 'unhealthy',
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'checks': results
        }

    def _check_tridiagonal(self) -> Dict[str, Any]:
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 51))
            sub, sup = rng.uniform(-1, 1, n - 1), rng.uniform(-1, 1, n - 1)
            diag = rng.uniform(2.5, 4.0, n) * rng.choice([-1.0, 1.0], n)
            m = Tridiagonal(sub, diag, sup)
            rhs = rng.uniform(-1, 1, n)
            worst = max(worst, float(np.max(np.abs(thomas_solve(m, rhs) - np.linalg.solve(m.to_dense(), rhs)))))
        return {'status': 'healthy' if worst <= 1e-12 else 'error', 'metrics': {'max_difference': worst}}

    def _check_transport(self) -> Dict[str, Any]:
        errors = [transport_error(n) for n in (200, 400, 800)]
        ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
        ok = all(_within(r, 'first') for r in ratios)
        return {'status': 'healthy' if ok else 'error', 'metrics': {'errors': errors, 'ratios': ratios}}

    def _check_crank_nicolson(self) -> Dict[str, Any]:
        metrics = {}
        ok = True
        for kind in ('dirichlet', 'absorbing', 'advection_flux', 'transport_robin'):
            coarse, fine = manufactured_error(kind, 20), manufactured_error(kind, 40)
            ratio = coarse / fine
            metrics[kind] = {'errors': [coarse, fine], 'ratio': ratio}
            ok = ok and _within(ratio, 'second')
        return {'status': 'healthy' if ok else 'error', 'metrics': metrics}

    def _check_factorization_identity(self) -> Dict[str, Any]:
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for _ in range(1000):
            a = rng.uniform(0.1, 2.0) * rng.choice([-1.0, 1.0])
            nu = 10.0 ** rng.uniform(-4, 0)
            c = rng.uniform(0.1, 2.0)
            alpha, beta = rng.uniform(-2, 2), rng.uniform(-2, 2)
            scale = 1.0 + abs(beta) + nu * alpha ** 2 + abs(a * alpha) + c
            worst = max(worst, factorization_identity_check(a, nu, c, alpha, beta) / scale)
        return {'status': 'healthy' if worst <= 1e-9 else 'error', 'metrics': {'max_relative_residual': worst}}

    def _check_stiff_maximum_principle(self) -> Dict[str, Any]:
        nu = 1e-6
        grid = Grid(0.0, 1.0, 200)
        time_grid = TimeGrid(1.0, 200)
        bump = GaussianBump(x0=0.5)
        initial = np.asarray(bump.value(grid.nodes, 0.0))
        spec = TransportSpec(b=-1.0, eta=1.0 + 1.0 / nu, grid=grid, time=time_grid,
                             inflow=Trace.zeros(time_grid, 1.0), initial=initial)
        values = solve_transport(spec).values
        bound = max(float(np.max(np.abs(initial))), 0.0)
        peak = float(np.max(np.abs(values)))
        ok = bool(np.all(np.isfinite(values))) and peak <= bound * (1.0 + 1e-12)
        return {'status': 'healthy' if ok else 'error', 'metrics': {'max_abs': peak, 'bound': bound}}

    def _check_data_derivatives(self) -> Dict[str, Any]:
        """Central differences converge to the exact derivatives at second order"""
        cases = [
            ('gaussian_dx', GaussianBump(x0=-0.6), 'dx', -0.55, 0.0),
            ('gaussian_dxx', GaussianBump(x0=-0.6), 'dxx', -0.55, 0.0),
            ('forcing_dt', ReferenceForcing(t0=0.1), 'dt', 0.1, 0.4),
            ('forcing_dx', ReferenceForcing(t0=0.1), 'dx', 0.1, 0.4),
        ]
        metrics = {}
        ok = True
        for label, data, derivative, x, t in cases:
            errors = []
            for h in (2e-3, 1e-3):
                exact = getattr(data, derivative)(x, t)
                if derivative == 'dt':
                    approx = (data.value(x, t + h) - data.value(x, t - h)) / (2 * h)
                elif derivative == 'dx':
                    approx = (data.value(x + h, t) - data.value(x - h, t)) / (2 * h)
                else:
                    approx = (data.value(x + h, t) - 2 * data.value(x, t) + data.value(x - h, t)) / h ** 2
                errors.append(abs(approx - exact))
            ratio = errors[0] / errors[1] if errors[1] > 0 else float('inf')
            metrics[label] = {'errors': errors, 'ratio': ratio}
            ok = ok and _within(ratio, 'second')
        return {'status': 'healthy' if ok else 'error', 'metrics': metrics}

    def _check_transport_energy(self) -> Dict[str, Any]:
        """Discrete energy estimate of a forced transport solve with inflow data"""
        grid = Grid(0.0, 1.0, 200)
        time_grid = TimeGrid(1.0, 200)
        forcing = ReferenceForcing(t0=0.1)
        spec = TransportSpec(
            b=1.0, eta=1.0, grid=grid, time=time_grid,
            inflow=Trace(time_grid, np.sin(np.pi * time_grid.times) ** 2, 0.0),
            initial=np.asarray(GaussianBump(x0=0.5).value(grid.nodes, 0.0)),
            rhs=lambda x, t: forcing.value(x - 0.5, t)
        )
        ratio = transport_energy_ratio(spec, solve_transport(spec))
        return {'status': 'healthy' if ratio <= 1.0 + 1e-9 else 'error', 'metrics': {'ratio': ratio}}
