"""
Tests for norms, slope fits and viscosity sweeps
"""

import pytest
import math
import sys
import os

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import analysis
from analysis import (ErrorRecord, GridPolicy, fit_slope, fit_slope_above_floor, l2_spacetime, run_sweep,
                      slopes_by_method)
from data_functions import GaussianBump, ReferenceForcing
from error_tracking import ErrorTracker
from models import CouplingMethod, Field, Grid, ProblemSpec, TimeGrid


pytestmark = pytest.mark.integration


def record(nu, label, err1, err2=1.0, resolved=True):
    return ErrorRecord(nu, CouplingMethod.from_label(label), err1, err2, 0.1, resolved)


class TestNorm:

    def test_constant_field(self):
        field = Field(Grid(0.0, 2.0, 10), TimeGrid(0.5, 5), np.full((6, 11), 3.0))
        assert l2_spacetime(field) == pytest.approx(3.0 * math.sqrt(2.0 * 0.5))

    def test_zero_field(self):
        assert l2_spacetime(Field.zeros(Grid(0.0, 1.0, 4), TimeGrid(1.0, 4))) == 0.0

    def test_trapezoidal_in_space(self):
        grid, time = Grid(0.0, 1.0, 1000), TimeGrid(1.0, 1)
        values = np.vstack([grid.nodes, grid.nodes])
        assert l2_spacetime(Field(grid, time, values)) == pytest.approx(math.sqrt(1.0 / 3.0), rel=1e-6)

    def test_linear_in_x_on_unit_square(self):
        grid, time = Grid(0.0, 1.0, 200), TimeGrid(1.0, 200)
        values = np.tile(grid.nodes, (time.n_levels, 1))
        assert l2_spacetime(Field(grid, time, values)) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-4)

    def test_product_of_sines(self):
        grid, time = Grid(0.0, 1.0, 200), TimeGrid(1.0, 200)
        values = np.outer(np.sin(np.pi * time.times), np.sin(np.pi * grid.nodes))
        assert l2_spacetime(Field(grid, time, values)) == pytest.approx(0.5, abs=1e-4)

    def test_pointwise_domination(self):
        grid, time = Grid(0.0, 1.0, 50), TimeGrid(1.0, 40)
        rng = np.random.default_rng(3)
        big = rng.uniform(-1.0, 1.0, (time.n_levels, grid.n_nodes))
        small = big * rng.uniform(0.0, 1.0, big.shape)
        assert l2_spacetime(Field(grid, time, small)) <= l2_spacetime(Field(grid, time, big))


class TestSlopeFit:
    """Least-squares fits in log-log coordinates"""

    def test_exact_power_law(self):
        points = [(nu, 5.0 * nu ** 2) for nu in (1e-3, 3e-3, 1e-2, 3e-2)]
        fit = fit_slope(points)
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(math.log(5.0))
        assert fit.pair_slopes == pytest.approx((2.0, 2.0, 2.0))

    def test_constant_error_has_zero_slope(self):
        fit = fit_slope([(nu, 2.5e-3) for nu in (1e-3, 3e-3, 1e-2, 3e-2)])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_scaling_errors_keeps_slope(self):
        points = [(1e-3, 4.1e-6), (3e-3, 2.2e-5), (1e-2, 1.3e-4), (3e-2, 4.0e-4)]
        scaled = [(nu, 37.5 * err) for nu, err in points]
        fit, fit_scaled = fit_slope(points), fit_slope(scaled)
        assert fit_scaled.slope == pytest.approx(fit.slope, rel=1e-12)
        assert fit_scaled.intercept == pytest.approx(fit.intercept + math.log(37.5), rel=1e-12)

    def test_order_independent(self):
        points = [(3e-2, 9e-4), (1e-3, 1e-6), (1e-2, 1e-4)]
        assert fit_slope(points).slope == pytest.approx(fit_slope(sorted(points)).slope)

    def test_pair_slopes_in_increasing_nu(self):
        fit = fit_slope([(1.0, 1.0), (10.0, 10.0), (100.0, 1e4)])
        assert fit.pair_slopes == pytest.approx((1.0, 3.0))

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            fit_slope([(1e-3, 1e-6)])
        with pytest.raises(ValueError):
            fit_slope([(1e-3, 0.0), (1e-2, 1e-4)])
        with pytest.raises(ValueError):
            fit_slope([(1e-3, 1e-6), (1e-3, 2e-6)])

    def test_floor_pairs_dropped(self):
        # Smallest nu sits on a floor: pair slope below 0.1, the rest follow nu^4
        nus = [1e-3, 3e-3, 1e-2, 3e-2]
        errs = [1.1e-8] + [1.2e-8 * (nu / 3e-3) ** 4 for nu in nus[1:]]
        points = list(zip(nus, errs))
        fit = fit_slope_above_floor(points)
        assert fit.slope == pytest.approx(4.0)
        assert len(fit.pair_slopes) == 2

    def test_floor_keeps_two_points(self):
        points = [(1e-3, 1.0), (1e-2, 1.0), (1e-1, 1.0)]
        fit = fit_slope_above_floor(points)
        assert len(fit.pair_slopes) == 1


class TestGridPolicy:

    def test_peclet_limit(self):
        policy = GridPolicy(n_cells=200)
        spec = ProblemSpec(a=1.0, nu=1e-2)
        grid, _ = policy.grids(spec)
        assert policy.peclet(spec, grid) == pytest.approx(1.0)
        assert policy.is_resolved(spec, grid)
        assert not policy.is_resolved(spec.with_nu(1e-3), grid)

    def test_boundary_layer_for_negative_speed(self):
        policy = GridPolicy(n_cells=200)
        spec = ProblemSpec(a=-1.0, nu=2e-2)
        grid, _ = policy.grids(spec)
        # Peclet 0.5 but the layer nu/|a| spans only 2 cells
        assert policy.peclet(spec, grid) <= 2.0
        assert not policy.is_resolved(spec, grid)
        assert policy.is_resolved(spec.with_nu(6e-2), grid)

    def test_explicit_steps(self):
        _, time = GridPolicy(n_cells=100, n_steps=30).grids(ProblemSpec(a=1.0, nu=1e-2))
        assert time.n_steps == 30


class TestSlopesByMethod:

    def test_grouped_per_label(self):
        records = [record(nu, 'variational', nu ** 1.5) for nu in (1e-3, 1e-2, 1e-1)]
        records += [record(nu, 'factorization_k1', nu ** 2.5) for nu in (1e-3, 1e-2, 1e-1)]
        fits = slopes_by_method(records, 'omega1')
        assert fits['variational'].slope == pytest.approx(1.5)
        assert fits['factorization_k1'].slope == pytest.approx(2.5)

    def test_unresolved_and_zero_rows_left_out(self):
        records = [
            record(1e-3, 'variational', 1e-9, resolved=False),
            record(1e-2, 'variational', 1e-4),
            record(1e-1, 'variational', 1e-2),
            record(1e-2, 'monodomain', 0.0),
            record(1e-1, 'monodomain', 0.0),
        ]
        fits = slopes_by_method(records, 'omega1')
        assert fits['variational'].slope == pytest.approx(2.0)
        assert 'monodomain' not in fits
        assert slopes_by_method(records, 'omega1', resolved_only=False)['variational'].slope != pytest.approx(2.0)

    def test_inviscid_region(self):
        records = [record(nu, 'variational', 1.0, err2=nu) for nu in (1e-3, 1e-2)]
        assert slopes_by_method(records, 'omega2')['variational'].slope == pytest.approx(1.0)


class TestRunSweep:
    """Sweeps against the monodomain reference"""

    def setup_method(self):
        self.template = ProblemSpec(a=1.0, nu=1e-2, f=ReferenceForcing(), h=GaussianBump(x0=-0.6))
        self.policy = GridPolicy(n_cells=100)

    def test_row_order_and_monodomain_zero(self):
        methods = [CouplingMethod.monodomain(), CouplingMethod.variational(), CouplingMethod.factorization(1)]
        records = run_sweep(self.template, [5e-2, 2e-2], methods, self.policy)
        assert [(r.nu, r.label) for r in records] == [
            (5e-2, 'monodomain'), (5e-2, 'variational'), (5e-2, 'factorization_k1'),
            (2e-2, 'monodomain'), (2e-2, 'variational'), (2e-2, 'factorization_k1'),
        ]
        for r in records:
            if r.label == 'monodomain':
                assert r.err_omega1 == 0.0 and r.err_omega2 == 0.0
            else:
                assert r.err_omega1 > 0.0
            assert r.resolved
            assert r.peclet == pytest.approx(0.02 / r.nu)

    def test_deterministic(self):
        methods = [CouplingMethod.factorization(2)]
        first = run_sweep(self.template, [2e-2], methods, self.policy)
        second = run_sweep(self.template, [2e-2], methods, self.policy)
        assert first[0].to_row() == second[0].to_row()

    def test_parallel_matches_serial(self):
        methods = [CouplingMethod.variational(), CouplingMethod.factorization(1)]
        serial = run_sweep(self.template, [5e-2, 2e-2], methods, self.policy, jobs=1)
        parallel = run_sweep(self.template, [5e-2, 2e-2], methods, self.policy, jobs=2)
        assert [r.to_row() for r in serial] == [r.to_row() for r in parallel]

    def test_unresolved_flagged(self):
        records = run_sweep(self.template, [1e-3], [CouplingMethod.variational()], self.policy)
        assert not records[0].resolved
        assert records[0].peclet == pytest.approx(20.0)

    def test_failed_cell_recorded(self):
        tracker = ErrorTracker()
        method = CouplingMethod.non_variational(max_iters=2, tol=1e-14)
        records = run_sweep(self.template, [2e-2], [CouplingMethod.variational(), method], self.policy,
                            tracker=tracker)
        assert len(records) == 2
        assert not records[0].failed
        assert records[1].failed
        assert math.isnan(records[1].err_omega1)
        assert tracker.get_summary()['by_type'] == {'ConvergenceError': 1}

    def test_empty_sweep(self):
        assert run_sweep(self.template, [], [CouplingMethod.variational()], self.policy) == []


class TestDefaultJobs:

    def test_positive(self):
        assert analysis.default_jobs() >= 1

