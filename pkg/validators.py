"""
Validation of problem setups against their grids
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from models import Grid, ProblemSpec, TimeGrid

# Tolerance for the compact support conditions sampled at grid nodes
SUPPORT_TOL = 1e-12


class ValidationError(Exception):
    """Raised when a configuration fails validation"""

    def __init__(self, report: 'ValidationReport'):
        super().__init__('; '.join(report.violations))
        self.report = report


@dataclass
class ValidationReport:
    """List of violated invariants, empty when the setup is valid"""

    violations: List[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def add(self, message: str):
        self.violations.append(message)

    def raise_if_invalid(self):
        if self.violations:
            raise ValidationError(self)


class ProblemValidator:
    """Validator for problem parameters, grids and data supports"""

    @staticmethod
    def validate_parameters(spec: ProblemSpec, report: ValidationReport):
        """Positivity constraints on the physical parameters"""
        if not np.isfinite(spec.a) or spec.a == 0:
            report.add("a must be nonzero")
        checks = [
            ('nu', spec.nu), ('c', spec.c), ('l1', spec.l1), ('l2', spec.l2), ('t_final', spec.t_final)
        ]
        for label, value in checks:
            if not (np.isfinite(value) and value > 0):
                report.add(f"{label} must be positive")

    @staticmethod
    def validate_grid(spec: ProblemSpec, grid: Grid, time: TimeGrid, report: ValidationReport):
        """
        Check that the grid covers the domain with the interface on a node.

        Args:
            spec: Problem setup
            grid: Global grid, expected over (-l1, l2)
            time: Time grid, expected to end at t_final
            report: Report collecting violations
        """
        scale = max(1.0, spec.l1, spec.l2)
        if abs(grid.x_min + spec.l1) > 1e-12 * scale or abs(grid.x_max - spec.l2) > 1e-12 * scale:
            report.add(f"grid [{grid.x_min}, {grid.x_max}] does not cover the domain [{-spec.l1}, {spec.l2}]")
        if not (grid.x_min <= 0.0 <= grid.x_max) or not grid.is_node(0.0):
            report.add("interface not a grid node")
        if abs(time.t_final - spec.t_final) > 1e-12 * max(1.0, spec.t_final):
            report.add(f"time grid ends at {time.t_final}, expected {spec.t_final}")

    @staticmethod
    def validate_supports(spec: ProblemSpec, grid: Grid, report: ValidationReport):
        """
        Compact support of the data sampled at grid nodes and t = 0.

        For a < 0 the initial bump sits upstream in the inviscid region, so
        h is only required to vanish on x >= 0 when a > 0.
        """
        nodes = grid.nodes
        right = nodes[nodes >= 0.0]
        if spec.a > 0 and right.size and np.max(np.abs(spec.h.value(right, 0.0))) > SUPPORT_TOL:
            report.add("h must vanish for x >= 0")
        if np.max(np.abs(spec.f.value(nodes, 0.0))) > SUPPORT_TOL:
            report.add("f must vanish at t = 0")
        if abs(spec.g1.value(-spec.l1, 0.0)) > SUPPORT_TOL:
            report.add("g1 must vanish at t = 0")
        if abs(spec.g2.value(spec.l2, 0.0)) > SUPPORT_TOL:
            report.add("g2 must vanish at t = 0")


def validate(spec: ProblemSpec, grid: Grid, time: TimeGrid,
             check_supports: bool = True) -> ValidationReport:
    """
    Validate a setup.

    Args:
        spec: Problem setup
        grid: Global grid over (-l1, l2)
        time: Time grid
        check_supports: Sample the compact support conditions (skipped for
            manufactured data that deliberately violates them)

    Returns:
        ValidationReport, empty when valid
    """
    report = ValidationReport()
    ProblemValidator.validate_parameters(spec, report)
    ProblemValidator.validate_grid(spec, grid, time, report)
    if check_supports:
        ProblemValidator.validate_supports(spec, grid, report)
    return report


def check(spec: ProblemSpec, grid: Grid, time: TimeGrid, check_supports: bool = True) -> ValidationReport:
    """Validate and raise ValidationError on any violation"""
    report = validate(spec, grid, time, check_supports)
    report.raise_if_invalid()
    return report
