"""
Base class for coupling strategies

Each coupling turns a problem setup and a global grid into a CoupledSolution
on the two subdomains. Subclasses are discovered by CouplingManager.
"""

from abc import ABC, abstractmethod
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Any, Dict, Optional

from structured_logging import ErrorContext

if TYPE_CHECKING:
    from models import CoupledSolution, CouplingMethod, Grid, ProblemSpec, TimeGrid


class BaseCoupling(ABC):
    """
    Abstract base class for coupling strategies.

    Subclasses implement `_solve`; `solve` wraps it with logging and
    bookkeeping.
    """

    def __init__(self):
        self.last_solve = None
        self.solve_count = 0
        self.error_count = 0

    @property
    @abstractmethod
    def name(self) -> str:
        """
        Registry name, matching MethodKind values
        """
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """
        Human-readable description of this coupling
        """
        pass

    @abstractmethod
    def _solve(self, spec: 'ProblemSpec', grid: 'Grid', time: 'TimeGrid',
               method: 'CouplingMethod', **options) -> 'CoupledSolution':
        pass

    def solve(self, spec: 'ProblemSpec', grid: 'Grid', time: 'TimeGrid',
              method: Optional['CouplingMethod'] = None, **options) -> 'CoupledSolution':
        """
        Solve the coupled problem.

        Args:
            spec: Problem setup
            grid: Global grid over (-l1, l2)
            time: Shared time grid
            method: Method tag with its options; defaults to this coupling's
                plain tag
            **options: Strategy specific options (initial_guess, neg_data)

        Returns:
            CoupledSolution on the two subdomains
        """
        from models import CouplingMethod

        if method is None:
            method = CouplingMethod.from_label(self.name)
        self.solve_count += 1
        try:
            with ErrorContext('coupling_solve', method=method.label, nu=spec.nu, a=spec.a):
                solution = self._solve(spec, grid, time, method, **options)
        except Exception:
            self.error_count += 1
            raise
        self.last_solve = datetime.now(timezone.utc)
        return solution

    def get_status(self) -> Dict[str, Any]:
        """
        Current status of this coupling.
        """
        return {
            'name': self.name,
            'description': self.description,
            'last_solve': self.last_solve.isoformat() if self.last_solve else None,
            'solve_count': self.solve_count,
            'error_count': self.error_count
        }
