"""
Coupling Manager for discovering and loading coupling strategies

Scans the couplings package for BaseCoupling subclasses and dispatches
CouplingMethod tags to them.
"""

import importlib
import inspect
import os
from typing import Any, Dict, List

from couplings.base_coupling import BaseCoupling
from structured_logging import get_logger

logger = get_logger(__name__)

# Modules of the package that hold no coupling
HELPER_MODULES = {'base_coupling', 'coupling_manager', 'operators', 'stages'}


class CouplingManager:
    """
    Manages discovery and dispatch of coupling strategies.
    """

    def __init__(self):
        self.couplings: Dict[str, BaseCoupling] = {}
        self.discover_couplings()

    def discover_couplings(self):
        """
        Load every BaseCoupling subclass found in the couplings directory.

        A module may define several couplings; each registers under its
        own name. Import failures are logged and skipped.
        """
        couplings_dir = os.path.dirname(__file__)
        logger.debug(f"Discovering couplings in: {couplings_dir}")

        for filename in sorted(os.listdir(couplings_dir)):
            if filename.startswith('_') or filename.startswith('.') or not filename.endswith('.py'):
                continue
            module_name = filename[:-3]
            if module_name in HELPER_MODULES:
                continue

            try:
                module = importlib.import_module(f'couplings.{module_name}')
            except Exception as e:
                logger.error(f"Error loading coupling module {module_name}: {e}", module_name=module_name)
                continue

            for _, obj in inspect.getmembers(module, inspect.isclass):
                if not issubclass(obj, BaseCoupling) or obj is BaseCoupling or obj.__module__ != module.__name__:
                    continue
                instance = obj()
                if instance.name in self.couplings:
                    logger.warning(f"Duplicate coupling name '{instance.name}' in {module_name}. Skipping.")
                    continue
                self.couplings[instance.name] = instance
                logger.debug(f"Loaded coupling: {instance.name}", module_name=module_name)

        logger.debug(f"Discovered {len(self.couplings)} coupling(s)")

    def get_coupling(self, name: str) -> BaseCoupling:
        """
        Get a coupling by name.

        Raises:
            KeyError: If no coupling has that name
        """
        if name not in self.couplings:
            raise KeyError(f"Coupling '{name}' not found")
        return self.couplings[name]

    def list_couplings(self) -> List[Dict[str, Any]]:
        return [coupling.get_status() for coupling in self.couplings.values()]

    def solve(self, spec, grid, time, method, **options):
        """
        Solve with the coupling registered for the method's kind.

        Args:
            spec: Problem setup
            grid: Global grid
            time: Time grid
            method: CouplingMethod tag
            **options: Strategy specific options

        Returns:
            CoupledSolution
        """
        return self.get_coupling(method.kind.value).solve(spec, grid, time, method, **options)


_manager = None


def get_manager() -> CouplingManager:
    """Process-wide manager, created on first use"""
    global _manager
    if _manager is None:
        _manager = CouplingManager()
    return _manager
