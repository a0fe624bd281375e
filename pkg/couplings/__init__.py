"""
Coupling strategies for the heterogeneous domain decomposition
"""

from .base_coupling import BaseCoupling
from .coupling_manager import CouplingManager, get_manager


def solve(spec, grid, time, method, **options):
    """Dispatch a CouplingMethod to its registered coupling"""
    return get_manager().solve(spec, grid, time, method, **options)


__all__ = ['BaseCoupling', 'CouplingManager', 'get_manager', 'solve']
