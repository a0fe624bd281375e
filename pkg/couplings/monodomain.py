"""
Monodomain reference: the viscous model on the whole domain
"""

from couplings.base_coupling import BaseCoupling
from couplings.stages import reference_field
from models import CoupledSolution, CouplingDiagnostics, CouplingMethod, Grid, ProblemSpec, TimeGrid, subdomain_grids


def solve_monodomain(spec: ProblemSpec, grid: Grid, time: TimeGrid) -> CoupledSolution:
    """Reference solution restricted to the two subdomains"""
    field = reference_field(spec, grid, time)
    omega1, omega2 = subdomain_grids(grid)
    diagnostics = CouplingDiagnostics(interface_traces=[field.trace_at(0.0)])
    return CoupledSolution(field.restrict(omega1), field.restrict(omega2), diagnostics)


class MonodomainCoupling(BaseCoupling):

    @property
    def name(self) -> str:
        return 'monodomain'

    @property
    def description(self) -> str:
        return 'Advection reaction diffusion on the whole domain'

    def _solve(self, spec: ProblemSpec, grid: Grid, time: TimeGrid,
               method: CouplingMethod, **options) -> CoupledSolution:
        return solve_monodomain(spec, grid, time)
