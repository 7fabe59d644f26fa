"""equicont: symmetry-aware numerical continuation of critical orbits.

Slices transverse to group orbits, multiplier-bordered Newton solves,
equivariant nondegeneracy certification, and branch continuation for
discretized invariant variational problems: constant-curvature curves,
closed (semi-)Riemannian geodesics, and harmonic maps into S^1 and S^2.
"""

__version__ = "0.1.0"

from .bordered import BorderedSolution, solve_bordered
from .catalog import get_problem, list_problems
from .continuation import Branch, BranchSample, StepPolicy, continue_branch
from .gram import GramPair
from .grids import (DiffOperators, Grid, circular_shift, derivative_matrices,
                    make_grid, trig_interpolate)
from .groups import GroupModel, trivial_group
from .linearize import (KernelInfo, NondegeneracyReport, assemble_linearization,
                        kernel_basis, nondegeneracy_check)
from .problems import ProblemInstance, gradient_consistency, smooth_field_sampler
from .projection import equivariance_residual, slice_project, winding_degree
from .slices import SliceBasis, build_slice

__all__ = [
    "__version__",
    "Grid", "DiffOperators", "make_grid", "derivative_matrices",
    "circular_shift", "trig_interpolate",
    "GramPair", "GroupModel", "trivial_group", "ProblemInstance",
    "gradient_consistency", "smooth_field_sampler",
    "assemble_linearization", "kernel_basis", "nondegeneracy_check",
    "KernelInfo", "NondegeneracyReport",
    "SliceBasis", "build_slice",
    "BorderedSolution", "solve_bordered",
    "Branch", "BranchSample", "StepPolicy", "continue_branch",
    "slice_project", "winding_degree", "equivariance_residual",
    "get_problem", "list_problems",
]
