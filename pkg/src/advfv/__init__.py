"""Structure-preserving finite-volume solver for a five-species
chemotaxis-reaction-diffusion model of neurodegeneration.

The package provides the mesh machinery (admissible two-point-flux
triangulations), the reaction model with its invariant-region bounds, a
positivity-preserving pointwise integrator, the semi-implicit PDE
stepper with an upwind chemotaxis flux, and a CLI with bundled
experiment presets.
"""

from .errors import (
    AdvfvError,
    ConfigError,
    InadmissibleMeshError,
    InvalidArgumentError,
    MeshFormatError,
    NewtonError,
    SolverError,
    UnsupportedVariantError,
)
from .mesh import (
    Mesh,
    build_structured_rect,
    from_triangulation,
    load_msh,
    validate_admissibility,
    write_msh,
)
from .model import (
    ConstantClearance,
    MichaelisMentenClearance,
    ModelParams,
    RectangleBounds,
    baseline_params,
    default_equilibrium_seeds,
    disease_free_state,
    find_equilibria,
    invariant_bounds,
    reaction_F,
)
from .flux import LinearUpwind, LogisticSplit, FluxKind, chi_split, flux_G, flux_G_partials
from .sh_dynamics import Trajectory, dfe_eigenvalues, discrete_jacobian, euler_step, integrate, nsfd_step
from .fv_solver import (
    RunResult,
    StateField,
    StepDiagnostics,
    StepWorkspace,
    advance,
    compute_dt,
    gradient_energy,
    newton_u4,
    run,
    spatial_variance_u1,
    step_u1,
    step_u2,
    step_u3,
    step_u5,
)
from .config import SimConfig, build_initial, parse_config, preset, resolve_mesh

__version__ = "0.1.0"

__all__ = [
    "AdvfvError",
    "ConfigError",
    "InadmissibleMeshError",
    "InvalidArgumentError",
    "MeshFormatError",
    "NewtonError",
    "SolverError",
    "UnsupportedVariantError",
    "Mesh",
    "build_structured_rect",
    "from_triangulation",
    "load_msh",
    "validate_admissibility",
    "write_msh",
    "ConstantClearance",
    "MichaelisMentenClearance",
    "ModelParams",
    "RectangleBounds",
    "baseline_params",
    "default_equilibrium_seeds",
    "disease_free_state",
    "find_equilibria",
    "invariant_bounds",
    "reaction_F",
    "LinearUpwind",
    "LogisticSplit",
    "FluxKind",
    "chi_split",
    "flux_G",
    "flux_G_partials",
    "Trajectory",
    "dfe_eigenvalues",
    "discrete_jacobian",
    "euler_step",
    "integrate",
    "nsfd_step",
    "RunResult",
    "StateField",
    "StepDiagnostics",
    "StepWorkspace",
    "advance",
    "compute_dt",
    "gradient_energy",
    "newton_u4",
    "run",
    "spatial_variance_u1",
    "step_u1",
    "step_u2",
    "step_u3",
    "step_u5",
    "SimConfig",
    "build_initial",
    "parse_config",
    "preset",
    "resolve_mesh",
    "__version__",
]
