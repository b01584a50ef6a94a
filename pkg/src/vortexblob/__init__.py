"""Vortex-blob and point-vortex dynamics in bounded planar domains."""

from .errors import (
    ConfigurationError,
    DomainError,
    NumericalHaltError,
    SingularityError,
    UndefinedCenterError,
)
from .geometry import (
    ConformalPullback,
    DomainModel,
    GreenEval,
    UnitDisk,
    dist_to_boundary,
    gamma,
    grad_gamma_x,
    grad_robin,
    green_eval,
    pt,
    regular_part,
    robin,
    rotate_cw,
)
from .cutoff import (
    CutoffPair,
    SmoothedLog,
    build_cutoffs,
    eval_chi,
    eval_theta,
    grad_chi,
    grad_theta,
    smoothed_log,
    smoothed_log_deriv,
)
from .pointvortex import (
    OdeSolution,
    VortexConfig,
    hamiltonian,
    integrate,
    integrate_center,
    kr_velocity_k,
    kr_velocity_single,
    select_rho0,
)
from .blob import (
    BlobEvent,
    BlobTrajectory,
    FieldMode,
    ParticleCloud,
    RegularizedField,
    boundary_force,
    boundary_force_at,
    gamma_momentum_residual,
    make_initial_cloud,
    merge_clouds,
    run,
    step,
    velocity_at,
)
from .diagnostics import (
    BlobDiagnostics,
    GronwallReport,
    SweepResult,
    blob_circulation,
    check_gronwall,
    compare_to_ode,
    distribution_check,
    fit_exponent,
    measure,
    measure_force_bounds,
    snapshot_diagnostics,
)

__version__ = "0.1.0"
