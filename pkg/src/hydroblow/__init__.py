"""Self-similar blowup profiles and hydrostatic channel-flow solvers."""

__version__ = "0.1.0"

from .errors import (
    CertificationError,
    ConvergenceError,
    DomainError,
    GridMismatchError,
    HydroblowError,
    NoBlowupError,
    StepUnderflowError,
)
from .hydro2d import (
    Field2D,
    Trajectory2D,
    diagnose_w,
    init_from_theorem,
    integrate2d,
    pressure_gradient,
    rhs2d,
)
from .profile import (
    Profile,
    ProfileParams,
    build_profile,
    glue_sign_changing,
    params_from_m,
    phi_of_psi,
    psi_of_z,
    residual_fy,
)
from .reduced1d import (
    BlowupFit,
    State1D,
    Trajectory,
    compare_self_similar,
    estimate_blowup_time,
    integrate,
    rhs,
    state_from_profile,
)

__all__ = [
    "__version__",
    "HydroblowError",
    "DomainError",
    "ConvergenceError",
    "CertificationError",
    "GridMismatchError",
    "NoBlowupError",
    "StepUnderflowError",
    "ProfileParams",
    "Profile",
    "params_from_m",
    "psi_of_z",
    "phi_of_psi",
    "build_profile",
    "glue_sign_changing",
    "residual_fy",
    "State1D",
    "Trajectory",
    "BlowupFit",
    "state_from_profile",
    "rhs",
    "integrate",
    "estimate_blowup_time",
    "compare_self_similar",
    "Field2D",
    "Trajectory2D",
    "init_from_theorem",
    "diagnose_w",
    "pressure_gradient",
    "rhs2d",
    "integrate2d",
]
