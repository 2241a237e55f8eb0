"""Request/response models for the HTTP service.

Every request model forbids unknown keys, so a config document with a
misspelled field is rejected at the boundary instead of being silently
ignored.  Responses carry rendered output files as text under `files`
(filename -> content) plus the fully resolved parameter set under
`resolved`, which round-trips as a config section.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field

M_DEFAULT = math.sqrt(3.0) / 2.0


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProfileRequest(_Strict):
    m: float = Field(default=M_DEFAULT, gt=0.0)
    H: float = Field(default=1.0, gt=0.0)
    N: int = Field(default=128, ge=16, le=1 << 16)
    grid: str = Field(default="chebyshev", pattern="^(chebyshev|uniform)$")
    s: int = Field(default=1, ge=1, le=64, description="number of arches; s >= 2 glues")
    tol: float | None = Field(default=None, gt=0.0)


class ProfileResponse(_Strict):
    params: dict[str, float]
    residual: float
    segments: int
    phi_max: float
    files: dict[str, str]
    resolved: dict


class Simulate1DRequest(_Strict):
    m: float = Field(default=M_DEFAULT, gt=0.0)
    H: float = Field(default=1.0, gt=0.0)
    N: int = Field(default=256, ge=16, le=1 << 16)
    t_end: float = Field(default=0.9, gt=0.0)
    amplitude: float = Field(default=1.0)
    rel_tol: float = Field(default=1e-9, gt=0.0)
    abs_tol: float = Field(default=1e-11, gt=0.0)
    blowup_threshold: float = Field(default=1e6, gt=0.0)
    max_steps: int = Field(default=200_000, ge=1)
    snapshot_times: list[float] = Field(default_factory=list)
    method: str = Field(default="spectral", pattern="^(spectral|fd4)$")


class Simulate1DResponse(_Strict):
    verdict: str
    reason: str
    T_est: float | None
    r2: float | None
    slope: float | None
    intercept: float | None
    n_accepted: int
    n_rejected: int
    files: dict[str, str]
    resolved: dict


class Simulate2DRequest(_Strict):
    m: float = Field(default=M_DEFAULT, gt=0.0)
    H: float = Field(default=1.0, gt=0.0)
    L: float = Field(default=2.0 * math.pi, gt=0.0)
    k: int = Field(default=1, ge=1)
    k_max: int = Field(default=64, ge=4, le=4096)
    Nz: int = Field(default=96, ge=8, le=4096)
    nu: float = Field(default=0.0, ge=0.0)
    t_end: float = Field(default=0.3, gt=0.0)
    rel_tol: float = Field(default=1e-9, gt=0.0)
    abs_tol: float = Field(default=1e-11, gt=0.0)
    filter_strength: float = Field(default=0.0, ge=0.0)
    snapshot_times: list[float] = Field(default_factory=lambda: [0.1, 0.2, 0.3])
    trace_tol: float = Field(default=0.02, gt=0.0)
    exhaustion_limit: float = Field(default=1e-6, gt=0.0)
    max_steps: int = Field(default=200_000, ge=1)


class Simulate2DResponse(_Strict):
    verdict: str
    reason: str
    exhausted_at: float | None
    max_rel_err_checked: float | None
    checked_times: list[float]
    n_accepted: int
    n_rejected: int
    files: dict[str, str]
    resolved: dict


class SweepRequest(_Strict):
    m_list: list[float] = Field(min_length=1)
    H: float = Field(default=1.0, gt=0.0)
    profile_N: int = Field(default=128, ge=16, le=1 << 16)
    sim_N: int = Field(default=256, ge=16, le=1 << 16)
    t_end: float = Field(default=0.9, gt=0.0)
    rel_tol: float = Field(default=1e-9, gt=0.0)
    abs_tol: float = Field(default=1e-11, gt=0.0)


class SweepRow(_Strict):
    m: float
    status: str
    psi_plus: float | None = None
    psi_minus: float | None = None
    C: float | None = None
    phi_max: float | None = None
    residual: float | None = None
    T_est: float | None = None
    message: str = ""


class SweepResponse(_Strict):
    rows: list[SweepRow]
    failed: bool
    first_failure: str | None
    files: dict[str, str]
    resolved: dict


class Health(_Strict):
    status: str
    name: str
    version: str
