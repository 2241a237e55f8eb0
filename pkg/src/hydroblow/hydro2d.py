"""Pseudo-spectral solver for the 2D inviscid hydrostatic channel system.

Unknown: the horizontal velocity u(x,z,t), odd and L-periodic in x, on a
channel of height H.  The vertical velocity and pressure gradient are
diagnosed from u each evaluation:

    w(x,z)  = -int_0^z u_x dz'          (incompressibility + w(x,0) = 0),
    p_x(x)  = -2 * zavg(u u_x)          (hydrostatic closure, z-independent),
    u_t     = -u u_x - w u_z - p_x  [+ nu (u_xx + u_zz)].

Representation: real sine coefficients u_hat[k-1, j] for wavenumbers
k = 1..k_max against sin(2 pi k x / L) at Chebyshev-Lobatto z-nodes z_j.
Oddness in x is therefore structural (the even/cosine part does not exist
in the state), which realizes the invariant symmetry class exactly.
Products are formed on an x-grid of 3*k_max points, so quadratic products
of retained modes (all below the 2/3 cutoff) are alias-free by
construction; the cutoff mask is applied to inputs and outputs anyway.

The z-average compatibility constraint (each mode's Clenshaw-Curtis mean
must vanish, else w(x,H) != 0) is enforced by projection on every rhs
output.  Vertical integration uses the spectral antiderivative matrix, so
w vanishes at z = 0 identically and at z = H to rounding.

Viscous runs do not step the stiff diffusion explicitly: the rhs keeps the
literal nu (u_xx + u_zz) for pointwise evaluation, but integrate2d splits
it off, advancing inviscid dynamics with the adaptive pair and applying
per accepted step an exact integrating factor in x and a backward-Euler
solve in z on interior nodes (boundary values held fixed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cheb
from .errors import ConvergenceError, DomainError, GridMismatchError
from .odeint import integrate_rk54
from .profile import Profile, sample_on
from .textio import csv_text

DEFAULT_CONTROLS_2D = {
    "rel_tol": 1e-9,
    "abs_tol": 1e-11,
    "filter_strength": 0.0,
    "snapshot_times": (),
    "max_steps": 200_000,
    "exhaustion_limit": 1e-6,
}

FILTER_ORDER = 8
PP6_TOL = 1e-12
TOP_BAND_FRACTION = 0.9


def dealias_cutoff(k_max: int) -> int:
    """Highest wavenumber kept by the 2/3 rule."""
    return (2 * k_max) // 3


@dataclass
class Field2D:
    """Sine-mode coefficients of u on the Chebyshev z-grid."""

    t: float
    L: float
    H: float
    k_max: int
    Nz: int
    u_hat: np.ndarray
    nu: float = 0.0

    def validate(self) -> None:
        if self.u_hat.shape != (self.k_max, self.Nz + 1):
            raise DomainError(
                f"u_hat shape {self.u_hat.shape} != ({self.k_max}, {self.Nz + 1})"
            )
        if not np.isfinite(self.u_hat).all():
            raise DomainError("u_hat contains non-finite values")
        if self.nu < 0.0:
            raise DomainError("nu must be >= 0")
        kcut = dealias_cutoff(self.k_max)
        if self.k_max > kcut and np.any(self.u_hat[kcut:] != 0.0):
            raise DomainError("modes above the 2/3 cutoff must be zero")


class _Workspace:
    """Grids, transform matrices and z-operators for one (L,H,k_max,Nz)."""

    def __init__(self, L: float, H: float, k_max: int, Nz: int):
        self.L, self.H, self.k_max, self.Nz = L, H, k_max, Nz
        self.kcut = dealias_cutoff(k_max)
        self.Nx = 3 * k_max
        self.x = np.arange(self.Nx) * (L / self.Nx)
        k = np.arange(1, k_max + 1)
        self.kappa = 2.0 * np.pi * k / L
        theta = np.outer(self.x, self.kappa)
        self.S = np.sin(theta)
        self.Cs = np.cos(theta)
        self.mask = (k <= self.kcut).astype(float)[:, None]
        self.z = cheb.lobatto_nodes(Nz, H)
        self.D = cheb.diff_matrix(Nz, H)
        self.D2 = self.D @ self.D
        self.J = cheb.antideriv_matrix(Nz, H)
        self.wz = cheb.clenshaw_curtis_weights(Nz, H)

    def to_phys(self, U: np.ndarray) -> np.ndarray:
        return self.S @ U

    def to_modes(self, phys: np.ndarray) -> np.ndarray:
        return (2.0 / self.Nx) * (self.S.T @ phys)

    def project_pp6(self, U: np.ndarray) -> np.ndarray:
        means = (U @ self.wz) / self.H
        return U - means[:, None]


_workspaces: dict[tuple, _Workspace] = {}


def _workspace(field: Field2D) -> _Workspace:
    key = (field.L, field.H, field.k_max, field.Nz)
    ws = _workspaces.get(key)
    if ws is None:
        ws = _Workspace(*key)
        _workspaces[key] = ws
    return ws


def init_from_theorem(
    profile: Profile, k: int, L: float, k_max: int, Nz: int, nu: float = 0.0
) -> Field2D:
    """Single-mode initial data u0 = -(L/2 pi k) sin(2 pi k x/L) phi'(z).

    The derived vertical velocity at t=0 is then cos(2 pi k x/L) phi(z).
    """
    if k < 1 or L <= 0.0 or k_max < 4 or Nz < 8:
        raise DomainError("init_from_theorem: need k >= 1, L > 0, k_max >= 4, Nz >= 8")
    if k > dealias_cutoff(k_max):
        raise DomainError(
            f"mode k={k} lies beyond the 2/3 dealiasing cutoff {dealias_cutoff(k_max)}"
        )
    z = cheb.lobatto_nodes(Nz, profile.height)
    if profile.grid_kind == "chebyshev" and profile.segments == 1 and len(profile.z) == Nz + 1:
        dphi = profile.dphi
    else:
        _, dphi, _ = sample_on(profile, z)
    U = np.zeros((k_max, Nz + 1))
    U[k - 1] = -(L / (2.0 * math.pi * k)) * dphi
    fld = Field2D(t=0.0, L=L, H=profile.height, k_max=k_max, Nz=Nz, u_hat=U, nu=nu)
    fld.u_hat = _workspace(fld).project_pp6(fld.u_hat)
    fld.validate()
    return fld


def pp6_defect(field: Field2D) -> float:
    """Largest |wavenumber * CC-mean of a mode|: must stay below 1e-12."""
    ws = _workspace(field)
    means = (field.u_hat @ ws.wz) / field.H
    return float(np.max(np.abs(means * ws.kappa))) if field.k_max else 0.0


def diagnose_w(field: Field2D) -> np.ndarray:
    """w on the (x, z) grid via the spectral z-antiderivative."""
    field.validate()
    ws = _workspace(field)
    W_hat = -ws.kappa[:, None] * (field.u_hat @ ws.J.T)
    return ws.Cs @ W_hat


def trace_w0(field: Field2D) -> np.ndarray:
    """The x = 0 trace of w: sum of the cosine-mode profiles."""
    ws = _workspace(field)
    W_hat = -ws.kappa[:, None] * (field.u_hat @ ws.J.T)
    return np.sum(W_hat, axis=0)


def pressure_gradient(field: Field2D) -> np.ndarray:
    """p_x per x-node (z-independent); odd in x, exactly zero at x = 0."""
    field.validate()
    ws = _workspace(field)
    U = field.u_hat * ws.mask
    u = ws.to_phys(U)
    ux = ws.Cs @ (ws.kappa[:, None] * U)
    return -2.0 * ((u * ux) @ ws.wz) / field.H


def _rhs_modes(U: np.ndarray, ws: _Workspace, nu: float) -> np.ndarray:
    Ud = U * ws.mask
    u = ws.S @ Ud
    ux = ws.Cs @ (ws.kappa[:, None] * Ud)
    uz = ws.S @ (Ud @ ws.D.T)
    W_hat = -ws.kappa[:, None] * (Ud @ ws.J.T)
    w = ws.Cs @ W_hat
    uux = u * ux
    px = -2.0 * (uux @ ws.wz) / ws.H
    rhs_phys = -(uux + w * uz) - px[:, None]
    R = ws.to_modes(rhs_phys)
    if nu > 0.0:
        R = R + nu * (Ud @ ws.D2.T - ws.kappa[:, None] ** 2 * Ud)
    R *= ws.mask
    R = ws.project_pp6(R)
    if not np.isfinite(R).all():
        raise ConvergenceError("non-finite values in rhs2d")
    return R


def rhs2d(field: Field2D) -> np.ndarray:
    """Time derivative of u_hat (dealiased, symmetry- and PP6-projected)."""
    field.validate()
    return _rhs_modes(field.u_hat, _workspace(field), field.nu)


def energy(field: Field2D) -> float:
    """Integral of u^2/2 over the channel."""
    ws = _workspace(field)
    return float((field.L / 4.0) * np.sum((field.u_hat**2) @ ws.wz))


def top_band_fraction(field: Field2D) -> float:
    """Energy fraction carried by the top decile of retained wavenumbers."""
    ws = _workspace(field)
    per_mode = (field.u_hat**2) @ ws.wz
    total = float(np.sum(per_mode))
    if total == 0.0:
        return 0.0
    lo = max(int(math.ceil(TOP_BAND_FRACTION * ws.kcut)) - 1, 0)
    return float(np.sum(per_mode[lo : ws.kcut])) / total


@dataclass
class Trajectory2D:
    """2D integration output with exhaustion bookkeeping.

    energies rows are (t, energy, top_band_fraction) at accepted steps;
    traces holds (t, w(0, z) array) at snapshot times plus the final time;
    exhausted_at is the first accepted time whose top-band energy fraction
    exceeded the configured limit (None if never).
    """

    snapshots: list[Field2D]
    traces: list[tuple[float, np.ndarray]]
    energies: np.ndarray
    reason: str
    exhausted_at: float | None
    n_accepted: int
    n_rejected: int
    controls: dict = field(default_factory=dict)

    @property
    def final(self) -> Field2D:
        return self.snapshots[-1]


def _merge_controls_2d(controls: dict | None) -> dict:
    merged = dict(DEFAULT_CONTROLS_2D)
    if controls:
        unknown = set(controls) - set(DEFAULT_CONTROLS_2D)
        if unknown:
            raise DomainError(f"unknown control keys: {sorted(unknown)}")
        merged.update(controls)
    return merged


def integrate2d(initial: Field2D, t_end: float, controls: dict | None = None) -> Trajectory2D:
    """Adaptive integration of the inviscid dynamics with split extras.

    The exponential filter (strength > 0) and the viscous update (nu > 0)
    are applied after each accepted step; both invalidate the FSAL stage.
    Exhaustion does not stop the run, it only marks the first untrusted
    time.
    """
    initial.validate()
    ctrl = _merge_controls_2d(controls)
    ws = _workspace(initial)
    nu = initial.nu
    shape = initial.u_hat.shape
    kcut_band = np.arange(1, initial.k_max + 1) <= ws.kcut

    sigma = None
    if ctrl["filter_strength"] > 0.0:
        krel = np.arange(1, initial.k_max + 1) / max(ws.kcut, 1)
        sigma = np.where(
            kcut_band, np.exp(-ctrl["filter_strength"] * krel**FILTER_ORDER), 0.0
        )[:, None]

    def f(t, y):
        return _rhs_modes(y.reshape(shape), ws, 0.0).ravel()

    interior = slice(1, ws.Nz)

    def post(t, y, h):
        U = y.reshape(shape)
        if nu > 0.0:
            U *= np.exp(-nu * ws.kappa[:, None] ** 2 * h)
            A = np.eye(ws.Nz - 1) - nu * h * ws.D2[interior, interior]
            rhs_b = U[:, interior].T + nu * h * (
                ws.D2[interior, [0]] * U[:, :1].T + ws.D2[interior, [ws.Nz]] * U[:, -1:].T
            )
            U[:, interior] = np.linalg.solve(A, rhs_b).T
        if sigma is not None:
            U *= sigma
        if nu > 0.0 or sigma is not None:
            U = ws.project_pp6(U)
        return U.ravel()

    needs_post = nu > 0.0 or sigma is not None
    energies: list[tuple[float, float, float]] = []
    exhausted_at: list[float] = []

    def observer(t, y):
        U = y.reshape(shape)
        per_mode = (U**2) @ ws.wz
        total = float(np.sum(per_mode))
        lo = max(int(math.ceil(TOP_BAND_FRACTION * ws.kcut)) - 1, 0)
        frac = 0.0 if total == 0.0 else float(np.sum(per_mode[lo : ws.kcut])) / total
        energies.append((t, (initial.L / 4.0) * total, frac))
        if frac > ctrl["exhaustion_limit"] and not exhausted_at:
            exhausted_at.append(t)

    res = integrate_rk54(
        f,
        initial.t,
        initial.u_hat.ravel().copy(),
        t_end,
        rel_tol=ctrl["rel_tol"],
        abs_tol=ctrl["abs_tol"],
        max_steps=ctrl["max_steps"],
        snapshot_times=list(ctrl["snapshot_times"]),
        observer=observer,
        post_accept=post if needs_post else None,
        post_invalidates_fsal=needs_post,
    )

    def mk_field(ts, ys):
        return Field2D(
            t=ts, L=initial.L, H=initial.H, k_max=initial.k_max,
            Nz=initial.Nz, u_hat=ys.reshape(shape), nu=nu,
        )

    snaps = [mk_field(ts, ys) for ts, ys in res.snapshots]
    if not snaps or snaps[-1].t != res.t:
        snaps.append(mk_field(res.t, res.y))
    traces = [(fld.t, trace_w0(fld)) for fld in snaps]
    return Trajectory2D(
        snapshots=snaps,
        traces=traces,
        energies=np.asarray(energies, dtype=float),
        reason=res.reason,
        exhausted_at=exhausted_at[0] if exhausted_at else None,
        n_accepted=res.n_accepted,
        n_rejected=res.n_rejected,
        controls=ctrl,
    )


def trace_csv(traj: Trajectory2D, profile: Profile, amplitude: float = 1.0) -> str:
    """Long-format trace table with the self-similar reference per row.

    rel_err is |w_trace - ref| normalized by the sup of the reference at
    that time (the reference vanishes at the boundaries, so a pointwise
    quotient would be ill-defined there).
    """
    z = cheb.lobatto_nodes(traj.snapshots[0].Nz, traj.snapshots[0].H)
    phi_z, _, _ = sample_on(profile, z)
    rows = []
    for t, w0 in traj.traces:
        denom = 1.0 - amplitude * t
        if denom <= 0.0:
            raise DomainError(f"self-similar reference undefined at t={t}")
        ref = amplitude * phi_z / denom
        sup = float(np.max(np.abs(ref)))
        for zj, wj, rj in zip(z, w0, ref):
            rows.append((t, zj, wj, rj, abs(wj - rj) / sup))
    return csv_text(("t", "z", "w_trace", "self_similar_ref", "rel_err"), rows)


def trace_errors(traj: Trajectory2D, profile: Profile, amplitude: float = 1.0):
    """Per-trace relative sup error against the self-similar reference."""
    z = cheb.lobatto_nodes(traj.snapshots[0].Nz, traj.snapshots[0].H)
    phi_z, _, _ = sample_on(profile, z)
    out = []
    if len(phi_z) != len(traj.traces[0][1]):
        raise GridMismatchError("profile and trace grids differ")
    for t, w0 in traj.traces:
        ref = amplitude * phi_z / (1.0 - amplitude * t)
        sup = float(np.max(np.abs(ref)))
        out.append((t, float(np.max(np.abs(w0 - ref))) / sup))
    return out


def energy_csv(traj: Trajectory2D) -> str:
    return csv_text(("t", "energy", "top_band_fraction"), map(tuple, traj.energies))


def run_doc(traj: Trajectory2D) -> dict:
    fld = traj.final
    return {
        "L": fld.L,
        "H": fld.H,
        "k_max": fld.k_max,
        "Nz": fld.Nz,
        "nu": fld.nu,
        "filter_strength": traj.controls.get("filter_strength", 0.0),
        "rel_tol": traj.controls.get("rel_tol"),
        "abs_tol": traj.controls.get("abs_tol"),
        "t_final": fld.t,
        "reason": traj.reason,
        "exhausted_at": traj.exhausted_at,
        "n_accepted": traj.n_accepted,
        "n_rejected": traj.n_rejected,
        "energy_initial": traj.energies[0][1] if len(traj.energies) else 0.0,
        "energy_final": traj.energies[-1][1] if len(traj.energies) else 0.0,
    }
