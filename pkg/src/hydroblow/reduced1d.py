"""Time integration of the closed nonlocal equation for W(z,t) = w(0,z,t).

The evolved quantity is W itself, with the time derivative recovered in
antiderivative form anchored at z = 0:

    W_t(z) = int_0^z [(W_z)^2 - W W_zz] dz' - (2 z / H) int_0^H (W_z)^2 dz'.

Both boundary conditions W(0,t) = W(H,t) = 0 are then exact: the anchor
kills z = 0, and at z = H integration by parts (W vanishing at the ends)
makes the bracket integral equal twice the global one.  Discretely the same
cancellation holds because both integrals use the one composite-trapezoid
rule and the derivatives come from the odd sine extension, so the unforced
value of W_t at z = H is a free compatibility diagnostic.

Blowup is detected by extrapolating the line 1/max|W_z| vs t to its root;
for the self-similar solution phi/(1-t) that line is exactly (1-t)/psi+.
The discrete system tracks the self-similar solution only while resolved:
past the point where the amplitude error feeds back, max|W| saturates and
decays instead of crossing any large threshold, so the fit window keeps
only the clean growth phase (pre-peak, below a third of the peak) and then
takes the most recent samples spanning at least a decade.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct, dst

from .errors import DomainError, GridMismatchError, NoBlowupError
from .odeint import integrate_rk54
from .profile import Profile
from .textio import csv_text

DEFAULT_CONTROLS = {
    "rel_tol": 1e-9,
    "abs_tol": 1e-11,
    "blowup_threshold": 1e6,
    "max_steps": 200_000,
    "snapshot_times": (),
}

FIT_MIN_SAMPLES = 10
FIT_DECADE_SPAN = 10.0
FIT_PEAK_GUARD = 3.0
FIT_R2_MIN = 0.99


@dataclass
class State1D:
    """W sampled on a uniform grid with pinned endpoints."""

    t: float
    z: np.ndarray
    W: np.ndarray
    H: float

    def validate(self) -> None:
        if self.W.shape != self.z.shape or self.W.ndim != 1:
            raise DomainError("State1D arrays must be 1-d and matching")
        if not (np.isfinite(self.W).all() and np.isfinite(self.t)):
            raise DomainError("State1D contains non-finite values")
        if self.W[0] != 0.0 or self.W[-1] != 0.0:
            raise DomainError("State1D requires W[0] = W[N] = 0")
        h = np.diff(self.z)
        if not np.allclose(h, h[0], rtol=1e-12, atol=1e-15 * self.H):
            raise DomainError("State1D requires a uniform grid")


def state_from_profile(profile: Profile, amplitude: float = 1.0) -> State1D:
    """Initial state W(z,0) = amplitude * phi(z) on the profile's own grid."""
    if profile.grid_kind != "uniform":
        raise GridMismatchError(
            "the 1D solver needs a uniform-grid profile (grid_kind='uniform')"
        )
    W = amplitude * profile.phi.copy()
    W[0] = W[-1] = 0.0
    return State1D(t=0.0, z=profile.z.copy(), W=W, H=profile.height)


def _derivatives_spectral(W: np.ndarray, H: float):
    """W_z at all nodes and W_zz at interior nodes via the odd extension."""
    N = len(W) - 1
    b = dst(W[1:-1], type=1) / N
    kappa = np.arange(1, N) * (np.pi / H)
    A = np.zeros(N + 1)
    A[1:N] = b * kappa
    Wz = dct(A, type=1) / 2.0
    Wzz = np.zeros(N + 1)
    Wzz[1:N] = dst(-b * kappa**2, type=1) / 2.0
    return Wz, Wzz


def _derivatives_fd4(W: np.ndarray, H: float):
    """4th-order finite-difference fallback on the uniform grid."""
    N = len(W) - 1
    if N < 6:
        raise DomainError("fd4 derivatives need at least 7 nodes")
    h = H / N
    Wz = np.empty_like(W)
    Wzz = np.empty_like(W)
    Wz[2:-2] = (W[:-4] - 8 * W[1:-3] + 8 * W[3:-1] - W[4:]) / (12 * h)
    Wzz[2:-2] = (-W[:-4] + 16 * W[1:-3] - 30 * W[2:-2] + 16 * W[3:-1] - W[4:]) / (12 * h * h)
    e = W[:6]
    Wz[0] = (-25 * e[0] + 48 * e[1] - 36 * e[2] + 16 * e[3] - 3 * e[4]) / (12 * h)
    Wz[1] = (-3 * e[0] - 10 * e[1] + 18 * e[2] - 6 * e[3] + e[4]) / (12 * h)
    Wzz[0] = (45 * e[0] - 154 * e[1] + 214 * e[2] - 156 * e[3] + 61 * e[4] - 10 * e[5]) / (12 * h * h)
    Wzz[1] = (10 * e[0] - 15 * e[1] - 4 * e[2] + 14 * e[3] - 6 * e[4] + e[5]) / (12 * h * h)
    e = W[-6:]
    Wz[-1] = (25 * e[5] - 48 * e[4] + 36 * e[3] - 16 * e[2] + 3 * e[1]) / (12 * h)
    Wz[-2] = (3 * e[5] + 10 * e[4] - 18 * e[3] + 6 * e[2] - e[1]) / (12 * h)
    Wzz[-1] = (45 * e[5] - 154 * e[4] + 214 * e[3] - 156 * e[2] + 61 * e[1] - 10 * e[0]) / (12 * h * h)
    Wzz[-2] = (10 * e[5] - 15 * e[4] - 4 * e[3] + 14 * e[2] - 6 * e[1] + e[0]) / (12 * h * h)
    return Wz, Wzz


def _rhs_arrays(W: np.ndarray, z: np.ndarray, H: float, method: str) -> np.ndarray:
    if method == "spectral":
        Wz, Wzz = _derivatives_spectral(W, H)
    elif method == "fd4":
        Wz, Wzz = _derivatives_fd4(W, H)
    else:
        raise DomainError(f"unknown derivative method {method!r}")
    N = len(W) - 1
    h = H / N
    integrand = Wz**2 - W * Wzz
    inner = np.empty(N + 1)
    inner[0] = 0.0
    np.cumsum(0.5 * h * (integrand[1:] + integrand[:-1]), out=inner[1:])
    sq = Wz**2
    global_term = h * (np.sum(sq) - 0.5 * (sq[0] + sq[-1]))
    return inner - (2.0 * z / H) * global_term


def rhs(state: State1D, method: str = "spectral") -> np.ndarray:
    """dW/dt at the nodes; quadratic in W, exactly zero at z = 0."""
    state.validate()
    return _rhs_arrays(state.W, state.z, state.H, method)


def boundary_compatibility(state: State1D, method: str = "spectral") -> float:
    """|W_t(H)| before boundary enforcement: the nonlocal term's defect."""
    return abs(float(rhs(state, method)[-1]))


def odd_symmetry_defect(state: State1D) -> float:
    """Sup deviation from oddness about the mid-channel, W(H-z) = -W(z)."""
    return float(np.max(np.abs(state.W + state.W[::-1])))


@dataclass
class Trajectory:
    """Integration output: snapshots, per-step scalar samples, verdict data.

    samples rows are (t, max|W|, max|W_z|) at every accepted step; sup_errors
    aligns with samples and holds the relative sup error against the
    self-similar reference when one was attached (nan otherwise).
    """

    snapshots: list[State1D]
    samples: np.ndarray
    sup_errors: np.ndarray
    reason: str
    n_accepted: int
    n_rejected: int
    controls: dict = field(default_factory=dict)

    @property
    def final(self) -> State1D:
        return self.snapshots[-1]


def _merge_controls(controls: dict | None) -> dict:
    merged = dict(DEFAULT_CONTROLS)
    if controls:
        unknown = set(controls) - set(DEFAULT_CONTROLS)
        if unknown:
            raise DomainError(f"unknown control keys: {sorted(unknown)}")
        merged.update(controls)
    return merged


def integrate(
    initial: State1D,
    t_end: float,
    controls: dict | None = None,
    reference: Profile | None = None,
    reference_amplitude: float = 1.0,
    method: str = "spectral",
) -> Trajectory:
    """Adaptive integration with per-step blowup-functional sampling.

    Termination reasons: "completed" (reached t_end), "blowup"
    (max|W| crossed blowup_threshold), "step_underflow", "max_steps".
    Endpoints are re-pinned to exactly zero after every accepted step.
    """
    initial.validate()
    ctrl = _merge_controls(controls)
    z, H = initial.z, initial.H
    threshold = ctrl["blowup_threshold"]

    ref_phi = None
    if reference is not None:
        if reference.z.shape != z.shape or not np.allclose(reference.z, z, atol=1e-12 * H):
            raise GridMismatchError("reference profile grid differs from the state grid")
        ref_phi = reference_amplitude * reference.phi

    samples: list[tuple[float, float, float]] = []
    errors: list[float] = []

    def f(t, y):
        return _rhs_arrays(y, z, H, method)

    def observer(t, y):
        Wz, _ = _derivatives_spectral(y, H) if method == "spectral" else _derivatives_fd4(y, H)
        samples.append((t, float(np.max(np.abs(y))), float(np.max(np.abs(Wz)))))
        if ref_phi is None:
            errors.append(float("nan"))
        else:
            ref = ref_phi / (1.0 - reference_amplitude * t)
            sup = float(np.max(np.abs(ref)))
            errors.append(float(np.max(np.abs(y - ref))) / sup if sup > 0.0 else float("nan"))

    def pin(t, y, h):
        y[0] = 0.0
        y[-1] = 0.0
        return y

    def check_blowup(t, y):
        return "blowup" if float(np.max(np.abs(y))) > threshold else None

    res = integrate_rk54(
        f,
        0.0 + initial.t,
        initial.W.copy(),
        t_end,
        rel_tol=ctrl["rel_tol"],
        abs_tol=ctrl["abs_tol"],
        max_steps=ctrl["max_steps"],
        snapshot_times=list(ctrl["snapshot_times"]),
        observer=observer,
        terminate=check_blowup,
        post_accept=pin,
    )

    reason = {"completed": "completed", "blowup": "blowup",
              "step_underflow": "step_underflow", "max_steps": "max_steps"}[res.reason]
    snaps = [State1D(t=ts, z=z, W=ys, H=H) for ts, ys in res.snapshots]
    if not snaps or snaps[-1].t != res.t:
        snaps.append(State1D(t=res.t, z=z, W=res.y, H=H))
    return Trajectory(
        snapshots=snaps,
        samples=np.asarray(samples, dtype=float),
        sup_errors=np.asarray(errors, dtype=float),
        reason=reason,
        n_accepted=res.n_accepted,
        n_rejected=res.n_rejected,
        controls=ctrl,
    )


@dataclass(frozen=True)
class BlowupFit:
    """Linear fit of 1/max|W_z| against t and the extrapolated root."""

    samples: tuple
    slope: float
    intercept: float
    T_est: float
    r2: float


def _fit_line(ts: np.ndarray, ys: np.ndarray):
    inv = 1.0 / ys
    slope, intercept = np.polyfit(ts, inv, 1)
    pred = slope * ts + intercept
    ss_res = float(np.sum((inv - pred) ** 2))
    ss_tot = float(np.sum((inv - np.mean(inv)) ** 2))
    r2 = 0.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), min(r2, 1.0)


def estimate_blowup_time(samples, floor: float = 0.0) -> BlowupFit:
    """Extrapolated blowup time from (t, max|W_z|) samples.

    Sample selection: values at or below the floor are dropped; samples after
    the running peak are dropped (post-saturation decay), and when an
    interior peak exists the window also stays below a third of the peak;
    finally the most recent run of at least FIT_MIN_SAMPLES samples spanning
    at least one decade in y is kept (all remaining samples when the span
    never reaches a decade).  Raises NoBlowupError (carrying the fit) unless
    the fitted line has negative slope and r2 >= 0.99.
    """
    pairs = [(float(t), float(y)) for t, y in samples]
    if len(pairs) < 4:
        raise DomainError("estimate_blowup_time needs at least 4 samples")
    ts = np.array([p[0] for p in pairs])
    if np.any(np.diff(ts) <= 0):
        raise DomainError("sample times must be strictly increasing")
    ys = np.array([p[1] for p in pairs])

    keep = ys > floor
    ts, ys = ts[keep], ys[keep]
    if len(ts) < 4:
        # the signal never rose above the floor: that is a verdict, not misuse
        raise NoBlowupError("no blowup detected: too few samples above the floor")

    # last occurrence of the maximum, so ties (flat data) keep every sample
    ipeak = len(ys) - 1 - int(np.argmax(ys[::-1]))
    if ipeak < len(ys) - 1:
        # saturated run: drop the decaying tail and the saturation shoulder
        ypeak = ys[ipeak]
        ts, ys = ts[: ipeak + 1], ys[: ipeak + 1]
        below = ys <= ypeak / FIT_PEAK_GUARD
        if np.count_nonzero(below) >= 4:
            cut = int(np.nonzero(below)[0][-1]) + 1
            ts, ys = ts[:cut], ys[:cut]

    lo = len(ys) - 1
    while lo > 0 and (len(ys) - lo < FIT_MIN_SAMPLES or ys[-1] / ys[lo] < FIT_DECADE_SPAN):
        lo -= 1
    ts, ys = ts[lo:], ys[lo:]
    if len(ts) < 4:
        # growth evidence too thin once the saturated tail is gone
        raise NoBlowupError("no blowup detected: usable growth window below 4 samples")

    slope, intercept, r2 = _fit_line(ts, ys)
    T_est = float("inf") if slope == 0.0 else -intercept / slope
    fit = BlowupFit(
        samples=tuple(zip(ts.tolist(), ys.tolist())),
        slope=slope, intercept=intercept, T_est=float(T_est), r2=r2,
    )
    if slope >= 0.0 or r2 < FIT_R2_MIN:
        raise NoBlowupError("no blowup detected", fit=fit)
    return fit


def compare_self_similar(
    trajectory: Trajectory, profile: Profile, amplitude: float = 1.0
) -> list[tuple[float, float]]:
    """Per-snapshot relative sup error against amplitude*phi/(1 - amplitude*t)."""
    out = []
    for snap in trajectory.snapshots:
        if snap.z.shape != profile.z.shape or not np.allclose(
            snap.z, profile.z, atol=1e-12 * profile.height
        ):
            raise GridMismatchError("trajectory and profile grids differ")
        ref = amplitude * profile.phi / (1.0 - amplitude * snap.t)
        err = float(np.max(np.abs(snap.W - ref)) / np.max(np.abs(ref)))
        out.append((snap.t, err))
    return out


def trajectory_csv(traj: Trajectory) -> str:
    rows = []
    for (t, max_w, max_wz), err in zip(traj.samples, traj.sup_errors):
        inv = float("inf") if max_wz == 0.0 else 1.0 / max_wz
        rows.append((t, max_w, max_wz, inv, err))
    return csv_text(
        ("t", "max_abs_W", "max_abs_Wz", "inv_max_abs_Wz", "sup_error_self_similar"),
        rows,
    )


def fit_doc(fit: BlowupFit) -> dict:
    return {
        "n_samples": len(fit.samples),
        "t_first": fit.samples[0][0],
        "t_last": fit.samples[-1][0],
        "slope": fit.slope,
        "intercept": fit.intercept,
        "T_est": fit.T_est,
        "r2": fit.r2,
    }
