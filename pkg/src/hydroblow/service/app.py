"""HTTP service exposing profile construction, simulation and sweeps.

All numerical work and all output-file rendering happens server-side, so a
thin client (the CLI, or curl) receives finished deterministic text
artifacts under `files` and simply writes them to disk.  Failures map to
structured JSON: {"kind": "domain" | "certification" | "convergence" |
"step_underflow", "message": ...} with 400 for rejected inputs and 409 for
computations that started and failed their own checks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, hydro2d, profile as profile_mod, reduced1d
from ..specfun import beta
from ..errors import (
    CertificationError,
    ConvergenceError,
    DomainError,
    GridMismatchError,
    HydroblowError,
    NoBlowupError,
    StepUnderflowError,
)
from ..textio import csv_text, keyvalue_text
from .schemas import (
    Health,
    ProfileRequest,
    ProfileResponse,
    Simulate1DRequest,
    Simulate1DResponse,
    Simulate2DRequest,
    Simulate2DResponse,
    SweepRequest,
    SweepResponse,
    SweepRow,
)

_ERROR_STATUS = {
    "domain": 400,
    "certification": 409,
    "convergence": 409,
    "step_underflow": 409,
    "internal": 500,
}


def _error_kind(exc: HydroblowError) -> str:
    if isinstance(exc, (DomainError, GridMismatchError)):
        return "domain"
    if isinstance(exc, CertificationError):
        return "certification"
    if isinstance(exc, ConvergenceError):
        return "convergence"
    if isinstance(exc, StepUnderflowError):
        return "step_underflow"
    return "internal"


def _build_profile_from(req: ProfileRequest) -> profile_mod.Profile:
    if req.s == 1:
        params = profile_mod.params_from_m(req.m, req.H)
        return profile_mod.build_profile(params, req.N, grid_kind=req.grid, tol=req.tol)
    return profile_mod.glue_sign_changing(
        req.m, req.H, req.s, req.N, grid_kind=req.grid, tol=req.tol
    )


def _certification_report(prof: profile_mod.Profile) -> str:
    pm = prof.params
    quad_value = (2.0 / prof.height) * _nonlocal_quadrature(prof)
    checks = {
        "defect_psi_sum": pm.psi_plus + pm.psi_minus - 1.0,
        "defect_psi_product": pm.psi_plus * pm.psi_minus + pm.m**2,
        "defect_delta_sq_pq": pm.delta**2 * pm.p * pm.q - pm.m**2,
        "defect_length_condition": pm.C * _beta_pq(pm) - pm.H,
        "phi_left": prof.phi[0],
        "phi_right": prof.phi[-1],
        "ddphi_left": prof.ddphi[0],
        "ddphi_right": prof.ddphi[-1],
        "nonlocal_quadrature": quad_value,
        "nonlocal_relative_defect": quad_value / pm.m**2 - 1.0,
        "residual_fy": prof.residual,
        "segments": prof.segments,
        "grid": prof.grid_kind,
        "status": "certified",
    }
    return keyvalue_text(checks)


def _beta_pq(pm: profile_mod.ProfileParams) -> float:
    return beta(pm.p, pm.q)


def _nonlocal_quadrature(prof: profile_mod.Profile) -> float:
    seg_N = (len(prof.z) - 1) // prof.segments
    w = profile_mod.quadrature_weights(prof.z, prof.grid_kind, prof.segments, seg_N)
    return float(np.dot(w, prof.dphi**2))


def create_app() -> FastAPI:
    app = FastAPI(title="hydroblow", version=__version__)

    @app.exception_handler(HydroblowError)
    async def _hb_error(request: Request, exc: HydroblowError):
        kind = _error_kind(exc)
        payload = {"kind": kind, "message": str(exc)}
        if isinstance(exc, CertificationError) and exc.invariant:
            payload["invariant"] = exc.invariant
        return JSONResponse(status_code=_ERROR_STATUS[kind], content={"detail": payload})

    @app.get("/health", response_model=Health)
    def health() -> Health:
        return Health(status="ok", name="hydroblow", version=__version__)

    @app.post("/profile", response_model=ProfileResponse)
    def profile_endpoint(req: ProfileRequest) -> ProfileResponse:
        prof = _build_profile_from(req)
        doc = profile_mod.params_doc(
            prof.params,
            segments=prof.segments,
            full_height=prof.height,
            nonlocal_constant=prof.nonlocal_constant,
            grid=prof.grid_kind,
            N=len(prof.z) - 1,
            residual=prof.residual,
        )
        files = {
            "profile.csv": profile_mod.profile_csv(prof),
            "params.txt": keyvalue_text(doc),
            "report.txt": _certification_report(prof),
        }
        return ProfileResponse(
            params={k: v for k, v in doc.items() if isinstance(v, float)},
            residual=prof.residual,
            segments=prof.segments,
            phi_max=profile_mod.phi_peak(prof.params),
            files=files,
            resolved=req.model_dump(),
        )

    @app.post("/simulate1d", response_model=Simulate1DResponse)
    def simulate1d_endpoint(req: Simulate1DRequest) -> Simulate1DResponse:
        params = profile_mod.params_from_m(req.m, req.H)
        prof = profile_mod.build_profile(params, req.N, grid_kind="uniform")
        state = reduced1d.state_from_profile(prof, amplitude=req.amplitude)
        traj = reduced1d.integrate(
            state,
            req.t_end,
            controls={
                "rel_tol": req.rel_tol,
                "abs_tol": req.abs_tol,
                "blowup_threshold": req.blowup_threshold,
                "max_steps": req.max_steps,
                "snapshot_times": tuple(req.snapshot_times),
            },
            reference=prof,
            reference_amplitude=req.amplitude,
            method=req.method,
        )
        fit = None
        verdict = "blowup"
        try:
            fit = reduced1d.estimate_blowup_time(traj.samples[:, [0, 2]])
        except NoBlowupError as exc:
            fit = exc.fit
            verdict = "no_blowup"
        if traj.reason == "step_underflow":
            verdict = "step_underflow"

        fit_lines = {"verdict": verdict, "reason": traj.reason}
        if fit is not None:
            fit_lines.update(reduced1d.fit_doc(fit))
        files = {
            "trajectory.csv": reduced1d.trajectory_csv(traj),
            "blowup_fit.txt": keyvalue_text(fit_lines),
        }
        return Simulate1DResponse(
            verdict=verdict,
            reason=traj.reason,
            T_est=fit.T_est if fit else None,
            r2=fit.r2 if fit else None,
            slope=fit.slope if fit else None,
            intercept=fit.intercept if fit else None,
            n_accepted=traj.n_accepted,
            n_rejected=traj.n_rejected,
            files=files,
            resolved=req.model_dump(),
        )

    @app.post("/simulate2d", response_model=Simulate2DResponse)
    def simulate2d_endpoint(req: Simulate2DRequest) -> Simulate2DResponse:
        params = profile_mod.params_from_m(req.m, req.H)
        prof = profile_mod.build_profile(params, req.Nz, grid_kind="chebyshev")
        fld = hydro2d.init_from_theorem(prof, req.k, req.L, req.k_max, req.Nz, nu=req.nu)
        traj = hydro2d.integrate2d(
            fld,
            req.t_end,
            controls={
                "rel_tol": req.rel_tol,
                "abs_tol": req.abs_tol,
                "filter_strength": req.filter_strength,
                "snapshot_times": tuple(req.snapshot_times),
                "max_steps": req.max_steps,
                "exhaustion_limit": req.exhaustion_limit,
            },
        )
        errors = hydro2d.trace_errors(traj, prof)
        horizon = traj.exhausted_at
        checked = [(t, e) for t, e in errors if horizon is None or t < horizon]
        checked_times = [t for t, _ in checked]
        max_err = max((e for _, e in checked), default=None)
        if not checked:
            verdict = "exhausted_early"
        elif max_err <= req.trace_tol:
            verdict = "pass"
        else:
            verdict = "trace_mismatch"

        doc = hydro2d.run_doc(traj)
        doc.update(
            {
                "m": req.m,
                "k": req.k,
                "trace_tol": req.trace_tol,
                "verdict": verdict,
                "max_rel_err_checked": max_err,
            }
        )
        files = {
            "trace.csv": hydro2d.trace_csv(traj, prof),
            "energy.csv": hydro2d.energy_csv(traj),
            "run.txt": keyvalue_text(doc),
        }
        return Simulate2DResponse(
            verdict=verdict,
            reason=traj.reason,
            exhausted_at=traj.exhausted_at,
            max_rel_err_checked=max_err,
            checked_times=checked_times,
            n_accepted=traj.n_accepted,
            n_rejected=traj.n_rejected,
            files=files,
            resolved=req.model_dump(),
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep_endpoint(req: SweepRequest) -> SweepResponse:
        def one_row(m: float) -> SweepRow:
            try:
                params = profile_mod.params_from_m(m, req.H)
                prof_c = profile_mod.build_profile(params, req.profile_N, grid_kind="chebyshev")
                prof_u = profile_mod.build_profile(params, req.sim_N, grid_kind="uniform")
                state = reduced1d.state_from_profile(prof_u)
                traj = reduced1d.integrate(
                    state,
                    req.t_end,
                    controls={"rel_tol": req.rel_tol, "abs_tol": req.abs_tol},
                    reference=prof_u,
                )
                fit = reduced1d.estimate_blowup_time(traj.samples[:, [0, 2]])
                return SweepRow(
                    m=m,
                    status="ok",
                    psi_plus=params.psi_plus,
                    psi_minus=params.psi_minus,
                    C=params.C,
                    phi_max=profile_mod.phi_peak(params),
                    residual=prof_c.residual,
                    T_est=fit.T_est,
                )
            except NoBlowupError as exc:
                return SweepRow(m=m, status="no_blowup", message=str(exc))
            except HydroblowError as exc:
                return SweepRow(m=m, status=_error_kind(exc), message=str(exc))

        with ThreadPoolExecutor(max_workers=min(8, len(req.m_list))) as pool:
            rows = list(pool.map(one_row, req.m_list))

        failed = any(r.status != "ok" for r in rows)
        first_failure = next((r.status for r in rows if r.status != "ok"), None)
        table = csv_text(
            ("m", "psi_plus", "psi_minus", "C", "phi_max", "residual", "T_est", "status"),
            (
                (r.m, r.psi_plus, r.psi_minus, r.C, r.phi_max, r.residual, r.T_est, r.status)
                for r in rows
            ),
        )
        return SweepResponse(
            rows=rows,
            failed=failed,
            first_failure=first_failure,
            files={"sweep.csv": table},
            resolved=req.model_dump(),
        )

    return app
