"""Construction of the one-parameter family of self-similar blowup profiles.

For a parameter m > 0 on a channel of height H, the profile slope
psi = phi' runs between the roots psi+ > 0 > psi- of psi^2 - psi - m^2 = 0.
With Delta = psi+ - psi-, eps = 1/(4 sqrt(m^2 + 1/4)), and the exponent pair
p = 1/2 + eps, q = 1/2 - eps (so p + q = 1, psi+ = Delta p, psi- = -Delta q),
the profile is carried by the integral curve

    phi = C |psi - psi+|^p |psi - psi-|^q,

and the z <-> psi map reduces, through the substitution
tau = (psi+ - psi)/Delta, to the regularized incomplete Beta function:

    z/H = I_tau(p, q),      psi(z) = psi+ - Delta * I^{-1}_{z/H}(p, q).

Requiring the curve to span exactly [0, H] fixes C = H / B(p, q), with the
reflection-formula closed form C = (H/pi) cos(pi/(4 sqrt(m^2 + 1/4))).

Evaluation goes through tau rather than psi: phi = C Delta tau^p (1-tau)^q
and phi'' = -(Delta/C) tau^q (1-tau)^p are exact at both endpoints and avoid
the catastrophic cancellation that |psi - psi_pm| suffers there.  For
z/H > 1/2 the complementary inverse I^{-1}_{1-z/H}(q, p) is used so 1 - tau
keeps full relative accuracy.

The pointwise combination phi' - (phi')^2 + phi phi'' equals -m^2
identically for arrays built this way, so certification reduces to the
quadrature identity (2/H) * integral of (phi')^2 = m^2; the stored residual
is the full boundary-value-problem residual with the integral evaluated by
the grid's own quadrature (Clenshaw-Curtis on the Chebyshev grid, composite
trapezoid on the uniform grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cheb
from .errors import CertificationError, DomainError
from .specfun import beta, inv_reg_inc_beta
from .textio import csv_text

PARAMS_IDENTITY_TOL = 1e-12
PARAMS_C_AGREEMENT_TOL = 1e-11
CERT_TOL_DEFAULT = {"chebyshev": 1e-8, "uniform": 5e-4}


@dataclass(frozen=True)
class ProfileParams:
    """Parameter tuple of one member of the blowup family."""

    m: float
    H: float
    psi_plus: float
    psi_minus: float
    delta: float
    eps: float
    p: float
    q: float
    C: float

    def validate(self) -> None:
        checks = {
            "psi_plus + psi_minus = 1": self.psi_plus + self.psi_minus - 1.0,
            "psi_plus * psi_minus = -m^2": self.psi_plus * self.psi_minus + self.m**2,
            "p + q = 1": self.p + self.q - 1.0,
            "delta^2 p q = m^2": self.delta**2 * self.p * self.q - self.m**2,
            "psi_plus = delta p": self.psi_plus - self.delta * self.p,
        }
        scale = max(1.0, self.m**2)
        for name, defect in checks.items():
            if abs(defect) > PARAMS_IDENTITY_TOL * scale:
                raise CertificationError(
                    f"parameter identity violated: {name} (defect {defect:.3e})",
                    invariant=name,
                    value=defect,
                )
        if not (0.0 < self.eps < 0.5):
            raise CertificationError("eps outside (0, 1/2)", invariant="eps range")
        length = self.C * beta(self.p, self.q)
        if abs(length - self.H) > 1e-10 * self.H:
            raise CertificationError(
                f"length condition violated: C B(p,q) = {length!r} != H",
                invariant="length condition",
                value=length,
            )


def params_from_m(m: float, H: float) -> ProfileParams:
    """Profile parameters for nonlocal constant m^2 on height H.

    The integration constant C is computed twice, from the Beta function and
    from the reflection-formula closed form (H/pi) cos(pi eps); disagreement
    beyond 1e-11 relative is a consistency failure.
    """
    if not (m > 0.0 and H > 0.0):
        raise DomainError(f"params_from_m requires m > 0 and H > 0, got m={m}, H={H}")
    root = math.sqrt(m * m + 0.25)
    psi_plus = 0.5 + root
    psi_minus = 0.5 - root
    delta = 2.0 * root
    eps = 1.0 / (4.0 * root)
    p = 0.5 + eps
    q = 0.5 - eps
    c_beta = H / beta(p, q)
    # cos(pi eps) = sin(pi q); the sin form avoids cancellation as eps -> 1/2
    c_closed = (H / math.pi) * math.sin(math.pi * q)
    if abs(c_beta - c_closed) > PARAMS_C_AGREEMENT_TOL * abs(c_closed):
        raise CertificationError(
            f"integration constant mismatch: Beta route {c_beta!r}, "
            f"closed form {c_closed!r}",
            invariant="C agreement",
            value=c_beta - c_closed,
        )
    params = ProfileParams(
        m=m, H=H, psi_plus=psi_plus, psi_minus=psi_minus,
        delta=delta, eps=eps, p=p, q=q, C=c_beta,
    )
    params.validate()
    return params


def _tau_from_fracs(params: ProfileParams, zfrac: np.ndarray, zcomp: np.ndarray):
    """Beta variable tau at grid fractions, complement-aware.

    zfrac = z/H and zcomp = 1 - z/H must be supplied as exactly
    complementary pairs; for zfrac > 1/2 the mirrored inverse keeps 1 - tau
    accurate, so the returned pair (tau, one_minus_tau) is elementwise exact
    to relative rounding on both sides.
    """
    p, q = params.p, params.q
    tau = np.empty_like(zfrac)
    omt = np.empty_like(zfrac)
    for i, (f, fc) in enumerate(zip(zfrac, zcomp)):
        if f <= 0.5:
            t = inv_reg_inc_beta(f, p, q)
            tau[i] = t
            omt[i] = 1.0 - t
        else:
            u = inv_reg_inc_beta(fc, q, p)
            tau[i] = 1.0 - u
            omt[i] = u
    return tau, omt


def _arrays_from_fracs(params: ProfileParams, zfrac, zcomp):
    tau, omt = _tau_from_fracs(params, np.asarray(zfrac, float), np.asarray(zcomp, float))
    CD = params.C * params.delta
    phi = CD * tau**params.p * omt**params.q
    dphi = params.psi_plus - params.delta * tau
    ddphi = -(params.delta / params.C) * tau**params.q * omt**params.p
    return phi, dphi, ddphi


def sample_profile(params: ProfileParams, z: np.ndarray):
    """phi, phi', phi'' at arbitrary physical points z in [0, H]."""
    z = np.asarray(z, dtype=float)
    if np.any(z < -1e-12 * params.H) or np.any(z > params.H * (1 + 1e-12)):
        raise DomainError("sample_profile requires z in [0, H]")
    zfrac = np.clip(z / params.H, 0.0, 1.0)
    return _arrays_from_fracs(params, zfrac, 1.0 - zfrac)


def psi_of_z(params: ProfileParams, z: float) -> float:
    """Profile slope psi(z) = phi'(z); strictly decreasing from psi+ to psi-."""
    if not 0.0 <= z <= params.H:
        raise DomainError(f"psi_of_z requires z in [0, H], got {z}")
    zfrac = z / params.H
    if zfrac <= 0.5:
        tau = inv_reg_inc_beta(zfrac, params.p, params.q)
        return params.psi_plus - params.delta * tau
    u = inv_reg_inc_beta((params.H - z) / params.H, params.q, params.p)
    return params.psi_minus + params.delta * u


def phi_of_psi(params: ProfileParams, psi: float) -> float:
    """Integral-curve value C |psi - psi+|^p |psi - psi-|^q."""
    if not params.psi_minus <= psi <= params.psi_plus:
        raise DomainError(
            f"phi_of_psi requires psi in [{params.psi_minus}, {params.psi_plus}], got {psi}"
        )
    if psi == params.psi_plus or psi == params.psi_minus:
        return 0.0
    return params.C * abs(psi - params.psi_plus) ** params.p * abs(psi - params.psi_minus) ** params.q


@dataclass(frozen=True)
class Profile:
    """Sampled profile with certification residual.

    z is strictly increasing with z[0] = 0 and z[-1] spanning the full
    interval; segments = 1 is the positive profile, s >= 2 the glued
    sign-changing profile with s alternating arches (params then describe
    one arch on height H_full / s).
    """

    params: ProfileParams
    z: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    segments: int
    grid_kind: str
    residual: float

    @property
    def height(self) -> float:
        return self.params.H * self.segments

    @property
    def nonlocal_constant(self) -> float:
        """Full-interval value of (2/H) integral of (phi')^2 (analytic)."""
        return self.params.m**2


def _grid_fracs(N: int, grid_kind: str):
    """Grid fractions and exact complements on [0, 1]."""
    if grid_kind == "chebyshev":
        theta = np.pi * np.arange(N + 1) / N
        zfrac = (1.0 - np.cos(theta)) / 2.0
        zcomp = (1.0 + np.cos(theta)) / 2.0
    elif grid_kind == "uniform":
        j = np.arange(N + 1)
        zfrac = j / N
        zcomp = (N - j) / N
    else:
        raise DomainError(f"unknown grid kind {grid_kind!r}")
    return zfrac, zcomp


def quadrature_weights(z: np.ndarray, grid_kind: str, segments: int, seg_N: int) -> np.ndarray:
    """Weights integrating node values over the full profile interval."""
    if grid_kind == "uniform":
        h = z[1] - z[0]
        w = np.full(z.shape, h)
        w[0] = w[-1] = h / 2.0
        return w
    # Chebyshev arches: Clenshaw-Curtis per segment, shared joints add up
    seg_h = (z[-1] - z[0]) / segments
    wseg = cheb.clenshaw_curtis_weights(seg_N, seg_h)
    w = np.zeros(z.shape)
    for s in range(segments):
        start = s * seg_N
        w[start : start + seg_N + 1] += wseg
    return w


def residual_fy(profile: Profile) -> float:
    """Sup-norm residual of the profile boundary value problem.

    The nonlocal constant is re-evaluated from the stored arrays with the
    grid's own quadrature, so this measures exactly what a downstream solver
    on the same grid will see.
    """
    z, phi, dphi, ddphi = profile.z, profile.phi, profile.dphi, profile.ddphi
    seg_N = (len(z) - 1) // profile.segments
    w = quadrature_weights(z, profile.grid_kind, profile.segments, seg_N)
    H_full = profile.height
    nonlocal_term = (2.0 / H_full) * float(np.dot(w, dphi**2))
    g = dphi - dphi**2 + phi * ddphi + nonlocal_term
    return float(np.max(np.abs(g[1:-1])))


def build_profile(
    params: ProfileParams,
    N: int,
    grid_kind: str = "chebyshev",
    tol: float | None = None,
) -> Profile:
    """Sample and certify the positive profile on N+1 nodes.

    phi'' comes from the closed form -(Delta/C) tau^q (1-tau)^p, which is the
    boundary value problem's own second derivative and vanishes exactly at
    the endpoints.  Certification compares the stored residual against tol
    (grid-dependent default; the uniform grid's trapezoid quadrature cannot
    reach the Chebyshev default).
    """
    if N < 16:
        raise DomainError(f"build_profile requires N >= 16, got {N}")
    if tol is None:
        tol = CERT_TOL_DEFAULT[grid_kind] if grid_kind in CERT_TOL_DEFAULT else 1e-8
    zfrac, zcomp = _grid_fracs(N, grid_kind)
    phi, dphi, ddphi = _arrays_from_fracs(params, zfrac, zcomp)
    z = params.H * zfrac
    z[-1] = params.H
    for arr in (z, phi, dphi, ddphi):
        arr.setflags(write=False)
    prof = Profile(
        params=params, z=z, phi=phi, dphi=dphi, ddphi=ddphi,
        segments=1, grid_kind=grid_kind, residual=float("nan"),
    )
    res = residual_fy(prof)
    if res > tol:
        raise CertificationError(
            f"profile residual {res:.3e} exceeds tolerance {tol:.1e} "
            f"(m={params.m}, N={N}, grid={grid_kind})",
            invariant="bvp residual",
            value=res,
        )
    return Profile(
        params=params, z=z, phi=phi, dphi=dphi, ddphi=ddphi,
        segments=1, grid_kind=grid_kind, residual=res,
    )


def glue_sign_changing(
    m_half: float,
    H: float,
    s: int,
    N_per_segment: int,
    grid_kind: str = "chebyshev",
    tol: float | None = None,
) -> Profile:
    """Sign-changing profile with s alternating arches on [0, H].

    The positive arch solves the problem on height H/s with parameter
    m_half; odd arches are the odd reflection across each joint.  Joints are
    C^2: phi = 0 and phi'' = 0 there and phi' is continuous (both sides give
    the arch's psi-).  The full-interval nonlocal constant stays m_half^2
    because every arch has the same average of (phi')^2.
    """
    if s < 2:
        raise DomainError(f"glue_sign_changing requires s >= 2, got {s}")
    seg_params = params_from_m(m_half, H / s)
    base = build_profile(seg_params, N_per_segment, grid_kind=grid_kind, tol=tol)
    seg_h = H / s

    z_parts, phi_parts, dphi_parts, ddphi_parts = [], [], [], []
    for arch in range(s):
        offset = arch * seg_h
        if arch % 2 == 0:
            za, pa, da, dda = base.z, base.phi, base.dphi, base.ddphi
        else:
            za = seg_h - base.z[::-1]
            pa = -base.phi[::-1]
            da = base.dphi[::-1]
            dda = -base.ddphi[::-1]
        sl = slice(1, None) if arch > 0 else slice(None)
        z_parts.append(offset + za[sl])
        phi_parts.append(pa[sl])
        dphi_parts.append(da[sl])
        ddphi_parts.append(dda[sl])

    z = np.concatenate(z_parts)
    phi = np.concatenate(phi_parts)
    dphi = np.concatenate(dphi_parts)
    ddphi = np.concatenate(ddphi_parts)
    z[-1] = H
    for arr in (z, phi, dphi, ddphi):
        arr.setflags(write=False)
    prof = Profile(
        params=seg_params, z=z, phi=phi, dphi=dphi, ddphi=ddphi,
        segments=s, grid_kind=grid_kind, residual=float("nan"),
    )
    res = residual_fy(prof)
    cert_tol = tol
    if cert_tol is None:
        cert_tol = CERT_TOL_DEFAULT[grid_kind] if grid_kind in CERT_TOL_DEFAULT else 1e-8
    if res > cert_tol:
        raise CertificationError(
            f"glued profile residual {res:.3e} exceeds tolerance {cert_tol:.1e}",
            invariant="bvp residual",
            value=res,
        )
    return Profile(
        params=seg_params, z=z, phi=phi, dphi=dphi, ddphi=ddphi,
        segments=s, grid_kind=grid_kind, residual=res,
    )


def sample_on(profile: Profile, z: np.ndarray):
    """phi, phi', phi'' of a (possibly glued) profile at arbitrary points.

    Convenience resampler: accuracy at the extreme edges is limited by the
    float complement 1 - z/H (about 1e-13 relative), which is ample for
    seeding solvers; grid construction in build_profile uses exact
    complement fractions instead.
    """
    z = np.asarray(z, dtype=float)
    if profile.segments == 1:
        return sample_profile(profile.params, z)
    seg_h = profile.params.H
    arch = np.minimum((z / seg_h).astype(int), profile.segments - 1)
    eta = z - arch * seg_h
    phi = np.empty_like(z)
    dphi = np.empty_like(z)
    ddphi = np.empty_like(z)
    even = arch % 2 == 0
    if np.any(even):
        p, d, dd = sample_profile(profile.params, eta[even])
        phi[even], dphi[even], ddphi[even] = p, d, dd
    odd = ~even
    if np.any(odd):
        p, d, dd = sample_profile(profile.params, seg_h - eta[odd])
        phi[odd], dphi[odd], ddphi[odd] = -p, d, -dd
    return phi, dphi, ddphi


def phi_peak(params: ProfileParams) -> float:
    """Maximum of the positive profile, attained where psi = 0 (tau = p)."""
    return params.C * params.delta * params.p**params.p * params.q**params.q


def profile_csv(profile: Profile) -> str:
    rows = zip(profile.z, profile.phi, profile.dphi, profile.ddphi)
    return csv_text(("z", "phi", "dphi", "ddphi"), rows)


def params_doc(params: ProfileParams, **extra) -> dict:
    doc = {
        "m": params.m,
        "H": params.H,
        "psi_plus": params.psi_plus,
        "psi_minus": params.psi_minus,
        "delta": params.delta,
        "eps": params.eps,
        "p": params.p,
        "q": params.q,
        "C": params.C,
    }
    doc.update(extra)
    return doc
