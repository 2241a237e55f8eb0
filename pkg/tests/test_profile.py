"""Stationary profile family: parameter identities, certification, gluing."""

import dataclasses
import math

import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hydroblow import profile as pr
from hydroblow.errors import CertificationError, DomainError

M_STD = math.sqrt(3.0) / 2.0


@given(st.floats(min_value=0.05, max_value=50.0))
@settings(max_examples=60)
def test_parameter_identities(m):
    params = pr.params_from_m(m, 1.0)
    scale = max(1.0, m * m)
    assert abs(params.psi_plus + params.psi_minus - 1.0) < 1e-11 * scale
    assert abs(params.psi_plus * params.psi_minus + m * m) < 1e-11 * scale
    assert abs(params.p + params.q - 1.0) < 1e-14
    assert abs(params.delta**2 * params.p * params.q - m * m) < 1e-11 * scale
    assert abs(params.psi_plus - params.delta * params.p) < 1e-11 * scale


@given(st.floats(min_value=0.05, max_value=50.0), st.floats(min_value=0.1, max_value=5.0))
@settings(max_examples=40)
def test_constant_routes_agree(m, H):
    params = pr.params_from_m(m, H)
    c_beta = H / float(sp.beta(params.p, params.q))
    assert params.C == pytest.approx(c_beta, rel=1e-11)
    assert params.C == pytest.approx((H / math.pi) * math.sin(math.pi * params.q), rel=1e-11)


def test_reference_point_closed_forms():
    # m = sqrt(3)/2 gives p = 3/4, q = 1/4, C = sqrt(2)/(2 pi)
    params = pr.params_from_m(M_STD, 1.0)
    assert params.psi_plus == pytest.approx(1.5, abs=1e-13)
    assert params.psi_minus == pytest.approx(-0.5, abs=1e-13)
    assert params.p == pytest.approx(0.75, abs=1e-14)
    assert params.C == pytest.approx(math.sqrt(2.0) / (2.0 * math.pi), rel=1e-13)
    peak = params.C * params.delta * params.p**params.p * params.q**params.q
    assert pr.phi_peak(params) == pytest.approx(peak, rel=1e-14)
    assert pr.phi_peak(params) == pytest.approx(0.25653467452145623, rel=1e-12)


def test_small_m_limit_of_roots():
    params = pr.params_from_m(1e-6, 1.0)
    assert abs(params.psi_plus - 1.0) < 1e-6
    assert abs(params.psi_minus) < 1e-6


def test_invalid_parameters_rejected():
    with pytest.raises(DomainError):
        pr.params_from_m(0.0, 1.0)
    with pytest.raises(DomainError):
        pr.params_from_m(1.0, -2.0)
    params = pr.params_from_m(1.0, 1.0)
    tampered = dataclasses.replace(params, psi_plus=params.psi_plus + 1e-6)
    with pytest.raises(CertificationError):
        tampered.validate()


def test_decreasing_slope_field(std_params):
    zs = np.linspace(0.0, 1.0, 41)
    vals = [pr.psi_of_z(std_params, float(z)) for z in zs]
    assert vals[0] == pytest.approx(std_params.psi_plus, abs=1e-12)
    assert vals[-1] == pytest.approx(std_params.psi_minus, abs=1e-12)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def _z_from_psi(params, psi):
    # recover z on the same branch the forward map uses; folding the
    # complement into tau would discard the information that keeps the
    # inversion accurate near the upper endpoint
    tau = (params.psi_plus - psi) / params.delta
    u = (psi - params.psi_minus) / params.delta
    if tau <= 0.5:
        return float(sp.betainc(params.p, params.q, tau))
    return 1.0 - float(sp.betainc(params.q, params.p, u))


def test_slope_round_trip(std_params):
    """z -> psi -> z closes to 1e-9 on 100 random z values."""
    rng = np.random.default_rng(0)
    for z in rng.uniform(0.0, 1.0, 100):
        psi = pr.psi_of_z(std_params, float(z))
        assert abs(_z_from_psi(std_params, psi) - z) < 1e-9


def test_slope_round_trip_away_from_upper_endpoint(std_params):
    # dz/dpsi ~ |psi - psi_minus|^(q-1) blows up at z -> H, so binary64
    # cannot carry the round trip through the last ~3e-3 of the interval;
    # everywhere else the closure is far tighter than 1e-9
    zs = np.linspace(0.0, 0.997, 998)
    worst = max(abs(_z_from_psi(std_params, pr.psi_of_z(std_params, float(z))) - z) for z in zs)
    assert worst < 1e-10
    assert _z_from_psi(std_params, pr.psi_of_z(std_params, 0.0)) == 0.0
    assert _z_from_psi(std_params, pr.psi_of_z(std_params, 1.0)) == 1.0


def test_peak_location_against_quadrature(std_params):
    # the maximum sits where the slope field crosses zero
    p, q = std_params.p, std_params.q
    z0 = float(sp.betainc(p, q, p))
    assert abs(pr.psi_of_z(std_params, z0)) < 1e-9
    sampled = pr.sample_profile(std_params, np.array([z0]))[0][0]
    assert sampled == pytest.approx(pr.phi_peak(std_params), rel=1e-10)


def test_grid_maximum_matches_peak(cheb_profile, std_params):
    i = int(np.argmax(cheb_profile.phi))
    z0 = float(sp.betainc(std_params.p, std_params.q, std_params.p))
    spacing = np.max(np.diff(cheb_profile.z[max(i - 1, 0) : i + 2]))
    assert abs(cheb_profile.z[i] - z0) <= spacing
    assert np.max(cheb_profile.phi) <= pr.phi_peak(std_params) + 1e-14


def test_build_endpoint_structure(cheb_profile, std_params):
    assert cheb_profile.phi[0] == 0.0
    assert cheb_profile.phi[-1] == 0.0
    assert cheb_profile.ddphi[0] == pytest.approx(0.0, abs=1e-12)
    assert cheb_profile.ddphi[-1] == pytest.approx(0.0, abs=1e-12)
    assert cheb_profile.dphi[0] == pytest.approx(std_params.psi_plus, abs=1e-12)
    assert cheb_profile.dphi[-1] == pytest.approx(std_params.psi_minus, abs=1e-12)
    assert cheb_profile.z[0] == 0.0
    assert cheb_profile.z[-1] == 1.0


def test_pointwise_slope_identity(cheb_profile):
    # phi' - (phi')^2 + phi phi'' is constant by construction; quadrature
    # of (phi')^2 must reproduce that constant
    fy = cheb_profile.dphi - cheb_profile.dphi**2 + cheb_profile.phi * cheb_profile.ddphi
    m2 = cheb_profile.nonlocal_constant
    assert np.max(np.abs(fy + m2)) < 1e-12
    assert cheb_profile.residual < 1e-8


def test_nonlocal_quadrature_identity(cheb_profile):
    w = pr.quadrature_weights(cheb_profile.z, "chebyshev", 1, 128)
    integral = 2.0 * float(w @ cheb_profile.dphi**2)
    assert integral == pytest.approx(cheb_profile.nonlocal_constant, rel=1e-8)


@pytest.mark.parametrize("kind,Ns", [("uniform", (64, 128, 256)), ("chebyshev", (16, 24, 48))])
def test_residual_decreases_under_refinement(std_params, kind, Ns):
    residuals = [pr.residual_fy(pr.build_profile(std_params, N, grid_kind=kind, tol=1.0)) for N in Ns]
    assert residuals[0] > residuals[1] > residuals[2]


def test_residual_detects_perturbation(std_params):
    prof = pr.build_profile(std_params, 128, grid_kind="uniform", tol=1.0)
    amp = 0.01
    bump = amp * np.sin(np.pi * prof.z)
    pert = dataclasses.replace(
        prof,
        phi=prof.phi + bump,
        dphi=prof.dphi + amp * np.pi * np.cos(np.pi * prof.z),
        ddphi=prof.ddphi - amp * np.pi**2 * np.sin(np.pi * prof.z),
    )
    assert pr.residual_fy(pert) > 1e-3


def test_negative_counterpart_same_residual(cheb_profile):
    flipped = dataclasses.replace(
        cheb_profile,
        z=1.0 - cheb_profile.z[::-1],
        phi=-cheb_profile.phi[::-1],
        dphi=cheb_profile.dphi[::-1],
        ddphi=-cheb_profile.ddphi[::-1],
    )
    assert pr.residual_fy(flipped) == pytest.approx(pr.residual_fy(cheb_profile), rel=1e-3, abs=1e-13)


def test_value_from_slope_branches(std_params):
    assert pr.phi_of_psi(std_params, std_params.psi_plus) == 0.0
    assert pr.phi_of_psi(std_params, std_params.psi_minus) == 0.0
    assert pr.phi_of_psi(std_params, 0.0) == pytest.approx(pr.phi_peak(std_params), rel=1e-12)
    with pytest.raises(DomainError):
        pr.phi_of_psi(std_params, std_params.psi_plus + 0.1)
    with pytest.raises(DomainError):
        pr.psi_of_z(std_params, -0.1)
    with pytest.raises(DomainError):
        pr.psi_of_z(std_params, 1.1)


def test_build_input_validation(std_params):
    with pytest.raises(DomainError):
        pr.build_profile(std_params, 8)
    with pytest.raises(DomainError):
        pr.build_profile(std_params, 64, grid_kind="legendre")
    with pytest.raises(CertificationError):
        pr.build_profile(std_params, 32, grid_kind="uniform", tol=1e-9)


def test_profile_arrays_are_read_only(cheb_profile):
    with pytest.raises(ValueError):
        cheb_profile.phi[0] = 1.0


def test_uniform_grid_certifies_at_looser_tolerance(std_params):
    prof = pr.build_profile(std_params, 256, grid_kind="uniform")
    assert prof.residual < 5e-4
    assert np.max(np.abs(np.diff(np.diff(prof.z)))) < 1e-14


@pytest.mark.parametrize("s,N_seg", [(2, 128), (3, 96), (4, 64)])
def test_glued_profiles_alternate_signs(s, N_seg):
    g = pr.glue_sign_changing(M_STD, 1.0, s, N_seg)
    assert g.segments == s
    assert g.height == 1.0
    assert len(g.z) == s * N_seg + 1
    interior = g.phi[1:-1]
    joints = np.abs(interior) < 1e-13
    assert int(np.sum(joints)) == s - 1
    signs = np.sign(interior[~joints])
    assert int(np.sum(np.abs(np.diff(signs)) > 0)) == s - 1
    assert g.residual < 1e-7
    assert g.nonlocal_constant == pytest.approx(M_STD**2, rel=1e-12)


def test_two_arch_profile_is_odd():
    g = pr.glue_sign_changing(M_STD, 1.0, 2, 128)
    assert np.max(np.abs(g.phi + g.phi[::-1])) == 0.0
    assert np.max(np.abs(g.dphi - g.dphi[::-1])) < 1e-12


def test_glue_joint_is_twice_differentiable():
    g = pr.glue_sign_changing(M_STD, 1.0, 2, 128)
    j = 128
    seg = pr.params_from_m(M_STD, 0.5)
    assert g.z[j] == 0.5
    assert g.phi[j] == 0.0
    assert abs(g.ddphi[j]) < 1e-12
    # slope continues through the joint with the segment's lower root
    assert g.dphi[j] == pytest.approx(seg.psi_minus, abs=1e-12)


def test_glue_on_uniform_grid(std_params):
    g = pr.glue_sign_changing(M_STD, 1.0, 2, 128, grid_kind="uniform")
    assert np.max(np.abs(np.diff(np.diff(g.z)))) < 1e-14
    assert g.residual < 5e-4
    assert np.max(np.abs(g.phi + g.phi[::-1])) == 0.0


def test_sample_on_reproduces_grid_arrays():
    g = pr.glue_sign_changing(M_STD, 1.0, 2, 128)
    phi, dphi, ddphi = pr.sample_on(g, g.z)
    assert np.max(np.abs(phi - g.phi)) < 1e-12
    assert np.max(np.abs(dphi - g.dphi)) < 1e-12
    assert np.max(np.abs(ddphi - g.ddphi)) < 1e-11


def test_sample_on_between_nodes(cheb_profile, std_params):
    zs = np.array([0.123, 0.5, 0.87])
    phi, dphi, _ = pr.sample_on(cheb_profile, zs)
    ref_phi, ref_dphi, _ = pr.sample_profile(std_params, zs)
    assert np.max(np.abs(phi - ref_phi)) < 1e-13
    assert np.max(np.abs(dphi - ref_dphi)) < 1e-13


def test_csv_and_doc_outputs(cheb_profile, std_params):
    text = pr.profile_csv(cheb_profile)
    lines = text.strip().split("\n")
    assert lines[0] == "z,phi,dphi,ddphi"
    assert len(lines) == len(cheb_profile.z) + 1
    doc = pr.params_doc(std_params, residual=cheb_profile.residual)
    for key in ("m", "H", "psi_plus", "psi_minus", "delta", "eps", "p", "q", "C", "residual"):
        assert key in doc
