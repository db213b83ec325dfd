from math import pi

import numpy as np
import pytest
from scipy import integrate as sint

from curvflow import ballrefs as br
from curvflow import spheregeom as sg
from curvflow.spheregeom import AxisymProfile, ProfileError


@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("r", [0.3, 0.7, 1.2])
def test_slice_curvatures_and_quermass(n, r):
    prof = AxisymProfile.slice(n, 64, r)
    g = sg.geometry(prof)
    np.testing.assert_allclose(g.kappa, 1 / np.tan(r) if n > 1 else g.kappa, rtol=1e-14)
    np.testing.assert_allclose(g.kappa_m, 1 / np.tan(r), rtol=1e-14)
    np.testing.assert_allclose(g.u, np.sin(r), rtol=1e-15)
    W = sg.quermassintegrals(prof, g)
    ref = [br.eval_ref(br.BallReference(n, "f", k), r) for k in range(n + 2)]
    np.testing.assert_allclose(W, ref, rtol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_slice_weighted_integrals(n):
    r = 0.9
    prof = AxisymProfile.slice(n, 48, r)
    wi = sg.weighted_integrals(prof)
    assert wi.wphi(-1) == pytest.approx(br.eval_ref(br.BallReference(n, "h", -1), r), rel=1e-13)
    for k in range(n + 1):
        assert wi.wphi(k) == pytest.approx(br.eval_ref(br.BallReference(n, "h", k), r), rel=1e-13)
        assert wi.Phi_p[k] == pytest.approx(br.eval_ref(br.BallReference(n, "xi", k), r), rel=1e-13)


def test_sphere_area_values():
    assert sg.sphere_area(1) == pytest.approx(2 * pi)
    assert sg.sphere_area(2) == pytest.approx(4 * pi)
    assert sg.sphere_area(3) == pytest.approx(2 * pi**2)


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_sin_power_integral_against_quad(n):
    for rho in (0.2, 1.1, 2.5):
        ref, _ = sint.quad(lambda s: np.sin(s) ** n, 0, rho, epsabs=0, epsrel=1e-13)
        assert sg.sin_power_integral(n, rho) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_angular_weights_integrate_polynomials_in_cos(n):
    # int_{S^n} cos^{2j} theta is exact for the chosen rule
    N = 40
    w = sg.angular_weights(n, N)
    th = sg.grid_theta(N)
    assert w.sum() == pytest.approx(sg.sphere_area(n), rel=1e-14)
    for j in (1, 2, 3):
        ref, _ = sint.quad(lambda t: np.cos(t) ** (2 * j) * np.sin(t) ** (n - 1), 0, pi, epsabs=0, epsrel=1e-13)
        assert np.dot(w, np.cos(th) ** (2 * j)) == pytest.approx(sg.sphere_area(n - 1) * ref, rel=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_volume_matches_quad_oracle(n):
    base, a = 0.8, 0.05
    prof = AxisymProfile.from_cosines(n, 200, base, [(2, a)])

    def inner(t):
        rho = base + a * np.cos(2 * t)
        v, _ = sint.quad(lambda s: np.sin(s) ** n, 0, rho, epsabs=0, epsrel=1e-13)
        return v * np.sin(t) ** (n - 1)

    ref, _ = sint.quad(inner, 0, pi, epsabs=0, epsrel=1e-12)
    assert sg.enclosed_volume(prof) == pytest.approx(sg.sphere_area(n - 1) * ref, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [0, 1])
def test_minkowski_residual_converges(n, k):
    res = []
    for N in (100, 200, 400):
        prof = AxisymProfile.from_cosines(n, N, 0.8, [(2, 0.05), (4, 0.01)])
        res.append(abs(sg.minkowski_residual(prof, k)))
    assert res[0] / res[1] >= 8 and res[1] / res[2] >= 8


def test_pointwise_identities():
    prof = AxisymProfile.from_cosines(2, 200, 0.8, [(2, 0.05)])
    assert sg.gradient_norm_residual(prof) < 1e-14
    assert sg.support_gradient_residual(prof) < 1e-6


def test_gauss_bonnet_diagnostic_small_for_slice():
    assert abs(sg.gauss_bonnet_diagnostic(AxisymProfile.slice(3, 64, 0.6))) < 1e-13


def test_constant_has_zero_derivatives():
    prof = AxisymProfile.slice(2, 32, 0.7)
    rt, rtt = sg.derivatives(prof)
    assert np.all(rt == 0) and np.all(rtt == 0)


def test_derivative_order():
    errs = []
    for N in (64, 128):
        prof = AxisymProfile.from_cosines(2, N, 0.8, [(2, 0.05)])
        rt, rtt = sg.derivatives(prof)
        th = prof.theta
        errs.append((np.max(np.abs(rt + 0.1 * np.sin(2 * th))), np.max(np.abs(rtt + 0.2 * np.cos(2 * th)))))
    assert errs[0][0] / errs[1][0] > 14 and errs[0][1] / errs[1][1] > 14


def test_periodic_curve():
    prof = AxisymProfile.slice(1, 64, 0.5, mode="periodic")
    W = sg.quermassintegrals(prof)
    assert W[0] == pytest.approx(2 * pi * (1 - np.cos(0.5)), rel=1e-14)
    assert W[1] == pytest.approx(pi * np.sin(0.5), rel=1e-14)


def test_non_even_profile_rejected():
    with pytest.raises(ProfileError, match="even"):
        AxisymProfile.from_function(lambda t: 0.8 + 0.05 * np.sin(t), 2, 64)


def test_cos_theta_is_even_across_both_poles():
    # cos(theta) reflects evenly at 0 and pi, so the validator accepts it
    AxisymProfile.from_cosines(2, 64, 0.8, [(1, 0.05)])


@pytest.mark.parametrize(
    "kwargs,msg",
    [
        (dict(n=2, rho=np.full(8, 0.8)), "coarse"),
        (dict(n=2, rho=np.full(32, 3.2)), "rho must stay"),
        (dict(n=2, rho=np.r_[np.full(31, 0.8), np.nan]), "non-finite"),
        (dict(n=2, rho=np.full(32, 0.8), mode="periodic"), "periodic"),
        (dict(n=0, rho=np.full(32, 0.8)), "n must"),
    ],
)
def test_validation_errors(kwargs, msg):
    with pytest.raises(ProfileError, match=msg):
        AxisymProfile(**kwargs)


def test_profile_is_immutable():
    prof = AxisymProfile.slice(2, 32, 0.7)
    with pytest.raises(ValueError):
        prof.rho[0] = 1.0


@pytest.mark.parametrize("mode,n", [("axisym", 2), ("periodic", 1)])
def test_profile_csv_roundtrip(tmp_path, mode, n):
    prof = AxisymProfile.from_function(lambda t: 0.8 + 0.03 * np.cos(2 * t), n, 40, mode)
    path = tmp_path / "p.csv"
    sg.write_profile_csv(path, prof)
    back = sg.read_profile_csv(path, n)
    assert back.mode == mode
    np.testing.assert_array_equal(back.rho, prof.rho)


def test_read_profile_rejects_bad_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n1,2\n")
    with pytest.raises(ProfileError):
        sg.read_profile_csv(path, 2)


def test_geometry_csv_header(tmp_path):
    path = tmp_path / "g.csv"
    sg.write_geometry_csv(path, AxisymProfile.slice(2, 32, 0.7))
    assert path.read_text().splitlines()[0] == "theta,rho,u,omega,kappaM,kappaP"
