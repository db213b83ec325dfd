import numpy as np
import pytest

from curvflow import _backend, flows
from curvflow.flows import CONTRACTING, INVERSE, FlowSpec, QuantitySeries, StepRejected
from curvflow.spheregeom import AxisymProfile, geometry
from curvflow.symfun import ConeError, CurvatureFunctionSpec as CFS

CONFIGS = [
    ("p1", CONTRACTING, CFS.mean(), None),
    ("sqrt_p2", CONTRACTING, CFS.power_root(2), None),
    ("p2/p1", INVERSE, CFS.quotient(2), None),
]
BACKENDS = _backend.available()


@pytest.mark.parametrize("label,family,F,cone", CONFIGS)
@pytest.mark.parametrize("n", [2, 3])
def test_slices_are_fixed_points(label, family, F, cone, n):
    spec = FlowSpec(family, F, t_end=0.05, sample_every=5)
    prof = AxisymProfile.slice(n, 64, 0.7)
    assert np.max(np.abs(flows.speed(prof, None, spec))) < 1e-12
    res = flows.run(prof, spec)
    assert np.max(np.abs(res.profile.rho - prof.rho)) < 1e-13
    assert res.verdict.kind == "reached_t_end"


def test_stationary_radius_matches_speed_zero():
    # contracting with F = p1: phi' = u cot r holds on every slice
    spec = FlowSpec(CONTRACTING, CFS.mean())
    for r in (0.2, 1.0, 2.0):
        assert np.max(np.abs(flows.speed(AxisymProfile.slice(2, 32, r), None, spec))) < 1e-14


def _rk4_solution(N, m, T_steps=8):
    spec = FlowSpec(CONTRACTING, CFS.mean(), cfl_factor=1.0)
    prof = AxisymProfile.from_cosines(2, N, 0.8, [(2, 0.05)])
    dt0 = flows.cfl_dt(prof, spec)
    ker = flows.make_kernel(prof, spec)
    dt = dt0 / m
    for _ in range(T_steps * m):
        prof = flows.step(prof, spec, dt, ker)
    return prof.rho


@pytest.mark.parametrize("N", [16, 32])
def test_rk4_fourth_order_in_time(N):
    ref = _rk4_solution(N, 32)
    # m = 1 sits at the stability edge and is pre-asymptotic
    e = [np.max(np.abs(_rk4_solution(N, m) - ref)) for m in (2, 4, 8)]
    assert 14 < e[0] / e[1] < 18 and 14 < e[1] / e[2] < 18


def test_cfl_quarters_under_refinement():
    spec = FlowSpec(CONTRACTING, CFS.power_root(2))
    dts = [flows.cfl_dt(AxisymProfile.from_cosines(2, N, 0.8, [(2, 0.05)]), spec) for N in (100, 200, 400)]
    assert all(d > 0 for d in dts)
    assert dts[0] / dts[1] == pytest.approx(4, rel=1e-2)
    assert dts[1] / dts[2] == pytest.approx(4, rel=1e-2)


def test_max_dt_caps_step():
    spec = FlowSpec(CONTRACTING, CFS.mean(), max_dt=1e-7)
    assert flows.cfl_dt(AxisymProfile.slice(2, 32, 0.7), spec) == 1e-7


def test_oversized_step_is_rejected():
    spec = FlowSpec(CONTRACTING, CFS.power_root(2))
    prof = AxisymProfile.from_cosines(2, 64, 0.8, [(2, 0.05)])
    with pytest.raises(StepRejected):
        flows.step(prof, spec, 1e3 * flows.cfl_dt(prof, spec))


def test_initial_state_outside_cone():
    # a strongly non-convex bump leaves Gamma_2
    prof = AxisymProfile.from_cosines(2, 64, 1.2, [(2, 0.3), (8, 0.1)])
    spec = FlowSpec(CONTRACTING, CFS.power_root(2))
    with pytest.raises(ConeError):
        flows.run(prof, spec)


def off_centre_ball(n, N, d, r):
    # geodesic sphere of radius r centred at distance d < r from the pole
    def func(t):
        A, B = np.cos(d), np.sin(d) * np.cos(t)
        return np.arctan2(B, A) + np.arccos(np.cos(r) / np.hypot(A, B))

    return AxisymProfile.from_function(func, n, N)


def test_off_centre_ball_is_umbilic():
    err = []
    for N in (100, 200):
        f = geometry(off_centre_ball(2, N, 0.3, 0.9))
        err.append(np.abs(f.kappa - 1 / np.tan(0.9)).max(axis=0))
    assert err[1][0] < 1e-8
    # parallel curvature: regularized quotient in the pole cells is second order
    assert err[0][1] / err[1][1] > 3.8


def test_inverse_flow_needs_hemisphere():
    # convex, but reaches past the equator around the pole
    prof = off_centre_ball(2, 64, 0.5, 1.2)
    assert prof.rho.max() > np.pi / 2
    with pytest.raises(flows.HemisphereError):
        flows.speed(prof, None, FlowSpec(INVERSE, CFS.quotient(1)))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
@pytest.mark.parametrize("label,family,F,cone", CONFIGS)
@pytest.mark.parametrize("n", [2, 4])
def test_backends_agree(label, family, F, cone, n):
    spec = FlowSpec(family, F)
    prof = AxisymProfile.from_cosines(n, 80, 0.8, [(2, 0.04), (4, 0.01)])
    dt = flows.cfl_dt(prof, spec)
    outs, speeds = [], []
    for b in BACKENDS:
        ker = flows.make_kernel(prof, spec, b)
        out, spd = np.empty(prof.N), np.empty(prof.N)
        assert ker.rk4_step(np.ascontiguousarray(prof.rho), dt, out) == 0
        assert ker.speed(np.ascontiguousarray(prof.rho), spd)[0] == 0
        outs.append(out)
        speeds.append(spd)
    np.testing.assert_allclose(outs[0], outs[1], rtol=0, atol=1e-14)
    np.testing.assert_allclose(speeds[0], speeds[1], rtol=0, atol=1e-12)


@pytest.mark.parametrize("b", BACKENDS)
def test_kernel_speed_matches_numpy(b):
    spec = FlowSpec(INVERSE, CFS.quotient(2))
    prof = AxisymProfile.from_cosines(3, 60, 0.7, [(2, 0.03)])
    out = np.empty(prof.N)
    flows.make_kernel(prof, spec, b).speed(np.ascontiguousarray(prof.rho), out)
    np.testing.assert_allclose(out, flows.speed(prof, None, spec), rtol=0, atol=1e-12)


def test_periodic_curve_shortening():
    # n = 1: a curve in S^2 flowing by geodesic curvature
    prof = AxisymProfile.from_function(lambda t: 0.8 + 0.03 * np.cos(3 * t), 1, 64, "periodic")
    spec = FlowSpec(CONTRACTING, CFS.mean(), t_end=0.2, sample_every=20)
    res = flows.run(prof, spec)
    assert res.profile.oscillation() < prof.oscillation()
    W0 = res.series.column("W0")
    assert np.ptp(W0) < 1e-7 * W0[0]


def test_run_monotone_quantities_p1():
    prof = AxisymProfile.from_cosines(2, 64, 0.8, [(2, 0.05)])
    spec = FlowSpec(CONTRACTING, CFS.mean(), t_end=0.3, sample_every=10)
    res = flows.run(prof, spec)
    assert np.all(np.diff(res.series.column("W1")) <= 1e-12)
    # spatial truncation error at N = 64
    assert np.ptp(res.series.column("W0")) < 1e-6 * res.series.column("W0")[0]
    lo, hi = res.series.column("minRho"), res.series.column("maxRho")
    assert lo.min() >= prof.rho.min() - 1e-8 and hi.max() <= prof.rho.max() + 1e-8


def test_on_sample_callback_and_series_csv(tmp_path):
    seen = []
    prof = AxisymProfile.from_cosines(2, 40, 0.8, [(2, 0.03)])
    spec = FlowSpec(CONTRACTING, CFS.mean(), t_end=0.05, sample_every=3)
    res = flows.run(prof, spec, on_sample=lambda t, p, f: seen.append(t))
    assert len(seen) == len(res.series) and seen[0] == 0.0 and seen[-1] == pytest.approx(0.05)
    path = tmp_path / "s.csv"
    res.series.to_csv(path)
    back = QuantitySeries.from_csv(path)
    np.testing.assert_array_equal(back.data, res.series.data)
    assert back.columns == QuantitySeries.column_names(2)


def test_series_rejects_bad_rows():
    s = QuantitySeries(2)
    with pytest.raises(ValueError):
        s.append([0.0])
    row = np.zeros(len(s.columns))
    s.append(row)
    with pytest.raises(ValueError, match="increase"):
        s.append(row)


@pytest.mark.parametrize(
    "args",
    [
        ("sideways", CFS.mean()),
        (CONTRACTING, CFS.quotient(2)),
        (INVERSE, CFS.power_root(2)),
    ],
)
def test_flowspec_validation(args):
    with pytest.raises(ValueError):
        FlowSpec(*args)


def test_flowspec_numeric_validation():
    with pytest.raises(ValueError):
        FlowSpec(CONTRACTING, CFS.mean(), cfl_factor=0.0)
    with pytest.raises(ValueError):
        FlowSpec(CONTRACTING, CFS.mean(), sample_every=0)
    with pytest.raises(ValueError):
        FlowSpec(INVERSE, CFS.quotient(3)).check(2)


def test_cone_defaults():
    assert FlowSpec(CONTRACTING, CFS.mean()).cone(3) == 0
    assert FlowSpec(CONTRACTING, CFS.power_root(2)).cone(3) == 3
    assert FlowSpec(INVERSE, CFS.quotient(1), required_cone=1).cone(3) == 1


def _decay(amp):
    prof = AxisymProfile.from_cosines(2, 64, 0.8, [(2, amp)])
    spec = FlowSpec(CONTRACTING, CFS.power_root(2), t_end=2.0, sample_every=20, convergence_tol=1e-12)
    return flows.decay_rate(flows.run(prof, spec).series)


def test_decay_rate_independent_of_amplitude():
    a, b = _decay(0.05), _decay(0.02)
    assert a.exponential() and b.exponential()
    assert abs(a.rate - b.rate) <= 0.2 * abs(a.rate)


def test_stationary_decay_inconclusive():
    spec = FlowSpec(CONTRACTING, CFS.mean(), t_end=0.02, sample_every=2)
    fit = flows.decay_rate(flows.run(AxisymProfile.slice(2, 32, 0.7), spec).series)
    assert not fit.conclusive and not fit.exponential()


def test_max_steps_stops_run():
    spec = FlowSpec(CONTRACTING, CFS.mean(), max_steps=5, sample_every=2)
    res = flows.run(AxisymProfile.from_cosines(2, 40, 0.8, [(2, 0.03)]), spec)
    assert res.steps == 5 and res.verdict.reason == "max_steps"


def test_normal_speed_relation():
    prof = AxisymProfile.from_cosines(2, 40, 0.8, [(2, 0.05)])
    spec = FlowSpec(CONTRACTING, CFS.mean())
    f = geometry(prof)
    np.testing.assert_allclose(flows.normal_speed(prof, f, spec) * f.omega, flows.speed(prof, f, spec), rtol=1e-14)


def test_backend_selection(monkeypatch):
    assert _backend.kernels("python").__name__.endswith("_pykernels")
    with pytest.raises(ValueError):
        _backend.kernels("fortran")
    monkeypatch.setenv("CURVFLOW_BACKEND", "python")
    monkeypatch.setattr(_backend, "_cache", {})
    assert _backend.active() == "python"
