"""Pass/fail reports: monotone quantities along runs, geometric inequalities
on single profiles, conjecture gap tables and randomized algebra sweeps.

Every record serializes to ``{suite, check, pass, worstViolation, tolerance,
provenance}``.  Conjecture tables are exploratory and never contribute to a
pass/fail verdict.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import ballrefs
from .ballrefs import BallReference, DomainError, RangeError
from .flows import CONTRACTING, INVERSE, FlowSpec, QuantitySeries, make_kernel, normal_speed, step
from .spheregeom import (
    AxisymProfile,
    geometry,
    integrate,
    quermassintegrals,
    weighted_integrals,
)
from .symfun import (
    F_value_and_gradient,
    CurvatureFunctionSpec,
    algebra_gap_pair,
    divided_difference_identity,
    elementary_symmetric,
    in_cone,
    normalized_symmetric,
    sigma_excluding_all,
    trace_bounds_quotient,
)

__all__ = [
    "ConfigurationError",
    "HypothesisError",
    "CheckRecord",
    "MonotonicityCheck",
    "InequalityReport",
    "SUITES",
    "suite_checks",
    "check_monotone",
    "check_inequalities",
    "check_heintze_karcher",
    "explore_conjectures",
    "property_suites",
    "variational_rates",
    "sample_cone",
    "sample_gamma2_boundary",
]

CONVEX_SLACK = 1e-10
EQUALITY_TOL = 1e-8
CONJECTURE_PROVENANCE = "conjecture, not asserted"


class ConfigurationError(ValueError):
    """Run or suite whose hypotheses do not match."""


class HypothesisError(ValueError):
    """Profile outside the hypotheses of a check."""


@dataclass
class CheckRecord:
    suite: str
    check: str
    passed: bool
    worst_violation: float
    tolerance: float
    provenance: str
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        d = {
            "suite": self.suite,
            "check": self.check,
            "pass": bool(self.passed),
            "worstViolation": float(self.worst_violation),
            "tolerance": float(self.tolerance),
            "provenance": self.provenance,
        }
        if self.detail:
            d["detail"] = self.detail
        return d


# --------------------------------------------------------------------------
# monotone quantities along runs


@dataclass(frozen=True)
class MonotonicityCheck:
    quantity: str
    direction: str  # nondecreasing | nonincreasing | constant | bounded_above | bounded_below
    source: str
    tol_rel: float = 1e-9
    tol_abs: float = 1e-12

    def __post_init__(self):
        if self.direction not in (
            "nondecreasing",
            "nonincreasing",
            "constant",
            "bounded_above",
            "bounded_below",
        ):
            raise ValueError(f"unknown direction {self.direction!r}")
        if not (self.tol_rel > 0 or self.tol_abs > 0):
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class _Suite:
    family: str
    kinds: tuple
    convexity: str  # none | convex | strict
    source: str


SUITES = {
    "contracting_mean_starshaped": _Suite(CONTRACTING, (("mean", 1),), "none", "mean-curvature contracting flow"),
    "contracting_mean": _Suite(CONTRACTING, (("mean", 1),), "convex", "mean-curvature contracting flow"),
    "contracting_sqrt_p2": _Suite(CONTRACTING, (("power_root", 2),), "strict", "sqrt(p2) contracting flow"),
    "inverse_quotient": _Suite(INVERSE, (("quotient", None),), "strict", "quotient inverse-type flow"),
}


def suite_checks(suite, n, k=None):
    """The list of :class:`MonotonicityCheck` making up a suite in dimension n."""
    if suite not in SUITES:
        raise ConfigurationError(f"unknown suite {suite!r}; known: {sorted(SUITES)}")
    src = SUITES[suite].source
    M = MonotonicityCheck
    c0 = [M("minRho", "bounded_below", src + " (C0 bound)", 0.0, 1e-8),
          M("maxRho", "bounded_above", src + " (C0 bound)", 0.0, 1e-8)]
    if suite == "contracting_mean_starshaped":
        return [M("W0", "constant", src, 1e-7, 0.0), M("Wphi_-1", "nondecreasing", src)] + c0
    if suite == "contracting_mean":
        checks = [M("W0", "constant", src, 1e-7, 0.0), M("Wphi_-1", "nondecreasing", src)]
        checks += [M(f"W{m}", "nonincreasing", src) for m in range(1, n)]
        checks += [M(f"PhiPkW_{j}", "nonincreasing", src) for j in range(0, n - 1)]
        return checks + c0
    if suite == "contracting_sqrt_p2":
        checks = [M("W0", "nondecreasing", src)]
        checks += [M(f"W{m}", "nonincreasing", src) for m in range(1, n)]
        checks += [M("Wphi_-1", "nondecreasing", src)]
        checks += [M(f"PhiPkW_{j}", "nonincreasing", src) for j in range(1, n - 1)]
        checks += [
            M("minU", "nondecreasing", src + " (support minimum)", 0.0, 1e-10),
            M("maxF", "bounded_above", src + " (F upper bound)", 0.0, 1e-8),
        ]
        return checks + c0
    if k is None or not 1 <= k <= n:
        raise ConfigurationError("inverse_quotient needs the quotient order 1 <= k <= n")
    checks = [M("Wphi_-1", "nondecreasing", src)]
    checks += [M(f"W{m}", "nonincreasing", src) for m in range(k, n + 1)]
    checks += [M(f"PhiPkW_{m}", "nonincreasing", src) for m in range(k, n + 1)]
    return checks


def _hypotheses(series: QuantitySeries, suite, spec: FlowSpec | None, k):
    info = SUITES[suite]
    if spec is not None:
        if spec.family != info.family:
            raise ConfigurationError(f"suite {suite} needs a {info.family} run, got {spec.family}")
        kind_ok = any(spec.F.kind == kind and (kk is None or spec.F.k == kk) for kind, kk in info.kinds)
        if not kind_ok:
            raise ConfigurationError(f"suite {suite} does not apply to F = {spec.F.label()}")
        if k is None and spec.F.kind == "quotient":
            k = spec.F.k
    if len(series) == 0:
        raise ConfigurationError("empty series")
    kmin = float(np.min(series.column("minKappa")))
    if info.convexity == "convex" and kmin < 0.0:
        raise ConfigurationError(f"suite {suite} needs a convex run (min kappa = {kmin:.3g})")
    if info.convexity == "strict" and not kmin > 0.0:
        raise ConfigurationError(f"suite {suite} needs a strictly convex run (min kappa = {kmin:.3g})")
    return k


def _judge(q, chk: MonotonicityCheck):
    """(worst violation, tolerance) for one monotone column."""
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        return float("inf"), 0.0
    spread = float(np.ptp(q)) if q.size else 0.0
    if chk.direction == "constant":
        scale = max(abs(q[0]), 1e-300)
        return spread / scale, chk.tol_rel + chk.tol_abs
    if chk.direction == "bounded_above":
        return max(0.0, float(np.max(q - q[0]))), chk.tol_abs
    if chk.direction == "bounded_below":
        return max(0.0, float(np.max(q[0] - q))), chk.tol_abs
    d = np.diff(q)
    if d.size == 0:
        worst = 0.0
    elif chk.direction == "nondecreasing":
        worst = max(0.0, float(np.max(-d)))
    else:
        worst = max(0.0, float(np.max(d)))
    return worst, chk.tol_rel * spread + chk.tol_abs


def check_monotone(series: QuantitySeries, suite, spec: FlowSpec | None = None, k=None):
    """Judge every check of ``suite`` on consecutive samples of ``series``.

    Raises :class:`ConfigurationError` if the run does not satisfy the suite's
    hypotheses (flow family, F, convexity along the run).
    """
    if suite not in SUITES:
        raise ConfigurationError(f"unknown suite {suite!r}; known: {sorted(SUITES)}")
    k = _hypotheses(series, suite, spec, k)
    records = []
    for chk in suite_checks(suite, series.n, k):
        worst, tol = _judge(series.column(chk.quantity), chk)
        records.append(
            CheckRecord(suite, f"{chk.quantity} {chk.direction}", worst <= tol, worst, tol, chk.source)
        )
    return records


# --------------------------------------------------------------------------
# inequalities on a single profile


@dataclass
class InequalityReport:
    tag: str
    lhs: float
    rhs: float
    gap: float
    passed: bool
    equality: bool = False
    skipped: bool = False
    reason: str | None = None
    scale: float = 1.0
    tolerance: float = 0.0
    hypothesis: str = "star-shaped"

    def as_record(self, suite="inequalities"):
        worst = 0.0 if self.skipped else max(0.0, -self.gap / self.scale)
        rec = CheckRecord(
            suite,
            self.tag,
            self.passed,
            worst,
            self.tolerance,
            f"geodesic-ball comparison ({self.hypothesis})",
        )
        if self.skipped:
            rec.detail = {"skipped": True, "reason": self.reason}
        return rec

    CSV_HEADER = ("tag", "hypothesis", "lhs", "rhs", "gap", "relgap", "pass", "equality", "skipped", "reason")

    def csv_row(self):
        f = lambda x: "" if x is None or not np.isfinite(x) else format(float(x), ".17g")
        rel = None if self.skipped else self.gap / self.scale
        return [self.tag, self.hypothesis, f(self.lhs), f(self.rhs), f(self.gap), f(rel),
                int(self.passed), int(self.equality), int(self.skipped), self.reason or ""]


def _is_convex(fields, n, slack=CONVEX_SLACK):
    return bool(np.all(in_cone(fields.p, n, slack)))


def _profile_data(profile, fields):
    fields = geometry(profile) if fields is None else fields
    W = quermassintegrals(profile, fields)
    wi = weighted_integrals(profile, fields)
    return fields, W, wi


def _phipk(W, wi, k):
    # p_{-1} = 0 convention: no W term at k = 0
    return float(wi.Phi_p[k]) + (k * float(W[k - 1]) if k >= 1 else 0.0)


def _compare(tag, lhs, rhs_fn, tol, hypothesis):
    try:
        rhs = float(rhs_fn())
    except (RangeError, DomainError) as exc:
        return InequalityReport(tag, lhs, float("nan"), float("nan"), True, skipped=True,
                                reason=f"inversion: {exc}", hypothesis=hypothesis)
    gap = lhs - rhs
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return InequalityReport(tag, lhs, rhs, gap, gap >= -tol * scale, abs(gap) < EQUALITY_TOL * scale,
                            scale=scale, tolerance=tol, hypothesis=hypothesis)


def _skip(tag, reason, hypothesis):
    return InequalityReport(tag, float("nan"), float("nan"), float("nan"), True, skipped=True,
                            reason=reason, hypothesis=hypothesis)


def check_inequalities(profile: AxisymProfile, tol=1e-9, fields=None):
    """All comparisons with geodesic balls that apply to ``profile``.

    Star-shaped comparisons are always evaluated; the rest need strict
    convexity and are reported as skipped otherwise.  Inversion range
    problems are reported per inequality.
    """
    n = profile.n
    fields, W, wi = _profile_data(profile, fields)
    star = bool(np.all(fields.u > 0.0))
    convex = _is_convex(fields, n)
    ref = lambda kind, k: BallReference(n, kind, k)
    r_wphi = lambda: ballrefs.invert(ref("h", -1), wi.u)
    r_vol = lambda: ballrefs.invert(ref("f", 0), W[0])
    out = []

    tag = "W0 >= f0(h_-1^-1(Wphi_-1))"
    if star:
        out.append(_compare(tag, float(W[0]), lambda: ref("f", 0)(r_wphi()), tol, "star-shaped"))
    else:
        out.append(_skip(tag, "not star-shaped (u <= 0 somewhere)", "star-shaped"))

    def convex_case(tag, lhs, rhs_fn):
        if not convex:
            out.append(_skip(tag, "not strictly convex", "strictly convex"))
        else:
            out.append(_compare(tag, lhs, rhs_fn, tol, "strictly convex"))

    for k in range(n + 1):
        convex_case(f"PhiPk+kW[k={k}] >= xi_kf(h_-1^-1(Wphi_-1))", _phipk(W, wi, k),
                    lambda k=k: ref("xi_kf", k)(r_wphi()))
    for k in range(n - 1):
        convex_case(f"PhiPk+kW[k={k}] >= xi_kf(f0^-1(W0))", _phipk(W, wi, k),
                    lambda k=k: ref("xi_kf", k)(r_vol()))
    for m in range(1, n + 1):
        convex_case(f"W{m} >= f{m}(h_-1^-1(Wphi_-1))", float(W[m]), lambda m=m: ref("f", m)(r_wphi()))
    for m in range(1, n - 1):
        convex_case(f"W{m} >= f{m}(f0^-1(W0))", float(W[m]), lambda m=m: ref("f", m)(r_vol()))
    return out


def check_heintze_karcher(profile: AxisymProfile, fields=None):
    """``int phi'/p_1 - int u``; returns ``(residual, scale)``.

    Needs ``p_1 > 0`` and ``phi' > 0`` everywhere.
    """
    fields = geometry(profile) if fields is None else fields
    p1 = fields.p_k(1)
    if not np.all(p1 > 0.0):
        raise HypothesisError("Heintze-Karcher check needs mean-convexity (p1 > 0)")
    if not np.all(fields.phi_prime > 0.0):
        raise HypothesisError("Heintze-Karcher check needs phi' > 0 (inside the hemisphere)")
    lhs = integrate(profile, fields, fields.phi_prime / p1)
    rhs = integrate(profile, fields, fields.u)
    return lhs - rhs, max(abs(lhs), abs(rhs))


CONJECTURE_HEADER = ("k", "l", "via", "lhs", "rhs", "gap", "relgap", "status", "provenance")


def explore_conjectures(profile: AxisymProfile, fields=None):
    """Gap table of ``int Phi p_k + k W_{k-1}`` against balls matched in
    ``W_l`` or ``W_l^{phi'}`` for ``0 <= l <= k <= n``.  Never asserted.
    """
    n = profile.n
    fields, W, wi = _profile_data(profile, fields)
    if not _is_convex(fields, n):
        raise HypothesisError("conjecture table needs a strictly convex profile")
    rows = []
    for k in range(n + 1):
        lhs = _phipk(W, wi, k)
        target = BallReference(n, "xi_kf", k)
        for l in range(k + 1):
            for via, ref, value in (
                ("f", BallReference(n, "f", l), float(W[l])),
                ("h", BallReference(n, "h", l), wi.wphi(l)),
            ):
                try:
                    rhs = target(ballrefs.invert(ref, value))
                    gap = lhs - rhs
                    rel = gap / max(abs(lhs), abs(rhs), 1e-300)
                    status = "ok"
                except (RangeError, DomainError) as exc:
                    rhs = gap = rel = float("nan")
                    status = f"inversion: {exc}"
                rows.append(dict(k=k, l=l, via=via, lhs=lhs, rhs=rhs, gap=gap, relgap=rel,
                                 status=status, provenance=CONJECTURE_PROVENANCE))
    return rows


# --------------------------------------------------------------------------
# discrete versus continuous evolution


def _monitored(profile, fields):
    W = quermassintegrals(profile, fields)
    wi = weighted_integrals(profile, fields)
    n = profile.n
    wphi = [wi.u] + [float(x) for x in wi.phi_prime_p]
    phipk = [_phipk(W, wi, k) for k in range(1, n + 1)]
    return np.concatenate([W[: n + 1], wphi, phipk])


def monitored_names(n):
    return ([f"W{k}" for k in range(n + 1)] + ["Wphi_-1"] + [f"Wphi_{k}" for k in range(n + 1)]
            + [f"PhiPkW_{k}" for k in range(1, n + 1)])


def variational_rates(profile: AxisymProfile, spec: FlowSpec, dt, backend=None):
    """Forward difference over one RK4 step of every monitored integral, and
    the same rates from the first-variation formulas with normal velocity
    ``speed / omega``.

    Returns ``(names, discrete, formula)``.
    """
    n = profile.n
    fields = geometry(profile)
    vel = normal_speed(profile, fields, spec)
    p = lambda k: fields.p_k(k) if 0 <= k <= n else np.zeros(profile.N)
    u, dphi, Phi = fields.u, fields.phi_prime, fields.Phi
    I = lambda f: integrate(profile, fields, f * vel)
    formula = [(n + 1 - k) / (n + 1) * I(p(k)) for k in range(n + 1)]
    # weighted integrals W_{k-1}^{phi'}, k = 0 .. n+1 (curvature K = 1)
    formula += [I(-k * u * p(k - 1) + (n + 1 - k) * dphi * p(k)) for k in range(n + 2)]
    # d/dt int Phi p_k = int F ((k+1) u p_k + (n-k) Phi p_{k+1} - k p_{k-1}); with the
    # normalisation of W_{k-1} the k W_{k-1} term cancels only a fraction of the last part
    formula += [I((k + 1) * u * p(k) + (n - k) * Phi * p(k + 1) - k * (k - 1) / (n + 1) * p(k - 1))
                for k in range(1, n + 1)]
    nxt = step(profile, spec, dt, make_kernel(profile, spec, backend))
    discrete = (_monitored(nxt, geometry(nxt)) - _monitored(profile, fields)) / dt
    return monitored_names(n), discrete, np.array(formula)


# --------------------------------------------------------------------------
# randomized algebra sweeps

SAMPLE_LOW, SAMPLE_HIGH = -1.0, 3.0
DIMENSIONS = tuple(range(2, 9))


def sample_cone(rng, n, k, count, low=SAMPLE_LOW, high=SAMPLE_HIGH):
    """``count`` uniform draws from ``[low, high]^n`` conditioned on Gamma_k (rejection)."""
    out = []
    have = 0
    while have < count:
        batch = rng.uniform(low, high, size=(max(2 * (count - have), 64), n))
        if k >= 1:
            batch = batch[in_cone(normalized_symmetric(batch), k)]
        out.append(batch)
        have += len(batch)
    return np.concatenate(out)[:count]


def sample_gamma2_boundary(rng, n, count, eps_max=1e-6):
    """Points of Gamma_2 with ``p_2`` drawn in ``(0, eps_max)``.

    A uniform shift ``kappa + t`` moves ``p_2`` to ``p_2 + 2 t p_1 + t^2``; t is
    chosen so the result equals the drawn epsilon.
    """
    kap = rng.uniform(SAMPLE_LOW, SAMPLE_HIGH, size=(count, n))
    p = normalized_symmetric(kap)
    eps = rng.uniform(0.0, eps_max, size=count)
    eps = np.where(eps > 0.0, eps, eps_max / 2)
    t = -p[:, 1] + np.sqrt(np.maximum(p[:, 1] ** 2 - p[:, 2], 0.0) + eps)
    kap = kap + t[:, None]
    keep = in_cone(normalized_symmetric(kap), 2)
    return kap[keep]


def brute_force_sigma(kappa):
    """``sigma_k`` by explicit subset products; also the sums of |products|."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    sig = np.zeros(kappa.shape[:-1] + (n + 1,))
    mag = np.zeros_like(sig)
    sig[..., 0] = mag[..., 0] = 1.0
    for k in range(1, n + 1):
        for combo in itertools.combinations(range(n), k):
            prod = np.prod(kappa[..., list(combo)], axis=-1)
            sig[..., k] += prod
            mag[..., k] += np.abs(prod)
    return sig, mag


class _Sweep:
    """Accumulates worst margins of one check across dimensions."""

    def __init__(self, suite, check, tolerance, provenance):
        self.suite, self.check, self.tolerance, self.provenance = suite, check, tolerance, provenance
        self.worst = 0.0
        self.samples = 0

    def add(self, violation):
        violation = np.asarray(violation, dtype=float)
        self.samples += violation.shape[0] if violation.ndim else 1
        if violation.size:
            v = float(np.max(violation)) if np.all(np.isfinite(violation)) else float("inf")
            self.worst = max(self.worst, v)

    def record(self, **detail):
        return CheckRecord(self.suite, self.check, self.worst <= self.tolerance, self.worst, self.tolerance,
                           self.provenance, dict(evaluations=self.samples, **detail))


def _per_dim(samples, dims):
    return -(-samples // len(dims))


def suite_oracle(rng, samples=10_000, dims=DIMENSIONS):
    """Recurrence against brute-force subset products.

    Relative error is measured against ``sigma_k(|kappa|)``, the sum of the
    absolute subset products, which bounds the rounding of any summation.
    """
    sw = _Sweep("symfun", "sigma recurrence vs subset products", 1e-12, "oracle equivalence")
    for n in dims:
        kap = rng.uniform(SAMPLE_LOW, SAMPLE_HIGH, size=(_per_dim(samples, dims), n))
        ref, mag = brute_force_sigma(kap)
        sw.add(np.abs(elementary_symmetric(kap) - ref) / mag)
    return [sw.record()]


def suite_divided_difference(rng, samples=100_000, dims=DIMENSIONS):
    sw = _Sweep("symfun", "divided-difference identity", 1e-10, "algebraic identity")
    for n in dims:
        kap = rng.uniform(SAMPLE_LOW, SAMPLE_HIGH, size=(_per_dim(samples, dims), n))
        lhs, rhs = divided_difference_identity(kap)
        sw.add(np.abs(lhs - rhs) / (1.0 + np.abs(lhs)))
    lhs, rhs = divided_difference_identity([1.0, 2.0, 3.0])
    return [sw.record(anchor=[float(lhs), float(rhs)])]


def suite_algebra_gap(rng, samples=100_000, dims=DIMENSIONS, boundary_fraction=0.1):
    """Lower comparison on Gamma_2 (including points with p_2 < 1e-6) and the
    empirical sup of lhs/rhs on Gamma_n."""
    sw = _Sweep("symfun", "sqrt(p2) algebra gap lhs >= (n/2) rhs", 1e-12, "algebraic inequality")
    ratios = {}
    per = _per_dim(samples, dims)
    nb = int(per * boundary_fraction)
    near = 0
    for n in dims:
        kap = np.concatenate([sample_cone(rng, n, 2, per - nb), sample_gamma2_boundary(rng, n, nb)])
        near += int(np.sum(normalized_symmetric(kap)[:, 2] < 1e-6))
        lhs, rhs = algebra_gap_pair(kap)
        # near the cone boundary lhs ~ p2^{-3/2}; rounding scales with it
        sw.add(-(lhs - 0.5 * n * rhs) / np.maximum(1.0, np.abs(lhs)))
        kc = sample_cone(rng, n, n, per)
        lc, rc = algebra_gap_pair(kc)
        ok = rc > 1e-12
        ratios[str(n)] = float(np.max(lc[ok] / rc[ok]))
    rec = sw.record(near_boundary=near)
    upper = CheckRecord("symfun", "sqrt(p2) algebra gap lhs <= C rhs on Gamma_n (sup ratio)",
                        all(np.isfinite(v) for v in ratios.values()), 0.0, 0.0,
                        "empirical comparability constant", {"sup_ratio_per_n": ratios})
    return [rec, upper]


def suite_identities(rng, samples=100_000, dims=DIMENSIONS):
    """Sums of ``sigma_k(kappa|i)`` and the trace identities of ``d p_m``."""
    tol = 1e-12
    s_sum = _Sweep("symfun", "sum_i sigma_k(kappa|i) = (n-k) sigma_k", tol, "algebraic identity")
    s_k1 = _Sweep("symfun", "sum_i kappa_i sigma_k(kappa|i) = (k+1) sigma_{k+1}", tol, "algebraic identity")
    s_k2 = _Sweep("symfun", "sum_i kappa_i^2 sigma_k(kappa|i) = sigma_1 sigma_{k+1} - (k+2) sigma_{k+2}",
                  tol, "algebraic identity")
    d_k1 = _Sweep("symfun", "sum_i (p_m)_i kappa_i = m p_m", tol, "algebraic identity")
    d_k0 = _Sweep("symfun", "sum_i (p_m)_i = m p_{m-1}", tol, "algebraic identity")
    d_k2 = _Sweep("symfun", "sum_i (p_m)_i kappa_i^2 = n p_1 p_m - (n-m) p_{m+1}", tol, "algebraic identity")
    for n in dims:
        kap = rng.uniform(SAMPLE_LOW, SAMPLE_HIGH, size=(_per_dim(samples, dims), n))
        ak = np.abs(kap)
        sig = elementary_symmetric(kap)
        siga = elementary_symmetric(ak)
        ex = sigma_excluding_all(kap)  # [..., i, k]
        exa = sigma_excluding_all(ak)
        pad = lambda s, j: s[:, j] if j <= n else np.zeros(len(s))
        binom = np.array([comb(n, j) for j in range(n + 2)], dtype=float)
        for k in range(n):
            e = ex[:, :, k]
            ea = exa[:, :, k]
            s_sum.add(np.abs(e.sum(1) - (n - k) * sig[:, k]) / ((n - k) * siga[:, k]))
            s_k1.add(np.abs((kap * e).sum(1) - (k + 1) * sig[:, k + 1]) / ((k + 1) * siga[:, k + 1]))
            lhs = (kap**2 * e).sum(1)
            rhs = sig[:, 1] * sig[:, k + 1] - (k + 2) * pad(sig, k + 2)
            scale = (ak**2 * ea).sum(1) + siga[:, 1] * siga[:, k + 1] + (k + 2) * pad(siga, k + 2)
            s_k2.add(np.abs(lhs - rhs) / scale)
        p = sig / binom[: n + 1]
        pa = siga / binom[: n + 1]
        for m in range(1, n + 1):
            dp = ex[:, :, m - 1] / binom[m]
            dpa = exa[:, :, m - 1] / binom[m]
            d_k1.add(np.abs((dp * kap).sum(1) - m * p[:, m]) / (m * pa[:, m]))
            d_k0.add(np.abs(dp.sum(1) - m * p[:, m - 1]) / (m * pa[:, m - 1]))
            pm1 = p[:, m + 1] if m < n else 0.0
            pm1a = pa[:, m + 1] if m < n else 0.0
            lhs = (dp * kap**2).sum(1)
            rhs = n * p[:, 1] * p[:, m] - (n - m) * pm1
            scale = (dpa * ak**2).sum(1) + n * pa[:, 1] * pa[:, m] + (n - m) * pm1a
            d_k2.add(np.abs(lhs - rhs) / scale)
    return [s.record() for s in (s_sum, s_k1, s_k2, d_k1, d_k0, d_k2)]


def suite_newton_maclaurin(rng, samples=100_000, dims=DIMENSIONS):
    """``p_k p_{m-1} >= p_m p_{k-1}`` and ``p_k^{1/k} >= p_m^{1/m}`` on Gamma_m."""
    tol = 1e-12
    nm = _Sweep("symfun", "p_k p_{m-1} - p_m p_{k-1} >= 0 on Gamma_m", tol, "Newton-MacLaurin")
    ch = _Sweep("symfun", "p_k^{1/k} - p_m^{1/m} >= 0 on Gamma_m", tol, "MacLaurin chain")
    per = _per_dim(samples, dims)
    for n in dims:
        for m in range(2, n + 1):
            kap = sample_cone(rng, n, m, max(per // (n - 1), 1))
            p = normalized_symmetric(kap)
            scale = np.max(np.abs(kap), axis=1)
            for k in range(1, m):
                margin = p[:, k] * p[:, m - 1] - p[:, m] * p[:, k - 1]
                nm.add(-margin / np.maximum(1.0, scale ** (k + m - 1)))
                chain = p[:, k] ** (1.0 / k) - p[:, m] ** (1.0 / m)
                ch.add(-chain / np.maximum(1.0, scale))
    return [nm.record(), ch.record()]


def suite_trace_bounds(rng, samples=100_000, dims=tuple(range(2, 7))):
    """For ``F = p_k/p_{k-1}``: ``1 <= sum F^i <= k`` and ``F^2 <= sum F^i kappa_i^2``
    on Gamma_k; ``sum F^i kappa_i^2 <= (n-k+1) F^2`` on Gamma_{k+1}.

    ``sum F^i kappa_i^2 = ((n-k+1) p_k^2 - (n-k) p_{k+1} p_{k-1}) / p_{k-1}^2``,
    so the upper bound needs ``p_{k+1} >= 0``; on Gamma_k alone it fails, e.g.
    n = 2, k = 1, kappa = (1, -1/2).  The counterexample is kept as a record.
    """
    tol = 1e-12
    tr = _Sweep("symfun", "1 <= sum F^i <= k for p_k/p_{k-1} on Gamma_k", tol, "trace bounds")
    lo = _Sweep("symfun", "F^2 <= sum F^i kappa_i^2 for p_k/p_{k-1} on Gamma_k", tol, "trace bounds")
    hi = _Sweep("symfun", "sum F^i kappa_i^2 <= (n-k+1) F^2 for p_k/p_{k-1} on Gamma_{k+1}", tol,
                "trace bounds")
    eu = _Sweep("symfun", "Euler identity sum F^i kappa_i = F", tol, "homogeneity")
    per = _per_dim(samples, dims)
    for n in dims:
        for k in range(1, n + 1):
            spec = CurvatureFunctionSpec.quotient(k)
            kap = sample_cone(rng, n, k, max(per // n, 1))
            F, grad = F_value_and_gradient(spec, kap)
            trace, h2F = trace_bounds_quotient(k, kap)
            tr.add(np.maximum(1.0 - trace, trace - k) / np.maximum(1.0, np.abs(trace)))
            lo.add((F**2 - h2F) / np.maximum(1.0, np.maximum(np.abs(h2F), F**2)))
            eu.add(np.abs((grad * kap).sum(1) - F) / np.maximum(1.0, (np.abs(grad) * np.abs(kap)).sum(1)))
            kap = sample_cone(rng, n, min(k + 1, n), max(per // n, 1))
            F, _ = F_value_and_gradient(spec, kap)
            _, h2F = trace_bounds_quotient(k, kap)
            hi.add((h2F - (n - k + 1) * F**2) / np.maximum(1.0, np.maximum(np.abs(h2F), F**2)))
    _, h2F = trace_bounds_quotient(1, [1.0, -0.5])
    F = 0.25
    # passes when the counterexample still violates the bound
    counter = CheckRecord("symfun", "counterexample: sum F^i kappa_i^2 > (n-k+1) F^2 on Gamma_k outside Gamma_{k+1}",
                          bool(h2F > 2 * F**2), 0.0, 0.0, "counterexample to the bound on Gamma_k",
                          {"kappa": [1.0, -0.5], "k": 1, "lhs": float(h2F), "bound": 2 * F**2})
    return [tr.record(), lo.record(), hi.record(), eu.record(), counter]


def suite_product_bounds(rng, samples=100_000, dims=DIMENSIONS):
    """Sorted ``kappa_1 >= ... >= kappa_n``: ``kappa_1..kappa_m <= sigma_m`` on
    Gamma_{m+1} and ``sigma_m <= C(n,m) kappa_1..kappa_m`` on Gamma_m."""
    tol = 1e-12
    lo = _Sweep("symfun", "kappa_1...kappa_m <= sigma_m on Gamma_{m+1}", tol, "product bounds")
    hi = _Sweep("symfun", "sigma_m <= C(n,m) kappa_1...kappa_m on Gamma_m", tol, "product bounds")
    per = _per_dim(samples, dims)
    for n in dims:
        for m in range(1, n + 1):
            count = max(per // n, 1)
            kap = -np.sort(-sample_cone(rng, n, m, count), axis=1)
            sig = elementary_symmetric(kap)
            prod = np.prod(kap[:, :m], axis=1)
            scale = np.maximum(1.0, elementary_symmetric(np.abs(kap))[:, m])
            hi.add((sig[:, m] - comb(n, m) * prod) / scale)
            if m < n:
                kap = -np.sort(-sample_cone(rng, n, m + 1, count), axis=1)
                sig = elementary_symmetric(kap)
                prod = np.prod(kap[:, :m], axis=1)
                scale = np.maximum(1.0, elementary_symmetric(np.abs(kap))[:, m])
                lo.add((prod - sig[:, m]) / scale)
    return [lo.record(), hi.record()]


PROPERTY_SUITES = {
    "oracle": suite_oracle,
    "divided_difference": suite_divided_difference,
    "algebra_gap": suite_algebra_gap,
    "identities": suite_identities,
    "newton_maclaurin": suite_newton_maclaurin,
    "trace_bounds": suite_trace_bounds,
    "product_bounds": suite_product_bounds,
}


def property_suites(seed=42, names=None, samples=None):
    """Run the randomized sweeps; every suite draws from its own child stream
    of ``seed`` so results do not depend on which suites are selected."""
    names = list(PROPERTY_SUITES) if names is None else list(names)
    unknown = set(names) - set(PROPERTY_SUITES)
    if unknown:
        raise ConfigurationError(f"unknown property suites {sorted(unknown)}")
    children = np.random.SeedSequence(seed).spawn(len(PROPERTY_SUITES))
    streams = dict(zip(PROPERTY_SUITES, children))
    records = []
    for name in names:
        rng = np.random.default_rng(streams[name])
        kwargs = {} if samples is None else {"samples": samples}
        for rec in PROPERTY_SUITES[name](rng, **kwargs):
            rec.detail["seed"] = seed
            records.append(rec)
    return records
