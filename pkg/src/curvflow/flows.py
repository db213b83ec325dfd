"""Method-of-lines integration of locally constrained flows of radial graphs.

Two families act on the radial function through ``d rho/dt = speed * omega``:

* ``contracting``: speed ``phi' - u F`` (F = p_1 or sqrt(p_2));
* ``inverse``:     speed ``1/F - u/phi'`` (F = p_k / p_{k-1}).

Time stepping is classical RK4 with a parabolic step bound.  The hot loop
runs in the compiled kernel when it is available (see :mod:`curvflow._backend`);
:func:`speed` and :func:`cfl_dt` below are the plain numpy evaluations the
kernel is tested against.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from math import inf

import numpy as np
from scipy import stats

from . import _backend
from .spheregeom import (
    RHO_MAX,
    RHO_MIN,
    AxisymProfile,
    geometry,
    quermassintegrals,
    weighted_integrals,
)
from .symfun import ConeError, CurvatureFunctionSpec, F_value, F_value_and_gradient, in_cone

__all__ = [
    "CONTRACTING",
    "INVERSE",
    "FlowSpec",
    "QuantitySeries",
    "Verdict",
    "RunResult",
    "DecayFit",
    "StepRejected",
    "HemisphereError",
    "FlowExtinctionError",
    "speed",
    "normal_speed",
    "cfl_dt",
    "step",
    "run",
    "sample_quantities",
    "decay_rate",
]

log = logging.getLogger(__name__)

CONTRACTING = "contracting"
INVERSE = "inverse"
MAX_HALVINGS = 20
CONE_SLACK = 1e-10

_FKIND = {"mean": 0, "power_root": 1, "quotient": 2}


class StepRejected(RuntimeError):
    """A trial step left the admissible set (cone, range or hemisphere)."""


class HemisphereError(ValueError):
    """``phi' <= 0`` somewhere while the inverse-type speed needs ``phi' > 0``."""


class FlowExtinctionError(RuntimeError):
    def __init__(self, message, profile=None, t=None):
        super().__init__(message)
        self.profile = profile
        self.t = t


@dataclass(frozen=True)
class FlowSpec:
    family: str
    F: CurvatureFunctionSpec
    required_cone: int | None = None
    cfl_factor: float = 0.2
    max_dt: float = inf
    t_end: float = 1.0
    convergence_tol: float = 1e-9
    sample_every: int = 50
    max_steps: int | None = None
    slack: float = CONE_SLACK

    def __post_init__(self):
        if self.family not in (CONTRACTING, INVERSE):
            raise ValueError(f"unknown flow family {self.family!r}")
        if self.family == CONTRACTING:
            if not (self.F.kind == "mean" or (self.F.kind == "power_root" and self.F.k == 2)):
                raise ValueError("contracting flow admits F = p1 or F = sqrt(p2)")
        elif self.F.kind == "power_root" and self.F.k != 1:
            raise ValueError("inverse-type flow admits F = p_k / p_{k-1}")
        if not 0.0 < self.cfl_factor <= 1.0:
            raise ValueError("cfl_factor must lie in (0, 1]")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")

    def default_cone(self, n):
        if self.family == CONTRACTING and self.F.kind == "mean":
            return 0
        return n

    def cone(self, n):
        """Cone index enforced at every step (0 means star-shaped only)."""
        req = self.default_cone(n) if self.required_cone is None else self.required_cone
        need = 0 if (self.family == CONTRACTING and self.F.kind == "mean") else self.F.k
        return max(int(req), need)

    def check(self, n):
        self.F.check(n)
        if self.cone(n) > n:
            raise ValueError(f"required cone Gamma_{self.cone(n)} exceeds n = {n}")


def speed(profile: AxisymProfile, fields, spec: FlowSpec):
    """``d rho / dt`` at every grid point."""
    fields = geometry(profile) if fields is None else fields
    n = profile.n
    cone = spec.cone(n)
    if cone and not np.all(in_cone(fields.p, cone, spec.slack)):
        bad = int(np.argmin(np.all(fields.p[:, 1 : cone + 1] > spec.slack, axis=0))) + 1
        raise ConeError(f"state left Gamma_{cone} (p_{bad} <= {spec.slack:g})", bad)
    F = F_value(spec.F, fields.kappa, check=False)
    if spec.family == CONTRACTING:
        return (fields.phi_prime - fields.u * F) * fields.omega
    if np.any(fields.phi_prime <= 0.0):
        raise HemisphereError("inverse-type flow needs the profile inside the hemisphere (phi' > 0)")
    return (1.0 / F - fields.u / fields.phi_prime) * fields.omega


def normal_speed(profile, fields, spec):
    """Normal velocity of the hypersurface (``speed / omega``)."""
    fields = geometry(profile) if fields is None else fields
    return speed(profile, fields, spec) / fields.omega


def cfl_dt(profile: AxisymProfile, spec: FlowSpec, fields=None):
    """Explicit step bound ``cfl * dtheta^2 * min phi^2 omega^2 / D``.

    ``D = u sum F^i`` (contracting) or ``u sum F^i / F^2`` (inverse).
    """
    fields = geometry(profile) if fields is None else fields
    F, grad = F_value_and_gradient(spec.F, fields.kappa, check=False)
    trace = grad.sum(axis=-1)
    D = fields.u * trace
    if spec.family == INVERSE:
        D = D / F**2
    ok = D > 0.0
    bound = np.min(fields.phi[ok] ** 2 * fields.omega[ok] ** 2 / D[ok]) if np.any(ok) else inf
    return min(spec.cfl_factor * profile.dtheta**2 * bound, spec.max_dt)


def make_kernel(profile: AxisymProfile, spec: FlowSpec, backend=None):
    impl = _backend.kernels(backend)
    return impl.FlowKernel(
        profile.N,
        profile.n,
        profile.mode == "periodic",
        0 if spec.family == CONTRACTING else 1,
        _FKIND[spec.F.kind],
        spec.F.k,
        spec.cone(profile.n),
        spec.slack,
    )


_STATUS = {1: "cone violation", 2: "phi' <= 0 (left the hemisphere)", 3: "rho left (0, pi)"}


def _admissible(rho):
    return np.all(np.isfinite(rho)) and rho.min() > RHO_MIN and rho.max() < RHO_MAX


def step(profile: AxisymProfile, spec: FlowSpec, dt, kernel=None):
    """One RK4 step; raises :class:`StepRejected` if the result is inadmissible."""
    kernel = make_kernel(profile, spec) if kernel is None else kernel
    new = np.empty(profile.N)
    status = kernel.rk4_step(np.ascontiguousarray(profile.rho), float(dt), new)
    if status != 0:
        raise StepRejected(_STATUS.get(status, f"status {status}"))
    if not _admissible(new):
        raise StepRejected("rho left the admissible range")
    status, _ = kernel.speed(new, np.empty(profile.N))
    if status != 0:
        raise StepRejected(_STATUS.get(status, f"status {status}"))
    return profile.with_rho(new, validate=False)


class QuantitySeries:
    """Time-stamped monitored integrals, one row per sample."""

    TAIL = ("maxAbsDgamma2", "minU", "minKappa", "maxKappa", "area", "maxSpeed", "maxF", "minRho", "maxRho")

    def __init__(self, n, rows=None):
        self.n = n
        self.columns = self.column_names(n)
        self._rows = [] if rows is None else [np.asarray(r, dtype=float) for r in rows]

    @staticmethod
    def column_names(n):
        cols = ["t"]
        cols += [f"W{k}" for k in range(n + 2)]
        cols += ["Wphi_-1"] + [f"Wphi_{k}" for k in range(n + 1)]
        cols += [f"PhiPkW_{k}" for k in range(n + 1)]
        cols += list(QuantitySeries.TAIL)
        return cols

    def append(self, row):
        row = np.asarray(row, dtype=float)
        if row.size != len(self.columns):
            raise ValueError("row length does not match the series header")
        if self._rows and not row[0] > self._rows[-1][0]:
            raise ValueError("sample times must increase strictly")
        self._rows.append(row)

    def __len__(self):
        return len(self._rows)

    @property
    def data(self):
        if not self._rows:
            return np.empty((0, len(self.columns)))
        return np.vstack(self._rows)

    def column(self, name):
        return self.data[:, self.columns.index(name)]

    @property
    def t(self):
        return self.column("t")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(self.columns)
            for row in self._rows:
                wr.writerow([format(float(x), ".17g") for x in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            rows = [[float(x) for x in r] for r in rd]
        n = sum(1 for c in header if c.startswith("PhiPkW_")) - 1
        series = cls(n, rows)
        if header != series.columns:
            raise ValueError(f"{path}: unexpected series header")
        return series


def sample_quantities(t, profile, fields, spec, speed_values=None):
    """One QuantitySeries row for the state ``profile`` at time ``t``."""
    n = profile.n
    W = quermassintegrals(profile, fields)
    wi = weighted_integrals(profile, fields)
    phipkw = [wi.Phi_p[k] + (k * W[k - 1] if k >= 1 else 0.0) for k in range(n + 1)]
    kap = fields.kappa
    if speed_values is None:
        speed_values = speed(profile, fields, spec)
    try:
        maxF = float(np.max(F_value(spec.F, kap, check=False)))
    except FloatingPointError:
        maxF = float("nan")
    tail = [
        float(np.max(fields.gamma_theta**2)),
        float(np.min(fields.u)),
        float(np.min(kap)),
        float(np.max(kap)),
        fields.area,
        float(np.max(np.abs(speed_values))),
        maxF,
        float(np.min(profile.rho)),
        float(np.max(profile.rho)),
    ]
    return np.concatenate([[t], W, [wi.u], wi.phi_prime_p, phipkw, tail])


@dataclass
class Verdict:
    kind: str
    r_inf: float | None = None
    reason: str | None = None

    def as_dict(self):
        return {"kind": self.kind, "r_inf": self.r_inf, "reason": self.reason}


@dataclass
class RunResult:
    series: QuantitySeries
    profile: AxisymProfile
    verdict: Verdict
    steps: int = 0
    t: float = 0.0
    rejections: int = 0
    extras: dict = field(default_factory=dict)


def run(profile0: AxisymProfile, spec: FlowSpec, on_sample=None, backend=None) -> RunResult:
    """Integrate until ``t_end`` or until the oscillation of rho drops below tolerance.

    A profile that starts as a slice is integrated to ``t_end`` (fixed-point
    check).  Failures after the start are reported through the verdict, with
    the last admissible state and the full series.
    ``on_sample(t, profile, fields)`` is called at every recorded sample.
    """
    n = profile0.n
    spec.check(n)
    profile0.validate()
    kernel = make_kernel(profile0, spec, backend)
    series = QuantitySeries(n)
    rho = np.array(profile0.rho, dtype=float)
    buf = np.empty(profile0.N)
    status, bound = kernel.speed(rho, buf)
    if status != 0:
        fields = geometry(profile0)
        # surface the precise reason through the numpy path
        speed(profile0, fields, spec)
        raise ConeError(f"initial state rejected: {_STATUS.get(status, status)}")

    def record(t, rho, spd):
        prof = profile0.with_rho(rho.copy(), validate=False)
        fields = geometry(prof)
        series.append(sample_quantities(t, prof, fields, spec, spd))
        if on_sample is not None:
            on_sample(t, prof, fields)

    t = 0.0
    steps = 0
    rejections = 0
    check_convergence = profile0.oscillation() >= spec.convergence_tol
    record(t, rho, buf)
    last_recorded = 0
    new = np.empty_like(rho)
    verdict = None
    while True:
        if check_convergence and np.ptp(rho) < spec.convergence_tol:
            verdict = Verdict("converged", r_inf=float(np.mean(rho)))
            break
        if t >= spec.t_end:
            verdict = Verdict("reached_t_end")
            break
        if spec.max_steps is not None and steps >= spec.max_steps:
            verdict = Verdict("reached_t_end", reason="max_steps")
            break
        dt = min(spec.cfl_factor * bound, spec.max_dt, spec.t_end - t)
        reason = None
        for _ in range(MAX_HALVINGS + 1):
            st = kernel.rk4_step(rho, dt, new)
            if st == 0 and _admissible(new):
                st, nb = kernel.speed(new, buf)
                if st == 0:
                    break
            reason = _STATUS.get(st, "rho left the admissible range")
            rejections += 1
            dt *= 0.5
        else:
            log.warning("flow aborted at t=%g: %s", t, reason)
            verdict = Verdict("aborted", reason=f"{reason} at t={t:.6g} after {MAX_HALVINGS} halvings")
            break
        rho, new = new, rho
        bound = nb
        t += dt
        steps += 1
        if steps % spec.sample_every == 0:
            record(t, rho, buf)
            last_recorded = steps
    if last_recorded != steps:
        kernel.speed(rho, buf)
        record(t, rho, buf)
    final = profile0.with_rho(rho.copy(), validate=False)
    return RunResult(series, final, verdict, steps=steps, t=t, rejections=rejections)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    r_squared: float
    samples: int
    conclusive: bool

    def exponential(self, r2_min=0.99):
        """Negative rate with a good log-linear fit; False when inconclusive."""
        return self.conclusive and self.rate < 0 and self.r_squared > r2_min


def decay_rate(series: QuantitySeries, threshold=1e-4, floor=1e-26, min_samples=10):
    """Exponential fit of ``max |D gamma|^2`` over the tail of a run."""
    t = series.t
    g = series.column("maxAbsDgamma2")
    below = np.nonzero(g >= threshold)[0]
    start = below[-1] + 1 if below.size else 0
    t, g = t[start:], g[start:]
    keep = g > floor
    t, g = t[keep], g[keep]
    if t.size < min_samples:
        return DecayFit(float("nan"), float("nan"), int(t.size), False)
    fit = stats.linregress(t, np.log(g))
    return DecayFit(float(fit.slope), float(fit.rvalue**2), int(t.size), True)
