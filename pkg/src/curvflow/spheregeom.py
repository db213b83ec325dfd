"""Radial graphs over S^n inside the round sphere S^{n+1}.

The warped metric is ``d rho^2 + sin^2(rho) dz^2``.  A hypersurface is the
graph of ``rho`` over S^n; for n >= 2 only rotationally symmetric graphs
``rho(theta)`` are represented (theta = polar angle on S^n), which keeps both
principal curvatures: the meridian one and the parallel one of multiplicity
n - 1.  For n = 1 a closed curve in S^2 may also be given on a periodic grid.

Grid conventions
----------------
``axisym``:   theta_j = (j + 1/2) pi / N on [0, pi], even reflection at both
              poles supplies the difference-stencil ghosts.
``periodic``: theta_j = 2 pi j / N, n = 1 only.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import gamma, pi

import numpy as np
from scipy import special

from .symfun import normalized_symmetric

__all__ = [
    "GeometryError",
    "ProfileError",
    "WarpedScalars",
    "AxisymProfile",
    "GeometryFields",
    "WeightedIntegrals",
    "sphere_area",
    "sin_power_integral",
    "angular_weights",
    "derivatives",
    "geometry",
    "integrate",
    "quermassintegrals",
    "weighted_integrals",
    "minkowski_residual",
    "support_gradient_residual",
    "gradient_norm_residual",
    "gauss_bonnet_diagnostic",
    "read_profile_csv",
    "write_profile_csv",
    "write_geometry_csv",
]

RHO_MIN = 1e-3
RHO_MAX = pi - 1e-3
PARITY_TOL = 1e-8
MIN_GRID = 16


class ProfileError(ValueError):
    pass


class GeometryError(ValueError):
    pass


def sphere_area(n):
    """Volume of the unit S^n."""
    return 2.0 * pi ** ((n + 1) / 2) / gamma((n + 1) / 2)


@dataclass(frozen=True)
class WarpedScalars:
    rho: float

    @property
    def phi(self):
        return np.sin(self.rho)

    @property
    def phi_prime(self):
        return np.cos(self.rho)

    @property
    def Phi(self):
        return 1.0 - np.cos(self.rho)


def sin_power_integral(n, rho):
    """``int_0^rho sin^n(s) ds`` through the regularized incomplete beta function."""
    rho = np.asarray(rho, dtype=float)
    a = 0.5 * (n + 1)
    full = special.beta(a, 0.5)
    half = 0.5 * full * special.betainc(a, 0.5, np.sin(rho) ** 2)
    return np.where(rho <= 0.5 * pi, half, full - half)


@lru_cache(maxsize=None)
def _fejer_weights(N):
    theta = (np.arange(N) + 0.5) * pi / N
    k = np.arange(1, N // 2 + 1)
    s = np.cos(2.0 * np.outer(theta, k)) / (4.0 * k**2 - 1.0)
    return (2.0 / N) * (1.0 - 2.0 * s.sum(axis=1))


@lru_cache(maxsize=None)
def _angular_weights(n, N, mode):
    if mode == "periodic":
        w = np.full(N, 2.0 * pi / N)
    else:
        theta = (np.arange(N) + 0.5) * pi / N
        if n % 2 == 1:
            # sin^{n-1} is even: the midpoint rule is spectral
            w = (pi / N) * np.sin(theta) ** (n - 1)
        else:
            # sin^{n-1} = sin * (even polynomial in cos): Fejer's first rule
            w = _fejer_weights(N) * np.sin(theta) ** (n - 2)
        w = sphere_area(n - 1) * w
    w.setflags(write=False)
    return w


def angular_weights(n, N, mode="axisym"):
    """Quadrature weights of ``dsigma`` on S^n for functions of theta alone."""
    return _angular_weights(int(n), int(N), mode)


class AxisymProfile:
    """Discretized radial graph ``rho(theta)`` over S^n."""

    def __init__(self, n, rho, mode="axisym", validate=True):
        if mode not in ("axisym", "periodic"):
            raise ProfileError(f"unknown grid mode {mode!r}")
        if n < 1:
            raise ProfileError("hypersurface dimension n must be >= 1")
        if mode == "periodic" and n != 1:
            raise ProfileError("periodic grids describe curves (n = 1) only")
        rho = np.array(rho, dtype=float).reshape(-1)
        self.n = int(n)
        self.mode = mode
        self.rho = rho
        self.rho.setflags(write=False)
        if validate:
            self.validate()

    @classmethod
    def from_function(cls, func, n, N, mode="axisym"):
        theta = grid_theta(N, mode)
        rho = np.asarray(func(theta), dtype=float) * np.ones(N)
        if mode == "axisym":
            dth = pi / N
            ghosts = np.array([-0.5, -1.5]) * dth
            for src, img in ((theta[:2], ghosts), (theta[-2:], 2 * pi - theta[-2:])):
                mismatch = np.max(np.abs(func(img) - func(src)))
                if mismatch > PARITY_TOL:
                    raise ProfileError(
                        f"profile is not even across the poles (ghost mismatch {mismatch:.3g})"
                    )
        return cls(n, rho, mode)

    @classmethod
    def from_cosines(cls, n, N, base, cosines=(), mode="axisym"):
        """``rho = base + sum a_m cos(m theta)``."""
        cosines = tuple((int(m), float(a)) for m, a in cosines)

        def func(theta):
            theta = np.asarray(theta, dtype=float)
            out = np.full(theta.shape, float(base))
            for m, a in cosines:
                out = out + a * np.cos(m * theta)
            return out

        return cls.from_function(func, n, N, mode)

    @classmethod
    def slice(cls, n, N, r, mode="axisym"):
        return cls(n, np.full(N, float(r)), mode)

    def validate(self):
        if self.N < MIN_GRID:
            raise ProfileError(f"grid too coarse: N = {self.N} < {MIN_GRID}")
        if not np.all(np.isfinite(self.rho)):
            raise ProfileError("profile has non-finite values")
        lo, hi = float(self.rho.min()), float(self.rho.max())
        if lo <= RHO_MIN or hi >= RHO_MAX:
            raise ProfileError(
                f"rho must stay in ({RHO_MIN:g}, pi - {RHO_MIN:g}); got [{lo:.6g}, {hi:.6g}]"
            )

    @property
    def N(self):
        return self.rho.size

    @property
    def theta(self):
        return grid_theta(self.N, self.mode)

    @property
    def dtheta(self):
        return (pi if self.mode == "axisym" else 2 * pi) / self.N

    def with_rho(self, rho, validate=True):
        return AxisymProfile(self.n, rho, self.mode, validate=validate)

    def oscillation(self):
        return float(self.rho.max() - self.rho.min())

    def __repr__(self):
        return f"AxisymProfile(n={self.n}, N={self.N}, mode={self.mode!r})"


def grid_theta(N, mode="axisym"):
    if mode == "axisym":
        return (np.arange(N) + 0.5) * pi / N
    return 2.0 * pi * np.arange(N) / N


def _pad(f, mode):
    if mode == "periodic":
        return np.concatenate([f[-2:], f, f[:2]])
    return np.concatenate([f[1::-1], f, f[:-3:-1]])


def _d1(f, h, mode):
    g = _pad(f, mode)
    # differences first so that constants give exactly zero
    return (8.0 * (g[3:-1] - g[1:-3]) - (g[4:] - g[:-4])) / (12.0 * h)


def _d2(f, h, mode):
    g = _pad(f, mode)
    c = g[2:-2]
    return (16.0 * ((g[3:-1] - c) + (g[1:-3] - c)) - ((g[4:] - c) + (g[:-4] - c))) / (12.0 * h * h)


def derivatives(profile: AxisymProfile):
    """Fourth-order central ``(rho_theta, rho_thetatheta)``."""
    if profile.N < MIN_GRID:
        raise ProfileError(f"grid too coarse: N = {profile.N} < {MIN_GRID}")
    h = profile.dtheta
    return _d1(profile.rho, h, profile.mode), _d2(profile.rho, h, profile.mode)


@dataclass(frozen=True)
class GeometryFields:
    n: int
    mode: str
    theta: np.ndarray
    rho: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray
    Phi: np.ndarray
    rho_theta: np.ndarray
    rho_thetatheta: np.ndarray
    gamma_theta: np.ndarray
    gamma_thetatheta: np.ndarray
    omega: np.ndarray
    u: np.ndarray
    kappa_m: np.ndarray
    kappa_p: np.ndarray
    area_weight: np.ndarray

    @cached_property
    def kappa(self):
        """Principal curvatures per point, shape ``(N, n)``."""
        cols = [self.kappa_m] + [self.kappa_p] * (self.n - 1)
        return np.stack(cols, axis=-1)

    @cached_property
    def p(self):
        """Normalized symmetric functions per point, shape ``(N, n + 1)``."""
        return normalized_symmetric(self.kappa)

    def p_k(self, k):
        if k < 0 or k > self.n:
            return np.zeros_like(self.u)
        return self.p[:, k]

    @property
    def area(self):
        return float(self.area_weight.sum())


def geometry(profile: AxisymProfile) -> GeometryFields:
    n, mode, h = profile.n, profile.mode, profile.dtheta
    rho = profile.rho
    theta = profile.theta
    rt, rtt = derivatives(profile)
    phi, dphi = np.sin(rho), np.cos(rho)
    gt = rt / phi
    gtt = rtt / phi - dphi * rt**2 / phi**2
    omega = np.sqrt(1.0 + gt**2)
    u = phi / omega
    if np.any(u <= 0.0) or np.any(phi <= 0.0):
        raise GeometryError("support function is not positive: profile is not star-shaped")
    kappa_m = (dphi - gtt / omega**2) / (phi * omega)
    if mode == "axisym" and n >= 2:
        sin_t = np.sin(theta)
        pole = sin_t < h
        cot_gt = np.where(pole, gtt, np.cos(theta) * gt / np.where(pole, 1.0, sin_t))
        kappa_p = (dphi - cot_gt) / (phi * omega)
    else:
        kappa_p = np.full_like(kappa_m, np.nan)
    weight = angular_weights(n, profile.N, mode) * phi**n * omega
    return GeometryFields(
        n=n,
        mode=mode,
        theta=theta,
        rho=rho,
        phi=phi,
        phi_prime=dphi,
        Phi=1.0 - dphi,
        rho_theta=rt,
        rho_thetatheta=rtt,
        gamma_theta=gt,
        gamma_thetatheta=gtt,
        omega=omega,
        u=u,
        kappa_m=kappa_m,
        kappa_p=kappa_p,
        area_weight=weight,
    )


def _fields(profile, fields):
    return geometry(profile) if fields is None else fields


def integrate(profile, fields, integrand):
    """``int_M f dmu`` for pointwise values ``f`` (array or callable of the fields)."""
    fields = _fields(profile, fields)
    f = integrand(fields) if callable(integrand) else np.asarray(integrand, dtype=float)
    return float(np.dot(f * np.ones_like(fields.area_weight), fields.area_weight))


def enclosed_volume(profile: AxisymProfile):
    n = profile.n
    w = angular_weights(n, profile.N, profile.mode)
    if profile.mode == "periodic":
        return float(np.dot(w, 1.0 - np.cos(profile.rho)))
    return float(np.dot(w, sin_power_integral(n, profile.rho)))


def quermassintegrals(profile, fields=None):
    """``W_0 .. W_{n+1}`` normalised by the variational formula.

    ``W_0`` = volume, ``W_1`` = area / (n + 1),
    ``W_{k+1} = (1/(n+1)) int p_k + k/(n+2-k) W_{k-1}``, ``W_{n+1} = omega_n/(n+1)``.
    """
    fields = _fields(profile, fields)
    n = profile.n
    W = np.empty(n + 2)
    W[0] = enclosed_volume(profile)
    W[1] = fields.area / (n + 1)
    for k in range(1, n):
        W[k + 1] = integrate(profile, fields, fields.p_k(k)) / (n + 1) + k / (n + 2 - k) * W[k - 1]
    W[n + 1] = sphere_area(n) / (n + 1)
    return W


def gauss_bonnet_diagnostic(profile, fields=None):
    """``(1/(n+1)) int p_n + (n/2) W_{n-1} - omega_n/(n+1)``; zero in the continuum."""
    fields = _fields(profile, fields)
    n = profile.n
    W = quermassintegrals(profile, fields)
    return integrate(profile, fields, fields.p_k(n)) / (n + 1) + 0.5 * n * W[n - 1] - W[n + 1]


@dataclass(frozen=True)
class WeightedIntegrals:
    """``int u``, ``int phi' p_k``, ``int Phi p_k`` and ``int u p_k`` (k = 0..n)."""

    u: float
    phi_prime_p: np.ndarray
    Phi_p: np.ndarray
    u_p: np.ndarray

    def wphi(self, k):
        """Weighted curvature integral ``W_k^{phi'}`` for ``k >= -1``."""
        return self.u if k == -1 else float(self.phi_prime_p[k])


def weighted_integrals(profile, fields=None) -> WeightedIntegrals:
    fields = _fields(profile, fields)
    w = fields.area_weight
    p = fields.p
    return WeightedIntegrals(
        u=float(np.dot(fields.u, w)),
        phi_prime_p=(fields.phi_prime * w) @ p,
        Phi_p=(fields.Phi * w) @ p,
        u_p=(fields.u * w) @ p,
    )


def minkowski_residual(profile, k, fields=None):
    """``int p_{k+1} u - int phi' p_k``."""
    fields = _fields(profile, fields)
    if not 0 <= k <= profile.n - 1:
        raise ValueError(f"Minkowski order k={k} outside 0..{profile.n - 1}")
    w = fields.area_weight
    return float(np.dot(fields.p_k(k + 1) * fields.u - fields.phi_prime * fields.p_k(k), w))


def support_gradient_residual(profile, fields=None):
    """``max |D_theta u - kappa_m D_theta Phi|`` (meridian component of grad u = h grad Phi)."""
    fields = _fields(profile, fields)
    h, mode = profile.dtheta, profile.mode
    du = _d1(fields.u, h, mode)
    dPhi = _d1(fields.Phi, h, mode)
    return float(np.max(np.abs(du - fields.kappa_m * dPhi)))


def gradient_norm_residual(profile, fields=None):
    """``max | |grad rho|^2 - (1 - 1/omega^2) |`` with |grad rho| from the induced metric."""
    fields = _fields(profile, fields)
    grad2 = fields.rho_theta**2 / (fields.phi**2 + fields.rho_theta**2)
    return float(np.max(np.abs(grad2 - (1.0 - 1.0 / fields.omega**2))))


def _fmt(x):
    return format(float(x), ".17g")


def write_profile_csv(path, profile: AxisymProfile):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["theta", "rho"])
        for t, r in zip(profile.theta, profile.rho):
            wr.writerow([_fmt(t), _fmt(r)])


def read_profile_csv(path, n, validate=True) -> AxisymProfile:
    """Read a ``theta, rho`` CSV; the grid mode is recognised from the theta column."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "theta" not in rows[0] or "rho" not in rows[0]:
        raise ProfileError(f"{path}: expected columns theta, rho")
    theta = np.array([float(r["theta"]) for r in rows])
    rho = np.array([float(r["rho"]) for r in rows])
    N = theta.size
    for mode in ("axisym", "periodic"):
        if np.allclose(theta, grid_theta(N, mode), rtol=0, atol=1e-12):
            return AxisymProfile(n, rho, mode, validate=validate)
    raise ProfileError(f"{path}: theta column matches neither grid convention")


def write_geometry_csv(path, profile, fields=None):
    fields = _fields(profile, fields)
    cols = ("theta", "rho", "u", "omega", "kappa_m", "kappa_p")
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["theta", "rho", "u", "omega", "kappaM", "kappaP"])
        for row in zip(*(getattr(fields, c) for c in cols)):
            wr.writerow([_fmt(x) for x in row])
