"""Closed-form integrals of geodesic balls ``B_r`` in S^{n+1} and their inverses.

For a geodesic sphere of radius r: u = sin r, phi' = cos r, Phi = 1 - cos r,
every principal curvature equals cot r and the area is ``omega_n sin^n r``.
The references are

* ``f_k(r) = W_k(B_r) = (n+1-k)/(n+1) omega_n int_0^r sin^{n-k} cos^k``,
  0 <= k <= n, and ``f_{n+1} = omega_n / (n+1)``;
* ``h_k(r) = int phi' p_k = omega_n sin^{n-k} r cos^{k+1} r`` (0 <= k <= n),
  ``h_{-1}(r) = int u = omega_n sin^{n+1} r``;
* ``xi_k(r) = int Phi p_k = omega_n (1 - cos r) sin^{n-k} r cos^k r``;
* ``xi_kf`` is the combination ``xi_k + k f_{k-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import atan, cos, pi, sin, sqrt

import numpy as np
from scipy import integrate, optimize

from .spheregeom import sphere_area

__all__ = ["BallReference", "DomainError", "RangeError", "R_MAX", "eval_ref", "invert", "table"]

R_MAX = 0.5 * pi
KINDS = ("f", "h", "xi", "xi_kf")


class DomainError(ValueError):
    pass


class RangeError(ValueError):
    def __init__(self, message, attained=None):
        super().__init__(message)
        self.attained = attained


@dataclass(frozen=True)
class BallReference:
    n: int
    kind: str
    k: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown reference kind {self.kind!r}")
        lo = -1 if self.kind == "h" else 0
        hi = self.n + 1 if self.kind == "f" else self.n
        if not lo <= self.k <= hi:
            raise ValueError(f"{self.kind}_{self.k} undefined for n = {self.n}")

    @property
    def name(self):
        return f"{self.kind}_{self.k}"

    def __call__(self, r):
        return eval_ref(self, r)

    def monotone_domain(self):
        """Interval of r on which the reference is strictly increasing, or None."""
        if self.kind == "f":
            return None if self.k == self.n + 1 else (0.0, R_MAX)
        if self.kind == "h":
            if self.k == -1:
                return (0.0, R_MAX)
            if self.k == self.n:
                return None
            return (0.0, atan(sqrt((self.n - self.k) / (self.k + 1))))
        return None


def _sin_cos_integral(a, b, r):
    val, _ = integrate.quad(
        lambda s: sin(s) ** a * cos(s) ** b, 0.0, r, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return val


def eval_ref(ref: BallReference, r):
    r = float(r)
    if not 0.0 <= r <= R_MAX:
        raise DomainError(f"{ref.name}: r = {r!r} outside [0, pi/2]")
    n, k = ref.n, ref.k
    wn = sphere_area(n)
    if ref.kind == "f":
        if k == n + 1:
            return wn / (n + 1)
        return (n + 1 - k) / (n + 1) * wn * _sin_cos_integral(n - k, k, r)
    if ref.kind == "h":
        if k == -1:
            return wn * sin(r) ** (n + 1)
        return wn * sin(r) ** (n - k) * cos(r) ** (k + 1)
    xi = wn * (1.0 - cos(r)) * sin(r) ** (n - k) * cos(r) ** k
    if ref.kind == "xi":
        return xi
    return xi + (k * eval_ref(BallReference(n, "f", k - 1), r) if k >= 1 else 0.0)


def invert(ref: BallReference, value):
    """Radius r with ``ref(r) = value`` on the reference's monotone branch."""
    dom = ref.monotone_domain()
    if dom is None:
        raise DomainError(f"{ref.name} is not invertible (no monotone branch)")
    lo, hi = dom
    vlo, vhi = eval_ref(ref, lo), eval_ref(ref, hi)
    value = float(value)
    if not vlo <= value <= vhi:
        raise RangeError(
            f"{ref.name}^-1: value {value:.17g} outside attained range [{vlo:.17g}, {vhi:.17g}]",
            (vlo, vhi),
        )
    if value == vlo:
        return lo
    if value == vhi:
        return hi
    return optimize.brentq(lambda r: eval_ref(ref, r) - value, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def all_references(n):
    refs = [BallReference(n, "f", k) for k in range(n + 2)]
    refs += [BallReference(n, "h", k) for k in range(-1, n + 1)]
    refs += [BallReference(n, "xi", k) for k in range(n + 1)]
    return refs


def table(n, radii):
    """Header and rows of every reference of dimension n on the given radii."""
    refs = all_references(n)
    header = ["r"] + [ref.name for ref in refs]
    rows = [[float(r)] + [eval_ref(ref, r) for ref in refs] for r in radii]
    return header, rows
