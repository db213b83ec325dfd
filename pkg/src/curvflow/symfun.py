"""Elementary symmetric functions of principal curvatures.

Everything here works on the eigenvalue level: a curvature vector is an
array whose last axis holds ``kappa_1, ..., kappa_n``.  Most functions accept
a single vector of shape ``(n,)`` or a batch of shape ``(M, n)`` and
broadcast over the leading axes.

Conventions
-----------
``sigma_k`` is the k-th elementary symmetric polynomial, ``p_k`` its
normalised version ``sigma_k / C(n, k)`` so that ``p_k(1, ..., 1) = 1``.
``p_{-1} = p_{n+1} = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

__all__ = [
    "ConeError",
    "CurvatureVector",
    "SymFunValues",
    "CurvatureFunctionSpec",
    "elementary_symmetric",
    "normalized_symmetric",
    "eval_sym",
    "sigma_excluding",
    "sigma_excluding_all",
    "cone_membership",
    "in_cone",
    "F_value_and_gradient",
    "F_value",
    "F_trace",
    "newton_maclaurin_margin",
    "maclaurin_chain_margin",
    "algebra_gap_pair",
    "divided_difference_identity",
    "trace_bounds_quotient",
]


class ConeError(ValueError):
    """Curvature vector outside the Garding cone a curvature function needs.

    ``order`` is the first index m with ``p_m <= slack``.
    """

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


@dataclass(frozen=True)
class CurvatureVector:
    kappa: np.ndarray
    _sym: "SymFunValues" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        kappa = np.array(self.kappa, dtype=float).reshape(-1)
        if kappa.size < 1:
            raise ValueError("curvature vector needs n >= 1 entries")
        if not np.all(np.isfinite(kappa)):
            raise ValueError("curvature vector has non-finite entries")
        kappa.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)

    @property
    def n(self) -> int:
        return self.kappa.size

    @property
    def sym(self) -> "SymFunValues":
        if self._sym is None:
            object.__setattr__(self, "_sym", eval_sym(self.kappa))
        return self._sym


@dataclass(frozen=True)
class SymFunValues:
    sigma: np.ndarray
    p: np.ndarray


_KINDS = ("mean", "power_root", "quotient")


@dataclass(frozen=True)
class CurvatureFunctionSpec:
    """Degree one curvature function normalised by ``F(1, ..., 1) = 1``.

    ``kind`` is ``"power_root"`` (``p_k^{1/k}``), ``"quotient"``
    (``p_k / p_{k-1}``) or ``"mean"`` (``p_1``).
    """

    kind: str
    k: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown curvature function kind {self.kind!r}")
        if self.kind == "mean" and self.k != 1:
            raise ValueError("mean curvature function has k = 1")
        if self.k < 1:
            raise ValueError("curvature function order k must be >= 1")

    @classmethod
    def mean(cls):
        return cls("mean", 1)

    @classmethod
    def power_root(cls, k):
        return cls("power_root", int(k))

    @classmethod
    def quotient(cls, k):
        return cls("quotient", int(k))

    @property
    def domain_order(self) -> int:
        """Cone index ``m`` such that F is defined and elliptic on Gamma_m."""
        return self.k

    def label(self) -> str:
        if self.kind == "mean":
            return "p1"
        if self.kind == "power_root":
            return f"p{self.k}^(1/{self.k})"
        return f"p{self.k}/p{self.k - 1}"

    def check(self, n):
        if self.k > n:
            raise ValueError(f"{self.label()} needs k <= n (n={n})")


def _binomials(n):
    return np.array([comb(n, k) for k in range(n + 1)], dtype=float)


def elementary_symmetric(kappa):
    """All ``sigma_0 .. sigma_n`` by adding one entry at a time.

    ``sigma_k^{(m)} = sigma_k^{(m-1)} + kappa_m sigma_{k-1}^{(m-1)}``; no
    factorials, no polynomial roots.
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    sig = np.zeros(kappa.shape[:-1] + (n + 1,))
    sig[..., 0] = 1.0
    for m in range(n):
        km = kappa[..., m, None]
        sig[..., 1 : m + 2] = sig[..., 1 : m + 2] + km * sig[..., 0 : m + 1]
    return sig


def normalized_symmetric(kappa):
    """``p_0 .. p_n`` for each curvature vector."""
    kappa = np.asarray(kappa, dtype=float)
    return elementary_symmetric(kappa) / _binomials(kappa.shape[-1])


def eval_sym(kappa) -> SymFunValues:
    sig = elementary_symmetric(kappa)
    return SymFunValues(sigma=sig, p=sig / _binomials(sig.shape[-1] - 1))


def sigma_excluding_all(kappa):
    """``sigma_k(kappa | i)`` for every i, shape ``(..., n, n)`` indexed [i, k].

    Column k runs over ``0 .. n-1``.  Each row is evaluated on the reduced
    vector directly rather than by deflation, which loses accuracy when
    ``kappa_i`` dominates.
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    out = np.empty(kappa.shape[:-1] + (n, n))
    for i in range(n):
        reduced = np.delete(kappa, i, axis=-1)
        out[..., i, :] = elementary_symmetric(reduced)
    return out


def sigma_excluding(kappa, k, i):
    """``sigma_k`` of kappa with entry ``i`` (1-based) removed."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if not 1 <= i <= n:
        raise IndexError(f"index i={i} outside 1..{n}")
    if not 0 <= k <= n - 1:
        raise IndexError(f"order k={k} outside 0..{n - 1}")
    return elementary_symmetric(np.delete(kappa, i - 1, axis=-1))[..., k]


def in_cone(p, k, slack=0.0):
    """Vectorised membership test on precomputed ``p`` arrays."""
    p = np.asarray(p)
    if k <= 0:
        return np.ones(p.shape[:-1], dtype=bool)
    return np.all(p[..., 1 : k + 1] > slack, axis=-1)


def cone_membership(kappa, k, slack=0.0):
    """True iff ``p_m(kappa) > slack`` for every ``1 <= m <= k``."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"cone index k={k} outside 1..{n}")
    res = in_cone(normalized_symmetric(kappa), k, slack)
    return bool(res) if res.ndim == 0 else res


def _first_failure(p, k, slack):
    bad = p[..., 1 : k + 1] <= slack
    if not np.any(bad):
        return None
    return int(np.argmax(np.any(bad.reshape(-1, k), axis=0))) + 1


def _require_cone(p, k, slack=0.0, what="curvature function"):
    if k < 1:
        return
    m = _first_failure(p, k, slack)
    if m is not None:
        worst = float(np.min(p[..., m]))
        raise ConeError(f"{what} needs Gamma_{k}: p_{m} = {worst:.6g} <= {slack:g}", m)


def F_value(spec: CurvatureFunctionSpec, kappa, check=True):
    """Vectorised F without the gradient."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    spec.check(n)
    p = normalized_symmetric(kappa)
    k = spec.k
    if check and spec.kind != "mean":
        _require_cone(p, k, what=spec.label())
    if spec.kind == "mean":
        return p[..., 1]
    if spec.kind == "power_root":
        return p[..., k] ** (1.0 / k)
    return p[..., k] / p[..., k - 1]


def F_value_and_gradient(spec: CurvatureFunctionSpec, kappa, check=True):
    """F and ``dF/dkappa_i`` from ``d sigma_k / d kappa_i = sigma_{k-1}(kappa|i)``.

    Works on single vectors and batches.  The mean needs no cone; the other
    kinds raise :class:`ConeError` outside Gamma_k.
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    spec.check(n)
    k = spec.k
    binom = _binomials(n)
    p = elementary_symmetric(kappa) / binom
    if check and spec.kind != "mean":
        _require_cone(p, k, what=spec.label())

    excl = sigma_excluding_all(kappa)

    def dp(m):
        # d p_m / d kappa_i, shape (..., n)
        if m <= 0:
            return np.zeros(kappa.shape)
        return excl[..., :, m - 1] / binom[m]

    if spec.kind == "mean":
        F = p[..., 1]
        grad = np.broadcast_to(np.full(n, 1.0 / n), kappa.shape).copy()
    elif spec.kind == "power_root":
        F = p[..., k] ** (1.0 / k)
        grad = (F / (k * p[..., k]))[..., None] * dp(k)
    else:
        num, den = p[..., k], p[..., k - 1]
        F = num / den
        grad = (dp(k) * den[..., None] - num[..., None] * dp(k - 1)) / (den**2)[..., None]
    return F, grad


def F_trace(spec: CurvatureFunctionSpec, p):
    """``sum_i dF/dkappa_i`` from normalized values, via ``sum_i d p_m = m p_{m-1}``."""
    p = np.asarray(p)
    k = spec.k
    if spec.kind == "mean":
        return np.ones(p.shape[:-1])
    if spec.kind == "power_root":
        return p[..., k] ** (1.0 / k - 1.0) * p[..., k - 1]
    pkm2 = p[..., k - 2] if k >= 2 else 0.0
    return (k * p[..., k - 1] ** 2 - (k - 1) * p[..., k] * pkm2) / p[..., k - 1] ** 2


def newton_maclaurin_margin(kappa, k, m):
    """``p_k p_{m-1} - p_m p_{k-1}``, nonnegative on Gamma_m for ``k < m``."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if not 1 <= k < m <= n:
        raise ValueError(f"need 1 <= k < m <= n, got k={k}, m={m}, n={n}")
    p = normalized_symmetric(kappa)
    _require_cone(p, m, what="Newton-MacLaurin inequality")
    return p[..., k] * p[..., m - 1] - p[..., m] * p[..., k - 1]


def maclaurin_chain_margin(kappa, k, m):
    """``p_k^{1/k} - p_m^{1/m}`` for ``1 <= k < m``, nonnegative on Gamma_m."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if not 1 <= k < m <= n:
        raise ValueError(f"need 1 <= k < m <= n, got k={k}, m={m}, n={n}")
    p = normalized_symmetric(kappa)
    _require_cone(p, m, what="MacLaurin chain")
    return p[..., k] ** (1.0 / k) - p[..., m] ** (1.0 / m)


def _p_padded(p, idx):
    # p_{n+1} = 0 convention
    n = p.shape[-1] - 1
    return p[..., idx] if idx <= n else np.zeros(p.shape[:-1])


def algebra_gap_pair(kappa):
    """Closed forms of ``F^{ij}(h^2)_{ij}/F^2 - 1`` and ``sum F^{ii} - 1`` for ``F = sqrt(p_2)``.

    The first dominates ``n/2`` times the second on Gamma_2.
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if n < 2:
        raise ValueError("needs n >= 2")
    p = normalized_symmetric(kappa)
    _require_cone(p, 2, what="sqrt(p2)")
    p1, p2, p3 = p[..., 1], p[..., 2], _p_padded(p, 3)
    p2_32 = p2**1.5
    lhs = (n * p1 * p2 - (n - 2) * p3 - 2.0 * p2_32) / (2.0 * p2_32)
    rhs = p1 / np.sqrt(p2) - 1.0
    return lhs, rhs


def divided_difference_identity(kappa):
    """Both sides of ``(n-2) s1 s2 - 3n s3 = sum_{i<j} (k_j - k_i)^2 s1(kappa|ij)``."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if n < 2:
        raise ValueError("needs n >= 2")
    sig = elementary_symmetric(kappa)
    s3 = sig[..., 3] if n >= 3 else 0.0
    lhs = (n - 2) * sig[..., 1] * sig[..., 2] - 3 * n * s3
    rhs = np.zeros(kappa.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            rest = np.delete(kappa, [i, j], axis=-1).sum(axis=-1)
            rhs = rhs + (kappa[..., j] - kappa[..., i]) ** 2 * rest
    return lhs, rhs


def trace_bounds_quotient(k, kappa):
    """``(sum_i F^i, sum_i F^i kappa_i^2)`` for ``F = p_k / p_{k-1}``."""
    spec = CurvatureFunctionSpec.quotient(k)
    kappa = np.asarray(kappa, dtype=float)
    _, grad = F_value_and_gradient(spec, kappa)
    return grad.sum(axis=-1), (grad * kappa**2).sum(axis=-1)
