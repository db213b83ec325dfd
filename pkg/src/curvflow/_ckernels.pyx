# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled right-hand side and RK4 step for radial-graph flows.

Mirrors ``curvflow._pykernels.FlowKernel`` point for point: same stencils,
same pole handling, same status codes.
"""
cimport cython
from libc.math cimport sin, cos, sqrt, pow, M_PI

import numpy as np

cdef enum:
    MAXN = 64

# status codes, kept in sync with curvflow._pykernels
cdef enum:
    S_OK = 0
    S_CONE = 1
    S_HEMISPHERE = 2
    S_RANGE = 3

OK = S_OK
CONE = S_CONE
HEMISPHERE = S_HEMISPHERE
RANGE = S_RANGE

# family: 0 contracting (phi' - uF), 1 inverse (1/F - u/phi')
# fkind: 0 mean, 1 power root, 2 quotient


@cython.final
cdef class FlowKernel:
    cdef readonly int N, n, family, fkind, k, cone
    cdef readonly bint periodic
    cdef readonly double slack, h
    cdef double[::1] sin_t, cos_t, binom
    cdef unsigned char[::1] pole
    cdef double[::1] k1, k2, k3, k4, tmp

    def __init__(self, int N, int n, bint periodic, int family, int fkind, int k,
                 int cone, double slack=0.0):
        if n < 1 or n >= MAXN:
            raise ValueError("n out of range for compiled kernel")
        self.N = N
        self.n = n
        self.periodic = periodic
        self.family = family
        self.fkind = fkind
        self.k = k
        self.cone = cone
        self.slack = slack
        if periodic:
            self.h = 2.0 * M_PI / N
            theta = 2.0 * M_PI * np.arange(N) / N
        else:
            self.h = M_PI / N
            theta = (np.arange(N) + 0.5) * M_PI / N
        self.sin_t = np.ascontiguousarray(np.sin(theta))
        self.cos_t = np.ascontiguousarray(np.cos(theta))
        self.pole = np.ascontiguousarray((np.sin(theta) < self.h).astype(np.uint8))
        b = np.ones(n + 1)
        for j in range(1, n + 1):
            b[j] = b[j - 1] * (n - j + 1) / j
        self.binom = b
        self.k1 = np.empty(N)
        self.k2 = np.empty(N)
        self.k3 = np.empty(N)
        self.k4 = np.empty(N)
        self.tmp = np.empty(N)

    cdef inline int _idx(self, int j) noexcept nogil:
        cdef int N = self.N
        if self.periodic:
            if j < 0:
                return j + N
            if j >= N:
                return j - N
            return j
        if j < 0:
            return -j - 1
        if j >= N:
            return 2 * N - j - 1
        return j

    cdef int _pointwise(self, double km, double kp, double* F, double* trace) noexcept nogil:
        cdef double sig[MAXN + 1]
        cdef double p[MAXN + 1]
        cdef int n = self.n, m, j, k = self.k
        cdef double kap, pk2
        for j in range(n + 1):
            sig[j] = 0.0
        sig[0] = 1.0
        for m in range(n):
            kap = km if m == 0 else kp
            for j in range(m + 1, 0, -1):
                sig[j] = sig[j] + kap * sig[j - 1]
        for j in range(n + 1):
            p[j] = sig[j] / self.binom[j]
        for j in range(1, self.cone + 1):
            if not p[j] > self.slack:
                return S_CONE
        if self.fkind == 0:
            F[0] = p[1]
            trace[0] = 1.0
        elif self.fkind == 1:
            if not p[k] > 0.0:
                return S_CONE
            F[0] = pow(p[k], 1.0 / k)
            trace[0] = pow(p[k], 1.0 / k - 1.0) * p[k - 1]
        else:
            if not p[k - 1] > 0.0:
                return S_CONE
            F[0] = p[k] / p[k - 1]
            pk2 = p[k - 2] if k >= 2 else 0.0
            trace[0] = (k * p[k - 1] * p[k - 1] - (k - 1) * p[k] * pk2) / (p[k - 1] * p[k - 1])
        return S_OK

    cdef int _speed(self, const double[::1] rho, double[::1] out, double* dtbound) noexcept nogil:
        cdef int N = self.N, j, status
        cdef double h = self.h
        cdef double r, rm2, rm1, rp1, rp2, rt, rtt, phi, dphi, gt, gtt, om, u
        cdef double km, kp, cgt, F, tr, D, bound
        cdef double best = 1e300
        for j in range(N):
            r = rho[j]
            if not (r > 0.0 and r < M_PI):
                return S_RANGE
            rm2 = rho[self._idx(j - 2)]
            rm1 = rho[self._idx(j - 1)]
            rp1 = rho[self._idx(j + 1)]
            rp2 = rho[self._idx(j + 2)]
            rt = (8.0 * (rp1 - rm1) - (rp2 - rm2)) / (12.0 * h)
            rtt = (16.0 * ((rp1 - r) + (rm1 - r)) - ((rp2 - r) + (rm2 - r))) / (12.0 * h * h)
            phi = sin(r)
            dphi = cos(r)
            gt = rt / phi
            gtt = rtt / phi - dphi * rt * rt / (phi * phi)
            om = sqrt(1.0 + gt * gt)
            u = phi / om
            km = (dphi - gtt / (om * om)) / (phi * om)
            if self.n >= 2 and not self.periodic:
                if self.pole[j]:
                    cgt = gtt
                else:
                    cgt = self.cos_t[j] * gt / self.sin_t[j]
                kp = (dphi - cgt) / (phi * om)
            else:
                kp = km
            status = self._pointwise(km, kp, &F, &tr)
            if status != S_OK:
                return status
            if self.family == 0:
                out[j] = (dphi - u * F) * om
                D = u * tr
            else:
                if not dphi > 0.0:
                    return S_HEMISPHERE
                out[j] = (1.0 / F - u / dphi) * om
                D = tr / (F * F) * u
            if D > 0.0:
                bound = phi * phi * om * om / D
                if bound < best:
                    best = bound
        dtbound[0] = best
        return S_OK

    def speed(self, const double[::1] rho, double[::1] out):
        """Fill ``out`` with d rho/dt; return ``(status, min phi^2 omega^2 / D)``."""
        cdef double bound = 0.0
        cdef int status
        with nogil:
            status = self._speed(rho, out, &bound)
        return status, bound * self.h * self.h

    cdef int _rk4(self, const double[::1] rho, double dt, double[::1] out) noexcept nogil:
        cdef int N = self.N, j, status
        cdef double bound
        status = self._speed(rho, self.k1, &bound)
        if status != S_OK:
            return status
        for j in range(N):
            self.tmp[j] = rho[j] + 0.5 * dt * self.k1[j]
        status = self._speed(self.tmp, self.k2, &bound)
        if status != S_OK:
            return status
        for j in range(N):
            self.tmp[j] = rho[j] + 0.5 * dt * self.k2[j]
        status = self._speed(self.tmp, self.k3, &bound)
        if status != S_OK:
            return status
        for j in range(N):
            self.tmp[j] = rho[j] + dt * self.k3[j]
        status = self._speed(self.tmp, self.k4, &bound)
        if status != S_OK:
            return status
        for j in range(N):
            out[j] = rho[j] + dt / 6.0 * (self.k1[j] + 2.0 * self.k2[j] + 2.0 * self.k3[j] + self.k4[j])
        return S_OK

    def rk4_step(self, const double[::1] rho, double dt, double[::1] out):
        """Classical RK4 step ``rho -> out``; returns a status code."""
        cdef int status
        with nogil:
            status = self._rk4(rho, dt, out)
        return status
