"""Numpy fallback for the compiled flow kernel.

Same interface and status codes as ``_ckernels.FlowKernel``; the speed is
the reference evaluation :func:`curvflow.flows.speed`.
"""
import numpy as np

from .spheregeom import AxisymProfile, geometry
from .symfun import ConeError, F_trace

OK = 0
CONE = 1
HEMISPHERE = 2
RANGE = 3


class FlowKernel:
    def __init__(self, N, n, periodic, family, fkind, k, cone, slack=0.0):
        from .flows import CONTRACTING, INVERSE, FlowSpec
        from .symfun import CurvatureFunctionSpec

        self.N, self.n = N, n
        self.periodic = bool(periodic)
        self.family, self.fkind, self.k, self.cone, self.slack = family, fkind, k, cone, slack
        kind = ("mean", "power_root", "quotient")[fkind]
        fspec = CurvatureFunctionSpec(kind, k)
        self._spec = FlowSpec(
            CONTRACTING if family == 0 else INVERSE, fspec, required_cone=cone, slack=slack
        )
        self.h = (2 * np.pi if periodic else np.pi) / N

    def _profile(self, rho):
        mode = "periodic" if self.periodic else "axisym"
        return AxisymProfile(self.n, np.array(rho, dtype=float), mode, validate=False)

    def _eval(self, rho):
        from .flows import HemisphereError, speed

        rho = np.asarray(rho)
        if not np.all((rho > 0.0) & (rho < np.pi)):
            return RANGE, None, None
        prof = self._profile(rho)
        fields = geometry(prof)
        try:
            with np.errstate(invalid="ignore", divide="ignore"):
                spd = speed(prof, fields, self._spec)
        except ConeError:
            return CONE, None, None
        except HemisphereError:
            return HEMISPHERE, None, None
        if not np.all(np.isfinite(spd)):
            return CONE, None, None
        return OK, spd, fields

    def speed(self, rho, out):
        status, spd, fields = self._eval(rho)
        if status != OK:
            return status, 0.0
        out[:] = spd
        F_spec = self._spec.F
        with np.errstate(invalid="ignore", divide="ignore"):
            trace = F_trace(F_spec, fields.p)
            D = fields.u * trace
            if self.family == 1:
                D = D / self._F(fields) ** 2
        ok = D > 0.0
        bound = np.min(fields.phi[ok] ** 2 * fields.omega[ok] ** 2 / D[ok]) if np.any(ok) else 1e300
        return status, float(bound) * self.h**2

    def _F(self, fields):
        from .symfun import F_value

        return F_value(self._spec.F, fields.kappa, check=False)

    def rk4_step(self, rho, dt, out):
        rho = np.asarray(rho, dtype=float)
        stages = []
        state = rho
        for c in (0.5, 0.5, 1.0, None):
            status, spd, _ = self._eval(state)
            if status != OK:
                return status
            stages.append(spd)
            if c is not None:
                state = rho + c * dt * spd
        k1, k2, k3, k4 = stages
        out[:] = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return OK
