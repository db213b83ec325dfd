"""Compiled kernel versus the numpy fallback.

Times one right-hand-side evaluation and one RK4 step per backend, checks
that both agree, and times a short contracting run end to end.

    python3 benchmarks/bench_kernels.py [--repeat 200]
"""
import argparse
import time

import numpy as np

from curvflow import _backend, flows
from curvflow.spheregeom import AxisymProfile
from curvflow.symfun import CurvatureFunctionSpec

CASES = [
    ("contracting p1", flows.CONTRACTING, CurvatureFunctionSpec.mean()),
    ("contracting sqrt(p2)", flows.CONTRACTING, CurvatureFunctionSpec.power_root(2)),
    ("inverse p2/p1", flows.INVERSE, CurvatureFunctionSpec.quotient(2)),
]


def per_call(fn, repeat):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    names = _backend.available()
    print(f"backends available: {', '.join(names)}")
    if "compiled" not in names:
        print("compiled extension not built; only the fallback can be timed")
    header = f"{'case':22s} {'n':>2s} {'N':>4s} " + " ".join(f"{b + ' rk4 [us]':>18s}" for b in names)
    print(header + f" {'speedup':>8s} {'max|diff|':>10s}")
    for label, family, F in CASES:
        spec = flows.FlowSpec(family, F)
        for n in (2, 4):
            for N in (100, 200, 400):
                prof = AxisymProfile.from_cosines(n, N, 0.8, [(2, 0.05)])
                dt = 0.2 * flows.cfl_dt(prof, spec)
                times, outs = {}, {}
                for b in names:
                    ker = flows.make_kernel(prof, spec, b)
                    out = np.empty(N)
                    rho = np.ascontiguousarray(prof.rho)
                    times[b] = per_call(lambda: ker.rk4_step(rho, dt, out), args.repeat)
                    outs[b] = out.copy()
                cols = " ".join(f"{times[b] * 1e6:18.1f}" for b in names)
                if len(names) == 2:
                    speedup = times["python"] / times["compiled"]
                    diff = float(np.max(np.abs(outs["python"] - outs["compiled"])))
                    print(f"{label:22s} {n:2d} {N:4d} {cols} {speedup:8.1f} {diff:10.2e}")
                else:
                    print(f"{label:22s} {n:2d} {N:4d} {cols}")

    print("\nend-to-end: contracting p1, n=2, N=100, t_end=0.5")
    prof = AxisymProfile.from_cosines(2, 100, 0.8, [(2, 0.05)])
    spec = flows.FlowSpec(flows.CONTRACTING, CurvatureFunctionSpec.mean(), t_end=0.5, sample_every=100)
    for b in names:
        t0 = time.perf_counter()
        res = flows.run(prof, spec, backend=b)
        print(f"  {b:9s} {time.perf_counter() - t0:7.2f} s  ({res.steps} steps)")


if __name__ == "__main__":
    main()
