"""Command line entry point: ``curvflow {simulate,verify,props,refs}``.

Exit codes: 0 success, 1 a requested check failed, 2 configuration or input
parse error, 3 hypothesis error, 4 flow aborted (artifacts still written).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import ballrefs, flows, verify
from ._backend import active as active_backend
from .spheregeom import AxisymProfile, ProfileError, read_profile_csv, write_profile_csv
from .symfun import ConeError, CurvatureFunctionSpec

log = logging.getLogger("curvflow")

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_HYPOTHESIS, EXIT_ABORT = 0, 1, 2, 3, 4

RUN_CHECKS = ("inequalities", "heintze_karcher", "decay")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 2
    N: int = 200
    mode: str = "axisym"
    base: float = 0.8
    cosines: list = field(default_factory=list)
    seed: int = 0
    family: str = flows.CONTRACTING
    F: str = "mean"
    k: int = 1
    cfl_factor: float = 0.2
    max_dt: float = math.inf
    t_end: float = 1.0
    convergence_tol: float = 1e-9
    sample_every: int = 50
    max_steps: int | None = None
    required_cone: int | None = None
    suites: list = field(default_factory=list)

    def curvature(self):
        return CurvatureFunctionSpec(self.F, 1 if self.F == "mean" else self.k)

    def flow_spec(self):
        return flows.FlowSpec(
            self.family,
            self.curvature(),
            required_cone=self.required_cone,
            cfl_factor=self.cfl_factor,
            max_dt=self.max_dt,
            t_end=self.t_end,
            convergence_tol=self.convergence_tol,
            sample_every=self.sample_every,
            max_steps=self.max_steps,
        )

    def profile(self):
        return AxisymProfile.from_cosines(self.n, self.N, self.base, self.cosines, self.mode)

    def as_dict(self):
        d = asdict(self)
        d["cosines"] = [[m, a] for m, a in self.cosines]
        return _jsonable(d)


_KEYS = {
    "run": {"n": int, "N": int, "mode": str, "base": float, "cosines": str, "seed": int},
    "flow": {
        "family": str,
        "F": str,
        "k": int,
        "cfl_factor": float,
        "max_dt": float,
        "t_end": float,
        "convergence_tol": float,
        "sample_every": int,
        "max_steps": int,
        "required_cone": int,
    },
    "checks": {"suites": str},
}


def _parse_cosines(text):
    out = []
    for item in filter(None, (s.strip() for s in text.replace(";", ",").split(","))):
        try:
            m, a = item.split(":")
            m, a = int(m), float(a)
        except ValueError as exc:
            raise ConfigError(f"cosine term {item!r} is not 'frequency:amplitude'") from exc
        if m < 0 or m % 2:
            raise ConfigError(
                f"cosine frequency {m} must be an even nonnegative integer "
                "(profiles must be even across both poles)"
            )
        out.append((m, a))
    return out


def parse_config(path) -> RunConfig:
    """Read an INI-style ``[run]/[flow]/[checks]`` file."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = RunConfig()
    for section in cp.sections():
        if section not in _KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            conv = _KEYS[section][key]
            try:
                val = conv(raw.strip())
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
            if key == "cosines":
                val = _parse_cosines(val)
            elif key == "suites":
                val = [s.strip() for s in val.split(",") if s.strip()]
            setattr(cfg, key, val)
    known = set(verify.SUITES) | set(RUN_CHECKS)
    bad = [s for s in cfg.suites if s not in known]
    if bad:
        raise ConfigError(f"unknown checks {bad}; known: {sorted(known)}")
    try:
        cfg.flow_spec().check(cfg.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _f17(x):
    x = float(x)
    return "" if math.isnan(x) else format(x, ".17g")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


# --------------------------------------------------------------------------
# simulate


def simulate(cfg: RunConfig, out: Path, backend=None):
    """Run one configuration into ``out``; returns the exit code."""
    out.mkdir(parents=True, exist_ok=True)
    summary = {"config": cfg.as_dict(), "backend": active_backend() if backend is None else backend}
    try:
        profile0 = cfg.profile()
    except ProfileError as exc:
        summary["error"] = f"initial profile: {exc}"
        write_json(out / "summary.json", summary)
        return EXIT_PARSE
    spec = cfg.flow_spec()
    hk = []
    want_hk = "heintze_karcher" in cfg.suites

    def on_sample(t, prof, fields):
        if want_hk:
            try:
                hk.append(verify.check_heintze_karcher(prof, fields))
            except verify.HypothesisError as exc:
                hk.append(exc)

    records = []
    if "inequalities" in cfg.suites:
        records += [r.as_record("inequalities_initial") for r in verify.check_inequalities(profile0)]
    try:
        result = flows.run(profile0, spec, on_sample=on_sample, backend=backend)
    except (ConeError, flows.HemisphereError) as exc:
        summary["error"] = f"hypothesis: {exc}"
        write_json(out / "summary.json", summary)
        return EXIT_HYPOTHESIS
    result.series.to_csv(out / "series.csv")
    write_profile_csv(out / "final_profile.csv", result.profile)
    summary.update(verdict=result.verdict.as_dict(), steps=result.steps, t=result.t,
                   rejections=result.rejections)
    fit = flows.decay_rate(result.series)
    summary["decay"] = {"rate": fit.rate, "rSquared": fit.r_squared, "samples": fit.samples,
                        "conclusive": fit.conclusive}
    code = EXIT_OK
    try:
        for suite in cfg.suites:
            if suite in verify.SUITES:
                records += verify.check_monotone(result.series, suite, spec)
    except verify.ConfigurationError as exc:
        summary["error"] = f"hypothesis: {exc}"
        code = EXIT_HYPOTHESIS
    if want_hk:
        bad = [h for h in hk if isinstance(h, Exception)]
        if bad:
            summary["error"] = f"hypothesis: {bad[0]}"
            code = EXIT_HYPOTHESIS
        else:
            worst = max(max(0.0, -res / scale) for res, scale in hk)
            records.append(verify.CheckRecord("heintze_karcher", "int phi'/p1 - int u >= 0 along run",
                                              worst <= 1e-9, worst, 1e-9, "mean-convex comparison"))
    if "decay" in cfg.suites:
        # an inconclusive fit (too little decay to measure) is reported, not failed
        ok = fit.exponential() or not fit.conclusive
        records.append(verify.CheckRecord("decay", "max|Dgamma|^2 exponential decay (rate < 0, r^2 > 0.99)",
                                          ok, 0.0 if ok else 1.0, 0.0, "exponential convergence",
                                          {"rate": fit.rate, "rSquared": fit.r_squared,
                                           "conclusive": fit.conclusive}))
    if "inequalities" in cfg.suites:
        records += [r.as_record("inequalities_final") for r in verify.check_inequalities(result.profile)]
    summary["checks"] = [r.as_dict() for r in records]
    summary["allPassed"] = all(r.passed for r in records)
    write_json(out / "summary.json", summary)
    if result.verdict.kind == "aborted":
        return EXIT_ABORT
    if code != EXIT_OK:
        return code
    return EXIT_OK if summary["allPassed"] else EXIT_CHECK


def _simulate_path(args):
    path, out, backend = args
    try:
        cfg = parse_config(path)
    except ConfigError as exc:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_json(Path(out) / "summary.json", {"config_path": str(path), "error": f"parse: {exc}"})
        log.error("%s", exc)
        return EXIT_PARSE
    return simulate(cfg, Path(out), backend)


def cmd_simulate(args):
    src = Path(args.config)
    out = Path(args.out)
    if src.is_dir():
        configs = sorted(src.glob("*.ini"))
        if not configs:
            log.error("no *.ini configs in %s", src)
            return EXIT_PARSE
        jobs = [(p, out / p.stem, args.backend) for p in configs]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                codes = list(ex.map(_simulate_path, jobs))
        else:
            codes = [_simulate_path(j) for j in jobs]
        for (p, _, _), c in zip(jobs, codes):
            log.info("%s: exit %d", p.name, c)
        return max(codes)
    return _simulate_path((src, out, args.backend))


# --------------------------------------------------------------------------
# verify / props / refs


def cmd_verify(args):
    out = Path(args.out)
    try:
        profile = read_profile_csv(args.profile, args.n, validate=False)
    except (OSError, ValueError, KeyError) as exc:
        log.error("cannot read profile: %s", exc)
        return EXIT_PARSE
    try:
        profile.validate()
    except ProfileError as exc:
        log.error("profile is not an admissible star-shaped radial graph: %s", exc)
        return EXIT_HYPOTHESIS
    out.mkdir(parents=True, exist_ok=True)
    reports = verify.check_inequalities(profile, tol=args.tol)
    _write_rows(out / "inequalities.csv", verify.InequalityReport.CSV_HEADER, [r.csv_row() for r in reports])
    summary = {"profile": str(args.profile), "n": args.n, "N": profile.N, "mode": profile.mode,
               "tolerance": args.tol}
    records = [r.as_record() for r in reports]
    try:
        res, scale = verify.check_heintze_karcher(profile)
        worst = max(0.0, -res / scale)
        records.append(verify.CheckRecord("heintze_karcher", "int phi'/p1 - int u >= 0", worst <= args.tol,
                                          worst, args.tol, "mean-convex comparison",
                                          {"residual": res, "scale": scale}))
    except verify.HypothesisError as exc:
        summary["heintze_karcher"] = f"skipped: {exc}"
    try:
        rows = verify.explore_conjectures(profile)
        summary["conjectures"] = verify.CONJECTURE_PROVENANCE
    except verify.HypothesisError as exc:
        rows = []
        summary["conjectures"] = f"skipped: {exc}"
    _write_rows(out / "conjectures.csv", verify.CONJECTURE_HEADER,
                [[r["k"], r["l"], r["via"], _f17(r["lhs"]), _f17(r["rhs"]), _f17(r["gap"]),
                  _f17(r["relgap"]), r["status"], r["provenance"]] for r in rows])
    summary["checks"] = [r.as_dict() for r in records]
    summary["allPassed"] = all(r.passed for r in records)
    write_json(out / "summary.json", summary)
    return EXIT_OK if summary["allPassed"] else EXIT_CHECK


def cmd_props(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = verify.property_suites(args.seed, samples=args.samples)
    payload = {"seed": args.seed, "samples": args.samples, "records": [r.as_dict() for r in records],
               "allPassed": all(r.passed for r in records)}
    write_json(out / "props.json", payload)
    for r in records:
        log.info("%s %-70s worst %.3e", "PASS" if r.passed else "FAIL", r.check, r.worst_violation)
    return EXIT_OK if payload["allPassed"] else EXIT_CHECK


def _parse_radii(text):
    try:
        radii = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad radius list {text!r}") from exc
    if not radii:
        raise ConfigError("empty radius list")
    return radii


def cmd_refs(args):
    try:
        radii = _parse_radii(args.r)
        header, rows = ballrefs.table(args.n, radii)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_rows(out / "refs.csv", header, [[_f17(x) for x in row] for row in rows])
    for j, name in enumerate(header[1:], start=1):
        _write_rows(out / f"{name}.csv", ["r", name], [[_f17(row[0]), _f17(row[j])] for row in rows])
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="curvflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a flow from an INI config (or a directory of configs)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1, help="workers for a directory of configs")
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="inequality, Heintze-Karcher and conjecture tables for a profile CSV")
    p.add_argument("--profile", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("props", help="randomized symmetric-function sweeps")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=None, help="override per-suite sample counts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_props)

    p = sub.add_parser("refs", help="geodesic-ball reference tables")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", required=True, help="comma separated radii in [0, pi/2]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_refs)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
