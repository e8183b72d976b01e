"""Command-line runner: ``solitonflow run | critical-points | check | compare``.

Exit codes: 0 success, 1 usage or configuration error, 2 early termination
(or a failed check suite).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from .analyze import (asymptotic_report, critical_points, matching_xy_run,
                      monotonicity_monitors, oracle_compare, ricci_flat_convergence,
                      stationary_residual)
from .checks import SUITES, run_suite
from .integrate import IntegratorConfig, Trajectory, integrate
from .model import (DomainError, SolitonParams, SpecError, TwoSummandsSpec, WarpedProductSpec,
                    XYState, lyapunov_L)
from .seed import SeedConfig, two_summands_seed, soliton_seed, xy_seed
from .systems import project_ricci_flat, two_summands_z_field, warped_z_field, xy_field

EXIT_OK, EXIT_USAGE, EXIT_EARLY = 0, 1, 2

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["system", "params", "seed", "integrator"],
    "additionalProperties": False,
    "properties": {
        "system": {"enum": ["warped", "two-summands", "xy"]},
        "mode": {"enum": ["soliton", "ricci-flat"]},
        "spec": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
                "lambda": {"type": "array", "items": _num, "minItems": 2},
                "r": {"type": "integer", "minimum": 2},
                "d1": {"type": "integer", "minimum": 1},
                "d2": {"type": "integer", "minimum": 2},
                "A2": _pos,
                "A3": {"type": "number", "minimum": 0},
            },
        },
        "preset": {
            "type": "object",
            "required": ["name", "m"],
            "additionalProperties": False,
            "properties": {"name": {"enum": ["example2", "example3"]},
                           "m": {"type": "integer", "minimum": 1}},
        },
        "params": {
            "type": "object",
            "required": ["C"],
            "additionalProperties": False,
            "properties": {"C": _num, "epsilon": {"const": 0}},
        },
        "seed": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t0": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.01},
                "l": {"type": "array", "items": _pos, "minItems": 1},
                "h_bar": _pos,
                "u0": _num,
            },
        },
        "integrator": {
            "type": "object",
            "required": ["t_max"],
            "additionalProperties": False,
            "properties": {
                "h": _pos,
                "t_max": _pos,
                "decimate": {"type": "integer", "minimum": 1},
                "residual_abort": _pos,
                "project": {"type": "boolean"},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"csv": {"type": "string"}, "report": {"type": "string"}},
        },
    },
    "oneOf": [{"required": ["spec"], "not": {"required": ["preset"]}},
              {"required": ["preset"], "not": {"required": ["spec"]}}],
}


class ConfigError(ValueError):
    pass


def validate_config(cfg: dict):
    """Raise ConfigError listing every schema violation with its field path."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            path = ".".join(str(p) for p in e.absolute_path) or "<root>"
            msg = e.message
            if e.validator == "oneOf" and not e.absolute_path:
                msg = "exactly one of 'spec' or 'preset' is required"
            lines.append(f"{path}: {msg}")
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines))


def build_spec(cfg: dict):
    system = cfg["system"]
    if "preset" in cfg:
        if system != "two-summands":
            raise ConfigError("preset: presets describe two-summands systems")
        pre = cfg["preset"]
        return getattr(TwoSummandsSpec, pre["name"])(pre["m"])
    s = cfg["spec"]
    if system == "two-summands":
        missing = [k for k in ("d1", "d2", "A2", "A3") if k not in s]
        if missing:
            raise ConfigError(f"spec: two-summands needs {missing}")
        return TwoSummandsSpec(d1=s["d1"], d2=s["d2"], A2=s["A2"], A3=s["A3"])
    if "d" not in s or "lambda" not in s:
        raise ConfigError("spec: warped products need 'd' and 'lambda'")
    if "r" in s and s["r"] != len(s["d"]):
        raise ConfigError(f"spec.r: {s['r']} does not match len(d) = {len(s['d'])}")
    return WarpedProductSpec(d=tuple(s["d"]), lam=tuple(s["lambda"]))


def build_run(cfg: dict):
    """Validate a config and assemble ``(spec, params, field, seed, integrator config)``."""
    validate_config(cfg)
    mode = cfg.get("mode", "soliton")
    p = SolitonParams(C=cfg["params"]["C"], epsilon=cfg["params"].get("epsilon", 0.0))
    if mode == "soliton" and not p.C < 0:
        raise ConfigError(f"params.C: soliton mode requires C < 0, got C = {p.C}")
    if mode == "ricci-flat" and p.C != 0:
        raise ConfigError(f"params.C: ricci-flat mode requires C = 0, got C = {p.C}")
    spec = build_spec(cfg)
    sd = cfg["seed"]
    l = sd.get("l")
    if cfg["system"] == "two-summands":
        l = [sd["h_bar"]] if "h_bar" in sd else l
    if l is None:
        raise ConfigError("seed: initial radii 'l' (or 'h_bar') are required")
    seed_cfg = SeedConfig(l=tuple(l), t0=sd.get("t0"), u0=sd.get("u0", 0.0), mode=mode)
    ic = cfg["integrator"]
    project = bool(ic.get("project", False))
    if cfg["system"] == "two-summands":
        field = two_summands_z_field(spec, p)
        seed = two_summands_seed(spec, p, seed_cfg)
    elif cfg["system"] == "warped":
        field = warped_z_field(spec, p)
        seed = soliton_seed(spec, p, seed_cfg)
    else:
        field = xy_field(spec, project=project)
        seed = xy_seed(spec, p, seed_cfg)
        if project:
            seed = XYState.from_array(0.0, project_ricci_flat(seed, spec))
    default_abort = np.inf if cfg["system"] == "xy" else 1e-3
    icfg = IntegratorConfig(t_max=ic["t_max"], h=ic.get("h", 1e-3),
                            residual_abort=ic.get("residual_abort", default_abort),
                            decimate=ic.get("decimate", 1), project=project)
    return spec, p, field, seed, icfg


# ---------------------------------------------------------------------------
# output

def csv_columns(traj: Trajectory) -> tuple:
    r = traj.spec.r
    if traj.kind == "xy":
        names = (["s"] + [f"X_{i}" for i in range(1, r + 1)]
                 + [f"Y_{i}" for i in range(1, r + 1)] + ["Lcal", "H", "G"])
        cols = [traj.t, traj.states, traj.scalars["Lcal"], traj.scalars["H"],
                traj.scalars["G"]]
        return names, np.column_stack(cols)
    sd = np.sqrt(traj.spec.dims)
    sc = traj.scalars
    names = (["t"] + [f"g_{i}" for i in range(1, r + 1)]
             + [f"gdot_{i}" for i in range(1, r + 1)]
             + ["u", "udot", "xi", "trL", "Rbar", "Lcal", "H"]
             + [f"Xtilde_{i}" for i in range(1, r + 1)]
             + [f"Ytilde_{i}" for i in range(1, r + 1)] + ["res2"])
    cols = [traj.t, traj.states, sc["xi"], sc["trL"], sc["Rbar"], sc["Lcal"], sc["H"],
            sc["X"] / sd, sc["Y"] / sd, sc["res2"]]
    return names, np.column_stack(cols)


def write_csv(traj: Trajectory, path):
    names, data = csv_columns(traj)
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt="%.17g")


def build_report(traj: Trajectory, cfg: dict, runtime: float) -> dict:
    report = {"termination": traj.termination, "final_t": traj.final_t,
              "samples": len(traj), "runtime_seconds": runtime, "config": cfg}
    flags = []
    if traj.kind == "z":
        diag = asymptotic_report(traj)
        report["diagnostics"] = diag.as_dict()
        flags += diag.claim_flags
        if (traj.completed and traj.params.C < 0
                and isinstance(traj.spec, WarpedProductSpec)):
            flags += monotonicity_monitors(traj)
    elif traj.params.C == 0:
        flags += ricci_flat_convergence(traj)
    else:
        L = lyapunov_L(np.asarray(traj.states, dtype=float), traj.spec)
        report["Lcal_tail"] = float(L[-1])
    if traj.kind == "xy" and "max_projection_correction" in traj.monitors:
        report["max_projection_correction"] = traj.monitors["max_projection_correction"]
    report["claim_flags"] = [f.as_dict() for f in flags]
    return report


def execute(cfg: dict, out: str = None, decimate: int = None) -> int:
    """Run one config; returns the exit code."""
    if decimate is not None:
        cfg = json.loads(json.dumps(cfg))
        cfg.setdefault("integrator", {})["decimate"] = decimate
    spec, p, field, seed, icfg = build_run(cfg)
    t0 = time.perf_counter()
    traj = integrate(field, seed, icfg, spec, p)
    runtime = time.perf_counter() - t0
    outputs = cfg.get("outputs", {})
    csv_path = out or outputs.get("csv")
    report_path = outputs.get("report")
    if csv_path and not report_path:
        report_path = str(Path(csv_path).with_suffix(".json"))
    if csv_path:
        write_csv(traj, csv_path)
    report = build_report(traj, cfg, runtime)
    text = json.dumps(report, indent=2, default=_jsonable)
    if report_path:
        Path(report_path).write_text(text + "\n")
    print(f"{traj.termination} at t={traj.final_t:.6g} after {runtime:.2f} s, "
          f"{len(traj)} samples" + (f" -> {csv_path}" if csv_path else ""))
    failed = [f for f in report["claim_flags"] if not f["passed"]]
    for f in failed:
        print(f"  claim not met: {f['name']} value={f['value']:.6g} tol={f['tolerance']:.3g}")
    return EXIT_OK if traj.completed else EXIT_EARLY


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")


def _run_one(args):
    path, out, decimate = args
    try:
        return execute(load_config(path), out, decimate)
    except (ConfigError, SpecError, DomainError) as e:
        print(f"{path}: {e}", file=sys.stderr)
        return EXIT_USAGE


def sweep_workers(n_jobs: int) -> int:
    cap = os.environ.get("SOLITONFLOW_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigError(f"SOLITONFLOW_THREADS must be an integer, got {cap!r}")
    return max(1, min(limit, n_jobs))


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args) -> int:
    configs = args.config
    if len(configs) > 1 and args.out:
        raise ConfigError("--out applies to a single config; set outputs.csv per config")
    jobs = [(c, args.out, args.decimate) for c in configs]
    if len(jobs) == 1:
        cfg = load_config(configs[0])
        return execute(cfg, args.out, args.decimate)
    workers = sweep_workers(len(jobs))
    if workers == 1:
        codes = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_run_one, jobs))
    return max(codes)


def cmd_critical_points(args) -> int:
    spec = WarpedProductSpec(d=tuple(args.d), lam=tuple(args.lam))
    pts = critical_points(spec)
    rows = []
    print(f"{'kind':<14} {'subset':<10} {'L':>5} {'|xy_rhs|':>10}  X ; Y")
    for pt in pts:
        res = stationary_residual(pt, spec)
        sub = ",".join(str(i) for i in sorted(pt.subset)) if pt.subset else "-"
        X = " ".join(f"{v:.6g}" for v in pt.coordinates.X)
        Y = " ".join(f"{v:.6g}" for v in pt.coordinates.Y)
        print(f"{pt.kind:<14} {sub:<10} {pt.Lcal:>5.0f} {res:>10.2e}  {X} ; {Y}")
        rows.append(dict(kind=pt.kind, subset=sorted(pt.subset) if pt.subset else None,
                         family=pt.family, X=pt.coordinates.X.tolist(),
                         Y=pt.coordinates.Y.tolist(), Lcal=pt.Lcal, rhs_max=res))
    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=2) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    res = run_suite(args.suite)
    print("\n".join(res.lines()))
    return EXIT_OK if res.passed else EXIT_EARLY


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if cfg.get("system") != "warped":
        raise ConfigError("system: compare needs a warped z-system config")
    spec, p, field, seed, icfg = build_run(cfg)
    window = (args.t_start, args.t_end)
    if icfg.t_max < window[1]:
        icfg = IntegratorConfig(t_max=window[1] + 1.0, h=icfg.h,
                                residual_abort=icfg.residual_abort)
    z = integrate(field, seed, icfg, spec, p)
    if not z.completed:
        print(f"z-run terminated early: {z.termination}", file=sys.stderr)
        return EXIT_EARLY
    xy = matching_xy_run(z, window, h=icfg.h)
    rep = oracle_compare(z, xy, window=window)
    out = rep.as_dict()
    print(json.dumps(out, indent=2))
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="solitonflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="integrate one or more JSON configs")
    run.add_argument("--config", action="append", required=True, metavar="PATH",
                     help="config file; repeat for a parallel sweep")
    run.add_argument("--out", metavar="PATH", help="CSV output (report goes next to it)")
    run.add_argument("--decimate", type=int, metavar="K", help="keep every K-th step")
    run.set_defaults(func=cmd_run)

    cp = sub.add_parser("critical-points", help="list stationary points of the XY system")
    cp.add_argument("--d", type=int, nargs="+", required=True)
    cp.add_argument("--lambda", dest="lam", type=float, nargs="+", required=True)
    cp.add_argument("--json", metavar="PATH")
    cp.set_defaults(func=cmd_critical_points)

    ck = sub.add_parser("check", help="run an acceptance suite")
    ck.add_argument("--suite", required=True, metavar="NAME", help=", ".join(SUITES))
    ck.set_defaults(func=cmd_check)

    cmp_ = sub.add_parser("compare", help="z-system versus XY-system oracle comparison")
    cmp_.add_argument("--config", required=True, metavar="PATH")
    cmp_.add_argument("--out", metavar="PATH")
    cmp_.add_argument("--t-start", type=float, default=1.0)
    cmp_.add_argument("--t-end", type=float, default=50.0)
    cmp_.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SpecError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
