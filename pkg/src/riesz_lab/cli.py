"""Batch driver: parse a TOML experiment config, run audits, write JSON and CSV reports."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bellman
from .lusin import DEFAULT_S_GRID, lusin_audit, lusin_stability, sample_pairs
from .operators import (
    BesselParams,
    LaguerreParams,
    build_bessel,
    build_hermite,
    build_laguerre,
    tensor_product,
)
from .report import AuditReport
from .riesz import (
    bilinear_audit,
    integral_rep_audit,
    main_bound_audit,
    make_test_forms,
    make_test_functions,
    riesz_apply,
)
from .semigroups import (
    PoissonParams,
    make_subordination_rule,
    poisson_spectral,
    poisson_subordinated,
    rho_a,
    rho_integral,
)
from .spectral import (
    SpectralSystem,
    derivative_field,
    differential_coeffs,
    form_synthesize,
    gradient_lp_norm,
    lp_norm,
    synthesize,
    unit,
)

SPACES = ("laguerre", "bessel", "hermite", "tensor")
AUDITS = ("bellman", "semigroup", "riesz-main", "integral-rep", "bilinear", "lusin")
AUDIT_DESCRIPTIONS = {
    "bellman": "Bellman function pointwise and mollified inequalities",
    "semigroup": "subordination vs spectral Poisson, L^p contraction, commutation with d",
    "riesz-main": "forward and reverse Riesz bounds against c_p, plus the L^2 isometry",
    "integral-rep": "space-time integral representation of <R^a f, omega> (magnitudes)",
    "bilinear": "bilinear embedding against 4 max(p, q) |f|_p |omega|_q (1-D systems)",
    "lusin": "Lusin approximation constant and its stability under s-grid refinement",
}
DEFAULT_TOLERANCES = {
    "bellman": bellman.SLACK,
    "subordination": 1e-6,
    "contraction": 1e-8,
    "commutation": 1e-6,
    "riesz_main": 1e-6,
    "isometry": 1e-6,
    "integral_rep": 1e-4,
    "bilinear": 0.0,
    "lusin": 0.0,
    "lusin_stability": 0.1,
}
AUDIT_OPTIONS = {
    "bellman": {"n_samples": 10_000, "epsilons": [1e-1, 1e-3]},
    "semigroup": {"t_values": [0.1, 1.0, 5.0], "count": 20, "contraction_p": [1.5, 2.0, 4.0, "inf"]},
    "riesz-main": {"count": 50, "decay": 1.0},
    "integral-rep": {"count": 10, "decay": 2.0},
    "bilinear": {"count": 10, "decay": 1.0},
    "lusin": {"count": 10, "p": 4.0, "alpha": 1.5, "n_pairs": 200, "s_grid": list(DEFAULT_S_GRID)},
}
TOP_KEYS = {"space", "alpha", "R", "n", "n_modes", "max_total_degree", "dims", "audits", "p_values",
            "a_values", "seed", "output_dir", "tolerances"} | set(AUDITS)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass
class ExperimentConfig:
    space: str
    audits: list
    p_values: list = field(default_factory=lambda: [2.0])
    a_values: list = field(default_factory=lambda: [0.0])
    alpha: float = 0.0
    R: float = 40.0
    n: int = 400
    n_modes: int = 32
    max_total_degree: int = 10
    dims: int = 2
    seed: int = 42
    output_dir: str = "reports"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    options: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------


def _real(key, value, lo=None, lo_open=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v) and not (key.endswith("contraction_p") and v == math.inf):
        raise ConfigError(f"{key}: value must be finite, got {value!r}")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(f"{key}: value {value!r} must be {'>' if lo_open else '>='} {lo}")
    return v


def _int(key, value, lo=1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if value < lo:
        raise ConfigError(f"{key}: value {value} must be >= {lo}")
    return value


def _list(key, value) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key}: expected a non-empty list")
    return value


def _p_value(key, value) -> float:
    v = _real(key, value)
    if v <= 1:
        raise ConfigError(f"{key}: p must exceed 1, got {value!r}")
    return v


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a parsed config mapping and fill defaults."""
    unknown = sorted(set(raw) - TOP_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    if "space" not in raw:
        raise ConfigError("space: missing required key")
    space = raw["space"]
    if space not in SPACES:
        raise ConfigError(f"space: must be one of {', '.join(SPACES)}, got {space!r}")
    audits = _list("audits", raw.get("audits", ["riesz-main"]))
    for name in audits:
        if name not in AUDITS:
            raise ConfigError(f"audits: unknown audit {name!r}")
    cfg = ExperimentConfig(space=space, audits=sorted(set(audits), key=AUDITS.index))
    cfg.p_values = [_p_value("p_values", p) for p in _list("p_values", raw.get("p_values", [2.0]))]
    cfg.a_values = [_real("a_values", a, 0.0) for a in _list("a_values", raw.get("a_values", [0.0]))]
    cfg.seed = _int("seed", raw.get("seed", 42), lo=0)
    cfg.output_dir = str(raw.get("output_dir", "reports"))
    cfg.n_modes = _int("n_modes", raw.get("n_modes", 32), lo=2)

    if space == "laguerre" or space == "tensor":
        cfg.alpha = _real("alpha", raw.get("alpha", 0.0))
        if cfg.alpha <= -1:
            raise ConfigError(f"alpha: Laguerre alpha must exceed -1, got {cfg.alpha}")
        if cfg.alpha < -0.5:
            msg = f"alpha: {cfg.alpha} lies outside the curvature range alpha >= -1/2; results are flagged"
            warnings.warn(msg, stacklevel=2)
            cfg.flags.append("alpha_outside_curvature_range")
    elif space == "bessel":
        cfg.alpha = _real("alpha", raw.get("alpha", 0.0), 0.0)
        cfg.R = _real("R", raw.get("R", 40.0), 0.0, lo_open=True)
        cfg.n = _int("n", raw.get("n", 400), lo=2)
        if cfg.n_modes > cfg.n:
            raise ConfigError(f"n_modes: {cfg.n_modes} exceeds the grid size n = {cfg.n}")
    elif "alpha" in raw:
        raise ConfigError("alpha: not a parameter of the hermite space")
    if space == "tensor":
        cfg.max_total_degree = _int("max_total_degree", raw.get("max_total_degree", 10), lo=1)
        cfg.dims = _int("dims", raw.get("dims", 2), lo=2)
        if "bilinear" in cfg.audits:
            raise ConfigError("audits: bilinear is available only for 1-D spaces")
        for key in ("R", "n"):
            if key in raw:
                raise ConfigError(f"{key}: not a parameter of the tensor space")
    else:
        for key in ("max_total_degree", "dims", "R", "n"):
            if key in raw and not (space == "bessel" and key in ("R", "n")):
                raise ConfigError(f"{key}: not a parameter of the {space} space")

    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances: expected a table")
    for key, value in tol.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{key}: unknown tolerance")
        cfg.tolerances[key] = _real(f"tolerances.{key}", value, 0.0)

    for name in AUDITS:
        opts = dict(AUDIT_OPTIONS[name])
        table = raw.get(name, {})
        if not isinstance(table, dict):
            raise ConfigError(f"{name}: expected a table")
        for key, value in table.items():
            if key not in opts:
                raise ConfigError(f"{name}.{key}: unknown option")
            opts[key] = value
        cfg.options[name] = _check_options(name, opts)
    return cfg


def _check_options(name: str, opts: dict) -> dict:
    for key in ("count", "n_samples", "n_pairs"):
        if key in opts:
            opts[key] = _int(f"{name}.{key}", opts[key])
    if "decay" in opts:
        opts["decay"] = _real(f"{name}.decay", opts["decay"], 0.0, lo_open=True)
    if name == "bellman":
        opts["epsilons"] = [_real("bellman.epsilons", e, 0.0, lo_open=True) for e in _list("bellman.epsilons", opts["epsilons"])]
    if name == "semigroup":
        opts["t_values"] = [_real("semigroup.t_values", t, 0.0) for t in _list("semigroup.t_values", opts["t_values"])]
        ps = []
        for p in _list("semigroup.contraction_p", opts["contraction_p"]):
            ps.append(math.inf if p in ("inf", math.inf) else _real("semigroup.contraction_p", p, 1.0))
        opts["contraction_p"] = ps
    if name == "lusin":
        opts["p"] = _p_value("lusin.p", opts["p"])
        opts["alpha"] = _real("lusin.alpha", opts["alpha"])
        if not 1 < opts["alpha"] < min(2.0, opts["p"]):
            raise ConfigError(f"lusin.alpha: must lie in (1, min(2, p)), got {opts['alpha']}")
        opts["s_grid"] = [_real("lusin.s_grid", s, 0.0, lo_open=True) for s in _list("lusin.s_grid", opts["s_grid"])]
    return opts


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config: file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: malformed TOML in {path}: {exc}") from exc
    return config_from_dict(raw)


# --------------------------------------------------------------------------
# systems
# --------------------------------------------------------------------------


def build_system(cfg: ExperimentConfig) -> SpectralSystem:
    if cfg.space == "laguerre":
        return build_laguerre(LaguerreParams(cfg.alpha, cfg.n_modes))
    if cfg.space == "hermite":
        return build_hermite(cfg.n_modes)
    if cfg.space == "bessel":
        return build_bessel(BesselParams(cfg.alpha, cfg.R, cfg.n, cfg.n_modes))
    factor = build_laguerre(LaguerreParams(cfg.alpha, cfg.max_total_degree + 1))
    return tensor_product([factor] * cfg.dims, cfg.max_total_degree)


# --------------------------------------------------------------------------
# audit jobs
# --------------------------------------------------------------------------


def _bellman_job(cfg, p):
    opts = cfg.options["bellman"]
    exponent = max(p, p / (p - 1))
    slacks = bellman.inequality_sweep(exponent, n_samples=opts["n_samples"], seed=cfg.seed,
                                      epsilons=tuple(opts["epsilons"]))
    worst = min(slacks.values())
    return AuditReport("bellman", {"p": p, "bellman_exponent": exponent, "seed": cfg.seed,
                                   "n_samples": opts["n_samples"]},
                       slacks, "min_slack", 0.0, worst, cfg.tolerances["bellman"])


def _subordination_job(cfg, sys, a):
    rule = make_subordination_rule()
    eye = np.eye(sys.n_modes)
    gap = 0.0
    for t in cfg.options["semigroup"]["t_values"]:
        pp = PoissonParams(a, t)
        for e in eye:
            gap = max(gap, float(np.max(np.abs(poisson_spectral(sys, pp, e) - poisson_subordinated(sys, rule, pp, e)))))
    observed = {"max_coefficient_gap": gap, "n_s_nodes": int(rule.s_nodes.size)}
    if a > 0:
        observed["rho_integral_gap"] = abs(rho_integral(a, rule) - a**-0.5)
        observed["rho_closed_form_gap"] = max(abs(rho_a(a, t, rule) - math.exp(-t * math.sqrt(a)))
                                              for t in cfg.options["semigroup"]["t_values"])
    worst = max(v for k, v in observed.items() if k != "n_s_nodes")
    return AuditReport.from_worst("subordination", _sys_params(sys, a=a), observed, "gap_max",
                                  cfg.tolerances["subordination"], worst, 0.0)


def _contraction_job(cfg, sys, a):
    opts = cfg.options["semigroup"]
    rule = make_subordination_rule()
    tests = make_test_functions(sys, cfg.seed, opts["count"], a=a).functions
    observed = {}
    for p in opts["contraction_p"]:
        worst = -math.inf
        for c in tests:
            fp = lp_norm(sys, synthesize(sys, c), p)
            for t in opts["t_values"]:
                pt = lp_norm(sys, synthesize(sys, poisson_subordinated(sys, rule, PoissonParams(a, t), c)), p)
                worst = max(worst, (pt - rho_a(a, t, rule) * fp) / max(fp, 1.0))
        observed[f"excess[p={p:g}]"] = worst
    return AuditReport.from_worst("contraction", _sys_params(sys, a=a, seed=cfg.seed), observed,
                                  "excess_max", 0.0, max(observed.values()), cfg.tolerances["contraction"])


def _commutation_job(cfg, sys, a):
    opts = cfg.options["semigroup"]
    tests = make_test_functions(sys, cfg.seed, opts["count"], a=a).functions
    gap = 0.0
    for c in tests:
        for t in opts["t_values"]:
            pp = PoissonParams(a, t)
            left = derivative_field(sys, poisson_spectral(sys, pp, c))
            right = form_synthesize(sys, poisson_spectral(sys, pp, differential_coeffs(sys, c)))
            scale = max(gradient_lp_norm(sys, left, 2), 1e-300)
            gap = max(gap, gradient_lp_norm(sys, left - right, 2) / scale)
    return AuditReport.from_worst("commutation", _sys_params(sys, a=a, seed=cfg.seed),
                                  {"max_relative_gap": gap}, "gap_max", cfg.tolerances["commutation"], gap, 0.0)


def _main_job(cfg, sys, p, a):
    opts = cfg.options["riesz-main"]
    tests = make_test_functions(sys, cfg.seed, opts["count"], opts["decay"], a=a)
    return main_bound_audit(sys, p, a, tests, tolerance=cfg.tolerances["riesz_main"])


def _isometry_job(cfg, sys):
    opts = cfg.options["riesz-main"]
    tests = make_test_functions(sys, cfg.seed, opts["count"], opts["decay"], a=0.0)
    dev = max(abs(gradient_lp_norm(sys, riesz_apply(sys, 0.0, c), 2) / lp_norm(sys, synthesize(sys, c), 2) - 1)
              for c in tests.functions)
    return AuditReport.from_worst("l2-isometry", _sys_params(sys, a=0.0, seed=cfg.seed),
                                  {"max_deviation": dev}, "deviation_max", cfg.tolerances["isometry"], dev, 0.0)


def _integral_job(cfg, sys, a):
    opts = cfg.options["integral-rep"]
    k = next(i for i in range(sys.n_modes) if sys.eigenvalues[i] > 0)
    pairs = [(unit(sys, k), unit(sys, k))]
    fs = make_test_functions(sys, cfg.seed, opts["count"], opts["decay"], a=a).functions
    ws = make_test_forms(sys, cfg.seed + 1, opts["count"], opts["decay"])
    pairs += list(zip(fs, ws))
    reps = [integral_rep_audit(sys, a, f, w, tolerance=cfg.tolerances["integral_rep"]) for f, w in pairs]
    gaps = [r.observed["relative_gap"] for r in reps]
    signs = sorted({r.observed["sign_relation"] for r in reps})
    observed = {"worst_relative_gap": max(gaps), "single_mode_gap": gaps[0],
                "sign_relations": signs, "worst_tail_bound": max(r.observed["tail_bound"] for r in reps),
                "n_pairs": len(reps)}
    rep = AuditReport.from_worst("integral-rep", _sys_params(sys, a=a, seed=cfg.seed), observed,
                                 "relative_gap_max", cfg.tolerances["integral_rep"], max(gaps), 0.0)
    for r in reps:
        for flag in r.flags:
            rep.fail(flag)
    return rep


def _bilinear_job(cfg, sys, p, a):
    opts = cfg.options["bilinear"]
    fs = make_test_functions(sys, cfg.seed, opts["count"], opts["decay"], a=a).functions
    ws = make_test_forms(sys, cfg.seed + 1, opts["count"], opts["decay"])
    reps = [bilinear_audit(sys, p, a, f, w) for f, w in zip(fs, ws)]
    ratios = [r.observed["ratio_to_bound"] for r in reps]
    observed = {"worst_ratio_to_bound": max(ratios), "worst_tail_bound": max(r.observed["tail_bound"] for r in reps),
                "n_pairs": len(reps)}
    return AuditReport.from_worst("bilinear", _sys_params(sys, p=p, a=a, seed=cfg.seed), observed,
                                  "ratio_max", 1.0, max(ratios), cfg.tolerances["bilinear"])


def _lusin_jobs(cfg, sys):
    opts = cfg.options["lusin"]
    fs = make_test_functions(sys, cfg.seed, opts["count"], a=0.0).functions
    pairs = sample_pairs(sys, opts["n_pairs"], cfg.seed)
    reps = [lusin_audit(sys, f, opts["p"], opts["alpha"], opts["s_grid"], pairs) for f in fs]
    observed = {"max_empirical_constant": max(r.observed["empirical_constant"] for r in reps),
                "max_ratio": max(r.observed["max_ratio"] for r in reps),
                "violations": sum(r.observed["violations"] for r in reps),
                "n_functions": len(reps), "n_pairs": int(len(pairs))}
    params = _sys_params(sys, p=opts["p"], seed=cfg.seed, alpha_exponent=opts["alpha"])
    main = AuditReport.from_worst("lusin", params, observed, "violations", 0.0,
                                  observed["violations"] if math.isfinite(observed["max_empirical_constant"]) else math.inf,
                                  cfg.tolerances["lusin"])
    for r in reps:
        for flag in r.flags:
            main.fail(flag)
    stab = lusin_stability(sys, fs, opts["p"], opts["alpha"], opts["s_grid"], pairs,
                           tolerance=cfg.tolerances["lusin_stability"])
    stab.parameters.update(seed=cfg.seed)
    return [main, stab]


def _sys_params(sys, **extra):
    out = dict(sys.params)
    out.update(system=sys.name, N=sys.n_modes)
    out.update(extra)
    return out


def _jobs(cfg: ExperimentConfig, sys: SpectralSystem | None):
    jobs = []
    if "bellman" in cfg.audits:
        jobs += [lambda p=p: _bellman_job(cfg, p) for p in cfg.p_values]
    if sys is None:
        return jobs
    for a in cfg.a_values:
        if "semigroup" in cfg.audits:
            jobs += [lambda a=a: _subordination_job(cfg, sys, a), lambda a=a: _contraction_job(cfg, sys, a),
                     lambda a=a: _commutation_job(cfg, sys, a)]
        if "integral-rep" in cfg.audits:
            jobs.append(lambda a=a: _integral_job(cfg, sys, a))
        for p in cfg.p_values:
            if "riesz-main" in cfg.audits:
                jobs.append(lambda p=p, a=a: _main_job(cfg, sys, p, a))
            if "bilinear" in cfg.audits:
                jobs.append(lambda p=p, a=a: _bilinear_job(cfg, sys, p, a))
    if "riesz-main" in cfg.audits:
        jobs.append(lambda: _isometry_job(cfg, sys))
    if "lusin" in cfg.audits:
        jobs.append(lambda: _lusin_jobs(cfg, sys))
    return jobs


def _sort_key(rep: AuditReport):
    pr = rep.parameters
    return (rep.audit_name, float(pr.get("p", 0.0)), float(pr.get("a", 0.0)))


def run_suite(cfg: ExperimentConfig, jobs: int = 1) -> list[AuditReport]:
    """Run every configured audit; results are sorted by (audit, p, a) regardless of scheduling."""
    needs_system = any(name != "bellman" for name in cfg.audits)
    sys_ = None
    failures = []
    if needs_system:
        try:
            sys_ = build_system(cfg)
        except ValueError as exc:
            failures.append(AuditReport("construction", {"space": cfg.space}, {}, "none", 0.0, -math.inf, 0.0,
                                        flags=[str(exc)]))

    def run(job):
        start = time.perf_counter()
        out = job()
        reps = out if isinstance(out, list) else [out]
        for r in reps:
            r.runtime_ms = int(round(1000 * (time.perf_counter() - start)))
        return reps

    tasks = _jobs(cfg, sys_)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    reports = failures + [r for group in results for r in group]
    for r in reports:
        r.parameters.setdefault("space", cfg.space)
        r.parameters.setdefault("seed", cfg.seed)
        r.parameters["tolerance"] = r.tolerance
        for flag in cfg.flags:
            if flag not in r.flags:
                r.flags.append(flag)
    return sorted(reports, key=_sort_key)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _fmt(x) -> str:
    return "na" if x is None else f"{float(x):g}"


def report_filename(rep: AuditReport) -> str:
    pr = rep.parameters
    return f"{rep.audit_name}_{pr.get('space', 'na')}_p{_fmt(pr.get('p'))}_a{_fmt(pr.get('a'))}_seed{pr.get('seed', 'na')}.json"


CSV_FIELDS = ["audit_name", "space", "p", "a", "seed", "bound_name", "bound", "margin", "tolerance", "passed",
              "runtime_ms", "parameters", "observed", "flags"]


def write_report(reports, output_dir) -> list[Path]:
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for rep in reports:
            path = out / report_filename(rep)
            path.write_text(json.dumps(rep.to_dict(), sort_keys=True, indent=2) + "\n")
            written.append(path)
        summary = out / "summary.csv"
        with summary.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            writer.writeheader()
            for rep in reports:
                d = rep.to_dict()
                pr = d["parameters"]
                writer.writerow({
                    "audit_name": d["audit_name"], "space": pr.get("space", ""), "p": pr.get("p", ""),
                    "a": pr.get("a", ""), "seed": pr.get("seed", ""), "bound_name": d["bound"]["name"],
                    "bound": d["bound"]["value"], "margin": d["margin"], "tolerance": d["tolerance"],
                    "passed": d["passed"], "runtime_ms": d["runtime_ms"],
                    "parameters": json.dumps(pr, sort_keys=True), "observed": json.dumps(d["observed"], sort_keys=True),
                    "flags": ";".join(d["flags"]),
                })
        written.append(summary)
    except OSError as exc:
        raise OSError(f"cannot write reports to {out}: {exc}") from exc
    return written


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _print_summary(reports, stream=sys.stdout):
    for rep in reports:
        pr = rep.parameters
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status}  {rep.audit_name:<16} p={_fmt(pr.get('p')):<5} a={_fmt(pr.get('a')):<4} "
              f"margin={rep.margin:.3e}", file=stream)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="riesz-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run every audit listed in a TOML config")
    run_p.add_argument("config")
    run_p.add_argument("--out", help="output directory (overrides output_dir)")
    run_p.add_argument("--seed", type=int, help="seed override")
    run_p.add_argument("--jobs", type=int, default=1, help="maximum concurrent audits")
    one = sub.add_parser("audit", help="run a single audit with default settings")
    one.add_argument("name", choices=AUDITS)
    one.add_argument("--space", required=True, choices=SPACES)
    one.add_argument("--p", type=float, required=True)
    one.add_argument("--a", type=float, default=0.0)
    one.add_argument("--seed", type=int, default=42)
    one.add_argument("--out", help="also write reports to this directory")
    sub.add_parser("list-audits", help="list available audits")
    args = parser.parse_args(argv)

    if args.command == "list-audits":
        for name in AUDITS:
            print(f"{name:<14} {AUDIT_DESCRIPTIONS[name]}")
        return 0
    try:
        if args.command == "run":
            cfg = parse_config(args.config)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            if args.jobs < 1:
                raise ConfigError("--jobs: must be at least 1")
            out_dir = args.out or cfg.output_dir
            reports = run_suite(cfg, jobs=args.jobs)
        else:
            raw = {"space": args.space, "audits": [args.name], "p_values": [args.p], "a_values": [args.a],
                   "seed": args.seed}
            cfg = config_from_dict(raw)
            out_dir = args.out
            reports = run_suite(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _print_summary(reports)
    if out_dir:
        write_report(reports, out_dir)
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
