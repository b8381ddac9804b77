"""Command-line entry point: ``besov-wip <command> [flags]``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 regime/precondition
violation.  Every artifact embeds the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .changepoint import (DegenerateSeriesError, MCConfig, epidemic_test, limit_distribution_mc)
from .core import BesovParams, DomainError, besov_norm, schauder_coeffs, sequential_norm
from .diagnostics import (level_statistic, lln_statistic, necessity_statistic, tightness_summand)
from .mc import EmpiricalDistribution, quantile, replicate_values
from .processes import (GeneratorSpec, InvalidParameterError, partial_sum_path, read_series_csv,
                        sample_increments)

log = logging.getLogger("besov_wip")

EXIT_USAGE, EXIT_DATA, EXIT_REGIME = 2, 3, 4

DEFAULTS = {
    "p": 4.0, "alpha": 0.3, "n": 1024, "seed": 1, "reps": 200, "resolution": 2 ** 13,
    "a": 0.0, "b": 1.0, "level": 0.05, "family": "gaussian", "sigma": 1.0, "beta": 4.0,
    "scale": 1.0, "a0": 1.0, "a1": 0.3, "innovation": "gaussian", "input": None, "output": None,
    "mc_reps": 4000, "mc_seed": 20240601, "critvals": None, "statistic": "necessity",
    "N_values": "10,12,14,16", "beta_values": None, "j": None, "raw": False, "centered": False,
    "only": None,
}

TYPES = {k: type(v) for k, v in DEFAULTS.items() if v is not None and not isinstance(v, bool)}
TYPES.update({"j": int, "input": str, "output": str, "critvals": str, "beta_values": str, "only": str})


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class RegimeError(Exception):
    pass


def load_config(path: str | None) -> dict:
    """JSON object, or ``key = value`` lines with '#' comments."""
    if not path:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        cfg = json.loads(text)
        return cfg.get("config", cfg)
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = val
    return cfg


def _coerce(key, val):
    if val is None:
        return None
    if isinstance(DEFAULTS.get(key), bool):
        return val if isinstance(val, bool) else str(val).lower() in ("1", "true", "yes")
    typ = TYPES.get(key)
    if typ is None:
        return val
    try:
        return typ(float(val)) if typ is int else typ(val)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {val!r}") from exc


def resolve(args: argparse.Namespace, keys) -> dict:
    """Flags override the config file, which overrides defaults."""
    file_cfg = load_config(getattr(args, "config", None))
    out = {}
    for k in keys:
        flag = getattr(args, k, None)
        if flag is not None and flag is not False:
            out[k] = _coerce(k, flag)
        elif k in file_cfg:
            out[k] = _coerce(k, file_cfg[k])
        else:
            out[k] = DEFAULTS[k]
    return out


def _params(cfg) -> BesovParams:
    try:
        return BesovParams(cfg["p"], cfg["alpha"])
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _spec(cfg, family=None) -> GeneratorSpec:
    try:
        return GeneratorSpec(family or cfg["family"], sigma=cfg["sigma"], beta=cfg["beta"],
                             scale=cfg["scale"], a0=cfg["a0"], a1=cfg["a1"], innovation=cfg["innovation"])
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _read_input(cfg):
    if not cfg["input"]:
        raise UsageError("--input is required")
    try:
        return read_series_csv(cfg["input"])
    except OSError as exc:
        raise DataError(f"cannot read {cfg['input']}: {exc}") from exc
    except ValueError as exc:
        raise DataError(str(exc)) from exc


SPEC_KEYS = ("family", "sigma", "beta", "scale", "a0", "a1", "innovation")


def cmd_gen(args) -> int:
    cfg = resolve(args, ("n", "seed", "output", *SPEC_KEYS))
    spec = _spec(cfg)
    if cfg["n"] < 1:
        raise UsageError("--n must be >= 1")
    series = sample_increments(spec, cfg["n"], cfg["seed"])
    target = cfg["output"] or "/dev/stdout"
    series.to_csv(target, extra={"config": {**cfg, "command": "gen"}})
    return 0


def besov_report(values, params: BesovParams, raw: bool = False) -> dict:
    path = partial_sum_path(values, normalize=not raw)
    norm = besov_norm(path, params)
    J = int(math.floor(math.log2(path.n)))
    coeffs = schauder_coeffs(path, J)
    return {
        "lp": norm.lp, "seminorm": norm.seminorm, "total": norm.total,
        "sequential_norm": sequential_norm(coeffs, params),
        "level_statistics": [level_statistic(coeffs, j, params) for j in range(J + 1)],
        "n": path.n, "params": params.as_dict(),
    }


def cmd_besov(args) -> int:
    cfg = resolve(args, ("input", "p", "alpha", "raw", "output"))
    params = _params(cfg)
    series = _read_input(cfg)
    report = besov_report(series.values, params, cfg["raw"])
    report["config"] = {**cfg, "command": "besov"}
    _emit(json.dumps(report, indent=2) + "\n", cfg["output"])
    return 0


def cmd_scan(args) -> int:
    cfg = resolve(args, ("input", "p", "alpha", "level", "resolution", "mc_reps", "mc_seed",
                         "critvals", "output"))
    params = _params(cfg)
    if not params.supercritical:
        raise RegimeError(f"alpha={params.alpha} must exceed 1/p={1 / params.p} for the scan limit law")
    if not 0 < cfg["level"] < 1:
        raise UsageError("--level must lie in (0, 1)")
    series = _read_input(cfg)
    null = None
    mc = MCConfig(cfg["resolution"], cfg["mc_reps"], cfg["mc_seed"])
    if cfg["critvals"]:
        try:
            null = EmpiricalDistribution.from_csv(cfg["critvals"])
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot load critical values from {cfg['critvals']}: {exc}") from exc
        mc = None
    try:
        res = epidemic_test(series.values, params, cfg["level"], mc=mc, null=null)
    except DegenerateSeriesError as exc:
        raise DataError(str(exc)) from exc
    out = res.to_dict()
    out["config"] = {**cfg, "command": "scan"}
    _emit(json.dumps(out, indent=2) + "\n", cfg["output"])
    print(f"T_n = {res.statistic:.4f}, critical value = {res.critical_value:.4f}, "
          f"p = {res.p_value:.4f}, reject = {res.reject}", file=sys.stderr)
    return 0


QUANTILE_LEVELS = (0.90, 0.95, 0.99)


def cmd_critvals(args) -> int:
    cfg = resolve(args, ("p", "alpha", "a", "b", "resolution", "reps", "seed", "centered", "output"))
    params = _params(cfg)
    if not params.supercritical:
        raise RegimeError(f"alpha={params.alpha} must exceed 1/p={1 / params.p}: "
                          "the scan limit law is only established in that regime")
    if not cfg["output"]:
        raise UsageError("--output prefix is required")
    try:
        dist = limit_distribution_mc(params, cfg["a"], cfg["b"], cfg["resolution"], cfg["reps"], cfg["seed"],
                                     centered=cfg["centered"])
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    prefix = Path(cfg["output"])
    meta = {"config": {**cfg, "command": "critvals"}, **dist.meta}
    with open(f"{prefix}.quantiles.csv", "w") as fh:
        fh.write(f"# {json.dumps(meta, sort_keys=True)}\n")
        fh.write("u,value\n")
        for u in QUANTILE_LEVELS:
            fh.write(f"{u},{quantile(dist, u)!r}\n")
    EmpiricalDistribution(dist.sample, meta).to_csv(f"{prefix}.sample.csv")
    Path(f"{prefix}.json").write_text(json.dumps(
        {**meta, "quantiles": {str(u): quantile(dist, u) for u in QUANTILE_LEVELS}}, indent=2))
    return 0


def _median_stderr(vals: np.ndarray) -> float:
    # asymptotic standard error of the sample median under a normal approximation
    if vals.size < 2:
        return float("nan")
    return float(1.2533 * vals.std(ddof=1) / math.sqrt(vals.size))


def sweep_rows(cfg) -> list[dict]:
    params = _params(cfg)
    stat = cfg["statistic"]
    Ns = [int(v) for v in str(cfg["N_values"]).split(",") if v.strip()]
    betas = [float(v) for v in str(cfg["beta_values"]).split(",")] if cfg["beta_values"] else [None]
    rows = []
    for beta in betas:
        spec = _spec({**cfg, "beta": beta if beta is not None else cfg["beta"]},
                     family="pareto" if beta is not None else None)
        for N in Ns:
            if stat == "tightness":
                j = cfg["j"] if cfg["j"] is not None else N
                est = tightness_summand(spec, N, j, params, cfg["reps"], cfg["seed"])
                value, se = float(est.value), float(est.stderr)
            else:
                fn = {"lln": lln_statistic, "necessity": necessity_statistic}.get(stat)
                if fn is None:
                    raise UsageError(f"unknown statistic {stat!r}")
                j = N
                vals = replicate_values(lambda s: fn(sample_increments(spec, 2 ** N, s), params),
                                        cfg["reps"], cfg["seed"])
                value, se = float(np.median(vals)), _median_stderr(vals)
            rows.append({"beta": beta if beta is not None else "", "N": N, "j": j,
                         "statistic": value, "stderr": se})
    return rows


def cmd_sweep(args) -> int:
    cfg = resolve(args, ("statistic", "N_values", "beta_values", "j", "p", "alpha", "reps", "seed",
                         "output", *SPEC_KEYS))
    rows = sweep_rows(cfg)
    lines = [f"# {json.dumps({'config': {**cfg, 'command': 'sweep'}}, sort_keys=True)}",
             "beta,N,j,statistic,stderr"]
    lines += [f"{r['beta']},{r['N']},{r['j']},{r['statistic']!r},{r['stderr']!r}" for r in rows]
    _emit("\n".join(lines) + "\n", cfg["output"])
    return 0


def cmd_convergence(args) -> int:
    from . import experiments as E

    cfg = resolve(args, ("only", "output"))
    runners = {
        "1": E.exactness_suite, "2": E.basis_suite, "3": E.donsker, "4": E.supercritical,
        "5": E.necessity, "6": E.martingale, "7": E.null_calibration, "8": E.power,
    }
    chosen = [c.strip() for c in cfg["only"].split(",")] if cfg["only"] else list(runners)
    results = []
    for key in chosen:
        if key not in runners:
            raise UsageError(f"unknown criterion {key!r}")
        res = runners[key]()
        for r in res if isinstance(res, list) else [res]:
            print(r.line(), file=sys.stderr)
            results.append(r)
    summary = {"config": {**cfg, "command": "convergence"},
               "all_passed": all(r.passed for r in results),
               "criteria": [r.summary() for r in results]}
    _emit(json.dumps(summary, indent=2) + "\n", cfg["output"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="besov-wip", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *names):
        p.add_argument("--config", help="JSON or key=value file; flags take precedence")
        flags = {
            "p": float, "alpha": float, "n": int, "seed": int, "reps": int, "resolution": int,
            "a": float, "b": float, "level": float, "sigma": float, "beta": float, "scale": float,
            "a0": float, "a1": float, "mc_reps": int, "mc_seed": int, "j": int,
        }
        for name in names:
            opt = "--" + name.replace("_", "-")
            if name in flags:
                p.add_argument(opt, type=flags[name], dest=name)
            elif name in ("raw", "centered"):
                p.add_argument(opt, action="store_true", dest=name)
            elif name == "family":
                p.add_argument(opt, choices=["gaussian", "rademacher", "pareto", "arch", "zero"], dest=name)
            elif name == "innovation":
                p.add_argument(opt, choices=["gaussian", "rademacher"], dest=name)
            elif name == "statistic":
                p.add_argument(opt, choices=["lln", "necessity", "tightness"], dest=name)
            else:
                p.add_argument(opt, dest=name)

    spec_flags = ("family", "sigma", "beta", "scale", "a0", "a1", "innovation")
    p = sub.add_parser("gen", help="write a seeded increment series as CSV")
    common(p, "n", "seed", "output", *spec_flags)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("besov", help="Besov and sequential norms of the partial-sum polygon")
    common(p, "input", "p", "alpha", "raw", "output")
    p.set_defaults(func=cmd_besov)

    p = sub.add_parser("scan", help="epidemic change test by the scan statistic")
    common(p, "input", "p", "alpha", "level", "resolution", "mc_reps", "mc_seed", "critvals", "output")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("critvals", help="simulate the limit law of the scan functional")
    common(p, "p", "alpha", "a", "b", "resolution", "reps", "seed", "centered", "output")
    p.set_defaults(func=cmd_critvals)

    p = sub.add_parser("sweep", help="median diagnostics over N or beta")
    common(p, "statistic", "N_values", "beta_values", "j", "p", "alpha", "reps", "seed", "output",
           *spec_flags)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("convergence", help="run the acceptance experiments")
    common(p, "only", "output")
    p.set_defaults(func=cmd_convergence)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(f"besov-wip {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"besov-wip {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RegimeError as exc:
        print(f"besov-wip {args.command}: {exc}", file=sys.stderr)
        return EXIT_REGIME


if __name__ == "__main__":
    sys.exit(main())
