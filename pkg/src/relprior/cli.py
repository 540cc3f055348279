"""Command-line front end.

Every command reads one JSON config, computes all results in memory and only
then writes its files into the output directory.  Exit codes: 0 ok, 2 data
error, 3 numerical failure, 4 statistical guard, 5 config error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import distributions as dist
from . import posterior as post
from . import priors as pr
from . import simulation as sim
from .data import Dataset, Kind, nonparametric_estimate, read_csv
from .distributions import ReparamPoint, as_family
from .errors import ConfigError, DataError, NumericalError, RelpriorError
from .fim import TypeOne, TypeTwo
from .likelihood import profile_ci, relative_likelihood_grid, ml_fit

__all__ = ["main", "build_prior", "CONFIG_SCHEMA"]

log = logging.getLogger("relprior")

COMMANDS = ("fit", "bayes", "prior-surface", "npe", "simulate", "sensitivity")
CONTOUR_LEVELS = [0.9, 0.7, 0.5, 0.3, 0.1, 0.05, 0.01]

# ---------------------------------------------------------------------------
# Schemas

_range3 = {"type": "array", "items": [{"type": "number", "exclusiveMinimum": 0},
                                      {"type": "number", "exclusiveMinimum": 0},
                                      {"type": "integer", "minimum": 2}],
           "minItems": 3, "maxItems": 3}
_pair = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_prob = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}

_marginal = {
    "type": "object",
    "properties": {
        "target": {"enum": ["t_pr", "beta", "sigma"]},
        "shape": {"enum": ["lognormal", "truncated_normal", "log_lst", "truncated_lst"]},
        "range99": _pair,
        "df": {"type": "number", "exclusiveMinimum": 0},
        "p_r": _prob,
        "exact_truncated": {"type": "boolean"},
    },
    "required": ["target", "shape", "range99"],
    "additionalProperties": False,
}
_component = {
    "oneOf": [
        _marginal,
        {"type": "object", "properties": {"kind": {"const": "flat"}},
         "required": ["kind"], "additionalProperties": False},
        {"type": "object", "properties": {"kind": {"const": "cj"},
                                          "t_c": {"type": "number", "exclusiveMinimum": 0},
                                          "p_r": _prob},
         "required": ["kind"], "additionalProperties": False},
    ]
}
_censoring = {"oneOf": [
    {"enum": ["type2", "complete"]},
    {"type": "object", "properties": {"type1": {"type": "number", "exclusiveMinimum": 0}},
     "required": ["type1"], "additionalProperties": False},
    {"type": "object", "properties": {"type2": {"type": "integer", "minimum": 1},
                                      "n": {"type": "integer", "minimum": 1}},
     "required": ["type2"], "additionalProperties": False},
]}
_noninf = {
    "type": "object",
    "properties": {
        "kind": {"enum": [k.value for k in pr.PriorKind]},
        "parameterization": {"enum": [p.value for p in pr.Parameterization]},
        "censoring": _censoring,
        "p_r": _prob,
        "t_e": {"type": "number", "exclusiveMinimum": 0},
        "order": {"enum": ["location", "scale", None]},
    },
    "required": ["kind"],
    "additionalProperties": False,
}
_prior = {"oneOf": [
    _noninf,
    {"type": "object", "properties": {"location": _component, "scale": _component},
     "required": ["location", "scale"], "additionalProperties": False},
]}
_target = {"oneOf": [
    {"type": "object", "properties": {"quantile": _prob}, "required": ["quantile"],
     "additionalProperties": False},
    {"type": "object", "properties": {"F_at_t": {"type": "number", "exclusiveMinimum": 0}},
     "required": ["F_at_t"], "additionalProperties": False},
    {"type": "object", "properties": {"param": {"enum": ["beta", "sigma", "mu"]}},
     "required": ["param"], "additionalProperties": False},
]}
_rect = {"type": "array", "items": _pair, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "input_path": {"type": "string"},
        "family": {"enum": ["weibull", "lognormal", "sev", "normal", "lev", "frechet",
                            "logistic", "loglogistic"]},
        "time_unit": {"type": "string"},
        "p_r": _prob,
        "level": _prob,
        "prior": _prior,
        "sampler": {
            "type": "object",
            "properties": {
                "chains": {"type": "integer", "minimum": 1},
                "draws_per_chain": {"type": "integer", "minimum": 1},
                "warmup": {"type": "integer", "minimum": 0},
                "thin": {"type": "integer", "minimum": 1},
                "target_accept": _prob,
                "bounding_rect": _rect,
                "fim_source": {"enum": ["table", "quadrature"]},
            },
            "additionalProperties": False,
        },
        "targets": {"type": "array", "items": _target},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "contours": {
            "type": "object",
            "properties": {"t_pr": _range3, "sigma": _range3,
                           "levels": {"type": "array", "items": _prob}},
            "additionalProperties": False,
        },
        "priorcheck": {
            "type": "object",
            "properties": {"n": {"type": "integer", "minimum": 1}, "rect": _rect},
            "required": ["rect"],
            "additionalProperties": False,
        },
        "surface": {
            "type": "object",
            "properties": {"t_c": {"type": "number", "exclusiveMinimum": 0}, "p_r": _prob,
                           "t_pr": _range3, "sigma": _range3,
                           "n_units": {"type": "integer", "minimum": 1}},
            "required": ["t_c", "p_r", "t_pr", "sigma"],
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "families": {"type": "array", "items": {"enum": ["weibull", "lognormal"]},
                             "minItems": 1},
                "E_r": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                        "minItems": 1},
                "p_fail": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0,
                                                      "maximum": 1}, "minItems": 1},
                "priors": {"type": "array", "items": {"enum": ["flat", "ij"]}, "minItems": 1},
                "n_reps": {"type": "integer", "minimum": 1},
                "credible_level": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            "required": ["families", "E_r", "p_fail", "priors"],
            "additionalProperties": False,
        },
        "variants": {"type": "array", "items": {
            "type": "object",
            "properties": {"name": {"type": "string"}, "prior": _prior},
            "required": ["prior"], "additionalProperties": False}},
        "factors": {
            "type": "object",
            "properties": {"base_prior": _prior,
                           "df": {"type": "array", "items": {"type": "number",
                                                             "exclusiveMinimum": 0}},
                           "range99": {"type": "array", "items": _pair}},
            "required": ["base_prior"],
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

SUMMARY_SCHEMA = {
    "type": "object",
    "properties": {
        "p_r": _prob,
        "family": {"type": "string"},
        "level": _prob,
        "targets": {"type": "object", "additionalProperties": {
            "type": "object",
            "properties": {"median": {"type": "number"}, "lower": {"type": "number"},
                           "upper": {"type": "number"}},
            "required": ["median", "lower", "upper"]}},
        "rhat": {"type": "object"},
        "acceptance": {"type": "array", "items": {"type": "number"}},
        "flags": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["p_r", "family", "targets", "rhat", "acceptance", "flags"],
}
FIT_SCHEMA = {
    "type": "object",
    "properties": {"fit": {"type": "object", "required": ["mu", "sigma", "loglik", "converged"]},
                   "intervals": {"type": "array"}, "contour_levels": {"type": "array"}},
    "required": ["fit", "intervals"],
}
NPE_SCHEMA = {
    "type": ["object", "null"],
    "properties": {"jump_times": {"type": "array"}, "levels": {"type": "array"},
                   "plot_points": {"type": "array"}},
}


# ---------------------------------------------------------------------------
# Logging


class KeyValueFormatter(logging.Formatter):
    """``level key=value ...`` lines."""

    def format(self, record):
        parts = [record.levelname.lower(), f"event={record.getMessage()}"]
        for k, v in getattr(record, "kv", {}).items():
            s = str(v)
            parts.append(f"{k}={json.dumps(s) if (' ' in s or not s) else s}")
        return " ".join(parts)


def _log(level, event, **kv):
    log.log(level, event, extra={"kv": kv})


def _setup_logging():
    if not any(isinstance(h.formatter, KeyValueFormatter) for h in log.handlers):
        h = logging.StreamHandler(sys.stderr)
        h.setFormatter(KeyValueFormatter())
        log.addHandler(h)
    log.setLevel(logging.INFO)
    log.propagate = False


# ---------------------------------------------------------------------------
# Config helpers


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None


def _censoring_from(obj, default_tc):
    if obj is None:
        return TypeOne(default_tc) if default_tc else TypeTwo()
    if obj in ("type2", "complete"):
        return TypeTwo()
    if "type1" in obj:
        return TypeOne(float(obj["type1"]))
    return TypeTwo(int(obj["type2"]), obj.get("n"))


def build_prior(obj: dict, default_tc: float | None = None):
    """Prior spec from its JSON form.

    ``default_tc`` fills in the censoring time of IJ/CJ priors that do not
    give one (Type-2/complete data when it is ``None``).
    """
    try:
        if "location" in obj:
            return pr.ProductPrior(_component_from(obj["location"], default_tc),
                                   _component_from(obj["scale"], default_tc))
        return pr.NoninfPriorSpec(
            obj["kind"], obj.get("parameterization", "logtpr_logsigma"),
            _censoring_from(obj.get("censoring"), default_tc if obj["kind"] in
                            ("ij", "cj_location", "cj_scale", "jeffreys") else None),
            obj.get("p_r"), obj.get("t_e"), obj.get("order"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid prior: {exc}") from None


def _component_from(obj, default_tc):
    if "target" in obj:
        return pr.InformativeMarginalSpec(obj["target"], obj["shape"], tuple(obj["range99"]),
                                          obj.get("df"), obj.get("p_r"),
                                          obj.get("exact_truncated", False))
    if obj["kind"] == "flat":
        return pr.Flat()
    return pr.CJComponent(obj.get("t_c", default_tc), obj.get("p_r"))


def _needs_tc(obj) -> bool:
    if "location" in obj:
        return any(c.get("kind") == "cj" and "t_c" not in c for c in (obj["location"], obj["scale"]))
    return obj["kind"] in ("ij", "cj_location", "cj_scale", "jeffreys") and "censoring" not in obj


def _default_tc(d: Dataset, prior_obj) -> float | None:
    """Largest right-censoring time, used when an IJ/CJ prior omits t_c."""
    if not _needs_tc(prior_obj):
        return None
    ct = d.censoring_times()
    if ct.size == 0:
        return None
    tc = float(ct.max())
    _log(logging.INFO, "default_t_c", t_c=tc, note="prior t_c set to the largest censoring time")
    return tc


def _targets(cfg):
    out = []
    for t in cfg.get("targets", []):
        if "quantile" in t:
            out.append(("quantile", float(t["quantile"])))
        elif "F_at_t" in t:
            out.append(("F_at_t", float(t["F_at_t"])))
        else:
            out.append((t["param"],))
    return out


def _grid(spec):
    lo, hi, n = spec
    if not lo < hi:
        raise ConfigError("grid range needs lo < hi")
    return np.geomspace(lo, hi, int(n))


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _write_all(out_dir: Path, files: dict[str, str]):
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out_dir / name).write_text(text, encoding="utf-8")
        _log(logging.INFO, "wrote", path=str(out_dir / name))


def _read_data(cfg) -> Dataset:
    if "input_path" not in cfg:
        raise ConfigError("input_path is required for this command")
    d = read_csv(cfg["input_path"], cfg.get("time_unit", ""))
    _log(logging.INFO, "data", units=d.n_units, failures=d.n_failures, records=len(d))
    return d


def _family(cfg):
    return as_family(cfg.get("family", "weibull"))


# ---------------------------------------------------------------------------
# Commands


def _npe_files(d: Dataset):
    try:
        est = nonparametric_estimate(d)
    except DataError as exc:
        _log(logging.WARNING, "npe_skipped", reason=str(exc))
        return {"npe.json": _dumps(None), "plotpoints.csv": _csv(("time", "probability"), [])}
    jsonschema.validate(_clean(est.to_dict()), NPE_SCHEMA)
    return {"npe.json": _dumps(est.to_dict()),
            "plotpoints.csv": _csv(("time", "probability"), est.plot_points)}


def cmd_npe(cfg) -> dict:
    return _npe_files(_read_data(cfg))


def cmd_fit(cfg) -> dict:
    d = _read_data(cfg)
    fam = _family(cfg)
    fit = ml_fit(d, fam)
    if not fit.converged:
        raise NumericalError("ML fit did not converge: " + "; ".join(fit.messages))
    p_r = cfg.get("p_r") or post.default_p_r(d)
    _log(logging.INFO, "fit", mu=fit.params_hat.mu, sigma=fit.params_hat.sigma,
         loglik=fit.loglik_max, p_r=p_r)
    level = cfg.get("level", 0.95)
    intervals = []
    for tg in _targets(cfg):
        if tg[0] not in ("quantile", "F_at_t"):
            continue
        ci = profile_ci(d, fam, tg, level, fit)
        intervals.append(ci.to_dict())

    cont = cfg.get("contours", {})
    c, half = post.wald_box(fit, p_r, 4.0)
    half = np.maximum(half, 1e-3)
    tp = _grid(cont["t_pr"]) if "t_pr" in cont else np.exp(np.linspace(c[0] - half[0], c[0] + half[0], 101))
    sg = _grid(cont["sigma"]) if "sigma" in cont else np.exp(np.linspace(c[1] - half[1], c[1] + half[1], 101))
    R = relative_likelihood_grid(d, fam, tp, sg, p_r, fit)
    rows = [(float(tp[j]), float(sg[i]), float(R[i, j]))
            for i in range(len(sg)) for j in range(len(tp))]
    fit_json = {"fit": fit.to_dict(p_r), "intervals": intervals,
                "contour_levels": cont.get("levels", CONTOUR_LEVELS), "n_units": d.n_units,
                "n_failures": d.n_failures}
    jsonschema.validate(_clean(fit_json), FIT_SCHEMA)
    files = {"fit.json": _dumps(fit_json),
             "contours.csv": _csv(("t_pr", "sigma", "relative_likelihood"), rows)}
    files.update(_npe_files(d))
    return files


def _sampler_cfg(cfg, seed):
    s = dict(cfg.get("sampler", {}))
    s.pop("fim_source", None)
    rect = s.pop("bounding_rect", None)
    return post.SamplerConfig(seed=seed, bounding_rect=tuple(map(tuple, rect)) if rect else None, **s)


def _fim_source(cfg):
    return "quadrature" if cfg.get("sampler", {}).get("fim_source") == "quadrature" else None


def _bayes_core(d, fam, prior_obj, cfg, seed):
    prior = build_prior(prior_obj, _default_tc(d, prior_obj))
    scfg = _sampler_cfg(cfg, seed)
    p_r = cfg.get("p_r") or post.default_p_r(d)
    ds = post.sample_posterior(d, fam, prior, scfg, p_r=p_r, fim_source=_fim_source(cfg))
    targets = _targets(cfg) or [("quantile", 0.1)]
    fx = post.posterior_functionals(ds, targets, cfg.get("level", 0.95))
    return prior, scfg, ds, fx


def cmd_bayes(cfg) -> dict:
    d = _read_data(cfg)
    fam = _family(cfg)
    prior_obj = cfg.get("prior", {"kind": "flat"})
    seed = cfg.get("seed", 0)
    prior, scfg, ds, fx = _bayes_core(d, fam, prior_obj, cfg, seed)
    for k, v in ds.rhat.items():
        _log(logging.INFO, "rhat", coordinate=k, value=round(v, 6))
    for f in ds.flags:
        _log(logging.WARNING, "sampler_flag", detail=f)
    summary = {
        "p_r": ds.p_r, "family": fam.value, "level": cfg.get("level", 0.95),
        "targets": {k: {kk: vv for kk, vv in v.items() if kk != "samples"} for k, v in fx.items()},
        "rhat": ds.rhat, "acceptance": ds.acceptance, "flags": ds.flags,
        "chains": scfg.chains, "draws_per_chain": scfg.draws_per_chain, "warmup": scfg.warmup,
        "seed": seed,
    }
    jsonschema.validate(_clean(summary), SUMMARY_SCHEMA)
    files = {"draws.csv": ds.to_csv(), "summary.json": _dumps(summary)}
    if "priorcheck" in cfg:
        pc = cfg["priorcheck"]
        rect = tuple(map(tuple, pc["rect"]))
        pdraws = post.sample_prior_bounded(prior, rect, pc.get("n", 4000), fam, ds.p_r, seed,
                                           _fim_source(cfg))
        pfx = post.posterior_functionals(pdraws, _targets(cfg) or [("quantile", 0.1)],
                                         cfg.get("level", 0.95))
        files["priorcheck.json"] = _dumps({
            "rect": rect, "p_r": ds.p_r,
            "draws": {"log_tpr": pdraws.log_tpr, "log_sigma": pdraws.log_sigma},
            "targets": {k: {kk: vv for kk, vv in v.items() if kk != "samples"}
                        for k, v in pfx.items()},
        })
    return files


def cmd_prior_surface(cfg) -> dict:
    fam = _family(cfg)
    s = cfg.get("surface")
    if s is None:
        raise ConfigError("prior-surface needs a 'surface' block")
    spec = pr.NoninfPriorSpec("ij", "logtpr_logsigma", TypeOne(s["t_c"]), s["p_r"])
    tp, sg = _grid(s["t_pr"]), _grid(s["sigma"])
    R = pr.ij_relative_surface(spec, tp, sg, fam, _fim_source(cfg))
    n_units = s.get("n_units", 1)
    rows = []
    for i, sv in enumerate(sg):
        for j, tv in enumerate(tp):
            rp = ReparamPoint(float(tv), float(sv), s["p_r"])
            rows.append((float(tv), float(sv), float(R[i, j]),
                         pr.pr_at_least_one_failure(n_units, s["t_c"], rp, fam)))
    return {"surface.csv": _csv(("t_pr", "sigma", "relative_density", "pr_at_least_one_failure"),
                                rows)}


def _sensitivity_variants(cfg):
    if "variants" in cfg:
        vs = [(v.get("name", f"v{i}"), v["prior"]) for i, v in enumerate(cfg["variants"])]
    elif "factors" in cfg:
        f = cfg["factors"]
        dfs = f.get("df", [None])
        ranges = f.get("range99", [None])
        vs = []
        for df in dfs:
            for rg in ranges:
                p = copy.deepcopy(f["base_prior"])
                for slot in ("location", "scale"):
                    comp = p.get(slot, {})
                    if "target" in comp:
                        if df is not None and comp["shape"].endswith("lst"):
                            comp["df"] = df
                        if rg is not None and comp["target"] != "t_pr":
                            comp["range99"] = rg
                vs.append((f"df={df},range99={rg}", p))
    else:
        vs = []
    if len(vs) < 2:
        raise ConfigError("sensitivity analysis needs at least 2 prior variants")
    return vs


def cmd_sensitivity(cfg) -> dict:
    vs = _sensitivity_variants(cfg)
    d = _read_data(cfg)
    fam = _family(cfg)
    seed = cfg.get("seed", 0)
    rows = []
    for name, pobj in vs:
        validate_config({"prior": pobj})
        _, _, ds, fx = _bayes_core(d, fam, pobj, cfg, seed)
        for tname, v in fx.items():
            rows.append((name, tname, v["median"], v["lower"], v["upper"]))
        _log(logging.INFO, "variant", name=name, flags=len(ds.flags))
    return {"sensitivity.csv": _csv(("variant", "target", "estimate", "lower", "upper"), rows)}


def _run_cell_safe(cell):
    try:
        return sim.run_cell(cell), None
    except RelpriorError as exc:
        return None, str(exc)


def cmd_simulate(cfg, paper_fidelity=False, threads=None) -> dict:
    sw = cfg.get("sweep")
    if sw is None:
        raise ConfigError("simulate needs a 'sweep' block")
    budget = sim.PAPER_FIDELITY if paper_fidelity else sim.REDUCED
    _log(logging.INFO, "sampler_budget", paper_fidelity=paper_fidelity, **budget)
    seed = cfg.get("seed", 0)
    cells = [sim.CellSpec(fam, er, pf, prior, sw.get("n_reps", 1000),
                          sw.get("credible_level", 0.95), seed, **budget)
             for fam in sw["families"] for prior in sw["priors"]
             for er in sw["E_r"] for pf in sw["p_fail"]]
    workers = min(threads or os.cpu_count() or 1, len(cells))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            outcomes = list(ex.map(_run_cell_safe, cells))
    else:
        outcomes = [_run_cell_safe(c) for c in cells]
    results = []
    for cell, (res, err) in zip(cells, outcomes):
        if err is not None:
            _log(logging.ERROR, "cell_failed", family=cell.family, prior=cell.prior,
                 E_r=cell.expected_failures, p_fail=cell.p_fail, error=err)
            continue
        if not res.quality_ok:
            _log(logging.WARNING, "quality_gate", family=cell.family, prior=cell.prior,
                 E_r=cell.expected_failures, p_fail=cell.p_fail, rhat_share=res.rhat_fail_share)
        results.append(res)
    return {"coverage.csv": sim.coverage_csv(results)}


# ---------------------------------------------------------------------------
# Entry point


def _parser():
    p = argparse.ArgumentParser(prog="relprior", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="override the output directory")
    p.add_argument("--threads", type=int, help="cap on worker processes")
    p.add_argument("--paper-fidelity", action="store_true",
                   help="use 4 chains x 2500 draws (2000 warmup) in simulations")
    return p


def run(argv=None) -> int:
    _setup_logging()
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if "command" in cfg and cfg["command"] != args.command:
            raise ConfigError(f"config is for '{cfg['command']}', not '{args.command}'")
        if args.seed is not None:
            cfg["seed"] = args.seed
        out_dir = Path(args.out or cfg.get("output_dir", "."))
        _log(logging.INFO, "start", command=args.command, seed=cfg.get("seed", 0),
             out=str(out_dir))
        if args.command == "simulate":
            files = cmd_simulate(cfg, args.paper_fidelity, args.threads)
        else:
            files = {"fit": cmd_fit, "bayes": cmd_bayes, "prior-surface": cmd_prior_surface,
                     "npe": cmd_npe, "sensitivity": cmd_sensitivity}[args.command](cfg)
        _write_all(out_dir, files)
    except RelpriorError as exc:
        _log(logging.ERROR, type(exc).__name__, message=str(exc), exit_code=exc.exit_code)
        return exc.exit_code
    except OSError as exc:
        _log(logging.ERROR, "io_error", message=str(exc), exit_code=2)
        return 2
    except ValueError as exc:
        # argument checks inside the library; the values came from the config
        _log(logging.ERROR, "ConfigError", message=str(exc), exit_code=5)
        return 5
    _log(logging.INFO, "done", command=args.command)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
