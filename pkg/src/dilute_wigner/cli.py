"""Config-driven batch front-end.

    dilute-wigner <config.json> [--seed N] [--threads K] [--check] [--output PATH]

The config is one JSON object, validated against ``CONFIG_SCHEMA`` before any
computation. Results go to a CSV file; a JSON sidecar ``<output>.json`` holds
the fully resolved config, library versions, wall time and a summary. The
sidecar itself is accepted as a config and reproduces the same CSV.

Exit codes: 0 success, 1 error, 2 tolerance failure under ``--check``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, identities, mc, theory
from ._jit import NUMBA_ENABLED
from .ensemble import ConfigurationError, EnsembleConfig, EntryLaw, truncated_law

THREADS_ENV = "DILUTE_WIGNER_THREADS"
EXPERIMENTS = ("semicircle", "variance-scaling", "covariance", "predictions", "universality", "identities")
DENSITY_BINS = 80

_SIZE = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "p": {"type": "number", "exclusiveMinimum": 0},
        "alpha": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "required": ["n"],
    "oneOf": [{"required": ["p"]}, {"required": ["alpha"]}],
}

_LAW = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["gaussian", "rademacher", "symmetric_uniform", "symmetric_discrete"]},
        "v2": {"type": "number", "exclusiveMinimum": 0},
        "support": {
            "type": "array", "minItems": 1,
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "cutoff": {"type": ["number", "null"], "exclusiveMinimum": 0},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_ENSEMBLE = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "p": {"type": "number", "exclusiveMinimum": 0},
        "alpha": {"type": "number", "minimum": 0, "maximum": 1},
        "law": _LAW,
        "seed": {"type": "integer", "minimum": 0},
        "truncate": {"type": "boolean"},
    },
    "additionalProperties": False,
}


def _requires(experiment: str, *fields: str) -> dict:
    return {"if": {"properties": {"experiment": {"const": experiment}}},
            "then": {"required": list(fields)}}


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "ensemble": _ENSEMBLE,
        "grid": {"type": "array", "minItems": 1, "items": _SIZE},
        "points": {
            "type": "array", "minItems": 1,
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "pairs": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
        },
        "observables": {"type": "array", "items": {"enum": list(mc.OBSERVABLES)}, "minItems": 1},
        "M": {"type": "integer", "minimum": 2},
        "K": {"type": "integer", "minimum": 1},
        "batches": {"type": "integer", "minimum": 2},
        "backend": {"enum": ["lapack", "native", "numpy"]},
        "lambda": {"type": "number"},
        "s": {"type": "number", "exclusiveMinimum": 0},
        "output": {"type": "string", "minLength": 1},
        "threads": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["experiment"],
    "additionalProperties": False,
    "allOf": [
        _requires("semicircle", "ensemble", "K"),
        _requires("variance-scaling", "ensemble", "grid", "points", "M"),
        _requires("covariance", "ensemble", "points", "M"),
        _requires("predictions", "ensemble", "points", "M"),
        _requires("universality", "ensemble"),
    ],
}


class ConfigError(ValueError):
    """Schema or semantic problem in an experiment config."""


def _field_path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = [r for r in err.validator_value if r not in (err.instance or {})]
        parts += missing[:1]
    return "." + ".".join(parts) if parts else "."


def validate_config(raw: dict) -> None:
    """Raise ConfigError naming the offending field, e.g. ``.M``."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(list(e.absolute_path)), str(e.message)))
    if errors:
        # descend into if/then wrappers so the reported path is the real field
        leaf = []
        for e in errors:
            leaf.extend(e.context or [e]) if e.validator in ("allOf", "oneOf") else leaf.append(e)
        first = leaf[0]
        lines = [f"{_field_path(e)}: {e.message}" for e in leaf]
        raise ConfigError(f"config field {_field_path(first)} is invalid\n  " + "\n  ".join(lines))


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    # a sidecar carries its resolved config under "config"
    if isinstance(raw, dict) and "config" in raw and "versions" in raw:
        raw = raw["config"]
    return raw


def resolve_config(raw: dict, *, seed: int | None = None, threads: int | None = None,
                   output: str | None = None, config_path: str | Path | None = None) -> dict:
    """Validate and fill every default; flags beat the env var beats the file."""
    validate_config(raw)
    cfg = json.loads(json.dumps(raw))
    exp = cfg["experiment"]
    ens = cfg.get("ensemble")
    if ens is not None:
        ens_seed = ens.pop("seed", None)
        if "p" not in ens and "alpha" in ens and "n" in ens:
            ens["p"] = float(ens["n"]) ** ens.pop("alpha")
        ens.setdefault("law", {"kind": "gaussian", "v2": 1.0})
        ens["law"] = EntryLaw.from_dict(ens["law"]).to_dict()
        ens.setdefault("truncate", False)
    else:
        ens_seed = None
    if "grid" in cfg:
        cfg["grid"] = [{"n": g["n"], "p": g["p"] if "p" in g else float(g["n"]) ** g["alpha"]}
                       for g in cfg["grid"]]
    if exp in ("semicircle", "covariance", "predictions", "universality") and "n" not in (ens or {}):
        if not (exp == "universality" and "grid" in cfg):
            raise ConfigError("config field .ensemble.n is invalid: required for this experiment")
    cfg["seed"] = int(seed if seed is not None else cfg.get("seed", ens_seed if ens_seed is not None else 0))
    env_threads = os.environ.get(THREADS_ENV)
    if threads is not None:
        cfg["threads"] = int(threads)
    elif env_threads:
        try:
            cfg["threads"] = int(env_threads)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV}={env_threads!r} is not an integer") from exc
    else:
        cfg.setdefault("threads", 1)
    if cfg["threads"] < 1:
        raise ConfigError(f"threads must be at least 1, got {cfg['threads']}")
    if output is not None:
        cfg["output"] = str(output)
    elif "output" not in cfg:
        stem = Path(config_path).stem if config_path else exp
        cfg["output"] = str(Path(config_path).with_name(f"{stem}.csv") if config_path else Path(f"{stem}.csv"))
    cfg.setdefault("backend", "lapack")
    if exp in ("variance-scaling", "covariance", "predictions"):
        cfg.setdefault("batches", 100)
    if exp == "covariance":
        cfg.setdefault("observables", ["g"])
    if exp == "predictions":
        cfg.setdefault("observables", list(mc.OBSERVABLES))
    if exp == "universality":
        cfg.setdefault("lambda", 0.0)
        cfg.setdefault("s", 1.0)
    return cfg


def _ensemble(cfg: dict, size: dict | None = None) -> EnsembleConfig:
    ens = cfg["ensemble"]
    law = EntryLaw.from_dict(ens["law"])
    size = size or ens
    if ens.get("truncate"):
        law = truncated_law(law, float(size["p"]))
    return EnsembleConfig(int(size["n"]), float(size["p"]), law, cfg["seed"])


def _points(cfg: dict) -> tuple[complex, ...]:
    return tuple(complex(re, im) for re, im in cfg["points"])


# --- density table ------------------------------------------------------------

def emit_density_table(study, bins: int = DENSITY_BINS, v2: float | None = None) -> list[dict]:
    """Histogram of the pooled spectrum against the semicircle density.

    Bin width is 4v/bins on a lattice centred at 0 that covers
    [-2v - 0.5, 2v + 0.5]. Densities are normalized over the eigenvalues that
    fall inside the table so that sum(density) * width = 1.
    """
    if isinstance(study, mc.SemicircleStudy):
        ev, v2 = study.eigenvalues, study.cfg.law.variance if v2 is None else v2
    else:
        ev, v2 = np.asarray(study, dtype=float), 1.0 if v2 is None else v2
    v = math.sqrt(v2)
    width = 4.0 * v / bins
    kmax = int(math.floor((2.0 * v + 0.5) / width + 1e-9))
    centers = np.arange(-kmax, kmax + 1) * width
    edges = np.concatenate([centers - width / 2, centers[-1:] + width / 2])
    counts, _ = np.histogram(ev, bins=edges)
    total = counts.sum()
    dens = counts / (total * width) if total else np.zeros_like(centers)
    sc = theory.semicircle_density(centers, v2)
    return [{"bin_center": float(c), "empirical_density": float(d), "semicircle_density": float(s)}
            for c, d, s in zip(centers, dens, sc)]


# --- experiments -------------------------------------------------------------------

def _label(key: tuple) -> str:
    zs = ", ".join(f"{z.real:g}{z.imag:+g}i" for z in key[1:])
    return f"{key[0]}({zs})"


def _mc_rows(result: mc.CampaignResult) -> list[dict]:
    out = []
    for row in result.rows():
        z1, z2, val, th = row["z1"], row["z2"], row["value"], row["theory"]
        out.append({
            "observable": row["observable"],
            "re_z1": z1.real, "im_z1": z1.imag,
            "re_z2": z2.real if z2 is not None else None,
            "im_z2": z2.imag if z2 is not None else None,
            "n": row["n"], "p": row["p"], "M": row["M"],
            "re_value": val.real, "im_value": val.imag, "stderr": row["stderr"],
            "re_theory": th.real, "im_theory": th.imag,
        })
    return out


def _run_semicircle(cfg):
    study = mc.semicircle_study(_ensemble(cfg), cfg["K"], cfg["backend"])
    rows = emit_density_table(study)
    summary = {"ks_mean": study.ks_mean, "ks_pooled": study.ks_pooled,
               "ks_per_sample": study.ks_per_sample.tolist()}
    checks = {"ks_mean < 0.02": study.ks_mean < 0.02, "ks_pooled < 0.02": study.ks_pooled < 0.02}
    return ["bin_center", "empirical_density", "semicircle_density"], rows, summary, checks


def _run_variance(cfg):
    configs = [_ensemble(cfg, g) for g in cfg["grid"]]
    z = _points(cfg)[0]
    out = mc.variance_vs_np(configs, z, cfg["M"], cfg["batches"], cfg["threads"], cfg["backend"])
    cols = ["n", "p", "np", "M", "var", "stderr", "theory", "excluded"]
    summary = {"slope": out["slope"], "intercept": out["intercept"]}
    return cols, out["rows"], summary, {"slope in [-1.15, -0.85]": -1.15 <= out["slope"] <= -0.85}


def _campaign(cfg, observables, covariance):
    pairs = cfg.get("pairs")
    spec = mc.CampaignSpec(_ensemble(cfg), _points(cfg), tuple(observables), cfg["M"], cfg["batches"],
                           tuple(map(tuple, pairs)) if pairs is not None else None,
                           covariance=covariance, backend=cfg["backend"])
    return mc.run_campaign(spec, cfg["threads"], keep_samples=False)


def _run_covariance(cfg):
    res = _campaign(cfg, cfg["observables"], True)
    rows = _mc_rows(res)
    checks = {}
    for key, est in res.estimates.items():
        if key[0] != "C":
            continue
        target = res.theory_value(key)
        tol = max(4 * est.stderr, 0.15 * abs(target))
        checks[f"{_label(key)}: |C - theory| <= max(4 se, 0.15 |theory|)"] = abs(est.value - target) <= tol
    summary = {"C": {_label(k): [e.value.real, e.value.imag, e.stderr]
                     for k, e in res.estimates.items() if k[0] == "C"}}
    return list(mc.CSV_COLUMNS), rows, summary, checks


def _run_predictions(cfg):
    res = _campaign(cfg, cfg["observables"], False)
    rows = _mc_rows(res)
    p = res.spec.cfg.p
    checks, gaps = {}, {}
    for key, est in res.estimates.items():
        gap = abs(est.value - res.theory_value(key))
        gaps[_label(key)] = gap
        checks[f"{_label(key)}: gap <= 3/p + 4 se"] = gap <= 3.0 / p + 4 * est.stderr
    return list(mc.CSV_COLUMNS), rows, {"gaps": gaps}, checks


def _run_universality(cfg):
    law = EntryLaw.from_dict(cfg["ensemble"]["law"])
    sizes = cfg.get("grid") or [{"n": cfg["ensemble"]["n"], "p": cfg["ensemble"]["p"]}]
    lam, s = cfg["lambda"], cfg["s"]
    ref = theory.universality_limit(s)
    rows = []
    for g in sizes:
        n, p = int(g["n"]), float(g["p"])
        l1, l2 = lam - s / (2 * n), lam + s / (2 * n)
        val = theory.density_density_leading(l1, l2, theory.TheoryParams.from_law(law, n, p))
        rows.append({"n": n, "p": p, "s": s, "lambda1": l1, "lambda2": l2,
                     "value": val, "reference": ref, "error": abs(val - ref)})
    errs = [r["error"] for r in sorted(rows, key=lambda r: r["n"])]
    checks = {"largest-n error <= 1e-5": errs[-1] <= 1e-5}
    if len(errs) > 1:
        checks["error strictly decreasing in n"] = all(b < a for a, b in zip(errs, errs[1:]))
    return ["n", "p", "s", "lambda1", "lambda2", "value", "reference", "error"], rows, {"errors": errs}, checks


def _run_identities(cfg):
    rows = identities.identity_suite(cfg["seed"])
    checks = {f"{r['identity']} [{r['case']}]": r["passed"] for r in rows}
    return ["identity", "case", "residual", "tolerance", "passed"], rows, {}, checks


RUNNERS = {
    "semicircle": _run_semicircle,
    "variance-scaling": _run_variance,
    "covariance": _run_covariance,
    "predictions": _run_predictions,
    "universality": _run_universality,
    "identities": _run_identities,
}


# --- output ---------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % (x + 0.0)  # folds -0.0 into 0
    return str(x)


def format_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def versions() -> dict:
    import numba
    import scipy

    return {"dilute_wigner": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__, "numba_enabled": NUMBA_ENABLED}


def _check_writable(path: Path):
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise OSError(f"output directory {parent} does not exist")
    for target in (path, Path(f"{path}.json")):
        if target.exists() and not os.access(target, os.W_OK):
            raise OSError(f"{target} is not writable")
    if not os.access(parent, os.W_OK):
        raise OSError(f"output directory {parent} is not writable")


def execute(cfg: dict) -> tuple[str, dict, bool]:
    """Run a resolved config; returns (csv text, sidecar dict, all checks passed)."""
    t0 = time.perf_counter()
    columns, rows, summary, checks = RUNNERS[cfg["experiment"]](cfg)
    wall = time.perf_counter() - t0
    text = format_csv(columns, rows)
    sidecar = {"config": cfg, "versions": versions(), "wall_time": wall, "summary": summary,
               "checks": {k: bool(v) for k, v in checks.items()}}
    return text, sidecar, all(checks.values())


def run(config_path: str | Path, *, seed: int | None = None, threads: int | None = None,
        check: bool = False, output: str | None = None) -> int:
    try:
        cfg = resolve_config(load_config(config_path), seed=seed, threads=threads,
                             output=output, config_path=config_path)
        out = Path(cfg["output"])
        _check_writable(out)
        text, sidecar, ok = execute(cfg)
        out.write_text(text)
        Path(f"{out}.json").write_text(json.dumps(sidecar, indent=2, default=str) + "\n")
    except (ConfigError, ConfigurationError, mc.UsageError, theory.DomainError) as exc:
        print(f"dilute-wigner: config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"dilute-wigner: {exc}", file=sys.stderr)
        return 1
    if check:
        for name, passed in sidecar["checks"].items():
            print(f"{'PASS' if passed else 'FAIL'}  {name}")
        if not ok:
            return 2
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="dilute-wigner", description=__doc__.splitlines()[0])
    ap.add_argument("config", help="experiment config (JSON) or a previous run's sidecar")
    ap.add_argument("--seed", type=int, help="campaign seed (overrides the config)")
    ap.add_argument("--threads", type=int, help=f"worker processes (overrides {THREADS_ENV} and the config)")
    ap.add_argument("--check", action="store_true", help="evaluate tolerances; exit 2 on failure")
    ap.add_argument("--output", help="CSV path; the sidecar is written to PATH.json")
    args = ap.parse_args(argv)
    return run(args.config, seed=args.seed, threads=args.threads, check=args.check, output=args.output)


if __name__ == "__main__":
    sys.exit(main())
