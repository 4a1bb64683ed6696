"""Command-line front end.

Subcommands ``verify``, ``identities``, ``sweep`` and ``audit`` print a
report as ``human`` text, ``json`` or ``csv``. Exit status: 0 when every
assertion passes, 1 on an assertion failure, 2 on a configuration error, 3
on a degenerate geometric configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ambient import GeometryError
from .biharmonic import (
    Assertion,
    AuditNotApplicable,
    Tolerances,
    WrongAmbient,
    classify,
    inequality_diagnostics,
    theorem_audit,
)
from .catalog import FAMILIES, ExampleSpec, InvalidExample, NoClosedForm, expected_invariants, make_example
from .hypersurface import DEFAULT_ORDER, InsufficientJetOrder, evaluate, sample_points
from .sweep import SWEEP_COLUMNS, TARGETS, sweep

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3
COMMANDS = ("verify", "identities", "sweep", "audit")

# example parameters: flag name -> converter
EXAMPLE_PARAMS = {
    "m": int,
    "a": float,
    "p": int,
    "q": int,
    "r1": float,
    "r": float,
    "k": int,
    "C": float,
    "scale": float,
    "ambient": str,
}
# run settings with defaults
SETTINGS = {
    "family": (str, None),
    "seed": (int, 42),
    "samples": (int, 50),
    "output": (str, "human"),
    "tol_res": (float, 1e-8),
    "tol_h": (float, 1e-8),
    "rtol": (float, 1e-7),
    "atol": (float, 1e-10),
    "jet_order": (int, DEFAULT_ORDER),
    "epsilon": (float, 1.0),
    "param": (str, None),
    "lo": (float, None),
    "hi": (float, None),
    "steps": (int, 21),
    "refine": (bool, False),
    "target": (str, "normal_res"),
}


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` file with ``#`` comments; keys use flag names."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key.lower() == "c":
            key = "C"
        elif key not in EXAMPLE_PARAMS:
            key = key.lower()
        if key not in EXAMPLE_PARAMS and key not in SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _convert(key: str, value):
    conv = EXAMPLE_PARAMS.get(key) or SETTINGS[key][0]
    if conv is bool:
        return value if isinstance(value, bool) else _parse_bool(str(value))
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional config file and explicit flags (highest)."""
    file_vals = read_config_file(args.config) if args.config else {}
    cfg = {"command": args.command}
    for key, (_, default) in SETTINGS.items():
        cfg[key] = default
    params = {}
    for key, value in file_vals.items():
        if key in EXAMPLE_PARAMS:
            params[key] = _convert(key, value)
        else:
            cfg[key] = _convert(key, value)
    for key in EXAMPLE_PARAMS:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    for key in SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["params"] = params
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["family"] is None:
        raise ConfigError("--family is required")
    if cfg["samples"] < 10:
        raise ConfigError("samples must be at least 10")
    if cfg["jet_order"] < 5:
        raise ConfigError("jet order must be at least 5")
    if cfg["output"] not in ("human", "json", "csv"):
        raise ConfigError("output must be human, json or csv")
    for key in ("tol_res", "tol_h", "rtol", "atol"):
        if not cfg[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if cfg["command"] == "sweep":
        if cfg["param"] is None or cfg["lo"] is None or cfg["hi"] is None:
            raise ConfigError("sweep needs --param, --lo and --hi")
        if cfg["param"] not in EXAMPLE_PARAMS or EXAMPLE_PARAMS[cfg["param"]] is not float:
            raise ConfigError(f"cannot sweep parameter {cfg['param']!r}")
        if not cfg["lo"] < cfg["hi"]:
            raise ConfigError("sweep needs lo < hi")
        if cfg["steps"] < 2:
            raise ConfigError("sweep needs at least 2 steps")
        if cfg["target"] not in TARGETS:
            raise ConfigError(f"sweep target must be one of {', '.join(TARGETS)}")


def _tolerances(cfg: dict) -> Tolerances:
    return Tolerances(tol_res=cfg["tol_res"], tol_H=cfg["tol_h"], rtol=cfg["rtol"], atol=cfg["atol"])


def _example_spec(cfg: dict) -> ExampleSpec:
    spec = ExampleSpec(cfg["family"], dict(cfg["params"]))
    if spec.family == "graph":
        spec.params.setdefault("seed", cfg["seed"])
    return spec


def _evaluation(cfg: dict):
    spec = _example_spec(cfg)
    im = make_example(spec, cfg["jet_order"])
    return spec, evaluate(im, sample_points(im, cfg["samples"], cfg["seed"]))


def _number(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def _max(arr) -> float | None:
    arr = np.asarray(arr, dtype=float)
    arr = arr[np.isfinite(arr)]
    return float(np.max(arr)) if arr.size else None


def _min(arr) -> float | None:
    arr = np.asarray(arr, dtype=float)
    arr = arr[np.isfinite(arr)]
    return float(np.min(arr)) if arr.size else None


# -- commands -----------------------------------------------------------------

def cmd_verify(cfg: dict) -> dict:
    tol = _tolerances(cfg)
    spec, ev = _evaluation(cfg)
    cv = classify(ev, tolerances=tol)
    e = cv.evidence
    out: list[Assertion] = []
    if cv.verdict == "Minimal":
        out.append(Assertion("verdict.minimal", "max |H| < tol_H", e["max_abs_H"] < tol.tol_H, e["max_abs_H"], tol.tol_H))
    if cv.verdict == "ProperBiharmonic":
        out.append(Assertion("verdict.proper", "residual norm < tol_res and max |H| >= tol_H",
                             e["max_residual_norm"] < tol.tol_res and e["max_abs_H"] >= tol.tol_H,
                             e["max_residual_norm"], tol.tol_res))
    try:
        ex = expected_invariants(spec)
    except NoClosedForm:
        ex = None
    if ex is not None:
        for name, got, want in (
            ("closed_form.H", e["mean_H"], ex.H),
            ("closed_form.A_norm_sq", e["mean_A_norm_sq"], ex.A_norm_sq),
            ("closed_form.Scal", e["mean_scal"], ex.Scal),
        ):
            out.append(Assertion(name, "pipeline value equals the closed form", tol.close(got, want),
                                 abs(got - want), tol.bound(got, want)))
        out.append(Assertion("closed_form.verdict", f"expected verdict {ex.verdict}", cv.verdict == ex.verdict))
        e = {**e, "expected_H": ex.H, "expected_A_norm_sq": ex.A_norm_sq, "expected_scal": ex.Scal,
             "expected_verdict": ex.verdict}
    return {"verdict": cv.verdict, "evidence": e, "assertions": out}


def cmd_identities(cfg: dict) -> dict:
    tol = _tolerances(cfg)
    _, ev = _evaluation(cfg)
    rel = ev.identity_residuals().relative()
    bochner = np.abs(ev.bochner_residual()) / np.maximum(ev.bochner_scale(), 1.0)
    hess = ev.hessian_margin()
    newton = ev.newton_margin()
    evidence = {
        "gauss_res": _max(rel["gauss"]),
        "ricci_res": _max(rel["ricci"]),
        "scal_res": _max(rel["scal"]),
        "bochner_res": _max(bochner),
        "hessian_margin": _min(hess),
        "newton_margin": _min(newton),
    }
    out = [
        Assertion("identity.gauss", "Gauss equation", evidence["gauss_res"] < tol.rtol, evidence["gauss_res"], tol.rtol),
        Assertion("identity.ricci", "Ricci curvature relation", evidence["ricci_res"] < tol.rtol, evidence["ricci_res"], tol.rtol),
        Assertion("identity.scal", "scalar curvature relation", evidence["scal_res"] < tol.rtol, evidence["scal_res"], tol.rtol),
        Assertion("identity.bochner", "Bochner formula for |grad H|^2", evidence["bochner_res"] < tol.rtol,
                  evidence["bochner_res"], tol.rtol),
        Assertion("margin.hessian", "|hess H|^2 - (Delta H)^2 / m >= 0", evidence["hessian_margin"] >= -tol.atol,
                  evidence["hessian_margin"], tol.atol),
        Assertion("margin.newton", "|A|^2 - m H^2 >= 0", evidence["newton_margin"] >= -tol.atol,
                  evidence["newton_margin"], tol.atol),
    ]
    try:
        const_scal = classify(ev, tolerances=tol).evidence["scal_stddev"] < tol.tol_einstein
        diag = inequality_diagnostics(ev, epsilon=cfg["epsilon"], constant_scal=const_scal, tolerances=tol)
    except WrongAmbient:
        diag = None
    if diag is not None:
        ric = diag["ric_formula_res"]
        evidence.update(
            ric_formula_res=_max(np.abs(ric)),
            ric_formula_points=int(np.sum(np.isfinite(ric))),
            bochner_lb_margin=_min(diag["bochner_lb_margin"]),
            nonpos_lb_margin=_min(diag["nonpos_lb_margin"]),
            prop_eps_bound=diag["prop_eps_bound"],
            prop_eps_margin=_min(diag["prop_eps_margin"]),
            min_H_sq=diag["min_H_sq"],
        )
    return {"verdict": None, "evidence": evidence, "assertions": out}


def cmd_audit(cfg: dict) -> dict:
    _, ev = _evaluation(cfg)
    rep = theorem_audit(ev, tolerances=_tolerances(cfg))
    return {"verdict": rep.verdict.verdict, "evidence": rep.verdict.evidence, "assertions": rep.assertions}


def cmd_sweep(cfg: dict) -> dict:
    res = sweep(
        _example_spec(cfg),
        cfg["param"],
        cfg["lo"],
        cfg["hi"],
        cfg["steps"],
        refine=cfg["refine"],
        target=cfg["target"],
        samples=cfg["samples"],
        seed=cfg["seed"],
        order=cfg["jet_order"],
        tolerances=_tolerances(cfg),
    )
    evidence = {
        "param": res.param,
        "target": res.target,
        "rows": [r.as_dict() for r in res.rows],
        "brackets": [list(b) for b in res.brackets],
        "roots": res.roots,
    }
    return {"verdict": None, "evidence": evidence, "assertions": []}


HANDLERS = {"verify": cmd_verify, "identities": cmd_identities, "sweep": cmd_sweep, "audit": cmd_audit}


# -- report rendering -----------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (str, type(None))):
        return obj
    return _number(obj)


def build_report(cfg: dict, result: dict) -> dict:
    config = {k: v for k, v in cfg.items() if k != "output"}
    return _clean({
        "config": config,
        "verdict": result["verdict"],
        "evidence": result["evidence"],
        "assertions": [a.as_dict() for a in result["assertions"]],
    })


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    ev = report["evidence"]
    if "rows" in ev:
        w.writerow(SWEEP_COLUMNS)
        for row in ev["rows"]:
            w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
        return buf.getvalue()
    w.writerow(("name", "pass", "value", "tolerance", "anchor"))
    for a in report["assertions"]:
        w.writerow((a["name"], _fmt(a["pass"]), _fmt(a["value"]), _fmt(a["tolerance"]), a["anchor"]))
    return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_human(report: dict) -> str:
    lines = []
    cfg = report["config"]
    params = ", ".join(f"{k}={v}" for k, v in cfg["params"].items())
    lines.append(f"{cfg['command']}: {cfg['family']}({params})  samples={cfg['samples']} seed={cfg['seed']}")
    if report["verdict"] is not None:
        lines.append(f"verdict: {report['verdict']}")
    ev = report["evidence"]
    if "rows" in ev:
        lines.append("  ".join(f"{c:>14}" for c in SWEEP_COLUMNS))
        for row in ev["rows"]:
            cells = [f"{row[c]:>14.8g}" if isinstance(row[c], float) else f"{str(row[c]):>14}" for c in SWEEP_COLUMNS]
            lines.append("  ".join(cells))
        if cfg["refine"]:
            lines.append(f"roots of {ev['target']}: " + (", ".join(f"{r:.9g}" for r in ev["roots"]) or "none"))
        else:
            lines.append(f"sign changes of {ev['target']}: {len(ev['brackets'])}")
    else:
        if "mean_H" in ev:
            lines.append(f"H = {ev['mean_H']:.10g}, |A|^2 = {ev['mean_A_norm_sq']:.10g}, Scal = {ev['mean_scal']:.10g}")
        for k, v in ev.items():
            if k in ("mean_H", "mean_A_norm_sq", "mean_scal"):
                continue
            lines.append(f"  {k}: {v:.6g}" if isinstance(v, float) else f"  {k}: {v}")
    for a in report["assertions"]:
        status = {True: "PASS", False: "FAIL", None: "N/A "}[a["pass"]]
        detail = ""
        if a["value"] is not None:
            detail = f"  value={a['value']:.3g}"
            if a["tolerance"] is not None:
                detail += f" tol={a['tolerance']:.3g}"
        note = f"  ({a['note']})" if a.get("note") else ""
        lines.append(f"[{status}] {a['name']}{detail}{note}")
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "csv": render_csv, "human": render_human}


def exit_status(report: dict) -> int:
    return EXIT_FAIL if any(a["pass"] is False for a in report["assertions"]) else EXIT_OK


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    ex = common.add_argument_group("example")
    ex.add_argument("--family", help=f"one of: {', '.join(FAMILIES)}")
    ex.add_argument("--m", type=int, help="intrinsic dimension")
    ex.add_argument("--a", type=float, help="small-hypersphere radius parameter")
    ex.add_argument("--p", type=int, help="first Clifford factor dimension")
    ex.add_argument("--q", type=int, help="second Clifford factor dimension")
    ex.add_argument("--r1", type=float, help="first Clifford factor radius")
    ex.add_argument("--r", type=float, help="radius (Euclidean sphere/cylinder)")
    ex.add_argument("--k", type=int, help="sphere-factor dimension of a cylinder")
    ex.add_argument("--C", type=float, help="ambient sectional curvature")
    ex.add_argument("--scale", type=float, help="graph scale factor")
    ex.add_argument("--ambient", choices=("space-form", "product"), help="graph ambient")
    run = common.add_argument_group("run")
    run.add_argument("--config", help="key = value file; flags override its entries")
    run.add_argument("--seed", type=int, help="sampling (and graph) seed, default 42")
    run.add_argument("--samples", type=int, help="sample points, default 50")
    run.add_argument("--output", choices=("human", "json", "csv"), help="report format")
    run.add_argument("--tol-res", dest="tol_res", type=float, help="residual tolerance, default 1e-8")
    run.add_argument("--tol-h", dest="tol_h", type=float, help="minimality tolerance, default 1e-8")
    run.add_argument("--rtol", type=float, help="relative tolerance, default 1e-7")
    run.add_argument("--atol", type=float, help="absolute tolerance, default 1e-10")
    run.add_argument("--jet-order", dest="jet_order", type=int, help="jet order (>= 5)")
    run.add_argument("--epsilon", type=float, help="epsilon of the gradient inequality, default 1")

    parser = argparse.ArgumentParser(prog="biharm", description="Biharmonic hypersurface verification engine.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="classify an example and compare with closed forms")
    sub.add_parser("identities", parents=[common], help="curvature identities and inequality margins")
    sub.add_parser("audit", parents=[common], help="check classification statements")
    sw = sub.add_parser("sweep", parents=[common], help="tabulate a one-parameter family")
    sw.add_argument("--param", help="parameter to vary")
    sw.add_argument("--lo", type=float)
    sw.add_argument("--hi", type=float)
    sw.add_argument("--steps", type=int, help="grid size, default 21")
    sw.add_argument("--refine", action="store_true", default=None, help="bisect sign changes")
    sw.add_argument("--target", choices=TARGETS, help="quantity whose roots are bracketed")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(args)
        result = HANDLERS[cfg["command"]](cfg)
    except (ConfigError, InvalidExample, InsufficientJetOrder, AuditNotApplicable, WrongAmbient) as exc:
        print(f"biharm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeometryError as exc:
        print(f"biharm: degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    report = build_report(cfg, result)
    sys.stdout.write(RENDERERS[cfg["output"]](report))
    return exit_status(report)


if __name__ == "__main__":
    sys.exit(main())
