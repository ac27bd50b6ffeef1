"""Command-line front end: scenarios, sweeps, deterministic CSV/JSON output.

    einlab bh-fold n=3
    einlab verify n=3 k=1 m=1 --format csv --out verify.csv
    einlab glue-decay n=3 beta=1 R=2,3,4,5
    einlab sweep bh-preimages n=3 k=1 --axis beta --values 2.0,2.4,2.8,3.2,3.6
    einlab run --config previous_output.json

Exit status: 0 success, 2 validation error, 3 numerical-tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bh_family, cusp_glue, fg_expansion, geom_core
from .errors import (
    BelowExtremal,
    ConfigError,
    DegenerateFit,
    DomainError,
    EinlabError,
    NoHorizon,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
SIG_DIGITS = 12


class ValidationError(Exception):
    pass


class ToleranceFailure(Exception):
    pass


def _floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


# per kind: key -> (parser, default)
SCHEMAS = {
    "verify": {
        "n": (int, 3), "k": (int, 1), "m": (float, 1.0), "r_max": (float, 10.0),
        "points": (int, 20), "tol": (float, 1e-8),
    },
    "bh-fold": {"n": (int, 3)},
    "bh-preimages": {"n": (int, 3), "k": (int, 1), "beta": (float, 3.0)},
    "fg-extract": {
        "n": (int, 3), "k": (int, 1), "m": (float, 1.0), "r0": (float, 5.0),
        "rho_min": (float, 1e-3), "rho_max": (float, 0.1), "nodes": (int, 60),
        "order_extra": (int, 4),
    },
    "falloff": {
        "n": (int, 3), "k": (int, 1), "m": (float, 1.0), "r0": (float, 5.0),
        "rho_lo": (float, 1e-3), "rho_hi": (float, 0.1), "samples": (int, 25),
    },
    "glue-decay": {
        "n": (int, 3), "beta": (float, 1.0), "R": (_floats, (2.0, 3.0, 4.0, 5.0)),
        "collar_width": (float, 1.0), "gauge": (str, "reference"),
    },
    "cusp-rates": {
        "n": (int, 3), "beta": (float, 1.0), "s_min": (float, -8.0), "gauge": (str, "cusp"),
    },
}
KINDS = tuple(SCHEMAS)


def fmt_float(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{SIG_DIGITS}g")


def _canonical(value):
    """Round every float to 12 significant digits; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_canonical(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return fmt_float(v)
        return float(fmt_float(v))
    return value


@dataclass(frozen=True)
class Scenario:
    kind: str
    params: dict
    seed: int = 0
    out: str | None = None
    fmt: str = "json"

    def config_lines(self) -> list[str]:
        lines = [f"kind={self.kind}"]
        for key in sorted(self.params):
            lines.append(f"{key}={_param_text(self.params[key])}")
        lines.append(f"seed={self.seed}")
        return lines

    @property
    def input_hash(self) -> str:
        return hashlib.sha256("\n".join(self.config_lines()).encode()).hexdigest()


def _param_text(v) -> str:
    if isinstance(v, tuple):
        return ",".join(fmt_float(x) for x in v)
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def resolve(kind: str, raw: dict, seed: int = 0, out=None, fmt="json") -> Scenario:
    """Validate keys and types against the kind's schema, filling defaults."""
    if kind not in SCHEMAS:
        raise ValidationError(f"unknown scenario kind {kind!r}; choose from {', '.join(KINDS)}")
    if fmt not in ("csv", "json"):
        raise ValidationError(f"unknown format {fmt!r}")
    schema = SCHEMAS[kind]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ValidationError(f"unknown keys for {kind}: {', '.join(unknown)}")
    params = {}
    for key, (parse, default) in schema.items():
        if key in raw:
            try:
                params[key] = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"bad value for {key}: {raw[key]!r} ({exc})") from None
        else:
            params[key] = default
    return Scenario(kind, params, int(seed), out, fmt)


def parse_assignments(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ValidationError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def read_config(path: str) -> dict:
    """Flat key=value text, or the provenance block of a previous output file."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        raw = {"kind": doc["scenario"]["kind"], **doc["scenario"]["config"]}
        if "sweep" in doc:
            raw["sweep_axis"] = doc["sweep"]["axis"]
            raw["sweep_values"] = ",".join(fmt_float(v) for v in doc["sweep"]["values"])
        return raw
    raw = {}
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("# "):
            line = line[2:]
        elif line.startswith("#") or not line:
            continue
        if "=" not in line or line.startswith("input_sha256"):
            continue
        if "," in line.split("=", 1)[0]:
            break  # reached a CSV header
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


# -- pipelines ---------------------------------------------------------------


def _interior_points(metric, count):
    return np.linspace(metric.x_lo, metric.x_hi, count + 2)[1:-1]


def run_verify(p):
    metric = bh_family.build_metric(p["n"], p["k"], p["m"], p["r_max"])
    xs = _interior_points(metric, p["points"])
    res = [geom_core.ricci_cohom_one(metric, float(x)).einstein_residual for x in xs]
    worst = max(res)
    summary = {
        "r_plus": metric.x_lo / (1 + bh_family.HORIZON_MARGIN) if metric.x_lo > 0 else None,
        "beta": metric.theta_length,
        "max_residual": worst,
        "passed": worst < p["tol"],
    }
    rows = [{"r": float(x), "einstein_residual": r} for x, r in zip(xs, res)]
    return summary, rows, worst < p["tol"]


def run_fold(p):
    rec = bh_family.fold_point(p["n"]).as_record()
    return rec, [rec], True


def run_preimages(p):
    masses = bh_family.beta_preimages(p["n"], p["k"], p["beta"])
    betas = [bh_family.beta_of_mass(p["n"], p["k"], m) for m in masses]
    summary = {
        "count": len(masses),
        "m_low": masses[0] if masses else None,
        "m_high": masses[-1] if len(masses) > 1 else None,
        "masses": masses,
    }
    rows = [{"index": i, "m": m, "beta": b} for i, (m, b) in enumerate(zip(masses, betas))]
    return summary, rows, True


def _fg_grid(p):
    return fg_expansion.FGGrid(rho_min=p["rho_min"], rho_max=p["rho_max"], nodes=p["nodes"],
                               order_extra=p["order_extra"])


def run_fg(p):
    metric = bh_family.build_metric(p["n"], p["k"], p["m"], max(10.0, 2 * p["r0"]))
    series = fg_expansion.fg_series(metric, p["r0"], _fg_grid(p))
    rec = series.as_record()
    rec["g1_max"] = float(np.max(np.abs(series.g(1))))
    rows = [
        {"order": j, "theta": float(c[0]), "fiber": float(c[1])}
        for j, c in enumerate(series.coefficients)
    ]
    return rec, rows, True


def run_falloff(p):
    metric = bh_family.build_metric(p["n"], p["k"], p["m"], max(10.0, 2 * p["r0"]))
    grid = fg_expansion.FGGrid(rho_min=min(p["rho_lo"], 1e-3))
    chart = fg_expansion.geodesic_defining_function(metric, p["r0"], grid)
    try:
        fit = fg_expansion.curvature_falloff_exponent(metric, chart, p["rho_lo"], p["rho_hi"], p["samples"])
    except DegenerateFit as exc:
        return {"slope": None, "status": str(exc)}, [], True
    rows = [{"rho": float(r), "deviation": float(d)} for r, d in zip(fit.rho, fit.deviation)]
    return {"slope": fit.slope, "intercept": fit.intercept, "status": "fitted"}, rows, True


def run_glue(p):
    Rs = list(p["R"])
    kw = {"collar_width": p["collar_width"], "gauge": p["gauge"]}
    glued = [cusp_glue.glue(cusp_glue.GlueConfig(p["n"], p["beta"], R, **kw)) for R in Rs]
    sups = [g.residual_sup for g in glued]
    summary = {
        "R": Rs,
        "residual_sup": sups,
        "residual_outside": max(g.residual_outside for g in glued),
        "alpha": [g.alpha for g in glued],
        "slope": None,
    }
    if len(Rs) >= 2:
        summary["slope"] = cusp_glue._log_fit(Rs, sups).slope
    if len(Rs) == 1:
        summary["residual_sup"] = sups[0]
        summary["alpha"] = glued[0].alpha
        summary["R"] = Rs[0]
    rows = [
        {"R": g.config.R, "x": x, "f": f, "h": h, "residual": r}
        for g in glued for (x, f, h, r) in g.profile_rows()
    ]
    return summary, rows, True


def run_cusp(p):
    em = cusp_glue.extremal_metric(p["n"], p["beta"], (p["s_min"], 3.0), gauge=p["gauge"])
    vfit = cusp_glue.v_asymptotic_fit(em)
    conv = cusp_glue.curvature_convergence_rate(em)
    n = p["n"]
    summary = {
        "rate": vfit.rate,
        "rate_expected": 2 * math.sqrt(n),
        "amplitude": vfit.amplitude,
        "amplitude_expected": float(n),
        "convergence_slope": conv.slope,
        "convergence_expected": math.sqrt(n),
        "gauge_offset": em.offset,
    }
    rows = [
        {"s": float(s), "V": em.v_of_s(float(s)), "ratio": float(q), "model_ratio": float(mq)}
        for s, q, mq in zip(vfit.s, vfit.ratio, vfit.model_ratio)
    ]
    return summary, rows, True


PIPELINES = {
    "verify": run_verify,
    "bh-fold": run_fold,
    "bh-preimages": run_preimages,
    "fg-extract": run_fg,
    "falloff": run_falloff,
    "glue-decay": run_glue,
    "cusp-rates": run_cusp,
}

_VALIDATION_ERRORS = (ConfigError, DomainError, NoHorizon, BelowExtremal, ValidationError)


def execute(scenario: Scenario):
    """Run the pipeline; returns (summary, rows). Raises ToleranceFailure on a failed check."""
    summary, rows, ok = PIPELINES[scenario.kind](scenario.params)
    if not ok:
        raise ToleranceFailure(summary)
    return summary, rows


# -- rendering ---------------------------------------------------------------


def _provenance(scenario: Scenario) -> dict:
    config = {k: _param_text(v) for k, v in scenario.params.items()}
    config["seed"] = str(scenario.seed)
    return {"kind": scenario.kind, "config": config, "input_sha256": scenario.input_hash}


def render_json(scenario: Scenario, result) -> str:
    doc = {"scenario": _provenance(scenario), "result": _canonical(result)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_csv(scenario: Scenario, rows: list[dict]) -> str:
    buf = io.StringIO()
    for line in scenario.config_lines():
        buf.write(f"# {line}\n")
    buf.write(f"# input_sha256={scenario.input_hash}\n")
    if rows:
        header = list(rows[0])
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row.get(h)) for h in header])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)) or v is None:
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return ";".join(fmt_float(x) for x in v)
    return str(v)


def emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- sweeps ------------------------------------------------------------------


def _sweep_task(args):
    kind, params, seed = args
    scenario = Scenario(kind, params, seed)
    try:
        summary, _ = execute(scenario)
        return "ok", summary
    except ToleranceFailure as exc:
        return "tolerance", str(exc)
    except EinlabError as exc:
        return "error", f"{type(exc).__name__}: {exc}"


def _scalar_summary(summary: dict) -> dict:
    return {k: v for k, v in summary.items() if not isinstance(v, (list, tuple, dict))}


@dataclass
class SweepResult:
    axis: str
    values: list
    rows: list = field(default_factory=list)
    failed: list = field(default_factory=list)


def sweep(template: Scenario, axis: str, values, workers: int = 1) -> SweepResult:
    """Run the template once per axis value; rows come back sorted by the axis."""
    schema = SCHEMAS[template.kind]
    if axis not in schema:
        raise ValidationError(f"axis {axis!r} is not a key of {template.kind}")
    parse = schema[axis][0]
    if parse not in (int, float, _floats):
        raise ValidationError(f"axis {axis!r} is not numeric")
    cast = float if parse is _floats else parse
    values = sorted(cast(v) for v in values)
    tasks = []
    for v in values:
        params = dict(template.params)
        params[axis] = (v,) if parse is _floats else v
        tasks.append((template.kind, params, template.seed))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_task, tasks))
    else:
        outcomes = [_sweep_task(t) for t in tasks]
    result = SweepResult(axis, values)
    for v, (status, payload) in zip(values, outcomes):
        if status == "ok":
            result.rows.append({axis: v, **_scalar_summary(payload)})
        else:
            result.failed.append({axis: v, "status": status, "detail": payload})
    return result


def render_sweep(template: Scenario, res: SweepResult, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "scenario": _provenance(template),
            "sweep": {"axis": res.axis, "values": _canonical(res.values)},
            "rows": _canonical(res.rows),
            "failed": _canonical(res.failed),
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    header_keys = []
    for row in res.rows:
        for key in row:
            if key not in header_keys:
                header_keys.append(key)
    rows = [{k: row.get(k) for k in header_keys} for row in res.rows]
    text = render_csv(template, rows)
    head = f"# sweep_axis={res.axis}\n# sweep_values={','.join(fmt_float(v) for v in res.values)}\n"
    return head + text


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="einlab", description="Conformally compact Einstein metric lab")
    ap.add_argument("kind", help=f"one of {', '.join(KINDS)}; 'sweep'; or 'run' (kind from --config)")
    ap.add_argument("assignments", nargs="*", help="key=value parameters (for sweep: KIND key=value ...)")
    ap.add_argument("--config", help="flat key=value file, or a previous output to re-run")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--format", default="json", choices=("csv", "json"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0, help="recorded for provenance; affects nothing numerical")
    ap.add_argument("--axis", help="sweep: numeric key to vary")
    ap.add_argument("--values", help="sweep: comma-separated axis values")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        assignments = list(args.assignments)
        raw = read_config(args.config) if args.config else {}
        cfg_kind = raw.pop("kind", None)
        cfg_axis, cfg_values = raw.pop("sweep_axis", None), raw.pop("sweep_values", None)
        axis = args.axis or cfg_axis
        values = args.values if args.values is not None else cfg_values
        is_sweep = args.kind == "sweep"
        kind = args.kind
        if is_sweep:
            kind = assignments.pop(0) if assignments and "=" not in assignments[0] else cfg_kind
        elif kind == "run":
            kind = cfg_kind
        if kind is None:
            raise ValidationError("no scenario kind given")
        seed = int(raw.pop("seed", args.seed))
        raw.update(parse_assignments(assignments))
        scenario = resolve(kind, raw, seed=seed, out=args.out, fmt=args.format)

        if is_sweep:
            if not axis or values is None:
                raise ValidationError("sweep requires --axis and --values")
            if args.workers < 1:
                raise ValidationError("--workers must be >= 1")
            res = sweep(scenario, axis, values.split(","), args.workers)
            emit(render_sweep(scenario, res, args.format), args.out)
            if res.failed:
                for f in res.failed:
                    print(f"sweep failure at {axis}={f[axis]}: {f['detail']}", file=sys.stderr)
                return EXIT_NUMERICAL
            return EXIT_OK

        summary, rows = execute(scenario)
        text = render_json(scenario, summary) if args.format == "json" else render_csv(scenario, rows)
        emit(text, args.out)
        return EXIT_OK
    except _VALIDATION_ERRORS as exc:
        print(f"einlab: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ToleranceFailure as exc:
        print(f"einlab: tolerance check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except EinlabError as exc:
        print(f"einlab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
