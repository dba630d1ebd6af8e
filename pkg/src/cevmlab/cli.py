"""Command-line batch runner: ``cevmlab {list,verify,estimate,standardize,scan}``.

Exit codes: 0 success / all expectations met, 2 expectation mismatches,
1 usage or configuration errors.  Machine-readable output goes to stdout,
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import diagnostics as dg
from .estimators import (
    LowCountWarning,
    branch_conditional_hrv_estimate,
    estimate_model,
    standardized_estimate,
)
from .measures import INF
from .scenarios import get_scenario, scenario_ids
from .transforms import evaluate_relation, plan_standardization, pushforward_standardized

SCHEMA_VERSION = 1
CSV_COLUMNS = ("scenario", "model_tag", "t", "x", "y", "value", "std_error", "raw_count", "n", "flags")
MODES = ("analytic", "montecarlo", "both")
EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    scenario_ids: list = field(default_factory=list)
    model_tags: list = field(default_factory=list)
    seed: int = 12345
    n: int = 1_000_000
    t_grid: dict | None = None  # {start, ratio, count}; analytic scans only
    grid_points: list = field(default_factory=list)
    output_dir: str = "cevmlab-out"
    mode: str = "analytic"
    threshold: float = dg.DETECTION_THRESHOLD
    emit_plot_data: bool = False

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}")
        if not isinstance(self.n, int) or self.n < 1:
            raise UsageError("n must be a positive integer")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.t_grid is not None:
            g = self.t_grid
            try:
                start, ratio, count = float(g["start"]), float(g["ratio"]), int(g["count"])
            except (KeyError, TypeError, ValueError):
                raise UsageError("t_grid needs numeric start, ratio, count") from None
            if not start > 0 or not ratio > 1:
                raise UsageError("t_grid needs start > 0 and ratio > 1")
            if count < dg.MIN_SCAN_POINTS:
                raise UsageError(f"t_grid count must be >= {dg.MIN_SCAN_POINTS} for classification")
        known = set(scenario_ids())
        bad = [s for s in self.scenario_ids if s not in known]
        if bad:
            raise UsageError(f"unknown scenario(s): {', '.join(bad)}")
        if self.model_tags:
            tags = {t for s in self.selected() for t in get_scenario(s).models}
            bad = [t for t in self.model_tags if t not in tags]
            if bad:
                raise UsageError(f"unknown model tag(s): {', '.join(bad)}")
        for p in self.grid_points:
            if len(p) != 2:
                raise UsageError("grid_points entries must be (x, y) pairs")
        return self

    def selected(self) -> list:
        return list(self.scenario_ids) or scenario_ids()

    def log_t_grid(self):
        if self.t_grid is None:
            return None
        g = self.t_grid
        return dg.geometric_log_grid(float(g["start"]), float(g["ratio"]), int(g["count"]))


CONFIG_FIELDS = ("scenario_ids", "model_tags", "seed", "n", "t_grid", "grid_points", "output_dir", "mode",
                 "threshold", "emit_plot_data")


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Defaults, then the JSON document at ``path``, then non-None ``overrides``."""
    cfg = RunConfig()
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {path}: {e}") from None
        unknown = set(doc) - set(CONFIG_FIELDS)
        if unknown:
            raise UsageError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        cfg = replace(cfg, **doc)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


# --------------------------------------------------------------------------
# serialization


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (str, int, bool)) or v is None:
        return v
    if hasattr(v, "to_json"):
        return jsonable(v.to_json())
    return str(v)


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _t_field(log_t: float) -> str:
    if log_t == math.inf:
        return "inf"
    return repr(math.exp(log_t)) if log_t < dg.LOG_DOUBLE_MAX else f"exp({log_t!r})"


def _sort_key(row):
    return (row["scenario"], row["model_tag"], row["log_t"], row["x"], row["y"], row["flags"])


def write_results(rows: Sequence[dict], path: Path) -> None:
    """results.csv: a version line, then the fixed header, rows sorted by (scenario, tag, t, x, y)."""
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(rows, key=_sort_key):
        w.writerow([r["scenario"], r["model_tag"], _t_field(r["log_t"]), _fmt(float(r["x"])), _fmt(float(r["y"])),
                    _fmt(r["value"]), _fmt(r["std_error"]), _fmt(r["raw_count"]), _fmt(r["n"]), r["flags"]])
    path.write_text(buf.getvalue())


def _safe_name(*parts) -> str:
    return "__".join(str(p).replace(":", "_").replace("/", "_") for p in parts)


# --------------------------------------------------------------------------
# verify


def _grid_rows(scenario, model, cfg: RunConfig, samples, mode: str) -> list:
    """Point evaluations at user grid points: the limit and, in Monte Carlo mode, one estimate at ``mc_t``."""
    rows = []
    if model.measure is None:
        return rows
    for x, y in cfg.grid_points:
        x, y = float(x), float(y)
        base = dict(scenario=scenario.id, model_tag=model.tag, x=x, y=y)
        try:
            lim = model.limit_value("rect", x, y)
        except Exception as e:  # outside the support of this model
            lim = None
            print(f"{scenario.id}/{model.tag}: grid point ({x}, {y}) skipped: {e}", file=sys.stderr)
        if lim is None:
            continue
        rows.append(dict(base, log_t=math.inf, value=lim, std_error=0.0, raw_count=None, n=None,
                         flags="functional=rect|mode=limit"))
        if mode == "montecarlo" and samples is not None:
            est = estimate_model(samples, model, "rect", model.mc_t, x, y)
            rows.append(dict(base, log_t=math.log(model.mc_t), value=est.value, std_error=est.std_error,
                             raw_count=est.raw_count, n=est.n, flags="functional=rect|mode=montecarlo|grid"))
    return rows


def _plot_rows(res: dg.CheckResult):
    out = []
    for r in res.rows:
        if "probe=" in r["flags"]:
            continue
        se = r["std_error"] or 0.0
        out.append((_t_field(r["log_t"]), r["value"], r["value"] - dg.MC_SIGMAS * se, r["value"] + dg.MC_SIGMAS * se))
    return out


def run_verify(cfg: RunConfig, *, log=sys.stderr) -> tuple[int, list, list]:
    """Run every declared check; returns ``(exit_code, rows, verdicts)``."""
    out = Path(cfg.output_dir)
    (out / "measures").mkdir(parents=True, exist_ok=True)
    if cfg.emit_plot_data:
        (out / "plot").mkdir(exist_ok=True)
    modes = ("analytic", "montecarlo") if cfg.mode == "both" else (cfg.mode,)
    rows, verdicts, relations = [], [], []
    failures = 0
    for sid in cfg.selected():
        sc = get_scenario(sid)
        tags = [t for t in sc.models if not cfg.model_tags or t in cfg.model_tags]
        for tag in tags:
            m = sc.model(tag)
            if m.measure is not None:
                (out / "measures" / f"{_safe_name(sid, tag)}.json").write_text(dump_json(m.measure.to_json()))
        for mode in modes:
            samples = None
            if mode == "montecarlo" and any(c.mc and not (sc.model(t).kind == "hrv" and sc.branches)
                                            for t in tags for c in sc.model(t).checks):
                samples = sc.sample(cfg.seed, cfg.n)
            for tag in tags:
                m = sc.model(tag)
                for c in m.checks:
                    if mode == "montecarlo" and not c.mc:
                        continue
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", LowCountWarning)
                        res = dg.run_check(sc, m, c, mode=mode, samples=samples, seed=cfg.seed, n=cfg.n,
                                           threshold=cfg.threshold,
                                           log_t_grid=cfg.log_t_grid() if mode == "analytic" else None)
                    rows.extend(res.rows)
                    verdicts.append(res.to_json())
                    if not res.passed:
                        failures += 1
                        print(f"MISMATCH {sid}/{tag} {c.functional}({c.x:g}, {c.y:g}) [{mode}]: {res.detail}",
                              file=log)
                    if cfg.emit_plot_data:
                        name = _safe_name(sid, tag, mode, c.functional, f"{c.x:g}", f"{c.y:g}") + ".csv"
                        with open(out / "plot" / name, "w", newline="") as fh:
                            w = csv.writer(fh, lineterminator="\n")
                            w.writerow(("t", "value", "band_lo", "band_hi"))
                            w.writerows(_plot_rows(res))
                rows.extend(_grid_rows(sc, m, cfg, samples, mode))
        if not cfg.model_tags:
            for rel in sc.relations:
                r = evaluate_relation(sc, rel)
                relations.append(r)
                if not r["passed"]:
                    failures += 1
                    print(f"MISMATCH {sid} relation {rel.kind}{rel.tags}: {r['observed']} vs {rel.expected}",
                          file=log)
    write_results(rows, out / "results.csv")
    doc = {"schema_version": SCHEMA_VERSION, "checks": verdicts, "relations": relations,
           "summary": {"checks": len(verdicts), "relations": len(relations), "failures": failures},
           "config": {"seed": cfg.seed, "n": cfg.n, "mode": cfg.mode, "scenarios": cfg.selected()}}
    (out / "verdicts.json").write_text(dump_json(doc))
    return (EXIT_MISMATCH if failures else EXIT_OK), rows, verdicts


# --------------------------------------------------------------------------
# standardize


STANDARDIZE_GRID = tuple((x, y) for x in (0.25, 0.5, 1.0, 2.0) for y in (0.5, 1.0, 2.0))


def standardize_report(sid: str, model_tag: str | None = None, *, n: int = 0, seed: int = 12345) -> dict:
    """Plan, pushforward and optional Monte Carlo cross-check for one scenario."""
    sc = get_scenario(sid)
    src_tag = model_tag or sc.standardize_from or ("cev_xy" if "cev_xy" in sc.models else None)
    report = {"scenario": sid}
    std_models = {t: m for t, m in sc.models.items() if m.kind == "standardized"}
    if src_tag is not None and src_tag in sc.models and sc.model(src_tag).kind.startswith("cev"):
        src = sc.model(src_tag)
        plan = plan_standardization(src.quadruple, sc.x_range, src.measure)
        report["source_model"] = src_tag
        report["plan"] = plan.to_json()
        if plan.feasible and src.measure is not None:
            pf = pushforward_standardized(src.measure, plan)
            report["f_values"] = {repr(x): float(plan.f(x)) for x in _range_points(sc.x_range)}
            report["pushforward"] = pf.to_json()
            target = next((m.measure for m in std_models.values() if m.measure is not None), None)
            if target is not None:
                report["pushforward_vs_registered"] = max(
                    abs(pf.rect_mass(x, y) - target.rect_mass(x, y)) for x, y in STANDARDIZE_GRID)
    else:
        std_f = [m.transform_label for m in sc.models.values() if m.kind == "standardized" and m.transform_label]
        report["plan"] = {"case": "impossible",
                          "reason": "no conditional model with a registered normalization of X"}
        if std_f:
            report["plan"]["reason"] += "; a standardizing f is registered directly"
            report["standardizing_f"] = std_f
    if std_models:
        fam = {}
        for tag, m in std_models.items():
            entry = {"f": m.transform_label or tag}
            if m.measure is not None:
                entry["quadrant"] = {f"{x:g},{y:g}": m.measure.quadrant_mass(x, y) for x, y in STANDARDIZE_GRID}
            else:
                res = [dg.run_check(sc, m, c) for c in m.checks]
                entry["verdicts"] = sorted({r.verdict.kind for r in res})
                entry["limits"] = {f"{r.functional}({r.x:g},{r.y:g})": r.verdict.limit for r in res}
            fam[tag] = entry
        report["standardized_models"] = fam
    cev_side = {}
    for tag, m in sc.models.items():
        if m.kind == "cev_xy" and m.checks and all(c.expected.kind == "degenerate" for c in m.checks):
            res = [dg.run_check(sc, m, c) for c in m.checks]
            cev_side[tag] = {"verdicts": sorted({r.verdict.kind for r in res}),
                             "normalization": m.quadruple.describe()}
    if cev_side:
        report["cev_normalizations"] = cev_side
        report["cev_side"] = ("impossible" if all(set(v["verdicts"]) <= {"degenerate", "oscillates"}
                                                  for v in cev_side.values()) else "possible")
    if n > 0 and std_models:
        samples = sc.sample(seed, n)
        checks = {}
        for tag, m in std_models.items():
            if m.transform is None or m.measure is None:
                continue
            t = m.mc_t
            for x, y in ((2.0, 1.0), (1.0, 2.0)):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", LowCountWarning)
                    est = standardized_estimate(samples, m.transform, t, x, y)
                lim = m.measure.rect_mass(x, y)
                checks[f"{tag}@({x:g},{y:g})"] = {"estimate": est.to_json(), "limit": lim,
                                                  "within_4se": est.within(lim, dg.MC_SIGMAS, floor=1e-12)}
        report["monte_carlo"] = checks
    return report


def _range_points(r):
    if r is None:
        return (1.0, 2.0, 5.0)
    lo, hi = r.lower, r.upper
    if math.isinf(hi):
        return (lo + 1.0, lo + 2.0, lo + 10.0) if math.isfinite(lo) else (1.0, 2.0, 5.0)
    return tuple(float(v) for v in np.linspace(lo, hi, 6)[1:-1])


# --------------------------------------------------------------------------
# estimate / scan


def single_estimate(sid, tag, functional, x, y, t, *, n, seed) -> dict:
    sc = get_scenario(sid)
    m = sc.model(tag)
    out = {"scenario": sid, "model_tag": tag, "functional": functional, "x": x, "y": y, "t": t}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowCountWarning)
        if m.kind == "hrv" and sc.branches:
            est = branch_conditional_hrv_estimate(sc, seed, n, m.scale(t), t, x, y)
        else:
            est = estimate_model(sc.sample(seed, n), m, functional, t, x, y)
    out["estimate"] = est.to_json()
    if m.measure is not None:
        try:
            out["limit"] = m.limit_value(functional, x, y)
        except Exception as e:
            out["limit_error"] = str(e)
    return out


def single_scan(sid, tag, functional, x, y, *, mode, n, seed, log_t_grid, threshold) -> dict:
    sc = get_scenario(sid)
    m = sc.model(tag)
    declared = next((c for c in m.checks if c.functional == functional and c.x == x and c.y == y), None)
    probes = declared.probes if declared is not None else ()
    samples = None
    if mode == "montecarlo" and not (m.kind == "hrv" and sc.branches):
        samples = sc.sample(seed, n)
    fn = dg.make_functional(sc, m, functional, x, y, mode=mode, samples=samples, seed=seed, n=n)
    if log_t_grid is None:
        if mode == "analytic":
            log_t_grid = (declared.scan_log_t if declared is not None and declared.scan_log_t else None) \
                or dg._default_log_t()
        else:
            log_t_grid = dg.mc_log_grid(n, m.mc_t_max)
    cap = math.inf if mode == "analytic" or (m.kind == "hrv" and sc.branches) else \
        math.log(max(n / dg.MC_MIN_EXPECTED_HITS, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LowCountWarning)
        sr = dg.scan(fn, log_t_grid=log_t_grid)
        fits = [dg.probe(fn, p, x=x, y=y, log_t_cap=cap) for p in probes]
    verdict = dg.classify(sr, fits, threshold)
    d = verdict.to_json(scenario=sid, model_tag=tag, functional=functional, point=[x, y], mode=mode)
    d["scan"] = [{"t": _t_field(lt), "value": v, "std_error": se} for lt, v, se in
                 zip(sr.log_t, sr.values, sr.std_errors)]
    return d


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _float(s: str) -> float:
    v = s.strip().lower()
    if v in ("inf", "+inf", "infinity"):
        return INF
    if v in ("-inf", "-infinity"):
        return -INF
    return float(s)


def _point(s: str):
    try:
        x, y = s.split(",")
        return [_float(x), _float(y)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cevmlab", description="Conditional extreme value model laboratory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ls = sub.add_parser("list", help="print the scenario catalog as JSON")
    ls.add_argument("ids", nargs="*", help="filter by scenario id")

    v = sub.add_parser("verify", help="run declared checks and write reports")
    v.add_argument("--config", help="JSON run configuration")
    v.add_argument("--scenario", dest="scenario_ids", action="append", help="scenario id (repeatable)")
    v.add_argument("--model", dest="model_tags", action="append", help="model tag (repeatable)")
    v.add_argument("--mode", choices=MODES)
    v.add_argument("--seed", type=int)
    v.add_argument("--n", type=int)
    v.add_argument("--t-start", type=float)
    v.add_argument("--t-ratio", type=float)
    v.add_argument("--t-count", type=int)
    v.add_argument("--point", dest="grid_points", action="append", type=_point, help="extra x,y grid point")
    v.add_argument("--threshold", type=float)
    v.add_argument("--output-dir", "-o")
    v.add_argument("--emit-plot-data", action="store_true", default=None)
    v.add_argument("--json", action="store_true", help="print the verdict summary to stdout")

    for name, hlp in (("estimate", "one Monte Carlo tail estimate"), ("scan", "scan and classify one functional")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("scenario")
        s.add_argument("model")
        s.add_argument("--functional", default="rect")
        s.add_argument("--x", type=_float, required=True)
        s.add_argument("--y", type=_float, required=True)
        s.add_argument("--seed", type=int, default=12345)
        s.add_argument("--n", type=int, default=1_000_000)
        if name == "estimate":
            s.add_argument("--t", type=float, default=None)
        else:
            s.add_argument("--mode", choices=("analytic", "montecarlo"), default="analytic")
            s.add_argument("--t-start", type=float)
            s.add_argument("--t-ratio", type=float)
            s.add_argument("--t-count", type=int)
            s.add_argument("--threshold", type=float, default=dg.DETECTION_THRESHOLD)

    st = sub.add_parser("standardize", help="standardization report")
    st.add_argument("scenario")
    st.add_argument("model", nargs="?")
    st.add_argument("--n", type=int, default=0, help="Monte Carlo cross-check size (0 disables)")
    st.add_argument("--seed", type=int, default=12345)
    return p


def _t_grid_arg(a):
    vals = (a.t_start, a.t_ratio, a.t_count)
    if all(v is None for v in vals):
        return None
    if any(v is None for v in vals):
        raise UsageError("--t-start, --t-ratio and --t-count go together")
    return {"start": a.t_start, "ratio": a.t_ratio, "count": a.t_count}


def _lookup(sid, tag=None):
    try:
        sc = get_scenario(sid)
        if tag is not None:
            sc.model(tag)
    except KeyError as e:
        raise UsageError(str(e).strip("'\"")) from None
    return sc


def cmd_list(ids: Sequence[str] = ()) -> list:
    known = scenario_ids()
    chosen = [s for s in known if not ids or s in ids]
    out = []
    for sid in chosen:
        sc = get_scenario(sid)
        d = sc.to_json()
        d["expected"] = {tag: [c.describe() for c in m.checks] for tag, m in sc.models.items()}
        d["probes"] = [p.describe() for p in sc.probes]
        out.append(d)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if a.command == "list":
            print(dump_json(cmd_list(a.ids)))
            return EXIT_OK
        if a.command == "verify":
            over = dict(scenario_ids=a.scenario_ids, model_tags=a.model_tags, mode=a.mode, seed=a.seed, n=a.n,
                        t_grid=_t_grid_arg(a), grid_points=a.grid_points, threshold=a.threshold,
                        output_dir=a.output_dir, emit_plot_data=a.emit_plot_data)
            cfg = load_config(a.config, over)
            code, _, verdicts = run_verify(cfg)
            if a.json:
                print(dump_json({"exit_code": code, "checks": len(verdicts),
                                 "failed": [v for v in verdicts if not v["passed"]]}))
            return code
        if a.command == "standardize":
            _lookup(a.scenario, a.model)
            if a.n < 0:
                raise UsageError("n must be non-negative")
            print(dump_json(standardize_report(a.scenario, a.model, n=a.n, seed=a.seed)))
            return EXIT_OK
        sc = _lookup(a.scenario, a.model)
        if a.n < 1:
            raise UsageError("n must be a positive integer")
        if a.command == "estimate":
            t = a.t if a.t is not None else sc.model(a.model).mc_t
            print(dump_json(single_estimate(a.scenario, a.model, a.functional, a.x, a.y, t, n=a.n, seed=a.seed)))
            return EXIT_OK
        grid = _t_grid_arg(a)
        if grid is not None:
            RunConfig(t_grid=grid).validate()
            grid = dg.geometric_log_grid(grid["start"], grid["ratio"], grid["count"])
        print(dump_json(single_scan(a.scenario, a.model, a.functional, a.x, a.y, mode=a.mode, n=a.n, seed=a.seed,
                                    log_t_grid=grid, threshold=a.threshold)))
        return EXIT_OK
    except UsageError as e:
        print(f"cevmlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, NotImplementedError) as e:
        print(f"cevmlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
