"""Command-line front end: ``kahlerstab {verify,classify,density,table}``.

Exit codes: 0 when every check passes (or data was emitted), 1 when a
numerical check fails, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("weitzenbock", "kahler", "soliton", "all")
FORMATS = ("json", "csv", "md")
KAHLER_IDS = ("kahler_conformal", "weitz_j_inv", "weitz_j_anti")


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        from importlib.metadata import version

        return f"artifact {version('artifact')}"
    except Exception:  # not installed: running from a source tree
        return "artifact (source tree)"


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    suite: str = "all"
    points: int = 5
    seed: int = 0
    tol: float = 1e-5
    format: str = "json"
    output_path: str | None = None
    a_param: float | None = None
    lam: float | None = None
    scal: float | None = None
    case: str = "bccd"
    polytope_path: str | None = None
    c_values: tuple[float, ...] = (1.0,)

    def validate(self) -> None:
        if self.points < 1:
            raise UsageError("--points must be at least 1")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.a_param is not None and not 0.0 <= self.a_param <= 1.0:
            raise UsageError("--a must lie in [0, 1]")
        if self.seed < 0:
            raise UsageError("--seed must be nonnegative")


@dataclass
class Report:
    command: str
    columns: list[str]
    entries: list[dict] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        flags = [e["pass"] for e in self.entries if "pass" in e and e["pass"] is not None]
        passed = sum(bool(f) for f in flags)
        return {"total": len(self.entries), "passed": passed, "failed": len(flags) - passed}

    def as_dict(self) -> dict:
        return {"command": self.command, "entries": self.entries, "summary": self.summary,
                "provenance": self.provenance, "notes": self.notes}


# -- rendering -------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_json_safe(report.as_dict()), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.columns)
        for e in report.entries:
            writer.writerow([_fmt(e.get(c)) for c in report.columns])
        return buf.getvalue()
    lines = ["| " + " | ".join(report.columns) + " |", "|" + "---|" * len(report.columns)]
    for e in report.entries:
        lines.append("| " + " | ".join(_fmt(e.get(c)) for c in report.columns) + " |")
    s = report.summary
    lines += ["", f"{s['passed']} passed, {s['failed']} failed, {s['total']} rows"]
    lines += [f"- {n}" for n in report.notes]
    return "\n".join(lines) + "\n"


# -- verify ------------------------------------------------------------------------------

VERIFY_COLUMNS = ["id", "point", "a", "lhs_norm", "rhs_norm", "abs_err", "rel_err", "pass"]


def _entry(identity, k, a, lhs, rhs, abs_err, rel_err, ok):
    return {"id": identity, "point": k, "a": a, "lhs_norm": float(lhs), "rhs_norm": float(rhs),
            "abs_err": float(abs_err), "rel_err": float(rel_err), "pass": bool(ok)}


def cmd_verify(cfg: RunConfig) -> tuple[Report, int]:
    from .chart.fields import random_field, stream
    from .chart.geometry import kahler_form_field, soliton_residual, trace_field
    from .chart.identities import REGISTRY, random_fields_for, verify_identity
    from .chart.models import UnknownModelError, get_model
    from .curvature import outer_arr
    from .kahler import div_equivalence, lf_splitting_defect, ricci_form_field, weighted_harmonic_check

    if cfg.model is None:
        raise UsageError("verify needs --model")
    if cfg.suite not in SUITES:
        raise UsageError(f"unknown suite {cfg.suite!r}")
    try:
        model = get_model(cfg.model)
    except UnknownModelError as exc:
        raise UsageError(str(exc.args[0])) from None
    if cfg.suite == "kahler" and not model.is_kahler:
        raise UsageError(f"model {model.name} is not Kahler")

    points = model.sample_points(stream(cfg.seed, model.name, "points"), cfg.points)
    a_values = (cfg.a_param,) if cfg.a_param is not None else (0.0, 0.5, 1.0)
    report = Report("verify", VERIFY_COLUMNS, provenance=_provenance(cfg))
    general = [i for i, s in REGISTRY.items() if not s.kahler]
    want_general = cfg.suite in ("weitzenbock", "all")
    want_kahler = cfg.suite in ("kahler", "all") and model.is_kahler
    want_soliton = cfg.suite in ("soliton", "all")

    for k, x in enumerate(points):
        if want_soliton:
            res = soliton_residual(model, x).entries
            scale = max(1.0, abs(model.lam))
            err = float(np.linalg.norm(res))
            report.entries.append(_entry("soliton_residual", k, None, err, 0.0, err, err / scale, err / scale <= 1e-6))
        ids = (general if want_general else []) + (list(KAHLER_IDS) if want_kahler else [])
        for iid in ids:
            fields = random_fields_for(model, iid, stream(cfg.seed, model.name, iid, k))
            for a in (a_values if REGISTRY[iid].uses_a else (None,)):
                r = verify_identity(model, iid, fields, x, a=a, tol=cfg.tol)
                report.entries.append(_entry(iid, k, a, r.lhs_norm, r.rhs_norm, r.abs_err, r.rel_err, r.passed))
        if want_kahler:
            rng = stream(cfg.seed, model.name, "kahler-extra", k)
            gamma = random_field(model, rng, "form-2", "11")
            de = div_equivalence(model, gamma, x)
            rel = de.residual / de.scale
            report.entries.append(_entry("div_equivalence", k, None, de.div_f_norm, de.delta_norm, de.residual, rel,
                                         rel <= cfg.tol))
            om = kahler_form_field(model)
            h_inv = trace_field(model, lambda y: outer_arr(gamma(y), om(y)))
            s_anti = random_field(model, rng, "biform", "anti")
            for label, h, part in (("lf_preserves_invariant", h_inv, "invariant"),
                                   ("lf_preserves_anti", trace_field(model, s_anti), "anti")):
                wrong, total = lf_splitting_defect(model, h, x, part)
                rel = wrong / max(total, 1e-300)
                report.entries.append(_entry(label, k, None, total, 0.0, wrong, rel, rel <= cfg.tol))
            hc = weighted_harmonic_check(model, ricci_form_field(model), x, tol=cfg.tol)
            err = max(hc.d_gamma, hc.delta_f0_gamma, hc.type_11_defect)
            report.entries.append(_entry("ricci_form_harmonic", k, None, hc.scale, 0.0, err, err / hc.scale, hc.harmonic))
    s = report.summary
    return report, EXIT_OK if s["failed"] == 0 else EXIT_FAIL


def _provenance(cfg: RunConfig) -> dict:
    return {"seed": cfg.seed, "tol": cfg.tol, "model": cfg.model, "version": _version()}


# -- classify ---------------------------------------------------------------------------------

CLASSIFY_COLUMNS = ["source", "lambda", "scal", "mu_1", "mu_2", "mu_3", "verdict", "neutral_count",
                    "trace", "trace_expected", "einstein_equality"]


def cmd_classify(cfg: RunConfig) -> tuple[Report, int]:
    from .chart.models import UnknownModelError, get_model
    from .stability import (
        WeightedCurvatureInput,
        default_eps,
        kahler_orbifold_spectrum,
        orbifold_verdict,
        ordered_spectrum,
        trace_identity_check,
        weighted_selfdual,
    )

    report = Report("classify", CLASSIFY_COLUMNS, provenance=_provenance(cfg))
    if cfg.model is not None:
        try:
            model = get_model(cfg.model)
        except UnknownModelError as exc:
            raise UsageError(str(exc.args[0])) from None
        x = 0.5 * (model.lower + model.upper)
        inp = WeightedCurvatureInput.soliton_at(model, x, a=cfg.a_param or 0.0)
        lam = model.lam if cfg.lam is None else cfg.lam
        scal = inp.scal
        spectrum, _ = ordered_spectrum(weighted_selfdual(inp), kahler=model.is_kahler)
        source = f"model {model.name} at the chart centre"
    else:
        if cfg.lam is None or cfg.scal is None:
            raise UsageError("classify needs --model or both --lambda and --scal")
        lam, scal = cfg.lam, cfg.scal
        spectrum = np.array(kahler_orbifold_spectrum(lam, scal))
        inp = WeightedCurvatureInput.soliton(np.diag([scal / 3.0, -scal / 6.0, -scal / 6.0]), scal, lam)
        source = "Kahler point data"
    eps = default_eps(lam, scal)
    # round away discretization residue before it reaches the report
    spectrum = [_round(float(v), eps) for v in spectrum]
    verdict = orbifold_verdict(spectrum, eps)
    tr = trace_identity_check(inp)
    report.entries.append({
        "source": source, "lambda": float(lam), "scal": _round(scal, eps), "mu_1": spectrum[0], "mu_2": spectrum[1],
        "mu_3": spectrum[2], "verdict": verdict.kind, "neutral_count": verdict.neutral_count,
        "trace": _round(tr.trace, eps), "trace_expected": _round(tr.expected, eps),
        "einstein_equality": bool(abs(scal - 2.0 * lam) <= 1e-8 * (1.0 + abs(lam))),
    })
    return report, EXIT_OK


def _round(value: float, eps: float) -> float:
    """Round to 10 significant digits so finite-difference noise does not leak into reports."""
    if abs(value) <= eps:
        return 0.0
    return float(f"{value:.10g}")


# -- density -------------------------------------------------------------------------------------

DENSITY_COLUMNS = ["case", "c", "F", "c_star", "F_min", "theta", "theta_published", "pass"]
PUBLISHED_THETA = {"gaussian": 1.0, "sphere4": 0.8120, "cyl-s3xr": 0.7910, "cyl-s2xr2": 0.7358, "fubini-study": 0.6090}
BCCD_THETA, BCCD_C = 0.5617, 0.6438


def cmd_density(cfg: RunConfig) -> tuple[Report, int]:
    from .density import (
        DivergentIntegralError,
        NoMinimizerError,
        Polyhedron2,
        PolytopeFormatError,
        bccd_density,
        closed_form_density,
        minimize_density,
        weighted_volume,
    )

    report = Report("density", DENSITY_COLUMNS, provenance=_provenance(cfg))
    if cfg.case == "bccd":
        r = bccd_density()
        ok = abs(r.theta - BCCD_THETA) <= 5e-4 and abs(r.c_star - BCCD_C) <= 1e-3
        report.entries.append({"case": "bccd", "c_star": r.c_star, "F_min": r.F_min, "theta": r.theta,
                               "theta_published": BCCD_THETA, "pass": ok})
    elif cfg.case == "catalog":
        for name, published in PUBLISHED_THETA.items():
            theta = closed_form_density(name)
            report.entries.append({"case": name, "theta": theta, "theta_published": published,
                                   "pass": round(theta, 4) == published})
    elif cfg.case == "polytope":
        if not cfg.polytope_path:
            raise UsageError("--case polytope needs --polytope-path")
        try:
            poly = Polyhedron2.load(cfg.polytope_path)
        except (PolytopeFormatError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        try:
            for c in cfg.c_values:
                report.entries.append({"case": "polytope", "c": c, "F": weighted_volume(poly, c)})
        except DivergentIntegralError as exc:
            report.notes.append(f"divergent integral: {exc}")
            return report, EXIT_FAIL
        try:
            r = minimize_density(poly)
            report.entries.append({"case": "polytope-min", "c_star": r.c_star, "F_min": r.F_min})
        except NoMinimizerError as exc:
            report.notes.append(f"no finite minimizer: {exc}")
    else:
        raise UsageError(f"unknown density case {cfg.case!r}")
    return report, EXIT_OK if report.summary["failed"] == 0 else EXIT_FAIL


# -- table -----------------------------------------------------------------------------------------

TABLE_COLUMNS = ["Name", "Topology", "K", "E", "P", "Θ(published)", "Θ(computed)", "Stab"]


def cmd_table(cfg: RunConfig) -> tuple[Report, int]:
    from .density import density_table_report

    report = Report("table", TABLE_COLUMNS, provenance=_provenance(cfg))
    for row in density_table_report():
        report.entries.append({
            "Name": row.name, "Topology": row.topology, "K": "K" if row.kahler else "",
            "E": "E" if row.einstein else "", "P": "P" if row.product else "",
            "Θ(published)": row.theta_published,
            "Θ(computed)": None if row.theta_computed is None else float(f"{row.theta_computed:.6f}"),
            "Stab": row.stability,
        })
    return report, EXIT_OK


# -- entry point -------------------------------------------------------------------------------------

COMMANDS = {"verify": cmd_verify, "classify": cmd_classify, "density": cmd_density, "table": cmd_table}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kahlerstab", description="Weitzenbock identities, orbifold stability and central densities")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=FORMATS, default="json")
        p.add_argument("--output", dest="output_path")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-5)

    p = sub.add_parser("verify", help="run an identity suite on a model")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--a", dest="a_param", type=float)

    p = sub.add_parser("classify", help="orbifold stability verdict")
    common(p)
    p.add_argument("--model")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--scal", type=float)
    p.add_argument("--a", dest="a_param", type=float)

    p = sub.add_parser("density", help="central densities")
    common(p)
    p.add_argument("--case", choices=("bccd", "catalog", "polytope"), default="bccd")
    p.add_argument("--polytope-path")
    p.add_argument("--c", dest="c_values", type=float, nargs="+", default=[1.0])

    p = sub.add_parser("table", help="the central density table")
    common(p)
    return parser


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    if "c_values" in ns:
        ns["c_values"] = tuple(ns["c_values"])
    cfg = RunConfig(**ns)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code else EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report, code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, cfg.format)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_FAIL:
        for e in report.entries:
            if e.get("pass") is False:
                print(f"FAILED: {e.get('id', e.get('case'))} {json.dumps(_json_safe(e), sort_keys=True)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
