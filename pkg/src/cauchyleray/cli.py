"""Command-line experiment driver.

Subcommands ``check-domain``, ``solve``, ``verify`` and ``holder`` read a
JSON configuration, run the corresponding checks and write CSV tables plus
a JSON run report into the output directory.  The exit status is 0 when
every check passes, 1 when some check fails and 2 on a structured error
(bad configuration, violated precondition, unsupported request).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .analysis import (
    DomainRegion,
    EmptyPairsError,
    UnsupportedExponentError,
    check_exponent,
    holder_seminorm,
    structured_pairs,
)
from .checks import (
    calibration_study,
    domain_check,
    gain_study,
    homotopy_study,
    koppelman_study,
    power_gap_study,
    reproducing_study,
)
from .expr import ExpressionError, compile_expression, form_from_expressions
from .geometry.conditions import TAGS, SamplerConfig
from .geometry.domains import DomainError, make_domain
from .kernels import SingularError
from .operators import (
    ConvexityError,
    Discretization,
    OutOfScopeError,
    apply_H,
    apply_T,
    homotopy_residual,
    interior_probes,
    write_solution_csv,
)
from .quadrature import ProximityError, RegionError


class ConfigError(ValueError):
    """The configuration cannot be parsed or is inconsistent."""


STRUCTURED = (ConfigError, ExpressionError, DomainError, ConvexityError, OutOfScopeError,
              UnsupportedExponentError, EmptyPairsError, SingularError, ProximityError,
              RegionError)


# ---------------------------------------------------------------------------
# report


@dataclass
class RunReport:
    command: str
    config: dict
    checks: List[dict] = field(default_factory=list)
    tables: Dict[str, str] = field(default_factory=dict)
    error: Optional[dict] = None
    started: float = field(default_factory=time.time)

    def add(self, name: str, passed: Optional[bool], **detail):
        if any(c["name"] == name for c in self.checks):
            raise ValueError(f"check {name!r} recorded twice")
        status = "skip" if passed is None else ("pass" if passed else "fail")
        self.checks.append({"name": name, "status": status, **_plain(detail)})

    @property
    def failed(self) -> bool:
        return self.error is not None or any(c["status"] == "fail" for c in self.checks)

    def as_dict(self):
        return {"command": self.command, "status": "fail" if self.failed else "pass",
                "checks": self.checks, "tables": self.tables, "error": self.error,
                "config": self.config, "environment": fingerprint(self.config),
                "elapsed_seconds": round(time.time() - self.started, 3)}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def fingerprint(config: dict) -> dict:
    import scipy

    blob = json.dumps(config, sort_keys=True).encode()
    return {"package_version": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__,
            "platform": platform.platform(), "config_sha256": hashlib.sha256(blob).hexdigest()}


def write_csv(path: str, rows, fieldnames=None) -> None:
    rows = list(rows)
    keys = fieldnames or (list(rows[0].keys()) if rows else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k, "")) for k in keys})


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (np.bool_, bool)):
        return str(bool(v))
    if isinstance(v, np.ndarray):
        return " ".join(f"{x:.17g}" for x in np.concatenate([v.real, v.imag]).ravel())
    return v


# ---------------------------------------------------------------------------
# configuration helpers


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def build_domain(spec) -> Any:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("domain must be an object with a 'kind' key")
    params = {k: v for k, v in spec.items() if k != "kind"}
    kind = str(spec["kind"]).lower()
    if kind == "power":
        m = params.get("exponents")
        if m is None or any(float(x) <= 1.0 for x in np.atleast_1d(m)):
            raise ConfigError("power domain requires every exponent m > 1")
    return make_domain(kind, **params)


def _positive(section: dict, key: str, default, kind=float):
    v = section.get(key, default)
    if v is None:
        return None
    try:
        v = kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number") from None
    if v <= 0:
        raise ConfigError(f"{key} must be positive, got {v}")
    return v


def build_discretization(section: dict) -> Discretization:
    res = section.get("resolution", {})
    return Discretization(N=_positive(res, "N", 32, int), radial=_positive(res, "radial", None, int),
                          eps=_positive(res, "eps", 0.05))


def build_probes(dom, section: dict, seed: int):
    spec = section.get("probes", {})
    if "points" in spec:
        pts = np.asarray([[complex(*c) if isinstance(c, list) else complex(c) for c in p]
                          for p in spec["points"]], dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != dom.n:
            raise ConfigError(f"probe points must have {dom.n} complex coordinates")
        return pts
    count = _positive(spec, "count", 8, int)
    return interior_probes(dom, count, seed=int(spec.get("seed", seed)),
                           max_fraction=float(spec.get("max_fraction", 0.7)),
                           min_fraction=float(spec.get("min_fraction", 0.05)))


def build_form(n: int, q: int, data, name="phi"):
    if data is None:
        raise ConfigError("missing data expressions")
    return form_from_expressions(n, q, data, name=name)


def _q(section, n):
    q = section.get("q")
    if not isinstance(q, int) or not 0 <= q <= n:
        raise ConfigError(f"q must be an integer in 0..{n}")
    return q


def _op(section):
    op = str(section.get("operator", "T")).upper()
    if op not in ("T", "H"):
        raise ConfigError("operator must be 'T' or 'H'")
    return op


# ---------------------------------------------------------------------------
# commands


def cmd_check_domain(cfg: dict, out: str, seed: int, threads: int, report: RunReport):
    dom = build_domain(cfg.get("domain"))
    sec = cfg.get("check_domain", {})
    sampler = SamplerConfig(**{**sec.get("sampler", {}), "seed": seed, "workers": threads})
    tags = tuple(sec.get("conditions", TAGS))
    expected = {t: bool(sec.get("expect", {}).get(t, True)) for t in tags}
    rescalings = [compile_expression(e, dom.n) for e in sec.get("rescalings", [])]
    wrapped = [(lambda z, f=f: np.real(f(z))) for f in rescalings]
    chk = domain_check(dom, sampler, tags, expected, wrapped)
    rows = list(chk.report.rows())
    write_csv(os.path.join(out, "conditions.csv"), rows)
    report.tables["conditions"] = "conditions.csv"
    for row in rows:
        tag = row["condition"]
        report.add(f"condition:{tag}", row["holds"] == expected[tag], infimum=row["infimum"],
                   holds=row["holds"], expected=expected[tag], tolerance=chk.report.tolerance,
                   witness_zeta=row["witness_zeta"], witness_z=row["witness_z"])
    if chk.stability is not None:
        for i, (text, ok) in enumerate(zip(sec.get("rescalings", []), chk.stability)):
            report.add(f"stability:{i}", ok, rescaling=text)
    return report


def cmd_solve(cfg: dict, out: str, seed: int, threads: int, report: RunReport):
    dom = build_domain(cfg.get("domain"))
    sec = cfg.get("solve")
    if not isinstance(sec, dict):
        raise ConfigError("missing 'solve' section")
    n, op, q = dom.n, _op(sec), _q(sec, dom.n)
    if op == "H" and q == n:
        raise OutOfScopeError(f"H_{n} on (0,{n})-forms is out of scope")
    phi = build_form(n, q, sec.get("data"))
    dphi = build_form(n, q + 1, sec["dbar_data"], "dbar_phi") if "dbar_data" in sec else None
    disc = build_discretization(sec)
    probes = build_probes(dom, sec, seed)
    if op == "T":
        sol = apply_T(q, phi, probes, dom, disc, threads=threads)
    else:
        sol = apply_H(q, phi, probes, dom, disc, dbar_phi=dphi, threads=threads)
    residuals = None
    if sec.get("residual", False):
        h = _positive(sec.get("resolution", {}), "h", 1e-4)
        rep = homotopy_residual(op, q, phi, probes, dom, disc, h=h, dbar_phi=dphi,
                                closed=bool(sec.get("closed", False)), threads=threads)
        residuals = rep.residual
        bound = float(sec.get("bound_factor", 5.0))
        report.add("homotopy_residual", bool(np.all(rep.residual <= bound * rep.error_estimate)),
                   max_residual=rep.max_residual, max_error_estimate=rep.max_error)
    write_solution_csv(sol, os.path.join(out, "solution.csv"), residuals)
    report.tables["solution"] = "solution.csv"
    report.add("quadrature_error", None, max_error_estimate=float(np.max(sol.errors)))
    if "consistency" in sol.metadata:
        report.add("h0_consistency", bool(np.all(sol.metadata["consistency"] <= 5 * np.max(sol.errors, axis=-1) + 1e-12)),
                   max_discrepancy=float(np.max(sol.metadata["consistency"])))
    if "expect" in sec:
        qo = max(q - 1, 0)
        ref = build_form(n, qo, sec["expect"], "expected")(probes)
        dev = float(np.max(np.abs(sol.values - ref)))
        tol = float(sec.get("tolerance", 1e-3))
        report.add("expected_solution", dev <= tol, max_deviation=dev, tolerance=tol)
    return report


def _data_list(n, q, items):
    if not isinstance(items, list) or not items:
        raise ConfigError("'data' must be a non-empty list")
    return [build_form(n, q, d.get("components") if isinstance(d, dict) else d,
                       d.get("name", f"phi{i}") if isinstance(d, dict) else f"phi{i}")
            for i, d in enumerate(items)]


def cmd_verify(cfg: dict, out: str, seed: int, threads: int, report: RunReport):
    dom = build_domain(cfg.get("domain"))
    sec = cfg.get("verify", {})
    n = dom.n
    if not sec:
        raise ConfigError("'verify' section selects nothing to run")
    if "koppelman" in sec:
        k = sec["koppelman"]
        study = koppelman_study(dom, _positive(k, "points", 50, int),
                                tuple(k.get("steps", (1e-3, 1e-4))), seed,
                                tuple(k.get("order_range", (1.7, 2.3))))
        write_csv(os.path.join(out, "koppelman.csv"), study.rows())
        report.tables["koppelman"] = "koppelman.csv"
        report.add("koppelman_order", study.passed, order=study.order, constant=study.constant,
                   max_residual=float(study.residuals.max()))
    if "homotopy" in sec:
        hs = sec["homotopy"]
        op, q = _op(hs), _q(hs, n)
        fields = _data_list(n, q, hs.get("data"))
        probes = build_probes(dom, hs, seed)
        res = hs.get("resolution", {})
        disc = Discretization(N=_positive(res, "N", 16, int), eps=_positive(res, "eps", 0.05))
        study = homotopy_study(op, q, fields, dom, probes, disc,
                               levels=_positive(hs, "levels", 2, int),
                               h=_positive(res, "h", 1e-4), closed=bool(hs.get("closed", False)),
                               bound_factor=float(hs.get("bound_factor", 5.0)),
                               min_order=float(hs.get("min_order", 1.0)), threads=threads)
        write_csv(os.path.join(out, "homotopy.csv"), study.rows())
        report.tables["homotopy"] = "homotopy.csv"
        report.add(f"homotopy_{op}{q}", study.passed, residual=study.residual,
                   error=study.error, orders=study.orders, ladder=study.ladder)
    if "reproducing" in sec:
        rs = sec["reproducing"]
        fields = _data_list(n, 0, rs.get("data"))
        probes = build_probes(dom, rs, seed)
        study = reproducing_study(fields, dom, probes, tuple(rs.get("ladder", (32, 64))),
                                  float(rs.get("tolerance", 1e-2)),
                                  float(rs.get("min_order", 1.0)), threads)
        write_csv(os.path.join(out, "reproducing.csv"), study.rows())
        report.tables["reproducing"] = "reproducing.csv"
        report.add("reproducing", study.passed, error=study.error, orders=study.orders,
                   consistency=study.consistency)
    return report


def cmd_holder(cfg: dict, out: str, seed: int, threads: int, report: RunReport):
    sec = cfg.get("holder", {})
    if not sec:
        raise ConfigError("'holder' section selects nothing to run")
    for item in sec.get("seminorms", []):
        check_exponent(item.get("a", 0.5))
    if "gain" in sec:
        a = float(sec["gain"].get("a", 0.0))
        if a != 0.0:
            check_exponent(a)
        check_exponent(a + 0.5)
    rows = []
    if "calibration" in sec:
        c = sec["calibration"]
        for r in calibration_study(_positive(c, "pairs", 100_000, int), seed,
                                   float(c.get("fraction", 0.9))):
            r = dict(r)
            r.pop("estimate_obj")
            rows.append(r)
            report.add(f"calibration:{r['function']}", r["passed"], estimate=r["estimate"],
                       true=r["true"])
        write_csv(os.path.join(out, "calibration.csv"), rows)
        report.tables["calibration"] = "calibration.csv"
    if sec.get("seminorms"):
        dom = build_domain(cfg.get("domain"))
        srows = []
        for i, item in enumerate(sec["seminorms"]):
            f = compile_expression(item["expression"], dom.n)
            region = DomainRegion(dom, seed=seed, shrink=float(item.get("shrink", 1.0)))
            ps = structured_pairs(region, _positive(item, "pairs", 10_000, int), seed=seed)
            est = holder_seminorm(f, float(item.get("a", 0.5)), ps, region=region, threads=threads)
            srows.append({"expression": item["expression"], **est.as_row()})
            report.add(f"seminorm:{i}", None, expression=item["expression"],
                       seminorm=est.seminorm)
        write_csv(os.path.join(out, "seminorms.csv"), srows)
        report.tables["seminorms"] = "seminorms.csv"
    if "gain" in sec:
        g = sec["gain"]
        doms = [build_domain(d) for d in g.get("domains", [cfg.get("domain")])]
        study = gain_study(doms, tuple(g.get("family", (0.3, 0.5, 0.7))),
                           _positive(g, "pairs", 300, int), _positive(g, "N", 16, int),
                           float(g.get("shrink", 0.85)), seed, float(g.get("max_drift", 2.0)),
                           threads)
        write_csv(os.path.join(out, "gain.csv"), [r.as_row() for r in study.reports])
        report.tables["gain"] = "gain.csv"
        report.add("gain_bounded", study.passed, recorded_bound=study.bound, drift=study.drift,
                   max_drift=study.max_drift,
                   note="sampled evidence of boundedness, not a proof")
    return report


def cmd_power_gap(cfg: dict, out: str, seed: int, threads: int, report: RunReport):
    """Extra helper used by ``check-domain`` when a ``power_gap`` section is present."""
    rows = []
    for i, m in enumerate(cfg["check_domain"]["power_gap"].get("exponents", [])):
        r = power_gap_study(m, int(cfg["check_domain"]["power_gap"].get("pairs", 100_000)), seed)
        rows.append({k: v for k, v in r.items() if not k.startswith("witness")})
        report.add(f"power_gap:{i}", r["infimum"] > 0, infimum=r["infimum"], exponents=m)
    write_csv(os.path.join(out, "power_gap.csv"), rows)
    report.tables["power_gap"] = "power_gap.csv"


COMMANDS = {"check-domain": cmd_check_domain, "solve": cmd_solve, "verify": cmd_verify,
            "holder": cmd_holder}


# ---------------------------------------------------------------------------
# entry point


def _summary(report: RunReport) -> str:
    lines = [f"{report.command}: {'FAIL' if report.failed else 'PASS'}"]
    for c in report.checks:
        extra = {k: v for k, v in c.items() if k not in ("name", "status")
                 and isinstance(v, (int, float, str, bool))}
        shown = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in list(extra.items())[:4])
        lines.append(f"  [{c['status']:4}] {c['name']}  {shown}")
    if report.error:
        lines.append(f"  error: {report.error['type']}: {report.error['message']}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cauchyleray",
                                description="Integral solution operators for dbar on convex domains.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON configuration file")
        s.add_argument("--out", default="out", help="output directory")
        s.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        s.add_argument("--threads", type=int, default=None, help="worker threads")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    report = RunReport(args.command, {})
    try:
        cfg = load_config(args.config)
        report.config = cfg
        seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
        threads = int(args.threads if args.threads is not None else cfg.get("threads", 1))
        if threads < 1:
            raise ConfigError("threads must be at least 1")
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](cfg, args.out, seed, threads, report)
        if args.command == "check-domain" and "power_gap" in cfg.get("check_domain", {}):
            cmd_power_gap(cfg, args.out, seed, threads, report)
    except STRUCTURED as exc:
        report.error = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConvexityError):
            report.error["condition"] = "r_zeta . (zeta - z) != 0 on (U \\ D) x D"
    except (KeyError, TypeError) as exc:
        report.error = {"type": "ConfigError", "message": f"malformed configuration: {exc}"}
    if os.path.isdir(args.out):
        with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
    print(_summary(report))
    if report.error:
        print(json.dumps({"error": report.error}), file=sys.stderr)
        return 2
    return 1 if report.failed else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
