"""Configuration loading, dispatch and report rendering for ``einstein-stability``."""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any

import numpy as np

from . import circle_bundle as cb
from . import homogeneous_sp as hs
from . import product_base as pb
from . import qk_bundle as qk
from . import submersion as sub
from . import torus_bundle as tb
from .errors import (
    ConfigError,
    ConstructionError,
    InvalidParams,
    MRequiresAtLeastThree,
    ParseError,
    SchemaError,
    StabilityError,
)
from .exactnum import Scalar, SymMatrix, is_exact, parse_scalar
from .verdict import DEFAULT_TOL, Verdict, sign_verdict, within_margin
from .verify import run_suites

KINDS = ("submersion", "canonical", "product-base", "torus", "qk", "homog-sp", "circle")
SEED_ENV = "EINSTEIN_STABILITY_SEED"

EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2


@dataclass
class SolverOptions:
    gauge_E: Scalar = 1.0
    starts: int = 32
    seed: int = 0


@dataclass
class AnalysisConfig:
    kind: str
    payload: Any
    mode: str = "exact"
    tol: float = DEFAULT_TOL
    solver: SolverOptions = field(default_factory=SolverOptions)
    action: str | None = None
    echo: dict = field(default_factory=dict)


# parsing


class _Source:
    """Raw config text, used to attach line numbers to field errors."""

    def __init__(self, text: str):
        self.text = text

    def line_of(self, key: str) -> int | None:
        m = re.search(rf'"{re.escape(key)}"\s*:', self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None


class _Reader:
    def __init__(self, raw: dict, exact: bool, source: _Source, prefix: str = "payload"):
        if not isinstance(raw, dict):
            raise SchemaError(f"{prefix} must be an object")
        self.raw = raw
        self.exact = exact
        self.source = source
        self.prefix = prefix

    def _fail(self, key: str, message: str):
        raise ParseError(message, line=self.source.line_of(key), field=f"{self.prefix}.{key}")

    def has(self, key: str) -> bool:
        return key in self.raw and self.raw[key] is not None

    def get(self, key: str, default=None):
        return self.raw.get(key, default)

    def _scalar(self, key: str, value):
        if isinstance(value, Decimal):
            value = str(value)
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            self._fail(key, f"expected a number or 'p/q' string, got {value!r}")
        try:
            return parse_scalar(value, self.exact)
        except (ValueError, ZeroDivisionError, TypeError):
            self._fail(key, f"cannot parse {value!r} as a number")

    def scalar(self, key: str, default=None):
        if not self.has(key):
            if default is not None:
                return default
            raise SchemaError(f"missing field {self.prefix}.{key}")
        return self._scalar(key, self.raw[key])

    def integer(self, key: str, default=None) -> int:
        value = self.raw.get(key, default)
        if value is None:
            raise SchemaError(f"missing field {self.prefix}.{key}")
        if isinstance(value, Decimal) and value == value.to_integral_value():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int):
            self._fail(key, f"expected an integer, got {value!r}")
        return value

    def vector(self, key: str, integer: bool = False, optional: bool = False):
        if not self.has(key):
            if optional:
                return None
            raise SchemaError(f"missing field {self.prefix}.{key}")
        value = self.raw[key]
        if not isinstance(value, list):
            self._fail(key, "expected an array")
        if integer:
            out = []
            for v in value:
                if isinstance(v, Decimal) and v == v.to_integral_value():
                    v = int(v)
                if isinstance(v, bool) or not isinstance(v, int):
                    self._fail(key, f"expected integers, got {v!r}")
                out.append(v)
            return out
        return [self._scalar(key, v) for v in value]

    def matrix(self, key: str, integer: bool = False, optional: bool = False):
        if not self.has(key):
            if optional:
                return None
            raise SchemaError(f"missing field {self.prefix}.{key}")
        value = self.raw[key]
        if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
            self._fail(key, "expected an array of arrays")
        sub_reader = _Reader({key: None}, self.exact, self.source, self.prefix)
        rows = []
        for row in value:
            sub_reader.raw[key] = row
            rows.append(sub_reader.vector(key, integer=integer))
        return rows


def _schema(fn, *args, **kwargs):
    # module validation errors become schema errors naming the invariant
    try:
        return fn(*args, **kwargs)
    except (InvalidParams, ConstructionError, MRequiresAtLeastThree) as exc:
        raise SchemaError(str(exc)) from exc


def _build_payload(kind: str, action: str | None, r: _Reader):
    if kind == "submersion":
        return {k: (r.integer(k) if k in ("n", "r") else r.scalar(k)) for k in ("n", "r", "E", "fiber_scal", "base_scal", "a_norm_sq")}
    if kind == "canonical":
        n, rr = r.integer("n"), r.integer("r")
        if n < 1 or rr < 1:
            raise SchemaError("n and r must be at least 1")
        return {"n": n, "r": rr, "E_hat": r.scalar("E_hat"), "E_check": r.scalar("E_check")}
    if kind == "product-base":
        data = _schema(pb.BaseFactorData.from_lists, r.vector("dims", integer=True), r.vector("scals"), r.vector("a_norm_sqs"))
        return {"data": data, "span": r.matrix("span", optional=True)}
    if kind == "torus":
        config = _schema(
            tb.TorusBundleConfig.build,
            r.vector("dims", integer=True),
            r.vector("q"),
            r.matrix("b", integer=True),
            r.vector("x", optional=True),
            r.matrix("ghat", optional=True),
        )
        return {"config": config, "mu": r.vector("mu", optional=True)}
    if kind == "qk":
        config = _schema(qk.QkConfig.build, r.vector("N", integer=True), r.vector("E"), r.vector("x"), r.vector("lam"))
        _schema(config.require_m3)
        mu = r.vector("mu", optional=True)
        if mu is not None and len(mu) != config.m - 1:
            raise SchemaError(f"mu must have m − 1 = {config.m - 1} entries")
        return {"config": config, "mu": mu}
    if kind == "homog-sp":
        if action == "scan":
            return {"m_max": r.integer("m_max", 12), "q_max": r.integer("q_max", 8)}
        return {"params": _schema(hs.SpFamilyParams, r.integer("m"), r.integer("q"), r.integer("k"))}
    if kind == "circle":
        if action == "f-scan":
            step = r.get("grid_step", "1/100")
            step = Fraction(str(step)) if not isinstance(step, int) else Fraction(step)
            return {"n": r.integer("n"), "grid_step": step}
        if action == "kahler-bound":
            return {k: (r.integer(k) if k == "n" else r.scalar(k)) for k in ("n", "omega_norm_sq", "h_norm_sq", "hJ_pairing")}
        if r.has("omega"):
            pair = _schema(cb.PointwiseTensorPair.build, r.matrix("omega"), r.matrix("hcheck"))
            return {"pair": pair, "D1": r.scalar("D1", 0), "D2": r.scalar("D2", 0)}
        n = r.integer("n")
        spectrum = _schema(cb.OmegaSpectrum.build, n, r.vector("b"))
        E = r.scalar("E") if r.has("E") else None
        return {"spectrum": spectrum, "E": E, "D1": r.scalar("D1", 0), "D2": r.scalar("D2", 0)}
    raise SchemaError(f"unknown kind {kind!r}")


def _decode(text: str) -> dict:
    try:
        raw = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(raw, dict):
        raise SchemaError("config must be a JSON object")
    return raw


def parse_config(text: str, mode: str | None = None, action: str | None = None) -> AnalysisConfig:
    source = _Source(text)
    raw = _decode(text)
    kind = raw.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {', '.join(KINDS)}; got {kind!r}")
    mode = mode or raw.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise SchemaError("mode must be 'exact' or 'float'")
    action = action or raw.get("action")
    top = _Reader(raw, False, source, prefix="config")
    tol = float(top.scalar("tol", DEFAULT_TOL))
    if tol < 0:
        raise SchemaError("tol must be non-negative")
    solver_raw = _Reader(raw.get("solver") or {}, False, source, prefix="solver")
    solver = SolverOptions(
        gauge_E=solver_raw.scalar("gauge_E", 1.0),
        starts=solver_raw.integer("starts", 32),
        seed=solver_raw.integer("seed", 0),
    )
    payload_reader = _Reader(raw.get("payload", {}), mode == "exact", source)
    payload = _build_payload(kind, action, payload_reader)
    echo = json.loads(text, parse_float=str).get("payload", {})
    return AnalysisConfig(kind, payload, mode, tol, solver, action, echo)


def load_config(path: str, mode: str | None = None, action: str | None = None) -> AnalysisConfig:
    """Read, parse and schema-validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, mode=mode, action=action)


# running


def _verdict_entry(report: dict, value, tol: float, name: str):
    verdict = sign_verdict(value, tol)
    if within_margin(value, tol):
        report["warnings"].append(
            f"{name} = {value!r} is negative but inside the float margin 10·tol; reported Inconclusive"
        )
    return verdict


def _new_report(config: AnalysisConfig) -> dict:
    return {
        "kind": config.kind,
        "action": config.action,
        "mode": config.mode,
        "tol": config.tol,
        "inputs": config.echo,
        "quantities": {},
        "verdict": Verdict.INCONCLUSIVE,
        "witness": None,
        "coindex_lower_bound": None,
        "checks": {},
        "provenance": [],
        "warnings": [],
    }


def _run_submersion(config: AnalysisConfig, rep: dict):
    p = config.payload
    tol = 0 if config.mode == "exact" else config.tol
    inv = sub.check_einstein_invariants(**p, tol=tol)
    rep["checks"]["fiber_equation_residual"] = inv.fiber_residual()
    rep["checks"]["base_equation_residual"] = inv.base_residual()
    rep["quantities"]["s"] = inv.total_scal
    rep["provenance"].append("Einstein submersion constraints: ŝ + ‖A‖² = E r, š − 2‖A‖² = E n")
    if config.action == "check":
        return
    value, _ = sub.theorem1_value(inv, config.tol)
    long_form = sub.theorem1_long_form(inv)
    rep["quantities"].update({"r*s_check - 2*n*s_hat": sub.instability_bracket(inv), "value": value})
    rep["checks"]["long_form_matches"] = long_form == value if config.mode == "exact" else abs(long_form - value) <= 1e-9 * max(1, abs(value))
    rep["verdict"] = _verdict_entry(rep, value, config.tol, "value")
    rep["witness"] = sub.THEOREM1_WITNESS
    rep["provenance"].append("instability quantity (2(n+r)/n²)(r š − 2 n ŝ) per unit volume")


def _run_canonical(config: AnalysisConfig, rep: dict):
    p = config.payload
    value, _ = sub.canonical_variation_value(p["n"], p["r"], p["E_hat"], p["E_check"], config.tol)
    rep["quantities"]["value"] = value
    rep["verdict"] = _verdict_entry(rep, value, config.tol, "value")
    rep["witness"] = sub.THEOREM1_WITNESS
    rep["provenance"].append("canonical-variation criterion r n (Ě − 2Ê)")


def _run_product_base(config: AnalysisConfig, rep: dict):
    data = config.payload["data"]
    d = pb.diagonal_coefficients(data)
    Q, inert = pb.coindex_lower_bound(d, config.payload["span"])
    rep["quantities"].update({"d": list(d.d), "Q": Q.tolist(), "inertia": list(inert.as_tuple())})
    pairs = {}
    best = None
    for p in range(data.m):
        for q in range(p + 1, data.m):
            value, _ = pb.pairwise_value(data, p, q, config.tol)
            pairs[f"{p + 1},{q + 1}"] = value
            if best is None or value < best[0]:
                best = (value, p, q)
    rep["quantities"]["pairwise"] = pairs
    rep["coindex_lower_bound"] = inert.n_neg
    verdict = _verdict_entry(rep, best[0], config.tol, "pairwise minimum")
    if verdict is Verdict.UNSTABLE:
        rep["witness"] = pb.pairwise_witness(best[1], best[2])
    elif inert.n_neg > 0:
        verdict = Verdict.UNSTABLE
        rep["witness"] = {"span_coefficients": config.payload["span"] or pb.difference_basis(data.m)}
    rep["verdict"] = verdict
    rep["provenance"].append("diagonal form Σ c_p² (8‖A^(p)‖² − 2 s_p)/n_p² on trace-free combinations")


def _solution_entry(sol: tb.TorusEinsteinSolution) -> dict:
    return {"x": list(sol.config.x), "ghat": sol.config.ghat.tolist(), "E": sol.E, "residual": sol.residual_norm}


def _run_torus(config: AnalysisConfig, rep: dict):
    cfg: tb.TorusBundleConfig = config.payload["config"]
    opts = config.solver
    if cfg.has_metric:
        _, _, E = tb.einstein_system_residual(cfg)
        solutions = [tb.TorusEinsteinSolution(cfg, E, tb.residual_norm(cfg))]
        rep["checks"]["einstein_residual"] = solutions[0].residual_norm
    else:
        solutions = tb.solve_einstein(cfg, float(opts.gauge_E), opts.starts, opts.seed)
        rep["quantities"]["solutions"] = [_solution_entry(s) for s in solutions]
        rep["checks"]["solver_residual_ok"] = all(s.residual_norm <= tb.SOLVER_TOL for s in solutions)
        if len(solutions) > 1:
            rep["warnings"].append(f"{len(solutions)} distinct solutions found; the first is analysed")
        if config.mode == "exact":
            rep["warnings"].append("solved metric is floating point; exact mode applies to inputs only")
    sol = solutions[0]
    rep["quantities"].update(_solution_entry(sol))
    rep["provenance"].append("Einstein system of the torus bundle: horizontal q_i/x_i − C_ii/(2x_i²) = E, vertical ¼ b diag(n/x²) bᵀ = E ĝ⁻¹")
    if config.action == "solve":
        return
    analysis = tb.analyze_coindex(sol, seed=opts.seed)
    asol = analysis.solution
    rep["quantities"].update(
        {
            "factor_order": [i + 1 for i in analysis.permutation],
            "Q": analysis.Q.tolist(),
            "inertia": list(analysis.inertia.as_tuple()),
        }
    )
    rep["coindex_lower_bound"] = analysis.coindex_lower_bound
    rep["checks"]["bound_chain_samples"] = analysis.samples
    rep["checks"]["bound_chain_ok"] = analysis.proof_bound_ok
    if analysis.note:
        rep["warnings"].append(analysis.note)
    k = asol.config.m - asol.config.r
    if k:
        mu = config.payload["mu"] or [1] + [0] * (k - 1)
        value = tb.mu_form_value(asol, mu)
        d = tb.diagonal_form(asol).d
        padded = [0, *mu, 0]
        diag_value = sum(dd * (padded[i + 1] - padded[i]) ** 2 for i, dd in enumerate(d[: k + 1]))
        rep["quantities"]["mu"] = list(mu)
        rep["quantities"]["mu_form_value"] = value
        rep["checks"]["diagonal_route_value"] = diag_value
        rep["checks"]["routes_agree"] = (
            value == diag_value if is_exact(value) else abs(value - diag_value) <= 1e-9 * max(1.0, abs(value))
        )
    rep["verdict"] = analysis.verdict
    if analysis.verdict is Verdict.UNSTABLE:
        rep["witness"] = {"mu": analysis.witness, "direction": "Σ μ_i π*(ǧ_i/n_i − ǧ_{i+1}/n_{i+1}) in sorted factor order"}
    rep["provenance"].append("μ-form Σ Δμ_i² (C_ii/x_i² − 2E)/n_i and its negativity bound chain")


def _run_qk(config: AnalysisConfig, rep: dict):
    cfg: qk.QkConfig = config.payload["config"]
    m = cfg.m
    pairs = {f"{i + 1},{j + 1}": qk.qk_pairwise_value(cfg, i, j, config.tol)[0] for i in range(m) for j in range(i + 1, m)}
    analysis = qk.qk_analyze(cfg)
    rep["quantities"].update(
        {
            "a_norm_sq": [qk.qk_a_norm_sq(cfg, i) for i in range(m)],
            "pairwise": pairs,
            "Q": analysis.Q.tolist(),
            "inertia": list(analysis.inertia.as_tuple()),
        }
    )
    if config.payload["mu"] is not None:
        rep["quantities"]["mu_form_value"] = qk.qk_mu_form_value(cfg, config.payload["mu"])
    rep["coindex_lower_bound"] = analysis.coindex_lower_bound
    rep["checks"]["all_lambda_small"] = analysis.all_lambda_small
    if analysis.note:
        rep["warnings"].append(analysis.note)
    best_key = min(pairs, key=lambda k: pairs[k])
    verdict = _verdict_entry(rep, pairs[best_key], config.tol, "pairwise minimum")
    if verdict is Verdict.UNSTABLE:
        i, j = (int(v) for v in best_key.split(","))
        rep["witness"] = f"π*(ǧ_{i}/4N_{i} − ǧ_{j}/4N_{j})"
    rep["verdict"] = verdict
    rep["provenance"].append("pairwise and μ-forms for (SO(3)×…×SO(3))/ΔSO(3) fibers over quaternionic Kähler products")


def _run_homog(config: AnalysisConfig, rep: dict):
    if config.action == "scan":
        rows = hs.sp_scan(config.payload["m_max"], config.payload["q_max"])
        rep["quantities"]["rows"] = [
            {"m": row.m, "q": row.q, "k": row.k, "value": row.value, "bracket": row.bracket, "verdict": row.verdict}
            for row in rows
        ]
        rep["quantities"]["unstable_count"] = sum(row.verdict is Verdict.UNSTABLE for row in rows)
        rep["checks"]["thresholds_hold"] = True
        rep["provenance"].append("Sp family threshold scan over (m, q, k)")
        if rep["quantities"]["unstable_count"]:
            rep["verdict"] = Verdict.UNSTABLE
            rep["witness"] = hs.WITNESS
        return
    p = config.payload["params"]
    inv = hs.sp_invariants(p)
    value, bracket, verdict = hs.sp_quantity(p)
    rep["quantities"].update(
        {
            "r": inv.r,
            "n": inv.n,
            "s_hat": inv.fiber_scal,
            "s_check": inv.base_scal,
            "E_hat": inv.fiber_einstein,
            "ricci_eigenvalues": list(inv.ricci_eigs),
            "quantity": value,
            "bracket": bracket,
        }
    )
    rep["checks"]["factored_form_matches"] = True
    rep["checks"]["s_check_from_eigenvalues"] = hs.base_scal_from_eigs(p, inv) == inv.base_scal
    rep["verdict"] = verdict
    if verdict is Verdict.UNSTABLE:
        rep["witness"] = hs.WITNESS
    rep["provenance"].append("r š − 2 n ŝ for normal homogeneous Sp(mq) fibrations")


def _run_circle(config: AnalysisConfig, rep: dict):
    p = config.payload
    action = config.action or "pointwise"
    if action == "f-scan":
        scan = cb.simplex_scan(p["n"], p["grid_step"])
        rep["quantities"].update({"max_f": scan.max_value, "argmax": list(scan.argmax), "grid_points": scan.points})
        rep["checks"]["max_nonpositive"] = scan.max_value <= 0
        rep["verdict"] = scan.verdict
        if scan.verdict is Verdict.UNSTABLE:
            rep["witness"] = cb.CIRCLE_WITNESS
        rep["provenance"].append("simplex function f(t) = Σt³ − (1 + 4/n)Σt² + 2/n + 4/n²")
        return
    if action == "kahler-bound":
        value, bound, _ = cb.kahler_bound_value(p["n"], p["omega_norm_sq"], p["h_norm_sq"], p["hJ_pairing"], config.tol)
        rep["quantities"].update({"value": value, "bound": bound})
        rep["checks"]["value_le_bound"] = value <= bound + (0 if config.mode == "exact" else config.tol)
        rep["verdict"] = _verdict_entry(rep, value, config.tol, "value")
        if rep["verdict"] is Verdict.UNSTABLE:
            rep["witness"] = cb.KAHLER_WITNESS
        rep["provenance"].append("Kähler–Einstein base bound −(1/2 − 1/n)‖ω‖²‖ȟ‖²")
        return
    if "pair" in p:
        pair = p["pair"]
        lap, curv = cb.lemma_corrections(pair)
        correction = cb.prop46_correction(pair)
        assembled = cb.pairing(lap, pair.hcheck) - 2 * cb.pairing(curv, pair.hcheck)
        value = cb.theorem15_value(pair.n, pair, p["D1"], p["D2"])
        rep["quantities"].update(
            {
                "lap_corr": lap.tolist(),
                "curv_corr": curv.tolist(),
                "correction": correction,
                "omega_norm_sq": pair.omega_norm_sq(),
                "integrand": value,
            }
        )
        rep["checks"]["assembly_matches"] = bool(assembled == correction) if pair.exact else bool(abs(assembled - correction) <= 1e-9 * max(1.0, abs(correction)))
        rep["provenance"].append("zeroth-order corrections of ∇*∇ and R̊ on pulled-back tensors")
    else:
        spec = p["spectrum"]
        E = p["E"] if p["E"] is not None else spec.omega_norm_sq() / 4
        data = cb.circle_einstein_check(spec.n, E, spec, 0 if config.mode == "exact" else config.tol)
        value = cb.theorem15_value(spec.n, spec, p["D1"], p["D2"])
        _, t = cb.spectrum_to_simplex(spec)
        f, residual = cb.f_value(t, spec.n)
        rep["quantities"].update(
            {
                "E": E,
                "s_check": data.base_scal,
                "ricci_eigenvalues": data.ricci_eigenvalues,
                "t": list(t),
                "f": f,
                "integrand": value,
            }
        )
        rep["checks"]["factorization_residual"] = residual
        rep["checks"]["integrand_equals_2(2E)^3 f"] = (
            value - p["D1"] * 2 + p["D2"] == 2 * (2 * E) ** 3 * f
            if config.mode == "exact"
            else abs(value - 2 * p["D1"] + p["D2"] - 2 * (2 * E) ** 3 * f) <= 1e-9 * max(1.0, abs(value))
        )
        rep["provenance"].append("circle-bundle Einstein condition ‖ω‖² = 4E and š = (n/4 + 1/2)‖ω‖²")
    rep["verdict"] = _verdict_entry(rep, value, config.tol, "integrand")
    if rep["verdict"] is Verdict.UNSTABLE:
        rep["witness"] = cb.CIRCLE_WITNESS
    rep["provenance"].append("pointwise stability integrand of π*(ȟ − (‖ω‖²/n)ǧ)")


_RUNNERS = {
    "submersion": _run_submersion,
    "canonical": _run_canonical,
    "product-base": _run_product_base,
    "torus": _run_torus,
    "qk": _run_qk,
    "homog-sp": _run_homog,
    "circle": _run_circle,
}


def run(config: AnalysisConfig) -> dict:
    """Dispatch ``config`` to its module and assemble a report dict."""
    rep = _new_report(config)
    if config.kind == "torus":
        rep["solver"] = {"gauge_E": config.solver.gauge_E, "starts": config.solver.starts, "seed": config.solver.seed}
    if config.action == "check" and config.kind not in ("submersion",):
        rep["checks"]["schema"] = True
        if config.kind == "torus" and config.payload["config"].has_metric:
            rep["checks"]["einstein_residual"] = tb.residual_norm(config.payload["config"])
        if config.kind == "circle" and "spectrum" in config.payload:
            spec = config.payload["spectrum"]
            E = config.payload["E"] if config.payload["E"] is not None else spec.omega_norm_sq() / 4
            data = cb.circle_einstein_check(spec.n, E, spec, 0 if config.mode == "exact" else config.tol)
            rep["quantities"]["s_check"] = data.base_scal
        return rep
    _RUNNERS[config.kind](config, rep)
    if rep["verdict"] is Verdict.UNSTABLE and rep["witness"] is None:
        raise StabilityError("internal: Unstable verdict without a witness")
    if rep["verdict"] is not Verdict.UNSTABLE and rep["witness"] is not None:
        # a direction that was tried but did not destabilize is not a witness
        rep["quantities"]["tested_direction"] = rep["witness"]
        rep["witness"] = None
    return rep


def error_report(exc: Exception, kind: str | None = None) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("line", "field", "equation", "residual"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    return {"kind": kind, "error": err}


# rendering


def _emit(value, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(value, Verdict):
        return json.dumps(value.value, ensure_ascii=False)
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, np.bool_):
        return json.dumps(bool(value))
    if isinstance(value, Fraction):
        return json.dumps(str(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return json.dumps(repr(value))
        return format(value, ".17g")
    if isinstance(value, Decimal):
        return json.dumps(str(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, SymMatrix):
        value = value.tolist()
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_emit(v, indent, level + 1)}" for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, SymMatrix, np.ndarray)) for v in value):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in value) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in value) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def to_json(report: dict) -> str:
    """Deterministic JSON: sorted keys, rationals as "p/q", floats with 17 significant digits."""
    return _emit(report, 2, 0) + "\n"


def _md_value(value) -> str:
    if isinstance(value, Verdict):
        return value.value
    if isinstance(value, (dict, list, tuple, SymMatrix)):
        return "`" + _emit(value, 0, 0).replace("\n", " ") + "`"
    return _emit(value, 0, 0).strip('"')


def to_markdown(report: dict) -> str:
    if "error" in report:
        err = report["error"]
        lines = ["# Error", "", f"**{err['type']}**: {err['message']}", ""]
        return "\n".join(lines)
    if "suites" in report:
        verdict = "all identities hold" if report["all_passed"] else "failures present"
        lines = [f"# Identity suites (seed {report['seed']})", "", "## Verdict", "", verdict, ""]
        lines += ["| suite | cases | failed |", "| --- | --- | --- |"]
        lines += [f"| {k} | {v['cases']} | {v['failed']} |" for k, v in sorted(report["suites"].items())]
        return "\n".join(lines) + "\n"
    lines = [f"# Stability report: {report.get('kind')}", ""]
    lines += ["## Verdict", "", f"**{_md_value(report['verdict'])}**", ""]
    if report.get("witness") is not None:
        lines += ["## Witness", "", _md_value(report["witness"]), ""]
    if report.get("coindex_lower_bound") is not None:
        lines += ["## Coindex lower bound", "", str(report["coindex_lower_bound"]), ""]
    for section, key in (("Quantities", "quantities"), ("Checks", "checks"), ("Inputs", "inputs")):
        items = report.get(key) or {}
        if items:
            lines += [f"## {section}", "", "| name | value |", "| --- | --- |"]
            lines += [f"| {k} | {_md_value(v)} |" for k, v in sorted(items.items())]
            lines.append("")
    lines += ["## Provenance", ""] + [f"- {p}" for p in report.get("provenance", [])] + [""]
    if report.get("warnings"):
        lines += ["## Warnings", ""] + [f"- {w}" for w in report["warnings"]] + [""]
    return "\n".join(lines)


def render_report(report: dict, format: str = "json") -> str:
    if format == "json":
        return to_json(report)
    if format in ("md", "markdown"):
        return to_markdown(report)
    raise ValueError(f"unknown format {format!r}; use json or md")


# command line


_SUBCOMMANDS = {
    # name: (kind, action)
    "check": (None, "check"),
    "theorem1": ("submersion", None),
    "canonical": ("canonical", None),
    "product-base": ("product-base", None),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--mode", choices=("exact", "float"), help="override the config mode")
    common.add_argument("--format", choices=("json", "md"), default="json")
    common.add_argument("--gauge-E", dest="gauge_E", type=float, help="Einstein constant fixed by the solver")
    common.add_argument("--starts", type=int, help="number of solver starts")
    common.add_argument("--seed", type=int, help=f"random seed (overridden by ${SEED_ENV})")

    parser = argparse.ArgumentParser(prog="einstein-stability", description="Linear-stability verdicts for Einstein metrics of submersion type.")
    sub_p = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        sub_p.add_parser(name, parents=[common])
    torus = sub_p.add_parser("torus").add_subparsers(dest="action", required=True)
    for action in ("solve", "analyze"):
        torus.add_parser(action, parents=[common])
    qk_p = sub_p.add_parser("qk").add_subparsers(dest="action", required=True)
    qk_p.add_parser("analyze", parents=[common])
    homog = sub_p.add_parser("homog").add_subparsers(dest="family", required=True)
    sp = homog.add_parser("sp", parents=[common])
    sp.add_argument("--scan", action="store_true", help="tabulate the whole family")
    sp.add_argument("--m-max", type=int, default=12)
    sp.add_argument("--q-max", type=int, default=8)
    circle = sub_p.add_parser("circle").add_subparsers(dest="action", required=True)
    for action in ("f-scan", "pointwise", "kahler-bound"):
        circle.add_parser(action, parents=[common])
    verify = sub_p.add_parser("verify", parents=[common])
    verify.add_argument("--cases", type=int, default=50)
    return parser


def _seed(args) -> int | None:
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        return int(env)
    return args.seed


def _target(args) -> tuple[str | None, str | None]:
    if args.command in _SUBCOMMANDS:
        return _SUBCOMMANDS[args.command]
    if args.command == "torus":
        return "torus", args.action
    if args.command == "qk":
        return "qk", None
    if args.command == "homog":
        return "homog-sp", "scan" if args.scan else None
    if args.command == "circle":
        return "circle", args.action
    return None, None


def _make_config(args) -> AnalysisConfig:
    kind, action = _target(args)
    if args.config is None:
        if kind == "homog-sp" and action == "scan":
            text = json.dumps({"kind": "homog-sp", "payload": {"m_max": args.m_max, "q_max": args.q_max}})
            return parse_config(text, mode=args.mode, action=action)
        raise ConfigError("--config is required for this command")
    config = load_config(args.config, mode=args.mode, action=action)
    if kind is not None and config.kind != kind:
        raise SchemaError(f"config kind {config.kind!r} does not match command {args.command!r}")
    seed = _seed(args)
    if seed is not None:
        config.solver.seed = seed
    if args.gauge_E is not None:
        config.solver.gauge_E = args.gauge_E
    if args.starts is not None:
        config.solver.starts = args.starts
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        seed = _seed(args)
        report = run_suites(seed=0 if seed is None else seed, cases=args.cases)
        sys.stdout.write(render_report(report, args.format))
        return EXIT_OK if report["all_passed"] else EXIT_ERROR
    kind = None
    try:
        config = _make_config(args)
        kind = config.kind
        report = run(config)
    except (StabilityError, ValueError, np.linalg.LinAlgError) as exc:
        sys.stdout.write(render_report(error_report(exc, kind), args.format))
        return EXIT_ERROR
    sys.stdout.write(render_report(report, args.format))
    return EXIT_WARN if report["warnings"] else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
