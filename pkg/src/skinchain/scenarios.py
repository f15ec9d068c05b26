"""Scenario configuration, execution, and tabular artifact emission.

Configs are strict key=value text: unknown keys are rejected, every
validation error is collected before reporting, and parse -> serialize
-> parse is the identity.  Scenario outputs are deterministic: fixed
grids, 17-significant-digit scientific notation, ordered rows, and a
manifest with per-file SHA-256 checksums and solver metadata.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .basis import build_sector
from .bethe import match_to_spectrum, solve_sector
from .liouvillian import (build_effective_liouvillian, build_full_liouvillian,
                          build_projectors, restrict_to_diagonal_sector)
from .observables import (boundary_ratio, density_profile, imbalance,
                          imbalance_deviation, mean_imbalance)
from .params import ModelParams
from .spectra import dense_spectrum, normalized_mean_energy, steady_state

SCENARIOS = ("fig2", "fig3a", "fig3b", "fig4", "verify", "bae-scan", "custom")
WORKERS_ENV = "SKINCHAIN_WORKERS"

PROFILE_HEADER = ["L", "M", "phi", "deltaL", "deltaR", "bc", "site", "density"]
SCALAR_HEADER = ["L", "M", "phi", "deltaL", "deltaR", "bc", "name", "value"]
ROOTS_HEADER = ["bc", "L", "M", "phi", "deltaL", "deltaR", "j",
                "re_k", "im_k", "I_j", "residual", "re_E", "im_E"]


class ConfigError(Exception):
    """Invalid scenario config; carries every detected problem."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ScenarioError(Exception):
    """A sub-solver failed; names the offending parameters and operation."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    L_grid: tuple = ()
    M_rule: str = "L/2"
    phi_grid: tuple = ()
    deltaL_rule: str = "0"
    deltaR_rule: str = "0"
    bc: str = "OBC"
    J: float = 1.0
    dense_cap: int = 4096
    max_iter: int = 200
    tol: float = 1e-12
    out_dir: str = "out"

    def resolve_M(self, L: int) -> int:
        return _eval_m_rule(self.M_rule, L)

    def resolve_deltas(self, L: int, phi: float) -> tuple[float, float]:
        J_L = self.J * math.exp(-phi)
        J_R = self.J * math.exp(phi)
        return (_eval_delta_rule(self.deltaL_rule, J_L, J_R),
                _eval_delta_rule(self.deltaR_rule, J_L, J_R))


_DEFAULTS = {
    "fig2": {"L_grid": (12, 20), "M_rule": "L/2", "bc": "OBC",
             "phi_grid": (0.05, 0.1, 0.3, 0.6, 1.0, 2.0)},
    "fig3a": {"L_grid": (8, 10, 12, 14, 16), "M_rule": "L/2",
              "phi_grid": (0.5,), "deltaL_rule": "0.5*J_L", "bc": "GBC"},
    "fig3b": {"L_grid": (8, 12, 16), "M_rule": "L/4",
              "phi_grid": (0.5,), "deltaL_rule": "0.5*J_L", "bc": "GBC"},
    "fig4": {"L_grid": (6, 8, 10, 12), "M_rule": "L/2",
             "phi_grid": (0.5,), "deltaL_rule": "0.5*J_L",
             "deltaR_rule": "0.5*J_R", "bc": "GBC"},
    "verify": {"L_grid": (2, 3, 4), "phi_grid": (0.0, 0.5, 1.3)},
    "bae-scan": {"L_grid": (4, 5, 6, 7, 8), "M_rule": "1", "phi_grid": (0.5,)},
    "custom": {},
}

_KEY_PARSERS = {
    "scenario": str,
    "L_grid": lambda s: tuple(int(x) for x in s.split(",") if x.strip()),
    "M_rule": str,
    "phi_grid": lambda s: tuple(float(x) for x in s.split(",") if x.strip()),
    "deltaL_rule": str,
    "deltaR_rule": str,
    "bc": str,
    "J": float,
    "dense_cap": int,
    "max_iter": int,
    "tol": float,
    "out_dir": str,
}


def _eval_m_rule(rule: str, L: int) -> int:
    rule = rule.strip()
    if rule.isdigit():
        return int(rule)
    if rule.startswith("L/"):
        div = int(rule[2:])
        if L % div != 0:
            raise ConfigError([f"M_rule {rule!r} does not divide L={L}"])
        return L // div
    raise ConfigError([f"unsupported M_rule {rule!r} (integer or 'L/<d>')"])


def _eval_delta_rule(rule: str, J_L: float, J_R: float) -> float:
    rule = rule.strip()
    if rule.endswith("*J_L"):
        return float(rule[:-4]) * J_L
    if rule.endswith("*J_R"):
        return float(rule[:-4]) * J_R
    return float(rule)


def parse_config_text(text: str) -> ScenarioConfig:
    values: dict = {}
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {raw!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _KEY_PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            values[key] = _KEY_PARSERS[key](val)
        except (ValueError, ConfigError) as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")
    if "scenario" not in values:
        errors.append("missing required key 'scenario'")
    elif values["scenario"] not in SCENARIOS:
        errors.append(f"unknown scenario {values['scenario']!r}; "
                      f"expected one of {', '.join(SCENARIOS)}")
    if errors:
        raise ConfigError(errors)

    merged = dict(_DEFAULTS[values["scenario"]])
    merged.update(values)
    config = ScenarioConfig(**merged)

    if not config.L_grid and config.scenario != "verify":
        errors.append("L_grid is empty")
    if not config.phi_grid:
        errors.append("phi_grid is empty")
    if config.bc not in ("PBC", "OBC", "GBC"):
        errors.append(f"unknown bc {config.bc!r}")
    if config.J <= 0:
        errors.append(f"J must be positive, got {config.J}")
    if config.scenario != "verify":  # verify picks M = max(1, L//2) itself
        for L in config.L_grid:
            try:
                M = config.resolve_M(L)
            except ConfigError as exc:
                errors.extend(exc.errors)
                continue
            if not 0 <= M <= L:
                errors.append(f"M={M} outside [0, L] for L={L}")
    if errors:
        raise ConfigError(errors)
    return config


def parse_config(path) -> ScenarioConfig:
    return parse_config_text(Path(path).read_text())


def serialize_config(config: ScenarioConfig) -> str:
    lines = [f"scenario={config.scenario}"]
    lines.append("L_grid=" + ",".join(str(L) for L in config.L_grid))
    lines.append(f"M_rule={config.M_rule}")
    lines.append("phi_grid=" + ",".join(_fmt(x) for x in config.phi_grid))
    lines.append(f"deltaL_rule={config.deltaL_rule}")
    lines.append(f"deltaR_rule={config.deltaR_rule}")
    lines.append(f"bc={config.bc}")
    lines.append(f"J={_fmt(config.J)}")
    lines.append(f"dense_cap={config.dense_cap}")
    lines.append(f"max_iter={config.max_iter}")
    lines.append(f"tol={_fmt(config.tol)}")
    lines.append(f"out_dir={config.out_dir}")
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    """Full-precision numeric formatting shared by all artifacts."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> int:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([x if isinstance(x, str) else _fmt(x) for x in row])
    path.write_text(buf.getvalue())
    return len(rows)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_grid(fn: Callable, items: Sequence):
    """Deterministic possibly-parallel map (order always preserved)."""
    n = _workers()
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _param_cols(p: ModelParams):
    return [p.L, p.M, p.phi, p.delta_L, p.delta_R, p.bc]


def _steady_record(p: ModelParams):
    basis = build_sector(p.L, p.M)
    op = build_effective_liouvillian(p, basis)
    ss = steady_state(op, basis)
    profile = density_profile(ss.probabilities, basis)
    return p, profile, ss.residual


# ---------------------------------------------------------------------------
# scenario bodies
# ---------------------------------------------------------------------------

def _scenario_fig2(config: ScenarioConfig, out: Path, manifest: dict):
    points = [ModelParams(L=L, M=config.resolve_M(L), J=config.J, phi=phi, bc="OBC")
              for L in config.L_grid for phi in config.phi_grid]
    results = _map_grid(_steady_record, points)
    profile_rows, scalar_rows = [], []
    for p, profile, residual in results:
        for site, value in enumerate(profile, start=1):
            profile_rows.append(_param_cols(p) + [site, value])
        scalar_rows.append(_param_cols(p) + ["imbalance", imbalance(profile)])
        scalar_rows.append(_param_cols(p) + ["steady_residual", residual])
    manifest["notes"] = ("L grid mixes desk scale with L=20 at half filling; "
                         "L=20 uses the sparse steady-state path only")
    return {"profiles.csv": (PROFILE_HEADER, profile_rows),
            "imbalance.csv": (SCALAR_HEADER, scalar_rows)}


def _scenario_fig3a(config: ScenarioConfig, out: Path, manifest: dict):
    phi = config.phi_grid[0]

    def body(L):
        M = config.resolve_M(L)
        dL, dR = config.resolve_deltas(L, phi)
        if dR != 0.0:
            raise ScenarioError("fig3a compares the left-boundary GBC; set deltaR_rule=0")
        pg = ModelParams(L=L, M=M, J=config.J, phi=phi, bc="GBC", delta_L=dL)
        po = ModelParams(L=L, M=M, J=config.J, phi=phi, bc="OBC")
        return pg, imbalance_deviation(pg, po)

    results = _map_grid(body, list(config.L_grid))
    rows = [_param_cols(p) + ["delta_I", dI] for p, dI in results]
    Ls = np.array([p.L for p, _ in results], dtype=float)
    logs = np.log(np.abs([dI for _, dI in results]))
    slope, intercept = np.polyfit(Ls, logs, 1)
    r = float(np.corrcoef(Ls, logs)[0, 1])
    fit_rows = [[0, 0, phi, 0.0, 0.0, "GBC", name, value]
                for name, value in (("slope", slope), ("intercept", intercept),
                                    ("correlation", r))]
    manifest["fit"] = {"slope": slope, "intercept": intercept, "correlation": r}
    return {"delta_imbalance.csv": (SCALAR_HEADER, rows),
            "fit.csv": (SCALAR_HEADER, fit_rows)}


def _scenario_fig3b(config: ScenarioConfig, out: Path, manifest: dict):
    phi = config.phi_grid[0]

    def body(L):
        M = config.resolve_M(L)
        dL, _ = config.resolve_deltas(L, phi)
        pg = ModelParams(L=L, M=M, J=config.J, phi=phi, bc="GBC", delta_L=dL)
        po = ModelParams(L=L, M=M, J=config.J, phi=phi, bc="OBC")
        values = []
        basis = build_sector(L, M)
        for p in (pg, po):
            spec = dense_spectrum(build_effective_liouvillian(p, basis), params=p)
            values.append(normalized_mean_energy(spec))
        return pg, values[0] - values[1]

    results = _map_grid(body, list(config.L_grid))
    rows = []
    for p, dE in results:
        rows.append(_param_cols(p) + ["delta_Ebar", dE])
        rows.append(_param_cols(p) + ["delta_Ebar_times_L", dE * p.L])
    return {"delta_mean_energy.csv": (SCALAR_HEADER, rows)}


def _scenario_fig4(config: ScenarioConfig, out: Path, manifest: dict):
    phi = config.phi_grid[0]

    def body(item):
        L, with_dR = item
        M = config.resolve_M(L)
        dL, dR = config.resolve_deltas(L, phi)
        p = ModelParams(L=L, M=M, J=config.J, phi=phi, bc="GBC",
                        delta_L=dL, delta_R=dR if with_dR else 0.0)
        basis = build_sector(L, M)
        op = build_effective_liouvillian(p, basis)
        ss = steady_state(op, basis)
        profile = density_profile(ss.probabilities, basis)
        spec = dense_spectrum(op, params=p)
        return (p, boundary_ratio(profile), imbalance(profile),
                mean_imbalance(spec.right_vectors, basis))

    items = [(L, with_dR) for with_dR in (False, True) for L in config.L_grid]
    results = _map_grid(body, items)
    rows = []
    for p, ratio, imb, mean_i in results:
        rows.append(_param_cols(p) + ["boundary_ratio", ratio])
        rows.append(_param_cols(p) + ["log_boundary_ratio", math.log(ratio)])
        rows.append(_param_cols(p) + ["imbalance", imb])
        rows.append(_param_cols(p) + ["mean_imbalance", mean_i])
    divergent = [(p.L, math.log(ratio)) for p, ratio, _, _ in results
                 if p.delta_R == 0.0]
    Ls = np.array([x for x, _ in divergent], dtype=float)
    logs = np.array([y for _, y in divergent])
    slope, intercept = np.polyfit(Ls, logs, 1)
    r = float(np.corrcoef(Ls, logs)[0, 1])
    fit_rows = [[0, 0, phi, 0.0, 0.0, "GBC", name, value]
                for name, value in (("log_ratio_slope", slope),
                                    ("log_ratio_intercept", intercept),
                                    ("log_ratio_correlation", r))]
    manifest["fit"] = {"slope": slope, "intercept": intercept, "correlation": r}
    return {"fig4_observables.csv": (SCALAR_HEADER, rows),
            "fit.csv": (SCALAR_HEADER, fit_rows)}


def verify_suite(L_values: Sequence[int] = (2, 3, 4),
                 phi_values: Sequence[float] = (0.0, 0.5, 1.3)) -> list[tuple[str, bool, float]]:
    """Invariant suite: (check name, passed, worst deviation) triples."""
    checks: list[tuple[str, bool, float]] = []
    worst_comm = worst_proj = worst_col = 0.0
    for L in L_values:
        for phi in phi_values:
            p = ModelParams(L=L, M=max(1, L // 2), phi=phi, bc="PBC")
            full = build_full_liouvillian(p)
            A = full.tocsr()
            for site in range(1, p.L + 1):
                ps = build_projectors(p.L, site)
                for proj in (ps.P0, ps.P1, ps.P2):
                    P = proj.tocsr()
                    diff = A @ P - P @ A
                    if diff.nnz:
                        worst_comm = max(worst_comm, float(np.abs(diff.data).max()))
            basis = build_sector(p.L, p.M)
            eff = build_effective_liouvillian(p, basis)
            sub = restrict_to_diagonal_sector(full, basis)
            worst_proj = max(worst_proj, float(eff.max_abs_diff(sub)))
            for bc, dL, dR in (("PBC", 0.0, 0.0), ("OBC", 0.0, 0.0),
                               ("GBC", 0.3, 0.4)):
                q = ModelParams(L=L, M=max(1, L // 2), phi=phi, bc=bc,
                                delta_L=dL, delta_R=dR)
                op = build_effective_liouvillian(q, basis)
                worst_col = max(worst_col, float(np.abs(
                    np.asarray(op.tocsr().sum(axis=0))).max()))
    checks.append(("projector_commutators", worst_comm < 1e-12, worst_comm))
    checks.append(("projection_equality", worst_proj < 1e-12, worst_proj))
    checks.append(("column_sums", worst_col < 1e-12, worst_col))
    return checks


def _scenario_verify(config: ScenarioConfig, out: Path, manifest: dict):
    checks = verify_suite(config.L_grid or (2, 3, 4), config.phi_grid)
    rows = [[0, 0, 0.0, 0.0, 0.0, "PBC", name,
             (1.0 if ok else 0.0)] for name, ok, _ in checks]
    rows += [[0, 0, 0.0, 0.0, 0.0, "PBC", name + "_deviation", worst]
             for name, _, worst in checks]
    manifest["verify"] = {name: bool(ok) for name, ok, _ in checks}
    if not all(ok for _, ok, _ in checks):
        raise ScenarioError("verification failed: "
                            + ", ".join(n for n, ok, _ in checks if not ok))
    return {"verify.csv": (SCALAR_HEADER, rows)}


def roots_to_rows(params: ModelParams, roots) -> list[list]:
    rows = []
    for root in roots:
        for j, k in enumerate(root.k):
            qn = ""
            if root.quantum_numbers is not None and j < len(root.quantum_numbers) \
                    and root.quantum_numbers[j] is not None:
                qn = str(root.quantum_numbers[j])
            rows.append([params.bc, params.L, params.M, params.phi,
                         params.delta_L, params.delta_R, j,
                         k.real, k.imag, qn, root.residual,
                         root.energy.real, root.energy.imag])
    return rows


def _scenario_bae_scan(config: ScenarioConfig, out: Path, manifest: dict):
    rows = []
    coverage = {}
    for L in config.L_grid:
        M = config.resolve_M(L)
        for phi in config.phi_grid:
            dL, dR = config.resolve_deltas(L, phi)
            p = ModelParams(L=L, M=M, J=config.J, phi=phi, bc=config.bc,
                            delta_L=dL if config.bc == "GBC" else 0.0,
                            delta_R=dR if config.bc == "GBC" else 0.0)
            roots = solve_sector(p)
            rows.extend(roots_to_rows(p, roots))
            basis = build_sector(L, M)
            if basis.dim <= config.dense_cap:
                spec = dense_spectrum(build_effective_liouvillian(p, basis),
                                      want_vectors=False)
                tol = 1e-8 if config.bc != "GBC" else 5.0 / L
                rep = match_to_spectrum(roots, spec.eigenvalues, tol=tol)
                coverage[f"L={L},M={M},phi={_fmt(phi)}"] = rep.coverage
    manifest["coverage"] = coverage
    return {"roots.csv": (ROOTS_HEADER, rows)}


def _scenario_custom(config: ScenarioConfig, out: Path, manifest: dict):
    points = []
    for L in config.L_grid:
        M = config.resolve_M(L)
        for phi in config.phi_grid:
            dL, dR = config.resolve_deltas(L, phi)
            points.append(ModelParams(
                L=L, M=M, J=config.J, phi=phi, bc=config.bc,
                delta_L=dL if config.bc == "GBC" else 0.0,
                delta_R=dR if config.bc == "GBC" else 0.0))
    results = _map_grid(_steady_record, points)
    profile_rows, scalar_rows = [], []
    for p, profile, residual in results:
        for site, value in enumerate(profile, start=1):
            profile_rows.append(_param_cols(p) + [site, value])
        scalar_rows.append(_param_cols(p) + ["imbalance", imbalance(profile)])
    return {"profiles.csv": (PROFILE_HEADER, profile_rows),
            "scalars.csv": (SCALAR_HEADER, scalar_rows)}


_BODIES = {
    "fig2": _scenario_fig2,
    "fig3a": _scenario_fig3a,
    "fig3b": _scenario_fig3b,
    "fig4": _scenario_fig4,
    "verify": _scenario_verify,
    "bae-scan": _scenario_bae_scan,
    "custom": _scenario_custom,
}


def run_scenario(config: ScenarioConfig) -> dict:
    """Execute one scenario; returns the manifest written to out_dir."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "scenario": config.scenario,
        "version": __version__,
        "workers": _workers(),
        "files": {},
    }
    tables = _BODIES[config.scenario](config, out, manifest)
    (out / "config.effective").write_text(serialize_config(config))
    for name, (header, rows) in sorted(tables.items()):
        path = out / name
        count = _write_csv(path, header, rows)
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        manifest["files"][name] = {"rows": count, "sha256": digest}
    cfg_digest = hashlib.sha256((out / "config.effective").read_bytes()).hexdigest()
    manifest["files"]["config.effective"] = {"sha256": cfg_digest}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                  sort_keys=True) + "\n")
    return manifest
