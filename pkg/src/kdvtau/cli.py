"""``kdvtau`` command line.

Each run resolves a single JSON config document (``--config``) with flag
overrides, echoes the resolved config into ``report.json`` and exits with
0 (pass), 2 (tolerance failure, data still written) or 1 (usage or config
error).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernel, pde, soliton, stochastic
from .errors import RepresentationInvalidError
from .fredholm import LCNormWarning
from .stochastic import McConfig

COMMANDS = ("soliton", "fredholm", "verify-mc", "residual")
EXIT_PASS, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2

DEFAULTS = {
    "soliton": {"scattering": [[math.sqrt(2.0), 1.0]], "grid": "-4:0.005:1601,0:0.001:11",
                "tolerance": 1e-3, "u_source": "closed-form"},
    "fredholm": {"measure": {"atoms": [[1.0, 2.0]]}, "grid": "0.5:0.125:21,0:0.025:5",
                 "tolerance": 1e-7},
    "verify-mc": {"checks": ["levy-area", "gaussian-r0", "gaussian-soliton"], "tolerance": 3.0},
    "residual": {"source": {"scattering": [[math.sqrt(2.0), 1.0]],
                            "grids": ["-2:0.02:201,0:0.02:11", "-2:0.01:401,0:0.01:21"]},
                 "tolerance": 1e-2},
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    out: str = "kdvtau-out"
    grid: str | None = None
    nodes: int = 64
    L: float = 1.0
    lam: float = 1.0
    tolerance: float | None = None
    convention: str = "kdv-minus2"
    scattering: list | None = None
    measure: dict | None = None
    u_source: str = "closed-form"
    checks: list = field(default_factory=list)
    tau: list = field(default_factory=list)
    source: dict | None = None
    mc: McConfig = field(default_factory=McConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mc"] = self.mc.to_dict()
        return d


def resolve_config(args) -> RunConfig:
    doc: dict = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    if doc.get("command", args.command) != args.command:
        raise ConfigError(f"config is for {doc['command']!r}, not {args.command!r}")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**DEFAULTS[args.command], **{k: v for k, v in doc.items() if k != "mc"}}
    mc = dict(doc.get("mc", {}))
    for flag, key in (("out", "out"), ("grid", "grid"), ("nodes", "nodes"), ("tolerance", "tolerance")):
        if getattr(args, flag) is not None:
            merged[key] = getattr(args, flag)
    if args.seed is not None:
        mc["seed"] = args.seed
    if args.paths is not None:
        mc["paths"] = args.paths
    unknown_mc = set(mc) - {"paths", "steps", "seed", "antithetic"}
    if unknown_mc:
        raise ConfigError(f"unknown mc keys: {sorted(unknown_mc)}")
    merged["command"] = args.command
    try:
        return RunConfig(**merged, mc=McConfig.from_dict(mc))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, arrays become lists."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(_clean(doc), indent=2) + "\n")


def _grid(cfg: RunConfig) -> pde.GridSpec:
    return pde.GridSpec.parse(cfg.grid)


def _scattering(pairs) -> soliton.ScatteringData:
    return soliton.ScatteringData.from_pairs(pairs or [])


def cmd_soliton(cfg: RunConfig, out: Path) -> list[dict]:
    sd = _scattering(cfg.scattering)
    spec = _grid(cfg)
    tau = pde.GridField.from_function(lambda x, t: soliton.tau_soliton(sd, x, t), spec)
    if cfg.u_source == "closed-form":
        u = pde.GridField.from_function(lambda x, t: soliton.u_soliton(sd, x, t), spec)
    elif cfg.u_source == "stencil":
        u = pde.u_from_tau(tau, "kdv-minus2")
    else:
        raise ConfigError(f"u_source must be 'closed-form' or 'stencil', got {cfg.u_source!r}")
    res = pde.kdv_residual(u)
    (out / "tau.csv").write_text(tau.to_csv())
    (out / "u.csv").write_text(u.to_csv())
    summary = {"max_kdv_residual": res.max_abs(), "grid": str(spec), "convention": "kdv-minus2"}
    _write_json(out / "residual_summary.json", summary)
    return [{"name": "kdv_residual", **summary, "u_source": cfg.u_source, "tolerance": cfg.tolerance,
             "pass": summary["max_kdv_residual"] <= cfg.tolerance}]


def cmd_fredholm(cfg: RunConfig, out: Path) -> list[dict]:
    mu = kernel.SpectralMeasure.from_dict(cfg.measure)
    spec = _grid(cfg)
    tau = np.empty((spec.nx, spec.nt))
    ok = np.empty((spec.nx, spec.nt))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", LCNormWarning)
        for i, x in enumerate(spec.x):
            for j, t in enumerate(spec.t):
                tau[i, j] = kernel.tau_poppe(mu, x, t, cfg.lam, cfg.nodes, cfg.L)
                ok[i, j] = float(kernel.admissibility_check(mu, x, t).ok)
    tau_f = pde.GridField(spec.x0, spec.dx, spec.t0, spec.dt, tau)
    adm = tau_f.with_values(ok)
    (out / "tau_poppe.csv").write_text(tau_f.to_csv())
    (out / "admissible.csv").write_text(adm.to_csv())
    result = {"name": "tau_poppe", "grid": str(spec), "nodes": cfg.nodes, "lambda": cfg.lam,
              "admissible_cells": int(ok.sum()), "cells": int(ok.size),
              "lc_warnings": sum(issubclass(w.category, LCNormWarning) for w in caught)}
    if mu.is_atomic:
        sd = soliton.ScatteringData.from_pairs([[math.sqrt(m), k] for k, m in mu.atoms])

        def closed(x, t):
            # det(I + lam A') with A' = A - I
            return soliton._det(np.eye(sd.size) + cfg.lam * (soliton.soliton_matrix(sd, x, t) - np.eye(sd.size)))

        ref = pde.GridField.from_function(closed, spec)
        (out / "tau_soliton.csv").write_text(ref.to_csv())
        delta = np.abs(tau - ref.values)
        max_adm = float(delta[ok == 1].max()) if ok.any() else 0.0
        result.update(max_abs_delta=float(delta.max()), max_abs_delta_admissible=max_adm,
                      tolerance=cfg.tolerance, **{"pass": max_adm <= cfg.tolerance})
    else:
        result["pass"] = bool(np.all(tau > 0))
    return [result]


def _cauchy_mu(d):
    return kernel.SpectralMeasure.from_dict(d)


def _mc_check(spec, base: McConfig):
    """Return ``(estimate, oracle)`` for one named check."""
    if isinstance(spec, str):
        spec = {"name": spec}
    params = dict(spec)
    name = params.pop("name")
    mc = params.pop("mc", None)
    cfg = McConfig.from_dict({**base.to_dict(), **(mc or {})})
    if name == "levy-area":
        lam = np.array(params.get("lam", [0.5]), dtype=float)
        C = np.array(params.get("C", np.zeros((lam.size, lam.size)).tolist()), dtype=float)
        return name, stochastic.mc_levy_area(lam, C, cfg), stochastic.levy_area_target(lam, C)
    if name == "levy-area-kdv":
        _, lam, C = soliton.kdv_aihara_data(params.get("eta", [0.5, 0.8]), params.get("m", [0.6, 0.5]),
                                            params.get("x", 0.0), params.get("t", 0.0))
        return name, stochastic.mc_levy_area(lam, C, cfg), stochastic.levy_area_target(lam, C)
    if name == "gaussian-r0":
        cov = soliton.cauchy_covariance(params.get("kappa", [0.5, 1.0]))
        R = np.zeros(cov.shape[0])
        return name, stochastic.mc_gaussian_quadratic(R, cov, cfg), 1.0
    if name == "gaussian-soliton":
        sd = _scattering(params.get("scattering", [[1.0, 0.5], [1.0, 1.0]]))
        x, t = params.get("x", 0.5), params.get("t", 0.0)
        R, cov = soliton.gaussian_weights(sd, x, t), soliton.cauchy_covariance(sd.kappa)
        return name, stochastic.mc_gaussian_quadratic(R, cov, cfg), stochastic.gaussian_quadratic_target(R, cov)
    if name == "ikeda-taniguchi":
        p, c = params.get("p", [-1.0]), params.get("c", [1.0])
        a, x = params.get("a", 1.0), params.get("x", 1.0)
        return name, stochastic.ikeda_taniguchi_mc(p, c, a, x, cfg), stochastic.ikeda_taniguchi_det(p, c, a, x)
    if name == "privault":
        phi = np.array(params.get("phi", [[0.5, 0.1], [0.1, 0.3]]), dtype=float)
        return name, stochastic.finite_dim_privault_check(phi, cfg), stochastic.privault_target(phi)
    if name == "tau-cauchy":
        mu = _cauchy_mu(params.get("measure", {"density": {"family": "uniform", "support": [1, 2]}}))
        x, t = params.get("x", 2.0), params.get("t", 0.0)
        est = stochastic.mc_tau_cauchy(mu, x, t, cfg)
        return name, est, kernel.tau_poppe(mu, x, t) ** -0.5
    raise ConfigError(f"unknown check {name!r}")


def cmd_verify_mc(cfg: RunConfig, out: Path) -> list[dict]:
    results = []
    for spec in cfg.checks:
        label = spec if isinstance(spec, str) else spec.get("name")
        try:
            name, est, oracle = _mc_check(spec, cfg.mc)
        except RepresentationInvalidError as exc:
            results.append({"name": label, "skipped": True, "reason": str(exc), "pass": True})
            continue
        z = est.z_score(oracle)
        results.append({"name": name, "estimate": est.mean, "stderr": est.stderr, "oracle": oracle,
                        "z_score": z, "paths_used": est.paths_used, "pass": abs(z) <= cfg.tolerance})
    return results


def _residual_fields(tau: pde.GridField, convention: str):
    u = pde.u_from_tau(tau, convention)
    res = pde.kdv4_residual(u) if convention == "kdv4-minus4" else pde.kdv_residual(u)
    hirota = pde.hirota_residual(tau) if convention == "kdv-minus2" else None
    return u, res, hirota


def cmd_residual(cfg: RunConfig, out: Path) -> list[dict]:
    if cfg.tau:
        if len(cfg.tau) > 2:
            raise ConfigError("residual takes one or two tau CSV files")
        try:
            taus = [pde.GridField.from_csv(Path(p).read_text()) for p in cfg.tau]
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        src = cfg.source or {}
        sd = _scattering(src.get("scattering", []))
        grids = [cfg.grid] if cfg.grid else src.get("grids", [])
        if not 1 <= len(grids) <= 2:
            raise ConfigError("source needs one or two grids")
        taus = [pde.GridField.from_function(lambda x, t: soliton.tau_soliton(sd, x, t), pde.GridSpec.parse(g))
                for g in grids]
    taus.sort(key=lambda f: -f.dx)
    results, fields = [], []
    for k, tau in enumerate(taus):
        u, res, hirota = _residual_fields(tau, cfg.convention)
        fields.append(res)
        (out / f"u_{k}.csv").write_text(u.to_csv())
        (out / f"kdv_residual_{k}.csv").write_text(res.to_csv())
        entry = {"name": f"grid_{k}", "grid": str(tau.spec), "convention": cfg.convention,
                 "max_kdv_residual": res.max_abs()}
        if hirota is not None:
            (out / f"hirota_residual_{k}.csv").write_text(hirota.to_csv())
            entry["max_hirota_relative"] = hirota.max_abs()
        results.append(entry)
    finest = results[-1]
    summary = {"name": "summary", "max_kdv_residual": finest["max_kdv_residual"], "tolerance": cfg.tolerance}
    if len(fields) == 2:
        summary["convergence_order"] = pde.convergence_order(fields[0], fields[1])
    summary["pass"] = finest["max_kdv_residual"] <= cfg.tolerance
    return results + [summary]


HANDLERS = {"soliton": cmd_soliton, "fredholm": cmd_fredholm, "verify-mc": cmd_verify_mc,
            "residual": cmd_residual}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdvtau", description="KdV tau functions: determinants, "
                                     "Gaussian expectations and residual checks.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config document")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
    parser.add_argument("--nodes", type=int, help="quadrature nodes")
    parser.add_argument("--paths", type=int, help="Monte Carlo paths")
    parser.add_argument("--grid", help='grid "x0:dx:nx,t0:dt:nt"')
    parser.add_argument("--tolerance", type=float, help="pass threshold")
    return parser


def _join_grid(argv):
    # grids often start with a minus sign, which argparse would read as an option
    argv = list(sys.argv[1:] if argv is None else argv)
    out = []
    it = iter(argv)
    for a in it:
        if a == "--grid":
            out.append("--grid=" + next(it, ""))
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_join_grid(argv))
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        results = HANDLERS[cfg.command](cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"kdvtau {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    passed = all(r.get("pass", True) for r in results)
    report = {"command": cfg.command, "config": cfg.to_dict(), "results": results, "pass": passed}
    _write_json(out / "report.json", report)
    print(json.dumps(_clean(report), indent=2))
    return EXIT_PASS if passed else EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
