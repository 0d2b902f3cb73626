"""Command-line front end.

One JSON config document drives every command; flags only pick the command,
the config path, the output directory and verbosity, so runs are
reproducible from a single artifact.  All emitted files are deterministic:
floats are written with shortest round-trip repr and JSON keys are sorted.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 solver
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics
from .ccpb import ccpb_constants
from .errors import ConfigError, PBLayersError, SolverError
from .geometry import DomainSpec, RegionParams, make_annulus, make_ball, make_disk
from .nonlinearity import IonSpecies, make_classical_pb
from .profiles import RobinData, solve_u, solve_v
from .radial_oracle import (
    RadialSolveResult,
    compare_expansion,
    graded_radial_grid,
    solve_radial_ccpb,
    solve_radial_robin_pb,
)

_TOP_KEYS = {
    "model", "species", "domain", "robin", "grid", "eps", "region",
    "oracle", "expand", "verify", "figures", "output_dir",
}


def _reject_unknown(section: dict, allowed: set, where: str):
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(cfg, _TOP_KEYS, "config")
    if cfg.get("model") not in ("pb", "ccpb"):
        raise ConfigError("model must be 'pb' or 'ccpb'")
    if not cfg.get("species"):
        raise ConfigError("species list is required and nonempty")
    return cfg


def _species(cfg) -> list[IonSpecies]:
    out = []
    for i, row in enumerate(cfg["species"]):
        _reject_unknown(row, {"z", "amount", "role"}, f"species[{i}]")
        role = row.get("role", "mass" if cfg["model"] == "ccpb" else "bulk")
        try:
            out.append(IonSpecies(float(row["z"]), float(row["amount"]), role))
        except KeyError as exc:
            raise ConfigError(f"species[{i}] missing key {exc}") from exc
    return out


def _robin_list(cfg, n_components) -> list[RobinData]:
    rows = cfg.get("robin")
    if not rows or len(rows) != n_components:
        raise ConfigError(f"robin must list exactly {n_components} boundary entries")
    out = []
    for i, row in enumerate(rows):
        _reject_unknown(row, {"gamma", "phi_bd"}, f"robin[{i}]")
        out.append(RobinData(float(row["gamma"]), float(row["phi_bd"])))
    return out


def _domain(cfg) -> DomainSpec:
    dom = cfg.get("domain")
    if not isinstance(dom, dict):
        raise ConfigError("domain section is required")
    _reject_unknown(
        dom, {"type", "d", "radius", "inner_radius", "outer_radius"}, "domain"
    )
    kind = dom.get("type")
    d = int(dom.get("d", 2))
    if kind == "disk":
        robin = _robin_list(cfg, 1)
        return make_disk(float(dom["radius"]), robin[0])
    if kind == "ball":
        robin = _robin_list(cfg, 1)
        return make_ball(d, float(dom["radius"]), robin[0])
    if kind == "annulus":
        robin = _robin_list(cfg, 2)
        return make_annulus(
            d, float(dom["inner_radius"]), float(dom["outer_radius"]),
            robin[0], robin[1],
        )
    raise ConfigError("domain.type must be disk, ball or annulus")


def _grid_kwargs(cfg) -> dict:
    grid = cfg.get("grid", {})
    _reject_unknown(grid, {"n_nodes"}, "grid")
    return {"n_nodes": int(grid["n_nodes"])} if "n_nodes" in grid else {}


def _region_params(cfg, eps) -> RegionParams | None:
    reg = cfg.get("region")
    if reg is None:
        return None
    _reject_unknown(reg, {"T", "beta"}, "region")
    return RegionParams(eps=eps, beta=float(reg["beta"]), T=float(reg["T"]))


def _eps_list(cfg) -> list[float]:
    eps = cfg.get("eps")
    if not eps:
        raise ConfigError("eps list is required for this command")
    return [float(e) for e in eps]


def _eps_tag(eps: float) -> str:
    return np.format_float_scientific(eps, trim="-", exp_digits=2)


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_csv(path: Path, header: str, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def _pb_bundles(domain, f, cfg):
    kwargs = _grid_kwargs(cfg)
    bundles = []
    for comp in domain.components:
        u = solve_u(f, comp.robin, **kwargs)
        v = solve_v(u, f, RobinData(comp.robin.gamma, 0.0))
        bundles.append({"u": u, "v": v})
    return bundles


def _build_model(cfg):
    """Returns (domain, species, f, bundles, constants-or-None)."""
    species = _species(cfg)
    domain = _domain(cfg)
    if cfg["model"] == "pb":
        f = make_classical_pb(species)
        bundles = _pb_bundles(domain, f, cfg)
        return domain, species, f, bundles, None
    constants = ccpb_constants(domain, species, **_grid_kwargs(cfg))
    return domain, species, constants.f0, list(constants.profiles), constants


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_profiles(cfg, out: Path) -> int:
    domain, species, f, bundles, constants = _build_model(cfg)
    meta = {"config": cfg, "boundaries": []}
    for k, bundle in enumerate(bundles):
        entry = {"k": k}
        for kind, prof in sorted(bundle.items()):
            prof.to_csv(out / f"{kind}_k{k}.csv")
            entry[kind] = prof.to_json_dict()
        meta["boundaries"].append(entry)
    if constants is not None:
        meta["constants"] = constants.to_json_dict()
    _write_json(out / "profiles_meta.json", meta)
    return 0


def cmd_constants(cfg, out: Path) -> int:
    if cfg["model"] != "ccpb":
        raise ConfigError("constants requires model 'ccpb'")
    constants = ccpb_constants(_domain(cfg), _species(cfg))
    payload = constants.to_json_dict()
    payload["config"] = cfg
    _write_json(out / "ccpb_constants.json", payload)
    return 0


def cmd_expand(cfg, out: Path) -> int:
    domain, species, f, bundles, constants = _build_model(cfg)
    opts = cfg.get("expand", {})
    _reject_unknown(opts, {"t_max", "n_t", "order"}, "expand")
    t_max = float(opts.get("t_max", 5.0))
    n_t = int(opts.get("n_t", 201))
    order = int(opts.get("order", 2))
    ts = np.linspace(0.0, t_max, n_t)
    f1 = constants.f1 if constants is not None else None
    for eps in _eps_list(cfg):
        tag = _eps_tag(eps)
        for k, (comp, bundle) in enumerate(zip(domain.components, bundles)):
            q = asymptotics.ExpansionQuery(
                cfg["model"], k, comp.mean_curvature, 0.0, eps, order,
                domain.dimension,
            )
            rows = asymptotics.grid_rows(q, bundle, f, ts, f1)
            for name, data in sorted(rows.items()):
                _write_csv(
                    out / f"expansion_{name}_k{k}_eps{tag}.csv",
                    "t,eps,value", data,
                )
            params = _region_params(cfg, eps)
            if params is not None:
                report = asymptotics.region_charge(
                    domain, k, params, bundle, model=cfg["model"]
                )
                _write_json(
                    out / f"region_charge_k{k}_eps{tag}.json",
                    report.to_json_dict(),
                )
    return 0


def _solve_oracle(cfg, domain, species, f, eps, **extra) -> RadialSolveResult:
    opts = dict(cfg.get("oracle", {}))
    _reject_unknown(opts, {"points_per_layer", "layer_widths"}, "oracle")
    opts.update(extra)
    if cfg["model"] == "pb":
        return solve_radial_robin_pb(domain, f, eps, **opts)
    return solve_radial_ccpb(domain, species, eps, **opts)


def cmd_oracle(cfg, out: Path) -> int:
    species = _species(cfg)
    domain = _domain(cfg)
    f = make_classical_pb(species) if cfg["model"] == "pb" else None
    for eps in _eps_list(cfg):
        res = _solve_oracle(cfg, domain, species, f, eps)
        tag = _eps_tag(eps)
        res.to_csv(out / f"oracle_eps{tag}.csv")
        _write_json(out / f"oracle_eps{tag}.json", res.to_json_dict())
    return 0


def cmd_verify(cfg, out: Path) -> int:
    opts = cfg.get("verify", {})
    _reject_unknown(opts, {"e2_halving", "flip_curvature", "T"}, "verify")
    halving = float(opts.get("e2_halving", 0.5))
    T = float(opts.get("T", cfg.get("region", {}).get("T", 5.0)))
    beta = cfg.get("region", {}).get("beta")
    domain, species, f, bundles, constants = _build_model(cfg)
    if opts.get("flip_curvature"):
        # negative control: corrupt the curvature sign in the expansion side
        from dataclasses import replace

        domain = DomainSpec(
            dimension=domain.dimension, volume=domain.volume,
            components=tuple(
                replace(c, mean_curvature=-c.mean_curvature,
                        curvature_integral=-c.curvature_integral)
                for c in domain.components
            ),
        )
    eps_list = sorted(_eps_list(cfg), reverse=True)
    sweep = []
    neutrality_scale = sum(abs(s.amount * s.z) for s in species)
    prev = None
    for eps in eps_list:
        extra = {}
        if prev is not None:
            # continuation: warm-start from the previous (larger) eps solve,
            # interpolated onto the new grid
            r_new = graded_radial_grid(
                domain.dimension,
                domain.components[0].radius,
                domain.components[1].radius if len(domain.components) > 1 else None,
                eps,
                **dict(cfg.get("oracle", {})),
            )
            extra["initial"] = prev.phi_at(r_new)
        res = _solve_oracle(cfg, domain, species, f, eps, **extra)
        prev = res
        rep = compare_expansion(
            res, domain, bundles, cfg["model"], T=T,
            beta=float(beta) if beta is not None else None,
        )
        entry = {"eps": eps, "report": rep.to_json_dict()}
        if cfg["model"] == "ccpb":
            entry["neutrality_rel"] = abs(res.neutrality) / neutrality_scale
            if constants is not None:
                entry["drift_gap"] = abs(
                    (res.phi_eps_star - constants.phi0_star) / math.sqrt(eps)
                    - constants.q
                )
        sweep.append(entry)

    def series(fn):
        return [fn(e) for e in sweep]

    e2 = series(lambda e: max(b["E2"] for b in e["report"]["boundaries"]))
    e1 = series(lambda e: max(b["E1"] for b in e["report"]["boundaries"]))
    fe = series(lambda e: max(b["field_err"] for b in e["report"]["boundaries"]))
    c1 = [v / math.sqrt(e["eps"]) for v, e in zip(e1, sweep)]
    checks = {
        "e2_strictly_decreasing": all(a > b for a, b in zip(e2, e2[1:])),
        "e2_halving": e2[-1] <= halving * e2[0],
    }
    if cfg["model"] == "pb":
        # the first-order coefficient and field patterns are PB assertions;
        # layer overlap at large eps makes them meaningless on small annuli
        checks.update(
            e1_decreasing=all(a > b for a, b in zip(e1, e1[1:])),
            e1_coefficient_stable=max(c1) <= 2.0 * min(c1),
            field_strictly_decreasing=all(a > b for a, b in zip(fe, fe[1:])),
            field_halving=fe[-1] <= halving * fe[0],
        )
    else:
        drifts = series(lambda e: e["drift_gap"])
        neut = series(lambda e: e["neutrality_rel"])
        checks["drift_gap_decreasing"] = all(a > b for a, b in zip(drifts, drifts[1:]))
        checks["neutrality"] = max(neut) <= 1e-8
    passed = all(checks.values())
    summary = {
        "config": cfg,
        "sweep": sweep,
        "series": {"E1": e1, "E2": e2, "field": fe, "E1_over_sqrt_eps": c1},
        "checks": checks,
        "passed": passed,
    }
    _write_json(out / "verify_summary.json", summary)
    with open(out / "verify_table.txt", "w", encoding="utf-8") as fh:
        fh.write(f"{'eps':>10} {'E1':>12} {'E2':>12} {'field':>12}\n")
        for e, a, b, c in zip(eps_list, e1, e2, fe):
            fh.write(f"{e:>10.1e} {a:>12.4e} {b:>12.4e} {c:>12.4e}\n")
        for name, ok in sorted(checks.items()):
            fh.write(f"{name}: {'pass' if ok else 'FAIL'}\n")
    return 0 if passed else 1


_FIGURE_PRESETS = ("figure-U", "figure-V", "both")


def cmd_figures(cfg, out: Path) -> int:
    opts = cfg.get("figures", {})
    _reject_unknown(opts, {"preset", "gamma"}, "figures")
    preset = opts.get("preset", "both")
    if preset not in _FIGURE_PRESETS:
        raise ConfigError(f"figures.preset must be one of {_FIGURE_PRESETS}")
    gamma = float(opts.get("gamma", 0.1))
    species = _species(cfg)
    f = make_classical_pb(species)
    meta = {"config": cfg, "curves": [], "verdicts": {}}
    want_u = preset in ("figure-U", "both")
    want_v = preset in ("figure-V", "both")
    for label, phi_bd in (("plus", 1.0), ("minus", -1.0)):
        u = solve_u(f, RobinData(gamma, phi_bd))
        v = solve_v(u, f, RobinData(gamma, 0.0))
        if want_u:
            u.to_csv(out / f"figure_u_{label}.csv")
            meta["curves"].append({"name": f"u_{label}", "phi_bd": phi_bd})
            mono = bool(np.all(np.diff(u.values) < 0)) if phi_bd > 0 else bool(
                np.all(np.diff(u.values) > 0)
            )
            meta["verdicts"][f"u_{label}_monotone"] = mono
        if want_v:
            v.to_csv(out / f"figure_v_{label}.csv")
            meta["curves"].append({"name": f"v_{label}", "phi_bd": phi_bd})
            sgn = 1.0 if phi_bd > 0 else -1.0
            signed = sgn * v.values
            interior = v.derivs[np.abs(v.derivs) > 1e-12]
            flips = int(np.sum(np.diff(np.sign(interior)) != 0))
            meta["verdicts"][f"v_{label}_signed_positive"] = bool(np.all(signed[1:] > 0))
            meta["verdicts"][f"v_{label}_unimodal"] = flips == 1
    ok = all(meta["verdicts"].values())
    meta["passed"] = ok
    _write_json(out / "figures_meta.json", meta)
    return 0 if ok else 1


_COMMANDS = {
    "profiles": cmd_profiles,
    "constants": cmd_constants,
    "expand": cmd_expand,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "figures": cmd_figures,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pblayers",
        description="Boundary-layer expansions of PB-type equations and their radial verification",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--output-dir", default=None, help="output directory (default from config or ./out)")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = Path(args.output_dir or cfg.get("output_dir", "out"))
        out.mkdir(parents=True, exist_ok=True)
        rc = _COMMANDS[args.command](cfg, out)
        if args.verbose:
            print(f"{args.command}: exit {rc}", file=sys.stderr)
        return rc
    except ConfigError as exc:
        json.dump({"error": "config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except SolverError as exc:
        json.dump({"error": "solver", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except PBLayersError as exc:
        json.dump({"error": "config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
