"""Command-line front end.

Subcommands: run (integrate a scenario and dump CSV artifacts), clifton-study
(dissipation scaling across lam values), tables (predictor vs experiment),
verify-variational (Euler-Lagrange residual refinement), convergence (order
studies). Exit codes: 0 success, 1 unusable configuration, 2 a run tripped a
stability or admissibility contract.

All CSV output uses %.17g so reruns of the same config are byte-identical;
wall-clock stamps live only in the JSON manifest.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import analysis
from .errors import ConfigError, FailwaveError, RuntimeViolation
from .model import build_scenario, config_hash, scenario_to_dict
from .solver import run
from .variational import lagrange_residual, record_trajectory


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _load_config(path: str):
    if not os.path.isfile(path):
        raise ConfigError(f"config not found: {path}")
    with open(path) as fh:
        return build_scenario(fh.read())


def _outdir(args) -> str:
    out = args.out or os.environ.get("FAILWAVE_OUT") or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _write(path: str, lines) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


# -- run -----------------------------------------------------------------------


def _snapshot_lines(snap, cfg):
    g = cfg.grid
    if g.ndim == 1:
        x = g.cell_centers()
        lines = ["X,U,v,gamma,S,Z"]
        for i in range(g.nx):
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (x[i], snap.U[i], snap.v[i], snap.gamma[i], snap.S[i], snap.Z[i])
                )
            )
        return lines
    xc, yc = g.cell_centers()
    lines = ["X,Y,U,v,gamma,S,Z"]
    for j in range(g.ny):
        for i in range(g.nx):
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (
                        xc[i], yc[j], snap.U[j, i], snap.v[j, i],
                        snap.gamma[j, i], snap.S[j, i], snap.Z[j, i],
                    )
                )
            )
    return lines


def _finite_or_none(x):
    try:
        x = float(x)
    except (TypeError, ValueError):
        return None
    return x if math.isfinite(x) else None


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    if args.snapshots is not None:
        doc = scenario_to_dict(cfg)
        doc["output"]["snapshots"] = args.snapshots
        cfg = build_scenario(doc)
    out = _outdir(args)
    started = datetime.now(timezone.utc).isoformat()
    result = run(cfg)
    finished = datetime.now(timezone.utc).isoformat()

    files = []
    for snap in result.snapshots:
        name = f"snap_{snap.step:06d}.csv"
        _write(os.path.join(out, name), _snapshot_lines(snap, cfg))
        files.append(name)
    for idx, trace in enumerate(result.gauges):
        name = f"gauge_{idx:02d}.csv"
        lines = ["t,S,gamma,sigma_lateral_proxy"]
        for k in range(trace.t.size):
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (trace.t[k], trace.S[k], trace.gamma[k], trace.sigma_lateral_proxy[k])
                )
            )
        _write(os.path.join(out, name), lines)
        files.append(name)
    lines = [
        "time,dt,max_cfl,max_diff,min_Z_gammadot,"
        "kinetic,free_energy,dissipated,boundary_work,released,total"
    ]
    for r in result.reports:
        e = r.energy
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.time, r.dt_used, r.max_cfl, r.max_diff, r.min_Z_gammadot,
                    e.kinetic, e.free, e.dissipated, e.boundary_work, e.released, e.total,
                )
            )
        )
    _write(os.path.join(out, "reports.csv"), lines)
    files.append("reports.csv")

    summary = {
        "energy_closure": _finite_or_none(analysis.budget_imbalance(result.reports)),
        "min_Z_gammadot": _finite_or_none(min(r.min_Z_gammadot for r in result.reports)),
        "v_f": None,
        "tau": None,
        "delta1": None,
        "delta2": None,
        "fit_r2": None,
    }
    try:
        wm = analysis.wave_metrics(result, cfg, level=args.level)
        summary.update(
            v_f=_finite_or_none(wm.v_f),
            tau=_finite_or_none(wm.tau),
            delta1=_finite_or_none(wm.delta1),
            delta2=_finite_or_none(wm.delta2),
            fit_r2=_finite_or_none(wm.fit_r2),
        )
    except FailwaveError:
        pass  # quiescent or front-free runs have no wave metrics

    manifest = {
        "scenario": cfg.name,
        "config_hash": config_hash(cfg),
        "started": started,
        "finished": finished,
        "files": sorted(files),
        "summary": summary,
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _say(args, f"{cfg.name}: {len(result.reports) - 1} steps, artifacts in {out}")
    return 0


# -- clifton-study ---------------------------------------------------------------


def cmd_clifton_study(args) -> int:
    cfg = _load_config(args.config)
    lambdas = [float(s) for s in args.lambdas.split(",") if s.strip() != ""]
    study = analysis.clifton_limit_study(cfg, lambdas)
    out = _outdir(args)
    lines = ["lambda,dissipated,energy_drift,front_sharpness"]
    for row in study.rows:
        lines.append(
            ",".join(_fmt(v) for v in (row.lam, row.dissipated, row.energy_drift, row.front_sharpness))
        )
    _write(os.path.join(out, "limit_study.csv"), lines)
    _say(args, f"dissipation scaling slope vs lam: {study.slope:.4f}")
    for row in study.rows:
        _say(
            args,
            f"  lam={row.lam:.3e}  dissipated={row.dissipated:.6e}  "
            f"drift={row.energy_drift:.3e}  sharpness={row.front_sharpness:.4e}",
        )
    return 0


# -- tables ----------------------------------------------------------------------


def cmd_tables(args) -> int:
    rep = analysis.table_report()
    out = _outdir(args)
    with open(os.path.join(out, "tables.csv"), "w") as fh:
        fh.write(rep.to_csv())
    text = rep.to_text()
    with open(os.path.join(out, "tables.txt"), "w") as fh:
        fh.write(text)
    if not args.quiet:
        sys.stdout.write(text)
    return 0


# -- verify-variational ----------------------------------------------------------


def cmd_verify_variational(args) -> int:
    cfg = _load_config(args.config)
    base = scenario_to_dict(cfg)
    for entry in base.get("ic", {}).values():
        if entry.get("type") == "tabulated" and args.levels > 1:
            raise ConfigError("refinement cannot resample tabulated initial data")
    out = _outdir(args)
    lines = ["level,nx,dt,time,residU_L2,residGamma_L2"]
    max_norms = []
    for lev in range(args.levels):
        doc = json.loads(json.dumps(base))  # deep copy
        doc["grid"]["nx"] = base["grid"]["nx"] * 2**lev
        doc["grid"]["dx"] = base["grid"]["dx"] / 2**lev
        doc["time"]["dt"] = base["time"]["dt"] / 2**lev
        cfg_lev = build_scenario(doc)
        traj = record_trajectory(cfg_lev)
        res = lagrange_residual(traj)
        for i, t in enumerate(res.times):
            lines.append(
                ",".join(
                    _fmt(v) for v in (lev, cfg_lev.grid.nx, cfg_lev.dt, t, res.norms_U[i], res.norms_gamma[i])
                )
            )
        max_norms.append(float(np.max(res.norms_combined)))
        _say(args, f"level {lev}: nx={cfg_lev.grid.nx} dt={cfg_lev.dt:.3e} max residual {max_norms[-1]:.6e}")
    _write(os.path.join(out, "residual_norms.csv"), lines)
    for lev in range(1, len(max_norms)):
        ratio = max_norms[lev - 1] / max_norms[lev] if max_norms[lev] > 0 else float("inf")
        _say(args, f"level {lev - 1} -> {lev}: residual shrank {ratio:.2f}x")
    return 0


# -- convergence -----------------------------------------------------------------


def cmd_convergence(args) -> int:
    studies = []
    if args.study in ("elastic", "all"):
        studies.append(analysis.elastic_convergence_study())
    if args.study in ("diffusion", "all"):
        studies.append(analysis.diffusion_convergence_study())
    out = _outdir(args)
    lines = ["study,nx,dx,error,order"]
    for st in studies:
        for nx, dx, err in zip(st.resolutions, st.dxs, st.errors):
            lines.append(st.name + "," + ",".join(_fmt(v) for v in (nx, dx, err, st.order)))
        _say(args, f"{st.name}: observed order {st.order:.3f}")
    _write(os.path.join(out, "convergence.csv"), lines)
    return 0


# -- parser ----------------------------------------------------------------------


def _add_common(sub) -> None:
    sub.add_argument("--out", default=None, help="output directory (default $FAILWAVE_OUT or ./out)")
    sub.add_argument("--quiet", action="store_true", help="suppress non-error output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="failwave",
        description="failure-wave continuum simulations and their verifiers",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="integrate a scenario, write CSV artifacts")
    p_run.add_argument("config", help="scenario YAML file")
    p_run.add_argument("--snapshots", type=int, default=None, help="override snapshot count")
    p_run.add_argument("--level", type=float, default=0.5, help="front threshold fraction for metrics")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cs = subs.add_parser("clifton-study", help="dissipation scaling across lam values")
    p_cs.add_argument("config", help="base scenario YAML file")
    p_cs.add_argument(
        "--lambdas", default="1e-2,1e-3,1e-4,0", help="comma-separated lam values (0 = conservative limit)"
    )
    _add_common(p_cs)
    p_cs.set_defaults(func=cmd_clifton_study)

    p_tab = subs.add_parser("tables", help="predictor vs experiment comparison tables")
    _add_common(p_tab)
    p_tab.set_defaults(func=cmd_tables)

    p_vv = subs.add_parser("verify-variational", help="Euler-Lagrange residual refinement study")
    p_vv.add_argument("config", help="scenario YAML file (coarsest level)")
    p_vv.add_argument("--levels", type=int, default=3, help="refinement levels (default 3)")
    _add_common(p_vv)
    p_vv.set_defaults(func=cmd_verify_variational)

    p_cv = subs.add_parser("convergence", help="order-of-accuracy studies")
    p_cv.add_argument("study", choices=["elastic", "diffusion", "all"], help="which study to run")
    _add_common(p_cv)
    p_cv.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except RuntimeViolation as err:
        print(f"runtime violation: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
