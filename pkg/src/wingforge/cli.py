"""Command-line entry point for reproducible wing-design workflows.

Every randomized command takes an explicit --seed; outputs record the
seed so runs can be replayed.  Exit codes: 0 success, 1 input error,
2 internal error.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import datastore, metrics, optimize
from .aero import AeroError, Atmosphere, InflowConditions, SurfaceField, \
    coefficients as aero_coefficients, integrate_forces
from .doe import (DoeError, ParameterSpace, peel_split, sample_uniform,
                  scan_grid)
from .geometry import (GeometryError, MeshResolution, WingDesign, export_stl,
                       import_stl, loft_wing, planform_area,
                       write_mesh_metadata)
from .metrics import FieldPair, MetricError, PolarPoint
from .surrogate import BuiltinLiftLine, RemoteSurrogate, SurrogateError, \
    SurrogateRef


def _load_space(config_path):
    if not config_path:
        return ParameterSpace()
    with open(config_path) as f:
        cfg = json.load(f)
    if "space" in cfg:
        return ParameterSpace.from_dict(cfg["space"])
    return ParameterSpace()


def _emit(payload, as_json):
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        for k, v in payload.items():
            click.echo(f"{k}: {v}")


design_options = [
    click.option("--c-r", type=float, required=True, help="root chord [m]"),
    click.option("--b", type=float, required=True, help="span [m]"),
    click.option("--taper", type=float, required=True, help="taper ratio"),
    click.option("--sweep", type=float, required=True, help="LE sweep [deg]"),
]


def add_options(options):
    def wrap(f):
        for opt in reversed(options):
            f = opt(f)
        return f
    return wrap


@click.group()
def cli():
    """Wing design-space exploration and optimization toolkit."""


@cli.command()
@add_options(design_options)
@click.option("--n-chord", type=int, default=48)
@click.option("--n-span", type=int, default=24)
@click.option("--out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["binary", "ascii"]),
              default="binary")
@click.option("--json", "as_json", is_flag=True)
def geometry(c_r, b, taper, sweep, n_chord, n_span, out, fmt, as_json):
    """Loft a wing and write an STL file plus a JSON metadata sidecar."""
    design = WingDesign(c_r, b, taper, sweep)
    mesh = loft_wing(design, MeshResolution(n_chord, n_span))
    export_stl(mesh, out, fmt)
    write_mesh_metadata(mesh, str(out) + ".json")
    _emit({"out": str(out), "n_vertices": len(mesh.vertices),
           "n_triangles": len(mesh.triangles),
           "planform_area_m2": planform_area(design)}, as_json)


@cli.group()
def doe():
    """Design-of-experiments commands."""


@doe.command()
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--json", "as_json", is_flag=True)
def sample(n, seed, out, config, as_json):
    """Sample cases uniformly and write them as JSON lines."""
    space = _load_space(config)
    cases = sample_uniform(space, n, seed)
    datastore.write_cases_jsonl(out, cases)
    _emit({"out": str(out), "n_cases": len(cases), "seed": seed}, as_json)


@doe.command()
@click.option("--cases", "cases_path", type=click.Path(exists=True),
              required=True)
@click.option("--n-ood", type=int, default=1000)
@click.option("--n-interp", type=int, default=1000)
@click.option("--n-id-random", type=int, default=1000)
@click.option("--n-val", type=int, default=1000)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--exact/--approximate", "exact", default=None,
              help="force exact or approximate hull peeling")
@click.option("--json", "as_json", is_flag=True)
def split(cases_path, n_ood, n_interp, n_id_random, n_val, seed, out, exact,
          as_json):
    """Partition cases by convex-hull peeling and write the manifest."""
    cases = datastore.read_cases_jsonl(cases_path)
    approximate = None if exact is None else not exact
    assignment = peel_split(cases, n_ood, n_interp, n_id_random, n_val, seed,
                            approximate=approximate)
    Path(out).write_text(json.dumps(assignment.to_dict(), indent=2))
    _emit({"out": str(out), **assignment.counts}, as_json)


@doe.command()
@click.option("--c-r", type=float, required=True)
@click.option("--b", type=float, required=True)
@click.option("--taper", type=float, required=True)
@click.option("--u-inf", type=float, required=True)
@click.option("--alpha-list", required=True,
              help="comma-separated angles of attack [deg]")
@click.option("--sweep-list", required=True,
              help="comma-separated sweep angles [deg]")
@click.option("--out", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True)
def scan(c_r, b, taper, u_inf, alpha_list, sweep_list, out, as_json):
    """Cartesian sweep/alpha parameter-scan case grid."""
    alphas = [float(v) for v in alpha_list.split(",")]
    sweeps = [float(v) for v in sweep_list.split(",")]
    cases = scan_grid((c_r, b, taper), u_inf, alphas, sweeps)
    datastore.write_cases_jsonl(out, cases)
    _emit({"out": str(out), "n_cases": len(cases)}, as_json)


def _make_backend(backend, endpoint):
    if backend == "remote":
        return RemoteSurrogate(SurrogateRef(kind="remote", endpoint=endpoint))
    return BuiltinLiftLine()


@cli.command()
@click.option("--backend", type=click.Choice(["builtin-liftline", "remote"]),
              default="builtin-liftline")
@click.option("--endpoint", default=None, help="remote backend URL")
@click.option("--cases", "cases_path", type=click.Path(exists=True),
              default=None, help="JSONL case list; otherwise single-case flags")
@click.option("--c-r", type=float, default=None)
@click.option("--b", type=float, default=None)
@click.option("--taper", type=float, default=None)
@click.option("--sweep", type=float, default=None)
@click.option("--u-inf", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--out", type=click.Path(), default=None,
              help="CSV output for case lists")
@click.option("--json", "as_json", is_flag=True)
def predict(backend, endpoint, cases_path, c_r, b, taper, sweep, u_inf, alpha,
            out, as_json):
    """Predict aerodynamic coefficients for one case or a case list."""
    be = _make_backend(backend, endpoint)
    atm = Atmosphere()
    if cases_path:
        cases = datastore.read_cases_jsonl(cases_path)
        rows = []
        for c in cases:
            p = be.predict(c.design, c.inflow, atm)
            rows.append({"id": c.id, "C_D": p.coefficients.C_D,
                         "C_l": p.coefficients.C_l,
                         "lift_to_drag": p.coefficients.lift_to_drag,
                         "alpha_deg": c.inflow.alpha_deg,
                         "sweep_deg": c.design.sweep_deg})
        if not out:
            raise click.UsageError("--out is required with --cases")
        datastore.export_results(rows, out, fmt="csv")
        _emit({"out": str(out), "n_cases": len(rows)}, as_json)
        return
    missing = [n for n, v in [("--c-r", c_r), ("--b", b), ("--taper", taper),
                              ("--sweep", sweep), ("--u-inf", u_inf),
                              ("--alpha", alpha)] if v is None]
    if missing:
        raise click.UsageError(f"missing options: {', '.join(missing)}")
    p = be.predict(WingDesign(c_r, b, taper, sweep),
                   InflowConditions(u_inf, alpha), atm)
    _emit({"C_D": p.coefficients.C_D, "C_l": p.coefficients.C_l,
           "lift_to_drag": p.coefficients.lift_to_drag,
           "mach": p.mach, "reynolds": p.reynolds}, as_json)


@cli.command()
@click.option("--mesh", "mesh_path", type=click.Path(exists=True),
              required=True, help="STL surface mesh")
@click.option("--p-s", "ps_path", type=click.Path(exists=True), required=True,
              help="surface-pressure blob (.wfg)")
@click.option("--tau", "tau_path", type=click.Path(exists=True), required=True,
              help="wall shear-stress blob (.wfg)")
@click.option("--u-inf", type=float, required=True)
@click.option("--alpha", type=float, required=True)
@click.option("--a-ref", type=float, required=True, help="reference area [m^2]")
@click.option("--json", "as_json", is_flag=True)
def integrate(mesh_path, ps_path, tau_path, u_inf, alpha, a_ref, as_json):
    """Integrate a surface field into force coefficients."""
    mesh = import_stl(mesh_path)
    _, p_s = datastore.decode_blob(Path(ps_path).read_bytes())
    _, tau = datastore.decode_blob(Path(tau_path).read_bytes())
    atm = Atmosphere()
    field = SurfaceField(p_s=p_s, tau=tau)
    inflow = InflowConditions(u_inf, alpha)
    f, pressure_part, friction_part = integrate_forces(mesh, field, atm.p_inf)
    c = aero_coefficients(f, inflow, atm, a_ref,
                          pressure_part=pressure_part,
                          friction_part=friction_part)
    _emit({"C_D": c.C_D, "C_l": c.C_l, "lift_to_drag": c.lift_to_drag,
           "F": list(c.F)}, as_json)


@cli.command(name="metrics")
@click.option("--pred", type=click.Path(exists=True), required=True)
@click.option("--gt", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True)
def metrics_cmd(pred, gt, out, as_json):
    """Relative L2 and R^2 of prediction vs ground-truth CSV columns."""
    pred_rows = {r["id"]: r for r in datastore.import_coefficients_csv(pred)}
    gt_rows = {r["id"]: r for r in datastore.import_coefficients_csv(gt)}
    shared = sorted(set(pred_rows) & set(gt_rows))
    if not shared:
        raise DoeError("no shared case ids between prediction and ground truth")
    cols = [c for c in pred_rows[shared[0]]
            if c != "id" and c in gt_rows[shared[0]]]
    report = []
    for col in cols:
        p = np.array([pred_rows[i][col] for i in shared])
        g = np.array([gt_rows[i][col] for i in shared])
        entry = {"field": col,
                 "relative_l2": metrics.relative_l2(
                     FieldPair(col, p, g))}
        try:
            entry["r_squared"] = metrics.r_squared(p, g)
        except MetricError:
            entry["r_squared"] = None
        report.append(entry)
    if out:
        datastore.export_results(
            [{k: ("" if v is None else v) for k, v in r.items()}
             for r in report], out, fmt="csv")
    _emit({"n_cases": len(shared),
           "report": report if as_json else json.dumps(report)}, as_json)


def _polar_points(rows):
    points = []
    for r in rows:
        points.append(PolarPoint(
            id=r["id"], C_D=r["C_D"], C_l=r["C_l"],
            alpha_deg=r.get("alpha_deg", float("nan")),
            sweep_deg=r.get("sweep_deg"),
            in_range=bool(r.get("in_range", 1.0))))
    return points


@cli.command()
@click.option("--coefficients", "coeff_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--plot", type=click.Path(), default=None,
              help="optional SVG plot output")
@click.option("--json", "as_json", is_flag=True)
def pareto(coeff_path, out, plot, as_json):
    """Extract the drag-lift Pareto front from a coefficient table."""
    points = _polar_points(datastore.import_coefficients_csv(coeff_path))
    front = metrics.pareto_front(points)
    rows = [{"id": p.id, "C_D": p.C_D, "C_l": p.C_l,
             "alpha_deg": p.alpha_deg,
             "in_range": float(p.in_range)} for p in front]
    datastore.export_results(rows, out, fmt="csv")
    if plot:
        _plot_pareto(points, front, plot)
    _emit({"out": str(out), "front_size": len(front)}, as_json)


@cli.command()
@click.option("--coefficients", "coeff_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--plot", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True)
def polar(coeff_path, out, plot, as_json):
    """Group coefficients into alpha-sorted polar series by sweep angle."""
    points = _polar_points(datastore.import_coefficients_csv(coeff_path))
    series = metrics.assemble_polars(points)
    rows = []
    for sweep, pts in series.items():
        for p in pts:
            rows.append({"id": p.id, "sweep_deg": "" if sweep is None else sweep,
                         "alpha_deg": p.alpha_deg, "C_D": p.C_D, "C_l": p.C_l,
                         "in_range": float(p.in_range)})
    datastore.export_results(rows, out, fmt="csv")
    if plot:
        _plot_polars(series, plot)
    _emit({"out": str(out), "n_series": len(series)}, as_json)


@cli.command(name="optimize")
@click.option("--method",
              type=click.Choice(["gradient", "evolutionary", "bayesian"]),
              required=True)
@click.option("--budget", type=int, required=True,
              help="max surrogate evaluations")
@click.option("--seed", type=int, required=True)
@click.option("--backend", type=click.Choice(["builtin-liftline", "remote"]),
              default="builtin-liftline")
@click.option("--endpoint", default=None)
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--trace-csv", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True)
def optimize_cmd(method, budget, seed, backend, endpoint, config, out,
                 trace_csv, as_json):
    """Maximize the lift-to-drag ratio over the design box."""
    space = _load_space(config)
    be = _make_backend(backend, endpoint)
    result = optimize.run_optimization(
        be, space, optimize.OptimizerConfig(method=method, budget=budget,
                                            seed=seed))
    payload = result.to_dict()
    if out:
        Path(out).write_text(json.dumps(payload, indent=2))
    if trace_csv:
        rows = [{"evaluations": t["evaluations"], "value": t["value"],
                 **{n: v for n, v in zip(
                     ("c_r", "b", "taper", "sweep_deg", "U_inf", "alpha_deg"),
                     t["phi"])}}
                for t in payload["trace"]]
        datastore.export_results(rows, trace_csv, fmt="csv")
    _emit(payload if as_json else
          {"best_phi": payload["best_phi"],
           "best_value": payload["best_value"],
           "evaluations": payload["evaluations"]}, as_json)


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int,
              default=lambda: int(os.environ.get("WINGFORGE_PORT", "8470")))
@click.option("--dataset", "datasets", multiple=True,
              help="name=path dataset registrations")
def serve(host, port, datasets):
    """Run the HTTP service."""
    from .service import ServiceSettings, run

    ds = {}
    root = os.environ.get("WINGFORGE_DATA")
    if root and Path(root, "index.json").exists():
        ds["default"] = root
    for spec in datasets:
        name, _, path = spec.partition("=")
        if not path:
            raise click.UsageError(f"--dataset expects name=path, got {spec!r}")
        ds[name] = path
    run(host=host, port=port, settings=ServiceSettings(datasets=ds))


def _plot_pareto(points, front, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter([p.C_D for p in points], [p.C_l for p in points],
               s=6, alpha=0.4, label="cases")
    ax.plot([p.C_D for p in front], [p.C_l for p in front],
            "r.-", label="Pareto front")
    ax.set_xlabel("C_D")
    ax.set_ylabel("C_l")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)


def _plot_polars(series, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 3, figsize=(14, 4))
    for sweep, pts in series.items():
        label = "no sweep" if sweep is None else f"sweep {sweep:g} deg"
        alpha = [p.alpha_deg for p in pts]
        axes[0].plot(alpha, [p.C_l for p in pts], ".-", label=label)
        axes[1].plot(alpha, [p.C_D for p in pts], ".-", label=label)
        axes[2].plot([p.C_D for p in pts], [p.C_l for p in pts], ".-",
                     label=label)
        out = [p for p in pts if not p.in_range]
        if out:
            axes[0].plot([p.alpha_deg for p in out], [p.C_l for p in out],
                         "kx")
    axes[0].set_xlabel("alpha [deg]")
    axes[0].set_ylabel("C_l")
    axes[1].set_xlabel("alpha [deg]")
    axes[1].set_ylabel("C_D")
    axes[2].set_xlabel("C_D")
    axes[2].set_ylabel("C_l")
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (click.UsageError,) as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        click.echo((exc.ctx.get_help() if exc.ctx else cli.get_help(
            click.Context(cli))), err=True)
        return 1
    except (GeometryError, AeroError, DoeError, MetricError, SurrogateError,
            optimize.OptimizeError, datastore.DatastoreError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except click.Abort:
        return 1
    except Exception as exc:  # internal error
        click.echo(f"internal error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
