"""Command-line interface.

Subcommands:
  run      propagate a scenario and write trajectory CSV + metadata JSON
  audit    algebraic representability checks without propagation
  spectra  tabulate bath rates and level-shift coefficients
  bench    time the built-in benchmark scenarios
  sweep    rerun a scenario over a grid of one parameter, in parallel

Exit codes: 0 on success (including runs whose audits flag violations),
2 for configuration and parsing problems, 1 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bath import BathModel, QuadratureError, sample_spectra
from .benchmarks import BENCHMARKS
from .core import PhysicalityError, spectral_audit
from .generators import MEKind, NonlinearGeneratorError
from .output import resolve_output_dir, write_channels_csv, \
    write_metadata_json, write_spectra_csv, write_sweep_csv, \
    write_trajectory_csv
from .propagate import Schedule, StiffnessError, integrate
from .representability import audit_trajectory, constraint_residual, \
    unitality_residual
from .scenario import Scenario, ScenarioError, load_scenario


def _add_source_options(p: argparse.ArgumentParser, benchmark_default=None):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", metavar="PATH",
                     help="scenario JSON file")
    src.add_argument("--benchmark", choices=sorted(BENCHMARKS),
                     default=benchmark_default,
                     help="built-in scenario")
    p.add_argument("--kind", choices=[m.value for m in MEKind],
                   help="override the generator kind")
    p.add_argument("--blocked", action="store_true", default=None,
                   help="enable Pauli blocking")
    p.add_argument("--lamb-shift", action="store_true", default=None,
                   help="include the bath-induced level shift")
    p.add_argument("--threshold", type=float, metavar="W",
                   help="frequency clustering threshold (ume)")
    p.add_argument("--temperature", type=float, metavar="K",
                   help="override the bath temperature")
    p.add_argument("--t-end", type=float, metavar="T",
                   help="override the integration window")
    p.add_argument("--samples", type=int, metavar="N",
                   help="override the number of stored samples")
    p.add_argument("--copropagate-hole", action="store_true", default=None,
                   help="co-propagate the 1-hole RDM and record the defect")
    p.add_argument("--output-dir", metavar="DIR",
                   help="where to write outputs (default: "
                        "$RDMPROP_OUTPUT_DIR or cwd)")
    p.add_argument("--prefix", metavar="NAME",
                   help="output file stem (default: scenario name)")


def _resolve_scenario(args) -> Scenario:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        name = args.benchmark
        if name is None:
            raise ScenarioError("give either --scenario or --benchmark")
        scenario = BENCHMARKS[name]()
    if args.kind is not None:
        scenario.kind = MEKind(args.kind)
    if args.blocked is not None:
        scenario.pauli_blocked = args.blocked
    if args.lamb_shift is not None:
        scenario.lamb_shift = args.lamb_shift
    if args.threshold is not None:
        scenario.clustering_threshold = args.threshold
    if scenario.kind is MEKind.UME and scenario.clustering_threshold is None:
        scenario.clustering_threshold = 0.0
    if args.temperature is not None:
        b = scenario.bath
        scenario.bath = BathModel(lam=b.lam, temperature=args.temperature,
                                  pv_cutoff=b.pv_cutoff,
                                  pv_points=b.pv_points)
    if args.t_end is not None or args.samples is not None:
        s = scenario.schedule
        scenario.schedule = Schedule(
            t_end=args.t_end if args.t_end is not None else s.t_end,
            samples=args.samples if args.samples is not None else s.samples,
            rtol=s.rtol, atol=s.atol, method=s.method)
    if args.copropagate_hole is not None:
        scenario.copropagate_hole = args.copropagate_hole
    return scenario


def _cmd_run(args) -> int:
    scenario = _resolve_scenario(args)
    traj = integrate(scenario, verify_expm=args.verify_expm)
    outdir = resolve_output_dir(args.output_dir)
    prefix = args.prefix or scenario.name

    csv_path = write_trajectory_csv(traj, outdir / f"{prefix}.csv")
    audit = audit_trajectory(traj)
    setup = traj.setup
    meta = dict(traj.metadata)
    meta["audit"] = {
        "min_eigenvalue": audit.min_eigenvalue,
        "max_eigenvalue": audit.max_eigenvalue,
        "max_trace_drift": audit.max_trace_drift,
        "max_hermiticity_defect": audit.max_hermiticity_defect,
        "first_violation_time": audit.first_violation_time,
        "violation": audit.violation,
    }
    meta["unitality_residual"] = unitality_residual(setup.hamiltonian,
                                                    setup.spec)
    if traj.defect is not None:
        meta["max_hole_defect"] = float(np.max(traj.defect))
    meta_path = write_metadata_json(meta, outdir / f"{prefix}.json")

    if traj.hole is not None:
        write_trajectory_csv(traj.hole, outdir / f"{prefix}.hole.csv")

    print(f"wrote {csv_path} and {meta_path}")
    print(f"final populations: "
          f"{np.array2string(traj.populations[-1], precision=6)}")
    print(f"eigenvalue range over run: [{audit.min_eigenvalue:.3e}, "
          f"{audit.max_eigenvalue:.3e}] (chi = {traj.chi})")
    if audit.violation:
        print(f"representability violated from t = "
              f"{audit.first_violation_time:.6g}")
    if traj.defect is not None:
        print(f"max hole co-propagation defect: {np.max(traj.defect):.3e}")
    return 0


def _cmd_audit(args) -> int:
    scenario = _resolve_scenario(args)
    setup = scenario.build()
    outdir = resolve_output_dir(args.output_dir)
    prefix = args.prefix or scenario.name

    unit = unitality_residual(setup.hamiltonian, setup.spec)
    initial = spectral_audit(setup.rho0.data, setup.rho0.chi)
    report = {
        "scenario": scenario.to_dict(),
        "unitality_residual": unit,
        "initial_state": {
            "min_eigenvalue": initial.min_eigenvalue,
            "max_eigenvalue": initial.max_eigenvalue,
            "trace": initial.trace,
            "violation": initial.violation,
        },
    }
    print(f"unitality residual ||L(chi*1)||: {unit:.6e}")
    if not setup.spec.pauli_blocked:
        con = constraint_residual(setup.hamiltonian, setup.spec)
        report["constraint"] = {
            "residual_norm": con.residual_norm,
            "pair_sum_norm": con.pair_sum_norm,
            "satisfied": con.satisfied,
            "per_channel": [
                {"frequency": c.frequency,
                 "rate_asymmetry": [c.rate_asymmetry.real,
                                    c.rate_asymmetry.imag],
                 "contribution_norm": c.contribution_norm}
                for c in con.per_channel],
        }
        print(f"filled-state residual norm:     {con.residual_norm:.6e} "
              f"({'satisfied' if con.satisfied else 'violated'})")
        for c in con.per_channel:
            print(f"  channel {c.frequency:+.6g}: rate asymmetry "
                  f"{c.rate_asymmetry.real:.6e}, contribution "
                  f"{c.contribution_norm:.6e}")
    if setup.spec.lamb_shift:
        lamb = setup.spec.lamb_hamiltonian()
        defect = float(np.max(np.abs(lamb - lamb.conj().T)))
        report["lamb_hermiticity_defect"] = defect
        print(f"Lamb-shift hermiticity defect:  {defect:.3e}")

    channels_path = write_channels_csv(setup.spec,
                                       outdir / f"{prefix}.channels.csv")
    report_path = write_metadata_json(report, outdir / f"{prefix}.audit.json")
    print(f"wrote {channels_path} and {report_path}")
    return 0


def _cmd_spectra(args) -> int:
    if args.scenario or args.benchmark:
        scenario = _resolve_scenario(args)
        bath = scenario.bath
        name = args.prefix or f"{scenario.name}.spectra"
    else:
        if args.lam is None:
            raise ScenarioError("give --scenario, --benchmark, or --lambda "
                                "with --temperature")
        temperature = args.temperature if args.temperature is not None \
            else 300.0
        bath = BathModel(lam=args.lam, temperature=temperature)
        name = args.prefix or "spectra"
    omegas = np.linspace(args.omega_min, args.omega_max, args.points)
    samples = sample_spectra(bath, omegas)
    outdir = resolve_output_dir(args.output_dir)
    path = write_spectra_csv(samples, outdir / f"{name}.csv")
    print(f"wrote {path} ({args.points} samples on "
          f"[{args.omega_min}, {args.omega_max}])")
    return 0


def _cmd_bench(args) -> int:
    outdir = resolve_output_dir(args.output_dir)
    names = [args.benchmark] if args.benchmark else sorted(BENCHMARKS)
    rows = []
    for name in names:
        scenario = BENCHMARKS[name](samples=args.samples)
        if args.me is not None:
            scenario.kind = MEKind(args.me)
        if args.blocked:
            scenario.pauli_blocked = True
        if args.threshold is not None:
            scenario.clustering_threshold = args.threshold
        if scenario.kind is MEKind.UME \
                and scenario.clustering_threshold is None:
            scenario.clustering_threshold = 0.0
        if args.t_end is not None:
            s = scenario.schedule
            scenario.schedule = Schedule(t_end=args.t_end, samples=s.samples,
                                         rtol=s.rtol, atol=s.atol,
                                         method=s.method)
        traj = integrate(scenario)
        wall = traj.metadata["wall_time_s"]
        nfev = traj.metadata["rhs_evaluations"]
        blocked = scenario.pauli_blocked
        print(f"{name:12s} kind={scenario.kind.value} blocked={blocked} "
              f"t_end={traj.metadata['t_end']:.6g} wall={wall:.3f}s "
              f"nfev={nfev}")
        print(f"{'':12s} final populations "
              f"{np.array2string(traj.populations[-1], precision=6)}")
        rows.append([name, scenario.kind.value, int(blocked),
                     traj.metadata["t_end"], wall, nfev])
    write_sweep_csv(rows, ["benchmark", "kind", "blocked", "t_end",
                           "wall_time_s", "rhs_evaluations"],
                    outdir / "bench.csv")
    return 0


def _set_nested(d: dict, dotted: str, value):
    keys = dotted.split(".")
    cur = d
    for k in keys[:-1]:
        if k not in cur or not isinstance(cur[k], dict):
            cur[k] = {}
        cur = cur[k]
    cur[keys[-1]] = value


def _sweep_worker(payload):
    idx, base, param, value, outdir, prefix = payload
    d = json.loads(base)
    _set_nested(d, param, value)
    scenario = Scenario.from_dict(d)
    traj = integrate(scenario)
    tag = f"{prefix}.{idx:04d}"
    write_trajectory_csv(traj, f"{outdir}/{tag}.csv")
    audit = audit_trajectory(traj)
    row = [idx, value, float(traj.metadata["t_end"]),
           audit.min_eigenvalue, audit.max_eigenvalue,
           int(audit.violation)]
    row += [float(p) for p in traj.populations[-1]]
    return row


def _parse_sweep_values(args) -> list:
    if args.values is not None:
        out = []
        for chunk in args.values.split(","):
            chunk = chunk.strip()
            try:
                out.append(json.loads(chunk))
            except json.JSONDecodeError:
                out.append(chunk)
        return out
    spec = args.linspace.split(":")
    if len(spec) != 3:
        raise ScenarioError("--linspace expects START:STOP:COUNT")
    start, stop, count = float(spec[0]), float(spec[1]), int(spec[2])
    return [float(v) for v in np.linspace(start, stop, count)]


def _cmd_sweep(args) -> int:
    scenario = _resolve_scenario(args)
    values = _parse_sweep_values(args)
    outdir = resolve_output_dir(args.output_dir)
    prefix = args.prefix or f"{scenario.name}.sweep"
    base = json.dumps(scenario.to_dict())

    payloads = [(i, base, args.param, v, str(outdir), prefix)
                for i, v in enumerate(values)]
    if args.jobs == 1:
        rows = [_sweep_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_worker, payloads))
    rows.sort(key=lambda r: r[0])

    d = len(rows[0]) - 6
    header = ["index", "value", "t_end", "min_eigenvalue", "max_eigenvalue",
              "violation"] + [f"final_pop_{k}" for k in range(d)]
    path = write_sweep_csv(rows, header, outdir / f"{prefix}.csv")
    print(f"wrote {path} and {len(rows)} trajectory files")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdmprop",
        description="Propagate 1-electron reduced density matrices under "
                    "open-system master equations and audit their "
                    "fermionic representability.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="propagate a scenario")
    _add_source_options(p_run)
    p_run.add_argument("--verify-expm", action="store_true",
                       help="cross-check against matrix-exponential stepping")
    p_run.set_defaults(func=_cmd_run)

    p_audit = sub.add_parser("audit", help="algebraic audits, no propagation")
    _add_source_options(p_audit)
    p_audit.set_defaults(func=_cmd_audit)

    p_spec = sub.add_parser("spectra", help="tabulate bath rate functions")
    _add_source_options(p_spec)
    p_spec.add_argument("--lambda", dest="lam", type=float, metavar="L",
                        help="bath coupling scale (with --temperature)")
    p_spec.add_argument("--omega-min", type=float, default=-1.0)
    p_spec.add_argument("--omega-max", type=float, default=1.0)
    p_spec.add_argument("--points", type=int, default=101)
    p_spec.set_defaults(func=_cmd_spectra)

    p_bench = sub.add_parser("bench", help="time the built-in benchmarks")
    p_bench.add_argument("benchmark", nargs="?", choices=sorted(BENCHMARKS),
                         help="benchmark to run (default: all)")
    p_bench.add_argument("--me", choices=[m.value for m in MEKind],
                         help="override the generator kind")
    p_bench.add_argument("--blocked", action="store_true",
                         help="enable Pauli blocking")
    p_bench.add_argument("--threshold", type=float, metavar="W",
                         help="frequency clustering threshold (ume)")
    p_bench.add_argument("--samples", type=int, default=200)
    p_bench.add_argument("--t-end", type=float, metavar="T",
                         help="override the integration window")
    p_bench.add_argument("--output-dir", metavar="DIR")
    p_bench.set_defaults(func=_cmd_bench)

    p_sweep = sub.add_parser("sweep", help="grid over one scenario parameter")
    _add_source_options(p_sweep)
    p_sweep.add_argument("--param", required=True, metavar="DOTTED.KEY",
                         help="scenario key to vary, e.g. bath.temperature")
    grid = p_sweep.add_mutually_exclusive_group(required=True)
    grid.add_argument("--values", metavar="V1,V2,...",
                      help="comma-separated values (JSON scalars)")
    grid.add_argument("--linspace", metavar="START:STOP:COUNT",
                      help="uniform grid")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel workers (default 1)")
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code) if err.code is not None else 0
    try:
        return args.func(args)
    except ScenarioError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (StiffnessError, QuadratureError, PhysicalityError,
            NonlinearGeneratorError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
