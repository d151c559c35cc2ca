import argparse
import logging
import sys
from pathlib import Path

from tcsl import analysis, config, dispersion, provenance, results, spectral, templates, timedomain
from tcsl.core import BUILTIN_ALIASES, builtin_scenarios, validate_scenario
from tcsl.errors import TcslError, ValidationError
from tcsl.scenario_io import parse_times, resolve_scenario, save_scenario

logger = logging.getLogger(__name__)

SOLVERS = ("spectral", "timedomain", "both")

BUILTIN_NOTES = {
    "default": "desk-scale trap, forward release at t_1",
    "fig2ab": "Ω+ always on, Ω− on for t_o < t < t_1; pulse resumes forward",
    "fig2cd": "Ω+ off at t_1; converted pulse leaves backward through z=0",
    "fig3": "forward storage with γ2=0 and k_o=0; pulse area conserved",
    "fig3-decay": "forward storage with γ2=0.01; pulse area decays",
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Two-color stationary light: spectral and time-domain solvers with closed-form checks."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_scenario_args(p):
        p.add_argument("--scenario", default="default",
                       help="Scenario file path or builtin name (default: %(default)s).")
        p.add_argument("--out", default=None, help="Output directory (default: TCSL_OUTPUT_DIR/<name>).")

    # 'simulate' command
    simulate_parser = subparsers.add_parser("simulate", help="Run one or both solvers and write CSV artifacts.")
    add_scenario_args(simulate_parser)
    simulate_parser.add_argument("--solver", choices=SOLVERS, default="spectral")
    simulate_parser.add_argument("--mode", choices=timedomain.MODES, default="full",
                                 help="Time-domain atomic model.")
    simulate_parser.add_argument("--snapshots", default=None, help="Comma-separated output times.")
    simulate_parser.add_argument("--format", choices=["csv"], default="csv")
    simulate_parser.add_argument("--diagnostics", action="store_true",
                                 help="Also write the per-step time-domain diagnostics.")
    simulate_parser.add_argument("--force", action="store_true",
                                 help="Run even when regime conditions only warn.")

    # 'dispersion' command
    dispersion_parser = subparsers.add_parser("dispersion", help="Tabulate ω(k) and χ−(k) at one time.")
    add_scenario_args(dispersion_parser)
    dispersion_parser.add_argument("--time", type=float, default=None,
                                   help="Evaluation time (default: middle of the trap).")

    # 'analytic' command
    analytic_parser = subparsers.add_parser("analytic", help="Closed-form centroids, widths, areas and P.")
    add_scenario_args(analytic_parser)
    analytic_parser.add_argument("--times", default=None, help="Comma-separated times.")

    # 'validate' command
    validate_parser = subparsers.add_parser("validate", help="Check structure and regime margins.")
    validate_parser.add_argument("--scenario", default="default")

    # 'compare' command
    compare_parser = subparsers.add_parser("compare", help="Compare two space-time CSV files.")
    compare_parser.add_argument("run_a")
    compare_parser.add_argument("run_b", help="Reference run.")
    compare_parser.add_argument("--out", default=None, help="Write the report here instead of stdout.")
    compare_parser.add_argument("--v-ref", type=float, default=1.0, dest="v_ref",
                                help="Velocity normalising the areas.")

    # 'scenarios' command
    subparsers.add_parser("scenarios", help="List builtin scenarios.")

    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    handlers = {
        "simulate": handle_simulate,
        "dispersion": handle_dispersion,
        "analytic": handle_analytic,
        "validate": handle_validate,
        "compare": handle_compare,
        "scenarios": handle_scenarios,
    }
    try:
        handlers[args.command](args)
    except ValidationError as e:
        if e.report is not None:
            print(templates.VALIDATION_FAILED.format(scenario=e.report.scenario,
                                                     report=e.report.render()), file=sys.stderr)
        print(f"ERROR: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except TcslError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        sys.exit(e.exit_code)


def configure_logging(verbose=False):
    level = logging.DEBUG if verbose else getattr(logging, config.LOG_LEVEL, logging.INFO)
    logging.basicConfig(level=level, format=config.LOG_FORMAT)


def _output_dir(args, scenario):
    return Path(args.out) if args.out else config.OUTPUT_DIR / scenario.name


def _write_manifest(out_dir, scenario, run_info):
    extra = {f"run.{key}": value for key, value in run_info.items()}
    extra.update(provenance.collect(out_dir))
    path = save_scenario(scenario, out_dir / config.MANIFEST_FILE, extra,
                         header=templates.MANIFEST_PREAMBLE)
    print(f"[INFO] Manifest written to {path}")


def _timedomain_snapshots(scenario, args, diagnostics, seed_times=()):
    """Time-domain states at the output times, plus any extra `seed_times` returned separately."""
    wanted = scenario.output_times
    times = sorted(set(wanted) | set(seed_times))
    states = timedomain.run(scenario, args.mode, times=times, diagnostics=diagnostics)
    extra = {st.t: st for st in states if st.t in seed_times}
    return [st for st in states if st.t in wanted], extra


def handle_simulate(args):
    scenario = resolve_scenario(args.scenario)
    if args.snapshots:
        scenario = scenario.replace(snapshots=parse_times(args.snapshots))
    report = validate_scenario(scenario)
    if not report.passed and not args.force:
        raise ValidationError("regime conditions not satisfied; rerun with --force to proceed", report)
    out_dir = _output_dir(args, scenario)
    z = scenario.grid.z(scenario.medium.length_L)
    # With both solvers the spectral run starts from the time-domain state at t_o
    solvers = ["timedomain", "spectral"] if args.solver == "both" else [args.solver]
    stacked = {}
    seed = None
    for solver in solvers:
        print(f"[INFO] Running {solver} solver on '{scenario.name}'...")
        diagnostics = None
        if solver == "spectral":
            snapshots = spectral.run(scenario, initial=seed)
        else:
            diagnostics = timedomain.Diagnostics(every=100) if args.diagnostics else None
            seed_times = (scenario.t_o,) if args.solver == "both" else ()
            snapshots, extra = _timedomain_snapshots(scenario, args, diagnostics, seed_times)
            if seed_times:
                seed = spectral.seed_from_fields(extra[scenario.t_o].fields, z, scenario)
                print(f"[INFO] Spectral run seeded from the time-domain state at t_o={scenario.t_o:g}")
        results.write_spacetime(out_dir / f"spacetime_{solver}.csv", snapshots, z)
        metrics = [analysis.measure_pulse(s.t, s.fields, z, scenario.v_o, p12=s.p12)
                   for s in snapshots]
        results.write_metrics(out_dir / f"metrics_{solver}.csv", metrics)
        if diagnostics is not None:
            results.write_rows(out_dir / "diagnostics_timedomain.csv", templates.DIAGNOSTICS_HEADER,
                               diagnostics.rows())
        stacked[solver] = analysis.SpaceTimeData.from_snapshots(snapshots, z, label=solver)
        print(templates.RUN_SUMMARY.format(solver=solver, scenario=scenario.name,
                                           n_snapshots=len(snapshots), t_first=snapshots[0].t,
                                           t_last=snapshots[-1].t, out_dir=out_dir))
    if len(stacked) == 2:
        comparison = analysis.compare_runs(stacked["timedomain"], stacked["spectral"], scenario.v_o)
        path = out_dir / "comparison.txt"
        path.write_text(comparison.render(config.FLOAT_FORMAT))
        print(f"[INFO] Solver comparison: max relative L2 {comparison.max_error:.3g} ({path})")
    run_info = {"command": "simulate", "solver": args.solver, "mode": args.mode,
                "format": args.format}
    if seed is not None:
        run_info["spectral_seed"] = "timedomain"
    _write_manifest(out_dir, scenario, run_info)


def handle_dispersion(args):
    scenario = resolve_scenario(args.scenario)
    t = args.time if args.time is not None else 0.5 * (scenario.t_o + scenario.t_1)
    table = dispersion.dispersion_table(scenario.grid.k(), t, scenario.medium, scenario.schedule)
    out_dir = _output_dir(args, scenario)
    path = results.write_rows(out_dir / "dispersion.csv", templates.DISPERSION_HEADER, table)
    print(f"[INFO] Dispersion at t={t:.9g} written to {path}")
    _write_manifest(out_dir, scenario, {"command": "dispersion", "time": repr(float(t))})


def analytic_rows(scenario, times):
    branch = "+" if scenario.release_mode == "forward" else "-"
    d = analysis.separation_D(scenario.medium).real
    for t in times:
        trap_end = min(max(t, scenario.t_o), scenario.t_1)
        yield (t,
               analysis.centroid_z(t, scenario, "+").real,
               analysis.centroid_z(t, scenario, "-").real,
               analysis.width_l(t, scenario),
               d,
               abs(analysis.area_ratio_prediction(t, scenario, branch)),
               analysis.conversion_probability(trap_end, scenario.t_o, scenario))


def handle_analytic(args):
    scenario = resolve_scenario(args.scenario)
    times = parse_times(args.times) or scenario.output_times
    out_dir = _output_dir(args, scenario)
    path = results.write_rows(out_dir / "analytic.csv", templates.ANALYTIC_HEADER,
                              analytic_rows(scenario, times))
    print(f"[INFO] Analytic predictions written to {path}")
    _write_manifest(out_dir, scenario, {"command": "analytic"})


def handle_validate(args):
    scenario = resolve_scenario(args.scenario)
    report = validate_scenario(scenario)
    if not report.passed:
        raise ValidationError(f"scenario '{scenario.name}' is outside the valid regime", report)
    print(report.render(), end="")


def handle_compare(args):
    run_a = results.read_spacetime(args.run_a)
    run_b = results.read_spacetime(args.run_b)
    text = analysis.compare_runs(run_a, run_b, args.v_ref).render(config.FLOAT_FORMAT)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(f"[INFO] Comparison written to {path}")
    else:
        print(text, end="")


def handle_scenarios(args):
    aliases = {}
    for alias, name in BUILTIN_ALIASES.items():
        aliases.setdefault(name, []).append(alias)
    for name, s in builtin_scenarios().items():
        also = f" [also: {', '.join(aliases[name])}]" if name in aliases else ""
        print(f"{name}: {BUILTIN_NOTES.get(name, '')} "
              f"(release={s.release_mode}, gamma2={s.medium.gamma2:g}, t_o={s.t_o:g}, t_1={s.t_1:g})"
              f"{also}")


if __name__ == "__main__":
    main()
