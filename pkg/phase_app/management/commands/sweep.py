"""
Management command to run a seeded Monte Carlo sweep over particle budgets.

Writes records.csv, fits.json, points.csv (plot-ready per-N means),
scaling.svg and the resolved config.json into the output directory, then
prints the scaling fit and the bound-consistency table. Every flag mirrors a
key of the JSON config and overrides it.

Usage:
    python manage.py sweep --seed 42
    python manage.py sweep --seed 42 --config sweep.json --workers 8
    python manage.py sweep --seed 42 --method WS --q 0.5 --M 1 --n-list 256,1024,4096,16384
    python manage.py sweep --seed 42 --regime Heisenberg --trials 100 --persist
"""
import json
from pathlib import Path
from time import perf_counter

from django.core.management.base import BaseCommand, CommandError, CommandParser
from django.db import transaction

from phase_app.exceptions import InsufficientDataError, PhaseMetrologyError
from phase_app.harness import (
    ExperimentConfig,
    bound_reports_for,
    check_bounds,
    fit_scaling,
    run_sweep,
    write_fit_points,
    write_fits,
)
from phase_app.models import ScalingFitResult, SweepRecord, SweepRun
from phase_app.plotting import plot_scaling
from phase_app.records import Method, Regime, write_records

BATCH_SIZE_DEFAULT = 1000

# flag -> (config section, key)
CONFIG_KEYS = {
    "q": ("smoothness", "q"),
    "M": ("smoothness", "M"),
    "holder_cutoff_fraction": ("smoothness", "holder_cutoff_fraction"),
    "grid_size": ("grid", "G"),
    "length": ("grid", "L"),
    "n_list": ("sweep", "N_list"),
    "trials": ("sweep", "trials"),
    "seed": ("sweep", "seed"),
    "target_mode": ("sweep", "target_mode"),
    "workers": ("sweep", "workers"),
    "split_factor": ("sweep", "split_factor"),
    "heisenberg_sites": ("sweep", "heisenberg_sites"),
    "c4": ("kitaev", "c4"),
    "c5": ("kitaev", "c5"),
    "c6": ("kitaev", "c6"),
    "kernel_order": ("kernel", "order"),
    "theta_points": ("kernel", "theta_points"),
    "constraint_fraction": ("target", "constraint_fraction"),
    "amplitude_cap": ("target", "amplitude_cap"),
    "output_dir": ("output", "dir"),
}


def _n_list(text: str) -> list[int]:
    try:
        return [int(n) for n in text.split(",") if n.strip()]
    except ValueError as exc:
        raise CommandError(f"--n-list must be comma-separated integers, got {text!r}") from exc


class Command(BaseCommand):
    help = "Run a Monte Carlo sweep, fit the error scaling and check it against the bounds"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--seed", type=int, required=True, help="Master seed (required)")
        parser.add_argument("--config", type=str, help="JSON experiment config; flags override its keys")
        parser.add_argument("--method", choices=[m.value for m in Method], help="PS or WS (default: PS)")
        parser.add_argument("--regime", choices=[r.value for r in Regime], help="SQL or Heisenberg (default: SQL)")
        parser.add_argument("--q", type=float, help="Smoothness degree (default: 1.0)")
        parser.add_argument("--M", type=float, help="Smoothness radius (default: 2*pi)")
        parser.add_argument("--holder-cutoff-fraction", type=float, help="Hoelder cutoff a as a fraction of L")
        parser.add_argument("--grid-size", type=int, help="Grid points G")
        parser.add_argument("--length", type=float, help="Domain length L")
        parser.add_argument("--n-list", type=_n_list, help="Comma-separated particle budgets (default: 2^10..2^20)")
        parser.add_argument("--trials", type=int, help="Trials per N (default: 200 SQL, 100 Heisenberg)")
        parser.add_argument("--target-mode", choices=["fresh", "fixed"], help="New target per trial or per N")
        parser.add_argument("--workers", type=int, help="Worker processes")
        parser.add_argument("--split-factor", type=float, help="Multiplier on the analytic site/mode count")
        parser.add_argument("--heisenberg-sites", type=int, help="Depth-0 sites at which the Heisenberg cascade starts")
        parser.add_argument("--c4", type=float, help="Kitaev particle budget scale")
        parser.add_argument("--c5", type=float, help="Kitaev copies per run constant")
        parser.add_argument("--c6", type=float, help="Kitaev repeats per level constant")
        parser.add_argument("--kernel-order", type=int, help="Kernel order m (default: ceil(q) - 1)")
        parser.add_argument("--theta-points", type=int, help="Kernel table resolution")
        parser.add_argument("--constraint-fraction", type=float, help="Fraction of the Fourier budget for targets")
        parser.add_argument("--amplitude-cap", type=float, help="Largest target amplitude")
        parser.add_argument("--output-dir", type=str, help="Directory for CSV/JSON/SVG output")
        parser.add_argument("--persist", action="store_true", help="Store run, records and fits in the database")
        parser.add_argument(
            "--batch-size",
            type=int,
            default=BATCH_SIZE_DEFAULT,
            help=f"Batch size for bulk_create with --persist (default: {BATCH_SIZE_DEFAULT})",
        )
        parser.add_argument("--no-plot", action="store_true", help="Skip the SVG scatter")

    def handle(self, *args, **options) -> None:
        config = self._config(options)
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        self.stdout.write(f"Sweep {config.label}: N={list(config.n_list)}, {config.trials} trials per N")
        self.stdout.write("=" * 70)

        start = perf_counter()
        try:
            records = run_sweep(config)
        except PhaseMetrologyError as exc:
            raise CommandError(str(exc)) from exc
        elapsed = perf_counter() - start
        flagged = sum(r.flagged for r in records)
        self.stdout.write(f"  {len(records)} trials in {elapsed:.1f}s ({flagged} flagged)")

        write_records(records, out_dir / "records.csv")
        (out_dir / "config.json").write_text(config.to_json())

        fits = []
        try:
            fits.append(fit_scaling(records, label=config.label))
        except InsufficientDataError as exc:
            self.stdout.write(self.style.WARNING(f"  No scaling fit: {exc}"))

        write_fits(fits, out_dir / "fits.json")
        if fits:
            write_fit_points(fits, out_dir / "points.csv")
            if not options["no_plot"]:
                plot_scaling(fits, out_dir / "scaling.svg", title=config.label)
            self._report_fit(fits[0])

        report = check_bounds(records, bound_reports_for(records))
        self.stdout.write("\n" + "=" * 70)
        self.stdout.write(f"BOUND CONSISTENCY ({config.regime.value} floor, 3-sigma allowance)")
        self.stdout.write("=" * 70)
        self.stdout.write(report.table())
        if report.passed:
            self.stdout.write(self.style.SUCCESS("All N values reach the floor"))
        else:
            self.stdout.write(self.style.ERROR("Some N values fall below the floor"))

        if options["persist"]:
            run = self._persist(config, records, fits, options["batch_size"])
            self.stdout.write(f"\nStored as sweep run #{run.pk}")
        self.stdout.write(f"\nResults saved to {out_dir}")

    def _config(self, options: dict) -> ExperimentConfig:
        document = {}
        if options["config"]:
            try:
                document = json.loads(Path(options["config"]).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise CommandError(f"cannot read config {options['config']}: {exc}") from exc
        for key in ("method", "regime"):
            if options[key] is not None:
                document[key] = options[key]
        for flag, (section, key) in CONFIG_KEYS.items():
            if options.get(flag) is not None:
                document.setdefault(section, {})[key] = options[flag]
        try:
            return ExperimentConfig.from_dict(document)
        except PhaseMetrologyError as exc:
            raise CommandError(str(exc)) from exc

    def _report_fit(self, fit) -> None:
        self.stdout.write("\n" + "=" * 70)
        self.stdout.write("SCALING FIT")
        self.stdout.write("=" * 70)
        self.stdout.write(f"  delta ~ N^({fit.exponent:+.4f} +- {fit.standard_error:.4f})")
        self.stdout.write(f"  delta^2 ~ N^({fit.exponent_sq:+.4f})")
        self.stdout.write(f"  window: N={list(fit.n_window)}")
        if fit.excluded:
            self.stdout.write(self.style.WARNING(f"  excluded for flagged trials: N={list(fit.excluded)}"))
        for point in fit.points:
            self.stdout.write(
                f"  N={point.N:>9}  mean delta={point.mean_delta:.5g}  "
                f"95% CI [{point.ci_low:.5g}, {point.ci_high:.5g}]  flagged={point.flagged}"
            )

    @transaction.atomic
    def _persist(self, config: ExperimentConfig, records, fits, batch_size: int) -> SweepRun:
        run = SweepRun.from_config(config)
        SweepRecord.objects.bulk_create(SweepRecord.from_records(run, records), batch_size=batch_size)
        ScalingFitResult.objects.bulk_create([ScalingFitResult.from_fit(run, fit) for fit in fits])
        return run
