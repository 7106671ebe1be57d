"""
Management command to run one estimation trial and print its record as JSON.

The target comes from a CSV written by ``generate`` or is drawn from the
class with the trial's own target stream. The resource split is the one a
sweep would use at the same N.

Usage:
    python manage.py estimate --seed 1 --N 65536
    python manage.py estimate --seed 1 --N 65536 --method WS
    python manage.py estimate --seed 1 --N 65536 --regime Heisenberg --target target.csv
"""
import json
import math

from django.core.management.base import BaseCommand, CommandError, CommandParser

from phase_app.exceptions import PhaseMetrologyError
from phase_app.function_model import GridFunction
from phase_app.harness import ExperimentConfig, draw_target, ps_budget, run_trial, ws_budget
from phase_app.ps_estimator import SMALL_PHASE_CAP, build_kernel, ps_estimate
from phase_app.records import RECORD_COLUMNS, Method, Regime
from phase_app.seeding import ESTIMATOR_STREAM, child_sequence
from phase_app.ws_estimator import ws_estimate


class Command(BaseCommand):
    help = "Run a single PS or WS estimation trial and print the record as JSON"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--seed", type=int, required=True, help="Master seed")
        parser.add_argument("--N", type=int, required=True, help="Total particle budget")
        parser.add_argument("--method", choices=[m.value for m in Method], default=Method.PS.value)
        parser.add_argument("--regime", choices=[r.value for r in Regime], default=Regime.SQL.value)
        parser.add_argument("--q", type=float, default=1.0, help="Smoothness degree (default: 1.0)")
        parser.add_argument("--M", type=float, default=2 * math.pi, help="Smoothness radius (default: 2*pi)")
        parser.add_argument("--trial", type=int, default=0, help="Trial index for seed derivation (default: 0)")
        parser.add_argument("--target", type=str, help="CSV target written by the generate command")
        parser.add_argument("--grid-size", type=int, help="Grid points G when no --target is given")

    def handle(self, *args, **options) -> None:
        N, trial = options["N"], options["trial"]
        document = {
            "method": options["method"],
            "regime": options["regime"],
            "smoothness": {"q": options["q"], "M": options["M"]},
            "sweep": {"seed": options["seed"], "N_list": [N], "trials": trial + 1},
        }
        try:
            if options["target"]:
                target = GridFunction.from_csv(options["target"])
                document["grid"] = {"G": target.grid_size, "L": target.length}
            elif options["grid_size"]:
                document["grid"] = {"G": options["grid_size"]}
            config = ExperimentConfig.from_dict(document)
            if options["target"]:
                record = self._estimate(config, target, N, trial)
            else:
                record = run_trial(config, N, trial)
                target = draw_target(config, N, trial)
        except PhaseMetrologyError as exc:
            raise CommandError(str(exc)) from exc

        row = {name: getattr(record, name) for name in RECORD_COLUMNS}
        row["method"] = record.method.value
        row["regime"] = record.regime.value
        row["flags"] = list(record.flags)
        row["delta"] = math.sqrt(record.mspe) if not math.isnan(record.mspe) else None
        row["grid_size"] = target.grid_size
        self.stdout.write(json.dumps(row, indent=2))

    def _estimate(self, config: ExperimentConfig, target: GridFunction, N: int, trial: int):
        """A user-supplied target bypasses the flagged-record conversion of run_trial."""
        seq = child_sequence(config.seed, N, trial, ESTIMATOR_STREAM)
        cls = config.smoothness_class
        if config.method is Method.PS:
            kernel = build_kernel(config.kernel_m, config.kernel_theta_points)
            record = ps_estimate(target, ps_budget(config, N), cls, config.regime, kernel, seq,
                                 amplitude_cap=config.amplitude_cap or SMALL_PHASE_CAP, constants=config.constants)
        else:
            record = ws_estimate(target, ws_budget(config, N), cls, seq,
                                 constants=config.constants, regime=config.regime)
        return record.with_position(N, trial)
