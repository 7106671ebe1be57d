"""
Management command to draw a target phase function and write it as CSV.

Targets come either from the smoothness class (power-law spectrum scaled to
a fraction of the Fourier budget) or from a stationary Gaussian process
with E|phi_k|^2 = flux_scale * |k|^-p.

Usage:
    python manage.py generate --seed 7 --output target.csv
    python manage.py generate --seed 7 --q 0.5 --M 1 --grid-size 1024
    python manage.py generate --seed 7 --source gp --p 4 --flux-scale 1e-3 --spectrum spectrum.json
"""
import math

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError, CommandParser

from phase_app.exceptions import PhaseMetrologyError
from phase_app.function_model import (
    SmoothnessClass,
    derivative_bound,
    fourier_constraint,
    fourier_transform,
    holder_seminorm,
    sample_gaussian_process,
    sample_target,
)

Q_DEFAULT = 1.0
M_DEFAULT = 2 * math.pi
OUTPUT_DEFAULT = "target.csv"


class Command(BaseCommand):
    help = "Generate a target phase function on the grid and write it as CSV"

    def add_arguments(self, parser: CommandParser) -> None:
        defaults = settings.PHASE_METROLOGY
        parser.add_argument("--seed", type=int, required=True, help="Seed for the target draw")
        parser.add_argument(
            "--source",
            choices=["class", "gp"],
            default="class",
            help="Draw from the smoothness class or from a Gaussian process (default: class)",
        )
        parser.add_argument("--q", type=float, default=Q_DEFAULT, help=f"Smoothness degree (default: {Q_DEFAULT})")
        parser.add_argument("--M", type=float, default=M_DEFAULT, help="Smoothness radius (default: 2*pi)")
        parser.add_argument(
            "--grid-size",
            type=int,
            default=defaults["GRID_SIZE"],
            help=f"Grid points G (default: {defaults['GRID_SIZE']})",
        )
        parser.add_argument(
            "--length",
            type=float,
            default=defaults["LENGTH"],
            help=f"Domain length L (default: {defaults['LENGTH']})",
        )
        parser.add_argument(
            "--fraction",
            type=float,
            default=defaults["CONSTRAINT_FRACTION"],
            help=f"Fraction of the Fourier budget to use (default: {defaults['CONSTRAINT_FRACTION']})",
        )
        parser.add_argument("--amplitude-cap", type=float, help="Shrink the target until max |phi| <= cap")
        parser.add_argument("--p", type=float, default=4.0, help="Spectral exponent for --source gp (default: 4)")
        parser.add_argument(
            "--flux-scale", type=float, default=1e-3, help="Spectral scale for --source gp (default: 1e-3)"
        )
        parser.add_argument("--output", type=str, default=OUTPUT_DEFAULT, help=f"CSV path (default: {OUTPUT_DEFAULT})")
        parser.add_argument("--spectrum", type=str, help="Also write the Fourier spectrum as JSON")

    def handle(self, *args, **options) -> None:
        try:
            cls = SmoothnessClass(
                q=options["q"],
                M=options["M"],
                length=options["length"],
                a=settings.PHASE_METROLOGY["HOLDER_CUTOFF_FRACTION"] * options["length"],
            )
            if options["source"] == "class":
                target = sample_target(
                    cls,
                    options["grid_size"],
                    options["amplitude_cap"],
                    options["seed"],
                    fraction=options["fraction"],
                )
            else:
                target = sample_gaussian_process(
                    options["p"], options["flux_scale"], options["grid_size"], options["seed"],
                    length=options["length"],
                )
            spectrum = fourier_transform(target, target.grid_size // 4)
            constraint = fourier_constraint(spectrum, cls)
            seminorm = holder_seminorm(target, cls)
        except PhaseMetrologyError as exc:
            raise CommandError(str(exc)) from exc

        target.to_csv(options["output"])
        if options["spectrum"]:
            with open(options["spectrum"], "w") as f:
                f.write(spectrum.to_json())

        self.stdout.write("=" * 70)
        self.stdout.write(f"Target: {options['source']} draw, G={target.grid_size}, L={target.length:g}")
        self.stdout.write("=" * 70)
        for key, value in target.metadata.items():
            self.stdout.write(f"  {key}: {value}")
        self.stdout.write(f"  max |phi|: {abs(target.values).max():.4f}")
        self.stdout.write(f"  mean phi'^2: {derivative_bound(target):.4f}")
        self.stdout.write(
            f"  Fourier constraint: {constraint.value:.4e} of {cls.fourier_budget:.4e} "
            f"({'satisfied' if constraint.satisfied else 'violated'})"
        )
        in_class = seminorm <= cls.holder_budget
        style = self.style.SUCCESS if in_class else self.style.WARNING
        self.stdout.write(style(f"  Hoelder seminorm: {seminorm:.4e} of {cls.holder_budget:.4e}"))
        self.stdout.write(f"\nTarget saved to {options['output']}")
