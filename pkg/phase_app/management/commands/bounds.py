"""
Management command to tabulate the closed-form error bounds.

One row per (q, M, N): c0, the SQL and Heisenberg floors, the worst-case
bound at the optimal mode count and the largest useful entanglement size.

Usage:
    python manage.py bounds
    python manage.py bounds --q 0.5,1,2 --M 6.283185307179586 --output bounds.csv
    python manage.py bounds --n-min 8 --n-max 24
"""
import csv
import math

from django.core.management.base import BaseCommand, CommandError, CommandParser

from phase_app.bounds import BoundReport, bound_table
from phase_app.exceptions import PhaseMetrologyError

N_MIN_DEFAULT = 10
N_MAX_DEFAULT = 20
OUTPUT_DEFAULT = "bounds.csv"


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CommandError(f"expected comma-separated numbers, got {text!r}") from exc


class Command(BaseCommand):
    help = "Write the SQL and Heisenberg bound tables as CSV"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--q", type=_floats, default=[0.5, 1.0, 2.0], help="Smoothness degrees (default: 0.5,1,2)")
        parser.add_argument("--M", type=_floats, default=[2 * math.pi], help="Smoothness radii (default: 2*pi)")
        parser.add_argument(
            "--n-min", type=int, default=N_MIN_DEFAULT, help=f"Smallest N = 2^n-min (default: {N_MIN_DEFAULT})"
        )
        parser.add_argument(
            "--n-max", type=int, default=N_MAX_DEFAULT, help=f"Largest N = 2^n-max (default: {N_MAX_DEFAULT})"
        )
        parser.add_argument("--output", type=str, default=OUTPUT_DEFAULT, help=f"CSV path (default: {OUTPUT_DEFAULT})")

    def handle(self, *args, **options) -> None:
        if options["n_min"] > options["n_max"]:
            raise CommandError("--n-min must not exceed --n-max")
        N_values = [2**e for e in range(options["n_min"], options["n_max"] + 1)]
        try:
            rows = bound_table(options["q"], options["M"], N_values)
        except PhaseMetrologyError as exc:
            raise CommandError(str(exc)) from exc

        columns = list(BoundReport.__dataclass_fields__)
        with open(options["output"], "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            writer.writerows(rows)

        self.stdout.write("=" * 70)
        self.stdout.write(f"{'q':>5} {'M':>8} {'N':>9} {'SQL floor':>11} {'HL floor':>11} {'K*':>5} {'n_p*':>6}")
        self.stdout.write("=" * 70)
        for row in rows:
            self.stdout.write(
                f"{row['q']:>5g} {row['M']:>8.4g} {row['N']:>9} {row['sql_floor']:>11.4e} "
                f"{row['hl_lower']:>11.4e} {row['optimal_K']:>5} {row['max_np']:>6}"
            )
        self.stdout.write(f"\n{len(rows)} rows saved to {options['output']}")
