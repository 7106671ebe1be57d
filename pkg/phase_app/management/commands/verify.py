"""
Management command to run the acceptance checks.

The full scale fits the SQL and Heisenberg scaling exponents and takes a
while; --quick runs the same checks on reduced grids and trial counts with
doubled exponent tolerances. Exits non-zero when any check fails.

Usage:
    python manage.py verify --quick
    python manage.py verify --workers 8 --output verify.json
    python manage.py verify --only kernels,qfi,sufficiency
"""
import json
from dataclasses import asdict
from time import perf_counter

from django.core.management.base import BaseCommand, CommandError, CommandParser

from phase_app.acceptance import CHECKS, FULL, QUICK, run_acceptance


class Command(BaseCommand):
    help = "Run the acceptance checks and print a pass/fail table"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--quick", action="store_true", help="Reduced grids, budgets and trial counts")
        parser.add_argument(
            "--only",
            type=lambda text: [name.strip() for name in text.split(",") if name.strip()],
            help=f"Comma-separated subset of checks: {', '.join(CHECKS)}",
        )
        parser.add_argument("--workers", type=int, default=1, help="Worker processes for the sweeps (default: 1)")
        parser.add_argument("--output", type=str, help="Output results to JSON file")

    def handle(self, *args, **options) -> None:
        unknown = set(options["only"] or ()) - set(CHECKS)
        if unknown:
            raise CommandError(f"unknown checks: {', '.join(sorted(unknown))}")
        scale = QUICK if options["quick"] else FULL

        self.stdout.write(f"Running acceptance checks at {scale.name} scale...")
        self.stdout.write("=" * 70)
        start = perf_counter()
        results = run_acceptance(scale, only=options["only"], workers=options["workers"])
        elapsed = perf_counter() - start

        for result in results:
            verdict = self.style.SUCCESS("PASS") if result.passed else self.style.ERROR("FAIL")
            self.stdout.write(f"  [{verdict}] {result.name}: {result.detail}")

        failed = [r for r in results if not r.passed]
        self.stdout.write("\n" + "=" * 70)
        self.stdout.write(f"{len(results) - len(failed)} of {len(results)} checks passed in {elapsed:.1f}s")

        if options["output"]:
            with open(options["output"], "w") as f:
                json.dump({"scale": scale.name, "results": [asdict(r) for r in results]}, f, indent=2)
            self.stdout.write(f"\nResults saved to {options['output']}")

        if failed:
            raise CommandError(f"{len(failed)} acceptance check(s) failed")
