#!/usr/bin/env python
"""Command-line entry point: generate, estimate, sweep, bounds and verify, plus Django's own commands."""
import os
import sys


def main() -> None:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django is not importable; install the project with `uv sync` or "
            "`pip install -e .[dev]` inside the active virtual environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
