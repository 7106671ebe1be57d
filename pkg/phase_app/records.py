"""
Per-trial estimation records and their CSV representation.

err_a_sq / err_b_sq carry the method's error decomposition:

    method  err_a_sq             err_b_sq
    PS      delta_stat^2         delta_det^2
    WS      delta_PS^2           delta_QT^2
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

from phase_app.function_model import GridFunction

FLAG_SEPARATOR = "|"

# Record flags
AMPLITUDE_VIOLATION = "amplitude_violation"
BUDGET_EXCEEDED = "budget_exceeded"
INFIDELITY_CHAIN_VIOLATED = "infidelity_chain_violated"
KITAEV_DEGRADED = "kitaev_degraded"
POSTSELECTION_FAILED = "postselection_failed"
PRECONDITION_FAILED = "precondition_failed"
TOMOGRAPHY_DEFICIENT = "tomography_deficient"


class Method(str, Enum):
    PS = "PS"
    WS = "WS"


class Regime(str, Enum):
    SQL = "SQL"
    HEISENBERG = "Heisenberg"


@dataclass(frozen=True)
class EstimationRecord:
    """One trial's outcome. ``estimate`` is kept in memory only."""

    method: Method
    regime: Regime
    q: float
    M: float
    N: int
    trial: int
    seed: int
    mspe: float
    err_a_sq: float
    err_b_sq: float
    particles_used: int
    flags: tuple[str, ...] = ()
    estimate: GridFunction | None = field(default=None, compare=False, repr=False)

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def with_position(self, N: int, trial: int) -> EstimationRecord:
        return replace(self, N=N, trial=trial, estimate=None)

    def to_row(self) -> dict:
        row = {name: getattr(self, name) for name in RECORD_COLUMNS}
        row["method"] = self.method.value
        row["regime"] = self.regime.value
        row["flags"] = FLAG_SEPARATOR.join(self.flags)
        for key in ("q", "M", "mspe", "err_a_sq", "err_b_sq"):
            row[key] = repr(float(row[key]))
        return row

    @classmethod
    def from_row(cls, row: dict) -> EstimationRecord:
        return cls(
            method=Method(row["method"]),
            regime=Regime(row["regime"]),
            q=float(row["q"]),
            M=float(row["M"]),
            N=int(row["N"]),
            trial=int(row["trial"]),
            seed=int(row["seed"]),
            mspe=float(row["mspe"]),
            err_a_sq=float(row["err_a_sq"]),
            err_b_sq=float(row["err_b_sq"]),
            particles_used=int(row["particles_used"]),
            flags=tuple(f for f in row["flags"].split(FLAG_SEPARATOR) if f),
        )


RECORD_COLUMNS = [f.name for f in fields(EstimationRecord) if f.name != "estimate"]


def write_records(records: list[EstimationRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RECORD_COLUMNS)
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_row())


def read_records(path: str | Path) -> list[EstimationRecord]:
    with open(path, newline="") as fh:
        return [EstimationRecord.from_row(row) for row in csv.DictReader(fh)]
