"""
Seeded Monte Carlo sweeps, scaling fits and bound-consistency checks.

A sweep runs one estimator (PS or WS) in one regime over a list of particle
budgets N, drawing an in-class target and an estimator stream for each
(N, trial) from the master seed. Work items are independent, so a process
pool returns exactly the serial result.

Usage:
    config = ExperimentConfig.from_file("sweep.json")
    records = run_sweep(config)
    fit = fit_scaling(records)
    report = check_bounds(records, bound_reports_for(records))
"""
from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Mapping

import numpy as np

from phase_app.bounds import BoundReport, analytic_K, bound_report, max_entanglement, resource_optima
from phase_app.exceptions import (
    ConfigurationError,
    InsufficientDataError,
    PostselectionError,
    PreconditionError,
    TomographyError,
)
from phase_app.function_model import (
    DEFAULT_CONSTRAINT_FRACTION,
    DEFAULT_CUTOFF_FRACTION,
    DEFAULT_GRID_SIZE,
    GridFunction,
    SmoothnessClass,
    sample_target,
)
from phase_app.probe_sim import KitaevConstants, ProbeBudget, kitaev_particles, repeats_at_level
from phase_app.ps_estimator import DEFAULT_THETA_POINTS, SMALL_PHASE_CAP, SmoothingKernel, build_kernel, ps_estimate
from phase_app.records import (
    BUDGET_EXCEEDED,
    PRECONDITION_FAILED,
    POSTSELECTION_FAILED,
    TOMOGRAPHY_DEFICIENT,
    EstimationRecord,
    Method,
    Regime,
)
from phase_app.seeding import ESTIMATOR_STREAM, TARGET_STREAM, child_sequence, seed_value
from phase_app.ws_estimator import COPIES_PER_MODE, ws_estimate

logger = logging.getLogger(__name__)

TARGET_MODES = ("fresh", "fixed")
DEFAULT_N_LIST = tuple(2**e for e in range(10, 21))
DEFAULT_TRIALS_SQL = 200
DEFAULT_TRIALS_HEISENBERG = 100
DEFAULT_HEISENBERG_SITES = 16
MIN_FIT_TRIALS = 30
MIN_FIT_POINTS = 4
MAX_FLAGGED_FRACTION = 0.05
BOOTSTRAP_RESAMPLES = 200
BOOTSTRAP_SEED = 20240
SIGMA_ALLOWANCE = 3.0
# Tomography copies per mode in the entangled WS regime, twice the bare minimum.
WS_HEISENBERG_MODE_COPIES = 2 * COPIES_PER_MODE


def configured_defaults() -> dict:
    """PHASE_METROLOGY from Django settings, or {} when Django is not configured."""
    try:
        from django.conf import settings
        from django.core.exceptions import ImproperlyConfigured

        try:
            return dict(getattr(settings, "PHASE_METROLOGY", {}))
        except ImproperlyConfigured:
            return {}
    except ImportError:
        return {}


@dataclass(frozen=True)
class ExperimentConfig:
    method: Method
    regime: Regime
    q: float
    M: float
    seed: int
    n_list: tuple[int, ...] = DEFAULT_N_LIST
    trials: int = DEFAULT_TRIALS_SQL
    length: float = 1.0
    grid_size: int = DEFAULT_GRID_SIZE
    holder_cutoff_fraction: float = DEFAULT_CUTOFF_FRACTION
    constants: KitaevConstants = field(default_factory=KitaevConstants)
    kernel_order: int | None = None
    kernel_theta_points: int = DEFAULT_THETA_POINTS
    constraint_fraction: float = DEFAULT_CONSTRAINT_FRACTION
    amplitude_cap: float | None = SMALL_PHASE_CAP
    heisenberg_sites: int = DEFAULT_HEISENBERG_SITES
    split_factor: float = 1.0
    target_mode: str = "fresh"
    workers: int = 1
    output_dir: str = "results"

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        self.validate()

    def validate(self) -> None:
        if not self.n_list:
            raise ConfigurationError("N_list must not be empty")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ConfigurationError(f"N_list must be strictly increasing, got {list(self.n_list)}")
        if self.n_list[0] < 1:
            raise ConfigurationError("every N must be positive")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be positive, got {self.trials}")
        if self.method is Method.WS and self.q > 1:
            raise ConfigurationError(f"the WS method is restricted to q <= 1, got q={self.q}")
        if self.target_mode not in TARGET_MODES:
            raise ConfigurationError(f"target_mode must be one of {TARGET_MODES}, got {self.target_mode!r}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be positive, got {self.workers}")
        if self.split_factor <= 0:
            raise ConfigurationError(f"split_factor must be positive, got {self.split_factor}")
        if self.heisenberg_sites < 1:
            raise ConfigurationError(f"heisenberg_sites must be positive, got {self.heisenberg_sites}")
        try:
            self.smoothness_class
        except PreconditionError as exc:
            raise ConfigurationError(f"invalid smoothness class: {exc}") from exc

    @property
    def smoothness_class(self) -> SmoothnessClass:
        return SmoothnessClass(
            q=self.q, M=self.M, length=self.length, a=self.holder_cutoff_fraction * self.length
        )

    @property
    def kernel_m(self) -> int:
        return self.smoothness_class.m if self.kernel_order is None else self.kernel_order

    @property
    def label(self) -> str:
        return f"{self.method.value}-{self.regime.value} q={self.q:g} M={self.M:g}"

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "regime": self.regime.value,
            "smoothness": {"q": self.q, "M": self.M, "holder_cutoff_fraction": self.holder_cutoff_fraction},
            "grid": {"G": self.grid_size, "L": self.length},
            "sweep": {
                "N_list": list(self.n_list),
                "trials": self.trials,
                "seed": self.seed,
                "target_mode": self.target_mode,
                "workers": self.workers,
                "split_factor": self.split_factor,
                "heisenberg_sites": self.heisenberg_sites,
            },
            "kitaev": asdict(self.constants),
            "kernel": {"order": self.kernel_order, "theta_points": self.kernel_theta_points},
            "target": {"constraint_fraction": self.constraint_fraction, "amplitude_cap": self.amplitude_cap},
            "output": {"dir": self.output_dir},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Mapping, defaults: Mapping | None = None) -> ExperimentConfig:
        """
        Build from the nested document; missing keys fall back to ``defaults``
        (the PHASE_METROLOGY settings when omitted).
        """
        defaults = configured_defaults() if defaults is None else dict(defaults)

        def pick(section: str, key: str, setting: str | None = None, fallback=None):
            block = data.get(section, {}) if section else data
            if key in block and block[key] is not None:
                return block[key]
            if setting and setting in defaults:
                return defaults[setting]
            return fallback

        try:
            regime = Regime(pick("", "regime", fallback=Regime.SQL.value))
            trials_setting = "TRIALS_SQL" if regime is Regime.SQL else "TRIALS_HEISENBERG"
            trials_fallback = DEFAULT_TRIALS_SQL if regime is Regime.SQL else DEFAULT_TRIALS_HEISENBERG
            seed = pick("sweep", "seed")
            if seed is None:
                raise ConfigurationError("a master seed is required")
            kitaev = data.get("kitaev", {})
            constants = KitaevConstants(
                c4=float(kitaev.get("c4", defaults.get("KITAEV_C4", 1.0))),
                c5=float(kitaev.get("c5", defaults.get("KITAEV_C5", 4.0))),
                c6=float(kitaev.get("c6", defaults.get("KITAEV_C6", 3.0))),
            )
            cap = data.get("target", {}).get("amplitude_cap", defaults.get("AMPLITUDE_CAP", SMALL_PHASE_CAP))
            return cls(
                method=Method(pick("", "method", fallback=Method.PS.value)),
                regime=regime,
                q=float(pick("smoothness", "q", fallback=1.0)),
                M=float(pick("smoothness", "M", fallback=2 * math.pi)),
                seed=int(seed),
                n_list=tuple(pick("sweep", "N_list", fallback=DEFAULT_N_LIST)),
                trials=int(pick("sweep", "trials", trials_setting, trials_fallback)),
                length=float(pick("grid", "L", "LENGTH", 1.0)),
                grid_size=int(pick("grid", "G", "GRID_SIZE", DEFAULT_GRID_SIZE)),
                holder_cutoff_fraction=float(
                    pick("smoothness", "holder_cutoff_fraction", "HOLDER_CUTOFF_FRACTION", DEFAULT_CUTOFF_FRACTION)
                ),
                constants=constants,
                kernel_order=pick("kernel", "order"),
                kernel_theta_points=int(pick("kernel", "theta_points", "KERNEL_THETA_POINTS", DEFAULT_THETA_POINTS)),
                constraint_fraction=float(
                    pick("target", "constraint_fraction", "CONSTRAINT_FRACTION", DEFAULT_CONSTRAINT_FRACTION)
                ),
                amplitude_cap=None if cap is None else float(cap),
                heisenberg_sites=int(pick("sweep", "heisenberg_sites", "HEISENBERG_SITES", DEFAULT_HEISENBERG_SITES)),
                split_factor=float(pick("sweep", "split_factor", fallback=1.0)),
                target_mode=str(pick("sweep", "target_mode", fallback="fresh")),
                workers=int(pick("sweep", "workers", "WORKERS", 1)),
                output_dir=str(pick("output", "dir", "OUTPUT_DIR", "results")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid experiment configuration: {exc}") from exc

    @classmethod
    def from_json(cls, text: str, defaults: Mapping | None = None) -> ExperimentConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data, defaults)

    @classmethod
    def from_file(cls, path: str | Path, defaults: Mapping | None = None) -> ExperimentConfig:
        return cls.from_json(Path(path).read_text(), defaults)


@lru_cache(maxsize=8)
def _kernel(m: int, theta_points: int) -> SmoothingKernel:
    return build_kernel(m, theta_points)


def _clamp(value: int, lo: int, hi: int) -> int:
    return max(lo, min(hi, value))


def heisenberg_anchor(config: ExperimentConfig) -> float:
    """Budget at which the entangled plan reaches n_p = 1: heisenberg_sites depth-0 cascades."""
    per_site = kitaev_particles(0, config.constants) / config.constants.c4
    return config.heisenberg_sites * per_site * config.split_factor


def entanglement_depth(config: ExperimentConfig, N: int) -> int:
    """
    Cascade depth n0 = floor(log2 n_p) for the entangled regime at budget N.

    n_p follows the resource_optima entanglement size, which grows as
    N^(q/(q+1)); its normalisation is fixed so that n_p = 1 at the anchor
    budget, below which every probe runs unentangled. The ratio does not
    depend on M.
    """
    q = config.q
    M = config.M if config.M > 0 else 1.0
    overhead = max_entanglement(q, M, heisenberg_anchor(config))
    plan = resource_optima(q, M, N, Regime.HEISENBERG, overhead=overhead)
    return plan.n_p.bit_length() - 1


def ps_budget(config: ExperimentConfig, N: int) -> ProbeBudget:
    """
    Position-state split for budget N: n1 sites with N // n1 particles each.

    SQL: n1 from the analytic optimum. Heisenberg: each site gets exactly
    the cost of a depth-n0 Kitaev cascade, with n0 from entanglement_depth,
    and the rest of the budget buys sites.
    """
    cls = config.smoothness_class
    max_sites = max(config.kernel_m + 1, config.grid_size // 4)
    if config.regime is Regime.SQL:
        plan = resource_optima(cls.q, cls.M, N, Regime.SQL)
        n1 = _clamp(round(plan.n1 * config.split_factor), config.kernel_m + 1, max_sites)
    else:
        n0 = entanglement_depth(config, N)
        per_site = math.ceil(kitaev_particles(n0, config.constants) / config.constants.c4)
        n1 = _clamp(N // per_site, config.kernel_m + 1, max_sites)
    return ProbeBudget.position_state(n1, max(1, N // n1))


def cascade_weight(n0: int, constants: KitaevConstants) -> int:
    """Particles per tomography copy of a depth-n0 WS cascade: sum_n 2^n N_repeat(n)."""
    return sum(2**n * repeats_at_level(n, n0, constants) for n in range(n0 + 1))


def ws_budget(config: ExperimentConfig, N: int) -> ProbeBudget:
    """
    Wavenumber-state split for budget N.

    SQL: n_p = 1, n_c = N and K from the analytic optimum, capped by the
    tomography copy requirement. Heisenberg: n_p = 2^n0 with n0 from
    entanglement_depth, as for PS; the cascade takes n_c = N // cascade_weight
    copies and K is the analytic optimum for the stretched radius n_p M,
    capped by the copies tomography needs. n0 only steps down when that cap
    leaves K < 2 n_p, since the band of exp(i n_p phi) widens with n_p.
    """
    cls = config.smoothness_class
    k_limit = config.grid_size // 4
    if config.regime is Regime.SQL:
        k_cap = (N // COPIES_PER_MODE - 1) // 2
        K = _clamp(round(analytic_K(cls.q, cls.M, N) * config.split_factor), 1, max(1, min(k_limit, k_cap)))
        return ProbeBudget.wavenumber_state(1, N, K)

    n0 = entanglement_depth(config, N)
    while True:
        n_p = 2**n0
        n_c = max(1, N // cascade_weight(n0, config.constants))
        k_cap = (n_c // WS_HEISENBERG_MODE_COPIES - 1) // 2
        K = _clamp(min(round(analytic_K(cls.q, n_p * cls.M, n_c)), k_cap), 1, k_limit)
        if n0 == 0 or K >= 2 * n_p:
            return ProbeBudget.wavenumber_state(n_p, n_c, K)
        logger.debug("N=%d: K=%d cannot carry n_p=%d, stepping the cascade down", N, K, n_p)
        n0 -= 1


def _flagged_record(config: ExperimentConfig, N: int, trial: int, seed: int, flag: str) -> EstimationRecord:
    return EstimationRecord(
        method=config.method,
        regime=config.regime,
        q=config.q,
        M=config.M,
        N=N,
        trial=trial,
        seed=seed,
        mspe=float("nan"),
        err_a_sq=float("nan"),
        err_b_sq=float("nan"),
        particles_used=0,
        flags=(flag,),
    )


def draw_target(config: ExperimentConfig, N: int, trial: int) -> GridFunction:
    if config.target_mode == "fixed":
        seq = child_sequence(config.seed, TARGET_STREAM, N)
    else:
        seq = child_sequence(config.seed, N, trial, TARGET_STREAM)
    return sample_target(
        config.smoothness_class,
        config.grid_size,
        config.amplitude_cap,
        np.random.default_rng(seq),
        fraction=config.constraint_fraction,
    )


def run_trial(config: ExperimentConfig, N: int, trial: int) -> EstimationRecord:
    """One (N, trial) work item; estimator failures become flagged records."""
    target = draw_target(config, N, trial)
    seq = child_sequence(config.seed, N, trial, ESTIMATOR_STREAM)
    cls = config.smoothness_class
    try:
        if config.method is Method.PS:
            budget = ps_budget(config, N)
            kernel = _kernel(config.kernel_m, config.kernel_theta_points)
            amplitude_cap = SMALL_PHASE_CAP if config.amplitude_cap is None else config.amplitude_cap
            record = ps_estimate(target, budget, cls, config.regime, kernel, seq,
                                 amplitude_cap=amplitude_cap, constants=config.constants)
        else:
            budget = ws_budget(config, N)
            record = ws_estimate(target, budget, cls, seq, constants=config.constants, regime=config.regime)
    except PostselectionError as exc:
        logger.warning("N=%d trial=%d: %s", N, trial, exc)
        return _flagged_record(config, N, trial, seed_value(seq), POSTSELECTION_FAILED)
    except TomographyError as exc:
        logger.warning("N=%d trial=%d: %s", N, trial, exc)
        return _flagged_record(config, N, trial, seed_value(seq), TOMOGRAPHY_DEFICIENT)
    except PreconditionError as exc:
        logger.warning("N=%d trial=%d: %s", N, trial, exc)
        return _flagged_record(config, N, trial, seed_value(seq), PRECONDITION_FAILED)

    limit = 2 * config.constants.c4 * config.constants.c5 * config.constants.c6 * N
    if record.particles_used > limit:
        logger.warning("N=%d trial=%d used %d particles, above %d", N, trial, record.particles_used, limit)
        record = replace(record, flags=record.flags + (BUDGET_EXCEEDED,))
    return record.with_position(N, trial)


def _run_work_item(item: tuple[ExperimentConfig, int, int]) -> EstimationRecord:
    return run_trial(*item)


def run_sweep(config: ExperimentConfig) -> list[EstimationRecord]:
    """All (N, trial) records in N-major order; identical for any worker count."""
    items = [(config, N, trial) for N in config.n_list for trial in range(config.trials)]
    logger.info("sweep %s: %d work items on %d worker(s)", config.label, len(items), config.workers)
    if config.workers == 1:
        records = [_run_work_item(item) for item in items]
    else:
        chunksize = max(1, len(items) // (4 * config.workers))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_work_item, items, chunksize=chunksize))
    flagged = sum(r.flagged for r in records)
    if flagged:
        logger.info("sweep %s: %d of %d records flagged", config.label, flagged, len(records))
    return records


@dataclass(frozen=True)
class FitPoint:
    N: int
    mean_delta: float
    ci_low: float
    ci_high: float
    trials: int
    flagged: int


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    standard_error: float
    exponent_sq: float
    n_window: tuple[int, ...]
    points: tuple[FitPoint, ...]
    excluded: tuple[int, ...] = ()
    label: str = ""

    def to_dict(self) -> dict:
        data = asdict(self)
        data["n_window"] = list(self.n_window)
        data["excluded"] = list(self.excluded)
        data["points"] = [asdict(p) for p in self.points]
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> ScalingFit:
        return cls(
            exponent=float(data["exponent"]),
            intercept=float(data["intercept"]),
            standard_error=float(data["standard_error"]),
            exponent_sq=float(data["exponent_sq"]),
            n_window=tuple(int(n) for n in data["n_window"]),
            points=tuple(FitPoint(**p) for p in data["points"]),
            excluded=tuple(int(n) for n in data.get("excluded", ())),
            label=str(data.get("label", "")),
        )


def _select(records, group: Mapping | None) -> list[EstimationRecord]:
    if not group:
        return list(records)
    return [r for r in records if all(getattr(r, key) == value for key, value in group.items())]


def _deltas_by_n(records: list[EstimationRecord]) -> tuple[dict[int, np.ndarray], dict[int, int], list[int]]:
    """Unflagged per-trial delta = sqrt(mspe) per N, flagged counts, and excluded N values."""
    by_n: dict[int, list[EstimationRecord]] = {}
    for record in records:
        by_n.setdefault(record.N, []).append(record)
    deltas, flagged, excluded = {}, {}, []
    for N in sorted(by_n):
        group = by_n[N]
        bad = sum(r.flagged for r in group)
        flagged[N] = bad
        if bad > MAX_FLAGGED_FRACTION * len(group) or bad == len(group):
            excluded.append(N)
            continue
        deltas[N] = np.sqrt(np.array([r.mspe for r in group if not r.flagged]))
    return deltas, flagged, excluded


def fit_scaling(
    records, group: Mapping | None = None, label: str = "", *, min_trials: int = MIN_FIT_TRIALS
) -> ScalingFit:
    """
    Least-squares slope of log(mean delta) against log N.

    Every N must carry at least ``min_trials`` trials. N values with more
    than 5% flagged trials are left out of the window; the standard error
    comes from 200 bootstrap resamples of the trials.
    """
    selected = _select(records, group)
    counts = Counter(r.N for r in selected)
    short = sorted(N for N, count in counts.items() if count < min_trials)
    if short:
        raise InsufficientDataError(f"scaling fit needs >= {min_trials} trials per N; N={short} have fewer")
    deltas, flagged, excluded = _deltas_by_n(selected)
    if excluded:
        logger.info("fit %s: excluded N=%s for flagged trials", label or "records", excluded)
    window = sorted(deltas)
    if len(window) < MIN_FIT_POINTS:
        raise InsufficientDataError(f"scaling fit needs >= {MIN_FIT_POINTS} distinct N, got {len(window)}")

    log_n = np.log(np.array(window, dtype=float))
    means = np.array([deltas[N].mean() for N in window])
    exponent, intercept = np.polyfit(log_n, np.log(means), 1)
    exponent_sq, _ = np.polyfit(log_n, np.log([np.mean(deltas[N] ** 2) for N in window]), 1)

    rng = np.random.default_rng(BOOTSTRAP_SEED)
    slopes = np.empty(BOOTSTRAP_RESAMPLES)
    for b in range(BOOTSTRAP_RESAMPLES):
        resampled = [rng.choice(deltas[N], size=deltas[N].size, replace=True).mean() for N in window]
        slopes[b] = np.polyfit(log_n, np.log(resampled), 1)[0]

    points = []
    for N, mean in zip(window, means):
        d = deltas[N]
        half = 1.96 * d.std(ddof=1) / math.sqrt(d.size) if d.size > 1 else 0.0
        points.append(FitPoint(N, float(mean), float(mean - half), float(mean + half), int(d.size), flagged[N]))
    return ScalingFit(
        exponent=float(exponent),
        intercept=float(intercept),
        standard_error=float(slopes.std(ddof=1)),
        exponent_sq=float(exponent_sq),
        n_window=tuple(window),
        points=tuple(points),
        excluded=tuple(excluded),
        label=label,
    )


@dataclass(frozen=True)
class BoundCheckRow:
    N: int
    mean_delta: float
    sem: float
    floor: float

    @property
    def passed(self) -> bool:
        return self.mean_delta + SIGMA_ALLOWANCE * self.sem >= self.floor


@dataclass(frozen=True)
class ConsistencyReport:
    regime: Regime
    rows: tuple[BoundCheckRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def table(self) -> str:
        lines = [f"{'N':>10} {'mean delta':>12} {'sem':>10} {'floor':>12}  result"]
        for row in self.rows:
            verdict = "PASS" if row.passed else "FAIL"
            lines.append(f"{row.N:>10} {row.mean_delta:>12.5g} {row.sem:>10.3g} {row.floor:>12.5g}  {verdict}")
        return "\n".join(lines)


def bound_reports_for(records) -> dict[int, BoundReport]:
    first = next(iter(records))
    return {N: bound_report(first.q, first.M, N) for N in sorted({r.N for r in records})}


def check_bounds(records, reports: Mapping[int, BoundReport] | BoundReport) -> ConsistencyReport:
    """Mean delta + 3 sem must reach the regime's closed-form floor at every N."""
    records = list(records)
    regime = records[0].regime
    if isinstance(reports, BoundReport):
        reports = {reports.N: reports}
    deltas, _, _ = _deltas_by_n(records)
    rows = []
    for N, d in sorted(deltas.items()):
        if N not in reports:
            continue
        sem = d.std(ddof=1) / math.sqrt(d.size) if d.size > 1 else 0.0
        rows.append(BoundCheckRow(N, float(d.mean()), float(sem), reports[N].floor(regime)))
    return ConsistencyReport(regime, tuple(rows))


def scaled_records(records, factor: float) -> list[EstimationRecord]:
    """Records with every error divided by ``factor`` (negative control for check_bounds)."""
    return [
        replace(r, mspe=r.mspe / factor**2, err_a_sq=r.err_a_sq / factor**2, err_b_sq=r.err_b_sq / factor**2)
        for r in records
    ]


def write_fits(fits: list[ScalingFit], path: str | Path) -> None:
    Path(path).write_text(json.dumps([fit.to_dict() for fit in fits], indent=2))


def read_fits(path: str | Path) -> list[ScalingFit]:
    return [ScalingFit.from_dict(d) for d in json.loads(Path(path).read_text())]


def write_fit_points(fits: list[ScalingFit], path: str | Path) -> None:
    """Plot-ready CSV: one row per (fit, N)."""
    columns = ["label"] + [f.name for f in fields(FitPoint)]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for fit in fits:
            for point in fit.points:
                writer.writerow({"label": fit.label, **asdict(point)})
