"""
Acceptance checks for the simulator as a whole.

Each check is a named function returning a CheckResult. The scaling checks
run real sweeps, so two scales exist: ``full`` (G = 4096, N = 2^10..2^20,
200/100 trials) and ``quick`` (G = 1024, N = 2^10..2^16, 40/30 trials, with
doubled exponent tolerances). Sweeps are shared between checks within one
run.

Usage:
    results = run_acceptance(QUICK)
    python manage.py verify --quick
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from phase_app.bounds import PhaseVector, qfi_matrix, rho, wbb
from phase_app.exceptions import InsufficientDataError, RestrictionError
from phase_app.function_model import (
    FourierSpectrum,
    GridFunction,
    SmoothnessClass,
    c0_constant,
    fourier_constraint,
    inverse_fourier,
    mspe,
    sample_target,
    satisfies_holder,
)
from phase_app.harness import ExperimentConfig, bound_reports_for, check_bounds, fit_scaling, run_sweep
from phase_app.probe_sim import KitaevConstants, ProbeBudget
from phase_app.ps_estimator import (
    build_kernel,
    deterministic_error_bound,
    smoothed_target,
)
from phase_app.records import EstimationRecord, Method, Regime
from phase_app.ws_estimator import (
    full_band,
    infidelity_chain,
    output_state,
    project_low_wavenumber,
    ws_estimate,
)

logger = logging.getLogger(__name__)

ACCEPTANCE_SEED = 2718


@dataclass(frozen=True)
class Scale:
    name: str
    grid_size: int
    n_list: tuple[int, ...]
    trials_sql: int
    trials_heisenberg: int
    targets: int
    triples: int
    spectra: int
    random_vectors: int
    exponent_tolerance: float
    heisenberg_tolerance: float
    workers: int = 1


FULL = Scale("full", 4096, tuple(2**e for e in range(10, 21)), 200, 100, 100, 1000, 200, 100, 0.05, 0.07)
QUICK = Scale("quick", 1024, tuple(2**e for e in range(10, 17)), 40, 30, 20, 200, 50, 20, 0.10, 0.14)

# (q, M) pairs the scaling checks sweep in both regimes and with both methods
SCALING_CLASSES = ((1.0, 2 * math.pi), (0.5, 1.0))
SCALING_SWEEPS = tuple(
    (method, regime, q, M)
    for method in (Method.PS, Method.WS)
    for regime in (Regime.SQL, Regime.HEISENBERG)
    for q, M in SCALING_CLASSES
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class AcceptanceRun:
    scale: Scale
    sweeps: dict = field(default_factory=dict)

    def sweep(self, method: Method, regime: Regime, q: float, M: float) -> list[EstimationRecord]:
        key = (method, regime, q, M)
        if key not in self.sweeps:
            config = ExperimentConfig(
                method=method,
                regime=regime,
                q=q,
                M=M,
                seed=ACCEPTANCE_SEED,
                n_list=self.scale.n_list,
                trials=self.scale.trials_sql if regime is Regime.SQL else self.scale.trials_heisenberg,
                grid_size=self.scale.grid_size,
                workers=self.scale.workers,
            )
            self.sweeps[key] = run_sweep(config)
        return self.sweeps[key]

    def exponent_check(self, name: str, records, expected: float, tolerance: float | None = None) -> CheckResult:
        tolerance = self.scale.exponent_tolerance if tolerance is None else tolerance
        try:
            fit = fit_scaling(records)
        except InsufficientDataError as exc:
            return CheckResult(name, False, str(exc))
        passed = abs(fit.exponent - expected) <= tolerance
        return CheckResult(
            name, passed,
            f"exponent {fit.exponent:+.4f} (se {fit.standard_error:.4f}), expected {expected:+.4f} +- {tolerance}",
        )


def check_ps_sql_scaling(run: AcceptanceRun) -> list[CheckResult]:
    records = run.sweep(Method.PS, Regime.SQL, 1.0, 2 * math.pi)
    return [run.exponent_check("PS-SQL scaling, q=1", records, -1 / 3)]


def check_ps_heisenberg_scaling(run: AcceptanceRun) -> list[CheckResult]:
    results = []
    over, total = 0, 0
    c = KitaevConstants()
    limit_factor = 2 * c.c4 * c.c5 * c.c6
    for q, M in SCALING_CLASSES:
        records = run.sweep(Method.PS, Regime.HEISENBERG, q, M)
        results.append(run.exponent_check(f"PS-Heisenberg scaling, q={q:g}", records, -q / (q + 1),
                                          tolerance=run.scale.heisenberg_tolerance))
        over += sum(r.particles_used > limit_factor * r.N for r in records)
        total += len(records)
    results.append(CheckResult("Kitaev particle accounting", not over,
                               f"{over} of {total} trials above 2*c4*c5*c6*N"))
    return results


def check_ws_heisenberg_scaling(run: AcceptanceRun) -> list[CheckResult]:
    return [
        run.exponent_check(f"WS-Heisenberg scaling, q={q:g}", run.sweep(Method.WS, Regime.HEISENBERG, q, M),
                           -q / (q + 1), tolerance=run.scale.heisenberg_tolerance)
        for q, M in SCALING_CLASSES
    ]


def check_fractional_smoothness(run: AcceptanceRun) -> list[CheckResult]:
    half = run.sweep(Method.PS, Regime.SQL, 0.5, 1.0)
    two = run.sweep(Method.PS, Regime.SQL, 2.0, 2 * math.pi)
    target = sample_target(SmoothnessClass(2.0, 2 * math.pi), run.scale.grid_size, seed=ACCEPTANCE_SEED)
    try:
        ws_estimate(target, ProbeBudget.wavenumber_state(1, 1024, 4), SmoothnessClass(2.0, 2 * math.pi), 0)
        refused = False
    except RestrictionError:
        refused = True
    return [
        run.exponent_check("PS-SQL scaling, q=1/2", half, -1 / 4),
        run.exponent_check("PS-SQL scaling, q=2", two, -2 / 5),
        CheckResult("WS refuses q=2", refused, "RestrictionError raised" if refused else "estimate returned"),
    ]


def check_ws_ps_equivalence(run: AcceptanceRun) -> list[CheckResult]:
    results = []
    for regime in (Regime.SQL, Regime.HEISENBERG):
        for q, M in SCALING_CLASSES:
            name = f"WS/PS {regime.value} exponents agree, q={q:g}"
            try:
                ps = fit_scaling(run.sweep(Method.PS, regime, q, M))
                ws = fit_scaling(run.sweep(Method.WS, regime, q, M))
            except InsufficientDataError as exc:
                results.append(CheckResult(name, False, str(exc)))
                continue
            gap = abs(ps.exponent - ws.exponent)
            results.append(CheckResult(name, gap <= run.scale.exponent_tolerance,
                                       f"PS {ps.exponent:+.4f}, WS {ws.exponent:+.4f}, gap {gap:.4f}"))
    return results


def _moment_residual(m: int, theta_points: int) -> float:
    kernel = build_kernel(m, theta_points)
    nodes = 2.0 * (np.arange(m + 1)[None, :] + kernel.thetas[:, None]) / (m + 1) - 1.0
    moments = np.stack([(nodes**k * kernel.table).sum(axis=1) for k in range(m + 1)], axis=1)
    expected = np.zeros(m + 1)
    expected[0] = 1.0
    return float(np.abs(moments - expected).max())


def _reproduction_error(m: int, rng: np.random.Generator) -> float:
    """Largest |sum_j p(x_j) f(x - x_j) - p(x)| for random degree-m polynomials p."""
    kernel = build_kernel(m)
    n1, length = 32, 1.0
    spacing = length / n1
    worst = 0.0
    for _ in range(20):
        alpha = rng.uniform()
        x = rng.uniform(0.3, 0.7)
        coeffs = rng.normal(size=m + 1)
        u = x / spacing - alpha
        j = np.arange(math.floor(u) - m - 2, math.floor(u) + m + 3)
        sites = (j + alpha) * spacing
        weights = kernel.evaluate((x - sites) / kernel.scale(n1, length))
        value = float(np.sum(np.polyval(coeffs, sites - 0.5) * weights))
        worst = max(worst, abs(value - np.polyval(coeffs, x - 0.5)))
    return worst


def check_kernel_suite(run: AcceptanceRun) -> list[CheckResult]:
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    residual = max(_moment_residual(m, 1024) for m in range(5))
    triangle = build_kernel(1, 1024)
    y = np.linspace(-1, 1, 401, endpoint=False)
    triangle_gap = float(np.abs(triangle.evaluate(y) - (1 - np.abs(y))).max())
    reproduction = max(_reproduction_error(m, rng) for m in range(5))
    return [
        CheckResult("kernel moment conditions", residual < 1e-10, f"max residual {residual:.2e} for m <= 4"),
        CheckResult("m=1 kernel is triangular", triangle_gap < 1e-12, f"max deviation {triangle_gap:.2e}"),
        CheckResult("polynomial reproduction", reproduction < 1e-8, f"max error {reproduction:.2e}"),
    ]


def check_deterministic_error(run: AcceptanceRun) -> list[CheckResult]:
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    results = []
    for m, sigma in ((0, 1.0), (1, 1.0), (0, 0.5)):
        cls = SmoothnessClass(q=m + sigma, M=2 * math.pi)
        kernel = build_kernel(m)
        n1 = 64
        bound = deterministic_error_bound(cls, n1)
        worst = 0.0
        for _ in range(run.scale.targets):
            target = sample_target(cls, run.scale.grid_size, seed=rng)
            reference = smoothed_target(target, kernel, n1, float(rng.uniform()))
            worst = max(worst, mspe(reference, target) / bound)
        results.append(CheckResult(f"deterministic error bound (m={m}, sigma={sigma:g})", worst <= 1.0,
                                   f"largest delta_det^2 / bound = {worst:.3f}"))
    return results


def check_infidelity_chain(run: AcceptanceRun) -> list[CheckResult]:
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    cls = SmoothnessClass(1.0, 2 * math.pi)
    G = run.scale.grid_size
    worst_first = worst_second = math.inf
    for _ in range(run.scale.triples):
        phi = sample_target(cls, G, seed=rng)
        noise = sample_target(cls, G, seed=rng).values * rng.uniform(0.0, 3.0)
        phi_tilde = GridFunction(phi.values + noise + rng.normal(0.0, rng.uniform(0, 1.0), G))
        n_p = int(rng.choice([1, 2, 4, 8]))
        projection = project_low_wavenumber(output_state(phi, n_p, full_band(G)), int(rng.integers(1, G // 8)))
        chain = infidelity_chain(phi, phi_tilde, projection, n_p)
        worst_first = min(worst_first, chain.first_slack)
        worst_second = min(worst_second, chain.second_slack)
    return [
        CheckResult("MSPE below infidelity", worst_first >= -1e-10, f"smallest slack {worst_first:.3e}"),
        CheckResult("infidelity split into PS and QT", worst_second >= -1e-10, f"smallest slack {worst_second:.3e}"),
    ]


def check_qfi(run: AcceptanceRun) -> list[CheckResult]:
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    K, G = 8, 512
    J0 = qfi_matrix(PhaseVector(np.zeros(K), 1.0), G)
    zero_gap = float(np.abs(J0 - 2.0 * np.eye(K)).max())
    radius = rho(1.0, 2 * math.pi, K)
    worst_diag = 0.0
    worst_fd = 0.0
    for _ in range(run.scale.random_vectors):
        direction = rng.normal(size=K)
        u = PhaseVector(direction / np.linalg.norm(direction) * radius * rng.uniform(), radius)
        J = qfi_matrix(u, G)
        worst_diag = max(worst_diag, float(np.diag(J).max()))
        worst_fd = max(worst_fd, float(np.abs(J - qfi_matrix(u, G, finite_difference=True)).max()))
    return [
        CheckResult("QFI at u=0", zero_gap < 1e-6, f"max |J - 2I| = {zero_gap:.2e}"),
        CheckResult("QFI diagonal <= 8", worst_diag <= 8.0, f"largest J_jj = {worst_diag:.4f}"),
        CheckResult("QFI analytic vs finite difference", worst_fd < 1e-5, f"max gap {worst_fd:.2e}"),
    ]


def check_bound_consistency(run: AcceptanceRun) -> list[CheckResult]:
    """Closed-form floors against every scaling sweep, plus any other sweep this run made."""
    for key in SCALING_SWEEPS:
        run.sweep(*key)
    results = []
    for key, records in sorted(run.sweeps.items(), key=lambda item: str(item[0])):
        method, regime, q, M = key
        report = check_bounds(records, bound_reports_for(records))
        results.append(CheckResult(f"bounds hold for {method.value}-{regime.value} q={q:g}", report.passed,
                                   f"{sum(r.passed for r in report.rows)}/{len(report.rows)} N values pass"))
    examples = abs(wbb(1.0, 1.0) - 0.5) < 1e-12 and abs(wbb(0.05, 0.1) - 1 / 30) < 1e-12
    results.append(CheckResult("worst-case bound examples", examples, "wbb(1,1)=1/2, wbb(0.05,0.1)=1/30"))
    return results


def check_sufficiency(run: AcceptanceRun) -> list[CheckResult]:
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    failures = 0
    for _ in range(run.scale.spectra):
        q = float(rng.choice([0.5, 1.0, 1.5, 2.0]))
        cls = SmoothnessClass(q, float(rng.uniform(0.5, 10.0)))
        k_max = int(rng.integers(1, 64))
        k = np.arange(1, k_max + 1)
        positive = (rng.normal(size=k_max) + 1j * rng.normal(size=k_max)) * k ** -rng.uniform(0.5, 3.0)
        value = float(np.sum(k ** (2 * q) * np.abs(positive) ** 2))
        positive *= math.sqrt(rng.uniform(0.1, 1.0) * cls.fourier_budget / value)
        spectrum = FourierSpectrum(np.concatenate([np.conj(positive[::-1]), [0.0], positive]))
        if not fourier_constraint(spectrum, cls).satisfied:
            continue
        if not satisfies_holder(inverse_fourier(spectrum, run.scale.grid_size), cls):
            failures += 1
    c0_gap = abs(c0_constant(1.0) - 2 * math.pi)
    return [
        CheckResult("Fourier condition is sufficient", failures == 0, f"{failures} of {run.scale.spectra} failed"),
        CheckResult("c0(q=1) = 2 pi", c0_gap < 1e-9, f"gap {c0_gap:.2e}"),
    ]


CHECKS: dict[str, Callable[[AcceptanceRun], list[CheckResult]]] = {
    "ps-sql": check_ps_sql_scaling,
    "ps-heisenberg": check_ps_heisenberg_scaling,
    "fractional": check_fractional_smoothness,
    "ws-heisenberg": check_ws_heisenberg_scaling,
    "ws-ps": check_ws_ps_equivalence,
    "kernels": check_kernel_suite,
    "deterministic-error": check_deterministic_error,
    "infidelity-chain": check_infidelity_chain,
    "qfi": check_qfi,
    "bounds": check_bound_consistency,
    "sufficiency": check_sufficiency,
}


def run_acceptance(scale: Scale = FULL, only: list[str] | None = None, workers: int = 1) -> list[CheckResult]:
    """Run the named checks (all by default) in registry order."""
    run = AcceptanceRun(replace(scale, workers=workers))
    results = []
    for name, check in CHECKS.items():
        if only and name not in only:
            continue
        logger.info("acceptance check %s (%s scale)", name, scale.name)
        results.extend(check(run))
    return results
