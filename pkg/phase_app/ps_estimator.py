"""
Position-state (PS) estimation of a phase function.

n1 sites x_j = (j + alpha) L / n1 with a random offset alpha per trial each
receive n2 particles. Site phases are estimated independently (Ramsey probes
for the SQL regime, the Kitaev cascade for the Heisenberg regime) and the
function is rebuilt by the order-m smoothing kernel

    phi_tilde(x) = sum_j phi_tilde_j f(x - x_j),   f(x) = h(x / l),  l = (m+1) L / (2 n1).

For each theta in [0, 1) the m+1 kernel values at y_i = 2(i + theta)/(m+1) - 1
solve the Vandermonde system sum_i y_i^k h(y_i) = delta_k0, k = 0..m, which
cancels the Taylor terms of phi up to degree m. The error splits into
delta_stat (estimate vs. smoothed truth phi*) and delta_det = D(phi, phi*).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from phase_app.exceptions import PreconditionError
from phase_app.function_model import GridFunction, SmoothnessClass, mspe
from phase_app.probe_sim import (
    Accounting,
    KitaevConstants,
    ProbeBudget,
    kitaev_depth,
    kitaev_multiscale_estimate,
    kitaev_particles,
    quadrature_phases,
)
from phase_app.records import (
    AMPLITUDE_VIOLATION,
    KITAEV_DEGRADED,
    EstimationRecord,
    Method,
    Regime,
)
from phase_app.seeding import SeedLike, as_sequence, derive, seed_value

logger = logging.getLogger(__name__)

DEFAULT_THETA_POINTS = 1024
SMALL_PHASE_CAP = np.pi / 3

OFFSET_STREAM = 0
SITE_STREAM = 1


def vandermonde_weights(m: int, thetas: np.ndarray) -> np.ndarray:
    """Kernel values h(y_i(theta)) for i = 0..m, one row per theta."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    nodes = 2.0 * (np.arange(m + 1)[None, :] + thetas[:, None]) / (m + 1) - 1.0
    powers = nodes[:, None, :] ** np.arange(m + 1)[None, :, None]
    rhs = np.zeros((thetas.size, m + 1, 1))
    rhs[:, 0, 0] = 1.0
    return np.linalg.solve(powers, rhs)[..., 0]


@dataclass(frozen=True, eq=False)
class SmoothingKernel:
    """Order-m kernel h on [-1, 1), tabulated on a uniform theta grid."""

    m: int
    thetas: np.ndarray
    table: np.ndarray
    H: float

    def weights(self, thetas: np.ndarray) -> np.ndarray:
        return vandermonde_weights(self.m, thetas)

    def evaluate(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.zeros(y.shape)
        inside = (y >= -1.0) & (y < 1.0)
        t = (y[inside] + 1.0) * (self.m + 1) / 2.0
        index = np.minimum(np.floor(t).astype(int), self.m)
        theta = t - index
        out[inside] = self.weights(theta)[np.arange(theta.size), index]
        return out

    def scale(self, n1: int, length: float = 1.0) -> float:
        return (self.m + 1) * length / (2.0 * n1)


def build_kernel(m: int, theta_grid_size: int = DEFAULT_THETA_POINTS) -> SmoothingKernel:
    if m < 0:
        raise PreconditionError(f"kernel order must be non-negative, got {m}")
    if theta_grid_size < 1:
        raise PreconditionError(f"theta grid needs at least one point, got {theta_grid_size}")
    thetas = np.arange(theta_grid_size) / theta_grid_size
    table = vandermonde_weights(m, thetas)
    table.setflags(write=False)
    return SmoothingKernel(m=m, thetas=thetas, table=table, H=float(np.abs(table).max()))


def site_positions(n1: int, alpha: float, length: float = 1.0) -> np.ndarray:
    return (np.arange(n1) + alpha) * length / n1


def _site_coordinates(x: np.ndarray, kernel: SmoothingKernel, n1: int, alpha: float, length: float):
    """Base site index and kernel phase theta for each position x."""
    t = x * n1 / length - alpha + (kernel.m + 1) / 2.0
    base = np.floor(t)
    return base.astype(int), t - base


def kernel_sum_rule_check(
    kernel: SmoothingKernel, n1: int, x: float, alpha: float, length: float = 1.0
) -> np.ndarray:
    """
    Residuals of sum_j (x_j - x)^k f(x - x_j) against (1, 0, ..., 0), k = 0..m.

    Sites are taken from a window wide enough to hold the kernel support and
    f is evaluated through the kernel, so the check covers evaluation too.
    """
    spacing = length / n1
    u = x / spacing - alpha
    j = np.arange(math.floor(u) - kernel.m - 2, math.floor(u) + kernel.m + 3)
    offsets = (j + alpha) * spacing - x
    f = kernel.evaluate(-offsets / kernel.scale(n1, length))
    k = np.arange(kernel.m + 1)
    target = (k == 0).astype(float)
    return (offsets[None, :] ** k[:, None] * f[None, :]).sum(axis=1) - target


def reconstruct(
    site_values: np.ndarray,
    kernel: SmoothingKernel,
    n1: int,
    alpha: float,
    G: int,
    length: float = 1.0,
) -> GridFunction:
    """Kernel-smoothed function on the G-point grid from n1 site values."""
    site_values = np.asarray(site_values, dtype=float)
    if site_values.size != n1:
        raise PreconditionError(f"expected {n1} site values, got {site_values.size}")
    if n1 < kernel.m + 1:
        raise PreconditionError(f"an order-{kernel.m} kernel needs at least {kernel.m + 1} sites")
    x = np.arange(G) * length / G
    base, theta = _site_coordinates(x, kernel, n1, alpha, length)
    weights = kernel.weights(theta)
    sites = (base[:, None] - np.arange(kernel.m + 1)[None, :]) % n1
    return GridFunction((weights * site_values[sites]).sum(axis=1), length)


def smoothed_target(
    target: GridFunction, kernel: SmoothingKernel, n1: int, alpha: float
) -> GridFunction:
    """phi*(x) = sum_j phi(x_j) f(x - x_j): the reconstruction from noiseless sites."""
    if not 0.0 <= alpha < 1.0:
        raise PreconditionError(f"site offset alpha must lie in [0, 1), got {alpha}")
    exact = target.evaluate(site_positions(n1, alpha, target.length))
    return reconstruct(exact, kernel, n1, alpha, target.grid_size, target.length)


def deterministic_error_constant(m: int, sigma: float = 1.0) -> float:
    if m == 0:
        return 1.0 / (2.0 * sigma + 1.0)
    return 2.0 * m * (m + 1) ** 2 / (2.0 * math.factorial(m) ** 2 * (4.0 * m**2 - 1.0))


def deterministic_error_bound(cls: SmoothnessClass, n1: int) -> float:
    """Offset-averaged bound c_m ((m+1)/2)^(2q) n1^(-2q) M^2 on delta_det^2."""
    c_m = deterministic_error_constant(cls.m, cls.sigma)
    return c_m * ((cls.m + 1) / 2.0) ** (2 * cls.q) * n1 ** (-2 * cls.q) * cls.M**2


def unwrap_sites(values: np.ndarray) -> np.ndarray:
    """Map site phases into (-pi, pi] and remove 2pi jumps between neighbours."""
    return np.unwrap(np.angle(np.exp(1j * np.asarray(values))))


@dataclass(frozen=True)
class SiteEstimates:
    values: np.ndarray
    particles_used: int
    degraded_sites: int


def estimate_sites(
    phis: np.ndarray,
    n2: int,
    regime: Regime,
    seed: SeedLike,
    *,
    constants: KitaevConstants = KitaevConstants(),
    order: np.ndarray | None = None,
) -> SiteEstimates:
    """
    Independent per-site phase estimates; site j always draws from stream (SITE_STREAM, j).

    ``order`` only changes the visiting sequence, never the result.
    """
    seq = as_sequence(seed)
    phis = np.asarray(phis, dtype=float)
    n1 = phis.size
    order = np.arange(n1) if order is None else np.asarray(order)
    values = np.empty(n1)
    particles = 0
    degraded = 0

    if regime is Regime.SQL:
        if n2 < 2:
            raise PreconditionError(f"Ramsey estimation needs n2 >= 2 particles per site, got {n2}")
        for j in order:
            rng = np.random.default_rng(derive(seq, SITE_STREAM, j))
            values[j] = quadrature_phases(phis[j], n2, rng)
        particles = n1 * n2
    else:
        n0 = kitaev_depth(n2, constants)
        if kitaev_particles(0, constants) > constants.c4 * n2:
            raise PreconditionError(
                f"per-site budget {n2} is below one Kitaev level ({kitaev_particles(0, constants)})"
            )
        for j in order:
            result = kitaev_multiscale_estimate(phis[j], n0, constants, 1.0, derive(seq, SITE_STREAM, j))
            values[j] = result.estimate
            particles += result.particles_used
            degraded += result.degraded
    return SiteEstimates(values, particles, degraded)


def ps_estimate(
    target: GridFunction,
    budget: ProbeBudget,
    cls: SmoothnessClass,
    regime: Regime,
    kernel: SmoothingKernel,
    seed: SeedLike = None,
    *,
    amplitude_cap: float = SMALL_PHASE_CAP,
    constants: KitaevConstants = KitaevConstants(),
    order: np.ndarray | None = None,
) -> EstimationRecord:
    if budget.accounting is not Accounting.POSITION_STATE:
        raise PreconditionError("ps_estimate needs a position-state budget (N = n1*n2)")
    n1, n2 = budget.n1, budget.n2
    if n1 < kernel.m + 1:
        raise PreconditionError(f"an order-{kernel.m} kernel needs at least {kernel.m + 1} sites, got {n1}")
    seq = as_sequence(seed)
    alpha = float(np.random.default_rng(derive(seq, OFFSET_STREAM)).uniform())

    flags = []
    if regime is Regime.SQL and float(np.abs(target.values).max()) > amplitude_cap:
        flags.append(AMPLITUDE_VIOLATION)
        logger.warning("target amplitude exceeds %.3f; Ramsey site estimates may wrap", amplitude_cap)

    phis = target.evaluate(site_positions(n1, alpha, target.length))
    sites = estimate_sites(phis, n2, regime, seq, constants=constants, order=order)
    if sites.degraded_sites:
        flags.append(KITAEV_DEGRADED)
        logger.info("%d of %d sites ended the Kitaev cascade at level 0", sites.degraded_sites, n1)

    estimate = reconstruct(unwrap_sites(sites.values), kernel, n1, alpha, target.grid_size, target.length)
    reference = smoothed_target(target, kernel, n1, alpha)
    return EstimationRecord(
        method=Method.PS,
        regime=regime,
        q=cls.q,
        M=cls.M,
        N=budget.N,
        trial=0,
        seed=seed_value(seq),
        mspe=mspe(estimate, target),
        err_a_sq=mspe(estimate, reference),
        err_b_sq=mspe(reference, target),
        particles_used=sites.particles_used,
        flags=tuple(flags),
        estimate=estimate,
    )
