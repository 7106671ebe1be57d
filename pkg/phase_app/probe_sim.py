"""
Measurement statistics of single-site phase probes.

Three estimators share one quadrature readout: half the probe copies are
measured in X (outcome + with probability (1 + cos theta)/2), half in Y
(probability (1 + sin theta)/2), and the debiased empirical quadratures go
through atan2.

- ramsey_sql_estimate: separable probes, theta = phi, error O(n2^-1/2).
- noon_estimate: n_p-entangled probes, theta = n_p phi, error O(1/(n_p sqrt(n_c)))
  but only modulo 2 pi / n_p.
- kitaev_multiscale_estimate: the cascade 2^0 .. 2^n0 that removes the
  modular ambiguity level by level, with circular-median majority voting.

Usage:
    est = ramsey_sql_estimate(0.3, 1024, seed=7)
    result = kitaev_multiscale_estimate(2.0, kitaev_depth(20000), seed=7)
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from phase_app.exceptions import PreconditionError
from phase_app.function_model import TWO_PI, periodic_modulus
from phase_app.seeding import SeedLike, as_sequence, derive, make_rng

logger = logging.getLogger(__name__)

# Half-width of the arc an accepted level-n reading confines 2^n theta to.
ARC_HALF_WIDTH = np.pi / 3
MAX_KITAEV_DEPTH = 48


class Accounting(str, Enum):
    POSITION_STATE = "PS"     # N = n1 * n2
    WAVENUMBER_STATE = "WS"   # N = n_p * n_c


@dataclass(frozen=True)
class ProbeBudget:
    """
    Resource accounting for one estimation run.

    Position-state runs satisfy N = n1 * n2, wavenumber-state runs
    N = n_p * n_c; ``accounting`` says which identity applies.
    """

    N: int
    n1: int
    n2: int
    n_p: int
    n_c: int
    K: int
    accounting: Accounting

    def __post_init__(self) -> None:
        for name in ("N", "n1", "n2", "n_p", "n_c", "K"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise PreconditionError(f"budget entry {name} must be a positive integer, got {value}")
        if self.accounting is Accounting.POSITION_STATE and self.N != self.n1 * self.n2:
            raise PreconditionError(f"PS budget needs N = n1*n2, got {self.N} != {self.n1}*{self.n2}")
        if self.accounting is Accounting.WAVENUMBER_STATE and self.N != self.n_p * self.n_c:
            raise PreconditionError(f"WS budget needs N = n_p*n_c, got {self.N} != {self.n_p}*{self.n_c}")

    @classmethod
    def position_state(cls, n1: int, n2: int, *, n_p: int = 1) -> ProbeBudget:
        return cls(N=n1 * n2, n1=n1, n2=n2, n_p=n_p, n_c=max(1, n2 // n_p), K=1,
                   accounting=Accounting.POSITION_STATE)

    @classmethod
    def wavenumber_state(cls, n_p: int, n_c: int, K: int) -> ProbeBudget:
        return cls(N=n_p * n_c, n1=1, n2=n_p * n_c, n_p=n_p, n_c=n_c, K=K,
                   accounting=Accounting.WAVENUMBER_STATE)


@dataclass(frozen=True)
class PhaseEstimate:
    value: float
    modulo: float
    particles_used: int


@dataclass(frozen=True)
class KitaevConstants:
    c4: float = 1.0
    c5: float = 4.0
    c6: float = 3.0


@dataclass(frozen=True)
class KitaevResult:
    estimate: float
    particles_used: int
    depth: int
    degraded: bool

    def __iter__(self):
        # unpacks as (estimate, particles_used)
        return iter((self.estimate, self.particles_used))


def wrap(theta, modulo: float = TWO_PI):
    """Reduce into [0, modulo), guarding the float edge where mod returns modulo itself."""
    value = np.mod(theta, modulo)
    value = np.where(value >= modulo, 0.0, value)
    return float(value) if value.ndim == 0 else value


def quadrature_phases(theta, n_copies: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """
    Estimates of theta mod 2pi from X/Y quadrature counts on ``n_copies`` probes.

    The variance is about 2 (sin^4 theta + cos^4 theta) / n_copies: twice as
    large on the axes as on the diagonals. The distribution only shifts with
    theta for shifts by multiples of pi/2 (even ``n_copies``).
    """
    nx = n_copies // 2
    ny = n_copies - nx
    theta = np.asarray(theta, dtype=float)
    kx = rng.binomial(nx, (1.0 + np.cos(theta)) / 2.0, size=size)
    ky = rng.binomial(ny, (1.0 + np.sin(theta)) / 2.0, size=size)
    return wrap(np.arctan2(2.0 * ky / ny - 1.0, 2.0 * kx / nx - 1.0))


def ramsey_sql_estimate(phi: float, n2: int, seed: SeedLike = None) -> PhaseEstimate:
    if n2 < 2:
        raise PreconditionError(f"Ramsey estimation needs n2 >= 2 particles, got {n2}")
    value = quadrature_phases(phi, n2, make_rng(seed))
    return PhaseEstimate(float(value), TWO_PI, n2)


def noon_estimate(phi: float, n_p: int, n_copies: int, seed: SeedLike = None) -> PhaseEstimate:
    if n_copies < 2:
        raise PreconditionError(f"NOON estimation needs at least 2 copies, got {n_copies}")
    if n_p < 1:
        raise PreconditionError(f"entanglement size must be positive, got {n_p}")
    modulo = TWO_PI / n_p
    raw = quadrature_phases(n_p * phi, n_copies, make_rng(seed))
    return PhaseEstimate(wrap(float(raw) / n_p, modulo), modulo, n_p * n_copies)


def circular_median(values) -> float:
    """Element of ``values`` minimising the summed periodic distance to the others."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise PreconditionError("circular median of an empty sample")
    spread = periodic_modulus(values[:, None] - values[None, :]).sum(axis=1)
    return float(values[int(np.argmin(spread))])


def circular_median_columns(values) -> np.ndarray:
    """Column-wise circular median of a (repeats, points) array."""
    values = np.asarray(values, dtype=float)
    spread = periodic_modulus(values[:, None, :] - values[None, :, :]).sum(axis=1)
    best = np.argmin(spread, axis=0)
    return values[best, np.arange(values.shape[1])]


def copies_per_run(constants: KitaevConstants, alpha: float) -> int:
    return math.ceil(constants.c5**2 / alpha)


def repeats_at_level(level: int, n0: int, constants: KitaevConstants) -> int:
    return math.ceil(constants.c6 * (n0 + 1 - level))


def kitaev_particles(n0: int, constants: KitaevConstants = KitaevConstants(), alpha: float = 1.0) -> int:
    """Exact particle count sum_n 2^n * N_copy * N_repeat(n) of a depth-n0 cascade."""
    n_copy = copies_per_run(constants, alpha)
    return sum(2**n * n_copy * repeats_at_level(n, n0, constants) for n in range(n0 + 1))


def kitaev_depth(particles: int, constants: KitaevConstants = KitaevConstants(), alpha: float = 1.0) -> int:
    """Deepest n0 whose cascade fits into c4 * particles; 0 when even one level does not."""
    allowance = constants.c4 * particles
    n0 = 0
    while n0 < MAX_KITAEV_DEPTH and kitaev_particles(n0 + 1, constants, alpha) <= allowance:
        n0 += 1
    return n0


def refine_levels(raw_phases) -> tuple[np.ndarray, np.ndarray]:
    """
    Combine level readings r_n (estimates of 2^n theta mod 2pi) into theta.

    ``raw_phases`` has the level axis first; trailing axes are independent
    problems. Level 0 fixes the interval (r_0 - pi/3, r_0 + pi/3). Level n
    keeps the intersection with the lowest arc (r_n + 2 pi j)/2^n +- pi/(3 2^n)
    that meets the current interval; refinement stops for good where no arc
    does. Returns the interval midpoints mod 2pi and the deepest level
    reached.
    """
    raw = np.asarray(raw_phases, dtype=float)
    lo = raw[0] - ARC_HALF_WIDTH
    hi = raw[0] + ARC_HALF_WIDTH
    depth = np.zeros(raw.shape[1:], dtype=int)
    alive = np.ones(raw.shape[1:], dtype=bool)
    for n in range(1, raw.shape[0]):
        scale = 2.0**n
        w = ARC_HALF_WIDTH / scale
        j = np.floor((scale * (lo - w) - raw[n]) / TWO_PI) + 1
        centre = (raw[n] + TWO_PI * j) / scale
        hit = alive & (centre - w < hi)
        lo = np.where(hit, np.maximum(lo, centre - w), lo)
        hi = np.where(hit, np.minimum(hi, centre + w), hi)
        depth = np.where(hit, n, depth)
        alive = hit
    return wrap((lo + hi) / 2.0), depth


def kitaev_multiscale_estimate(
    phi_at_site: float,
    n0: int,
    constants: KitaevConstants = KitaevConstants(),
    alpha: float = 1.0,
    seed: SeedLike = None,
) -> KitaevResult:
    if n0 < 0:
        raise PreconditionError(f"Kitaev depth must be non-negative, got {n0}")
    seq = as_sequence(seed)
    n_copy = copies_per_run(constants, alpha)
    if n_copy < 2:
        raise PreconditionError(f"c5^2/alpha must give at least 2 copies, got {n_copy}")

    readings = np.empty(n0 + 1)
    particles = 0
    for n in range(n0 + 1):
        entanglement = 2**n
        repeats = repeats_at_level(n, n0, constants)
        rng = np.random.default_rng(derive(seq, n))
        runs = quadrature_phases(entanglement * phi_at_site, n_copy, rng, size=repeats)
        readings[n] = circular_median(runs)
        particles += entanglement * n_copy * repeats

    theta, depth = refine_levels(readings)
    degraded = n0 > 0 and int(depth) == 0
    if degraded:
        logger.debug("Kitaev cascade stopped at level 0 (n0=%d)", n0)
    return KitaevResult(float(theta), particles, int(depth), degraded)
