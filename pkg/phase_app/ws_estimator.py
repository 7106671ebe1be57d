"""
Wavenumber-state (WS) estimation of a phase function.

The probe (|-> |k=0> + |+> e^{i n_p phi})/sqrt(2) is postselected onto
wavenumbers |k| <= K and then identified by tomography; the phase is read
from the argument of the reconstructed excited branch in position space.

Tomography reads each of the n_c copies in position and in one branch
quadrature, half the copies in the X interference basis and half in Y. Signed
position histograms give the cross amplitude conj(v) g(x) between the vacuum
branch and the excited branch, whose DFT recovers the excited amplitudes.
The reconstruction infidelity scales as K / n_c.

Only q <= 1 is supported: above that the excited branch no longer inherits
the smoothness class of phi.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from phase_app.exceptions import (
    PostselectionError,
    PreconditionError,
    RestrictionError,
    TomographyError,
)
from phase_app.function_model import (
    GridFunction,
    SmoothnessClass,
    grid_samples,
    mspe,
    periodic_modulus,
    wavenumber_coefficients,
)
from phase_app.probe_sim import (
    Accounting,
    KitaevConstants,
    ProbeBudget,
    circular_median_columns,
    refine_levels,
    repeats_at_level,
    wrap,
)
from phase_app.records import (
    INFIDELITY_CHAIN_VIOLATED,
    KITAEV_DEGRADED,
    EstimationRecord,
    Method,
    Regime,
)
from phase_app.seeding import SeedLike, as_sequence, derive, seed_value

logger = logging.getLogger(__name__)

MIN_POSTSELECTION_PROBABILITY = 1e-6
COPIES_PER_MODE = 8
WEAK_AMPLITUDE_FRACTION = 0.1
CHAIN_TOLERANCE = 1e-9
# A cascade run is flagged once more than this share of grid points stop at level 0.
DEGRADED_POINT_FRACTION = 0.01

X_BASIS = 0
Y_BASIS = 1


@dataclass(frozen=True, eq=False)
class WavefunctionState:
    """Two-branch probe state over wavenumbers -k_max..k_max (index k + k_max)."""

    amp_vacuum: np.ndarray
    amp_excited: np.ndarray
    n_p: int
    length: float = 1.0

    def __post_init__(self) -> None:
        vac = np.array(self.amp_vacuum, dtype=complex)
        exc = np.array(self.amp_excited, dtype=complex)
        if vac.shape != exc.shape or vac.ndim != 1 or vac.size % 2 == 0:
            raise PreconditionError("branch amplitudes must share one odd-length wavenumber axis")
        object.__setattr__(self, "amp_vacuum", vac)
        object.__setattr__(self, "amp_excited", exc)

    @property
    def k_max(self) -> int:
        return (self.amp_vacuum.size - 1) // 2

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amp_vacuum) ** 2 + np.abs(self.amp_excited) ** 2))

    @property
    def vacuum_reference(self) -> complex:
        return complex(self.amp_vacuum[self.k_max])

    def padded(self, k_max: int) -> tuple[np.ndarray, np.ndarray]:
        pad = k_max - self.k_max
        if pad < 0:
            raise PreconditionError(f"cannot pad a K={self.k_max} state down to K={k_max}")
        return np.pad(self.amp_vacuum, pad), np.pad(self.amp_excited, pad)

    def truncated(self, K: int) -> WavefunctionState:
        lo, hi = self.k_max - K, self.k_max + K + 1
        return WavefunctionState(self.amp_vacuum[lo:hi], self.amp_excited[lo:hi], self.n_p, self.length)

    def normalized(self) -> WavefunctionState:
        scale = math.sqrt(self.norm)
        return WavefunctionState(self.amp_vacuum / scale, self.amp_excited / scale, self.n_p, self.length)


@dataclass(frozen=True)
class ProjectionResult:
    state: WavefunctionState
    delta_ps_sq: float
    probability: float

    def __iter__(self):
        # unpacks as (postselected, delta_ps_sq)
        return iter((self.state, self.delta_ps_sq))


@dataclass(frozen=True)
class InfidelityChain:
    """
    The per-trial chain

        delta^2 <= (pi^2/n_p^2)(1 - |<S|S~>|) <= delta_PS^2 + delta_QT^2.
    """

    delta_sq: float
    fidelity_bound: float
    delta_ps_sq: float
    delta_qt_sq: float

    @property
    def first_slack(self) -> float:
        return self.fidelity_bound - self.delta_sq

    @property
    def second_slack(self) -> float:
        return self.delta_ps_sq + self.delta_qt_sq - self.fidelity_bound

    @property
    def holds(self) -> bool:
        return self.first_slack >= -CHAIN_TOLERANCE and self.second_slack >= -CHAIN_TOLERANCE


def full_band(G: int) -> int:
    return (G - 1) // 2


def output_state(target: GridFunction, n_p: int, k_max: int) -> WavefunctionState:
    excited = wavenumber_coefficients(np.exp(1j * n_p * target.values), k_max) / math.sqrt(2.0)
    vacuum = np.zeros_like(excited)
    vacuum[k_max] = 1.0 / math.sqrt(2.0)
    return WavefunctionState(vacuum, excited, n_p, target.length)


def state_overlap(a: WavefunctionState, b: WavefunctionState) -> complex:
    """<a|b>, padding the narrower state with zeros."""
    k_max = max(a.k_max, b.k_max)
    a_vac, a_exc = a.padded(k_max)
    b_vac, b_exc = b.padded(k_max)
    return complex(np.vdot(a_vac, b_vac) + np.vdot(a_exc, b_exc))


def grid_overlap(phi: GridFunction, phi_tilde: GridFunction, n_p: int) -> float:
    """|<S_phi|S_phi~>| evaluated directly on the grid."""
    return float(abs(0.5 + 0.5 * np.mean(np.exp(1j * n_p * (phi_tilde.values - phi.values)))))


def project_low_wavenumber(state: WavefunctionState, K: int) -> ProjectionResult:
    if not 0 <= K <= state.k_max:
        raise PreconditionError(f"projection cutoff K={K} must lie in [0, {state.k_max}]")
    kept = state.truncated(K)
    probability = kept.norm
    if probability < MIN_POSTSELECTION_PROBABILITY:
        raise PostselectionError(f"postselection probability {probability:.2e} below {MIN_POSTSELECTION_PROBABILITY}")
    postselected = kept.normalized()
    overlap = abs(state_overlap(state, postselected))
    scale = np.pi**2 / state.n_p**2
    delta_ps_sq = scale * max(0.0, 1.0 - overlap**2)
    # <S|P_K|S> is the postselection probability itself
    if delta_ps_sq > scale * (1.0 - probability) + CHAIN_TOLERANCE:
        logger.warning("postselection error %.3e exceeds its projector bound", delta_ps_sq)
    return ProjectionResult(postselected, delta_ps_sq, probability)


def simulate_tomography(
    postselected: WavefunctionState, K: int, n_c: int, seed: SeedLike = None
) -> WavefunctionState:
    """
    Reconstruct a K-band state from n_c copies.

    Position is read on 2K+1 points; the branch quadrature outcome at x_j is
    + with probability (1 + B_j/A_j)/2 where A_j = P(x_j) and B_j is twice
    the real (X basis) or imaginary (Y basis) part of the cross amplitude.
    """
    modes = 2 * K + 1
    if n_c < COPIES_PER_MODE * modes:
        raise TomographyError(f"{n_c} copies cannot resolve {modes} modes (need >= {COPIES_PER_MODE * modes})")
    if postselected.k_max > K:
        postselected = postselected.truncated(K)
    amp_vacuum, amp_excited = postselected.padded(K)
    seq = as_sequence(seed)
    v = complex(amp_vacuum[K])
    if abs(v) == 0:
        raise TomographyError("tomography needs a non-vanishing vacuum reference")

    # position amplitudes of both branches on the 2K+1 point grid
    excited = np.fft.ifft(np.fft.ifftshift(amp_excited)) * math.sqrt(modes)
    vacuum = np.full(modes, v / math.sqrt(modes))
    occupation = np.abs(vacuum) ** 2 + np.abs(excited) ** 2
    cross = 2.0 * np.conj(vacuum) * excited
    copies = {X_BASIS: n_c // 2, Y_BASIS: n_c - n_c // 2}

    signed = {}
    for basis, count in copies.items():
        rng = np.random.default_rng(derive(seq, basis))
        part = cross.real if basis == X_BASIS else cross.imag
        p_plus = np.clip(0.5 * (1.0 + part / occupation), 0.0, 1.0)
        hits = rng.multinomial(count, occupation / occupation.sum())
        plus = rng.binomial(hits, p_plus)
        signed[basis] = (2 * plus - hits) / count

    cross_hat = 0.5 * (np.fft.fft(signed[X_BASIS]) + 1j * np.fft.fft(signed[Y_BASIS]))
    excited_hat = np.fft.fftshift(cross_hat) / np.conj(v)
    vacuum_hat = np.zeros(modes, dtype=complex)
    vacuum_hat[K] = v
    return WavefunctionState(vacuum_hat, excited_hat, postselected.n_p, postselected.length).normalized()


def _fill_weak_points(phase: np.ndarray, magnitude: np.ndarray) -> np.ndarray:
    weak = magnitude < WEAK_AMPLITUDE_FRACTION * magnitude.mean()
    if not weak.any():
        return phase
    valid = np.flatnonzero(~weak)
    if valid.size == 0:
        return np.zeros_like(phase)
    G = phase.size
    idx = np.flatnonzero(weak)
    pos = np.searchsorted(valid, idx)
    left = valid[(pos - 1) % valid.size]
    right = valid[pos % valid.size]
    nearest = np.where((idx - left) % G <= (right - idx) % G, left, right)
    filled = phase.copy()
    filled[idx] = phase[nearest]
    return filled


def readout_phase(state: WavefunctionState, G: int) -> np.ndarray:
    """arg of the excited branch on the G-point grid, in [0, 2pi)."""
    psi = grid_samples(state.amp_excited, G)
    return wrap(_fill_weak_points(np.angle(psi), np.abs(psi)))


def infidelity_chain(
    target: GridFunction,
    raw_estimate: GridFunction,
    projection: ProjectionResult,
    n_p: int,
) -> InfidelityChain:
    """Both inequalities for an estimate known modulo 2pi/n_p."""
    delta_sq = float(np.mean((periodic_modulus(n_p * (raw_estimate.values - target.values)) / n_p) ** 2))
    scale = np.pi**2 / n_p**2
    fidelity_bound = scale * (1.0 - grid_overlap(target, raw_estimate, n_p))
    estimated_state = output_state(raw_estimate, n_p, full_band(raw_estimate.grid_size))
    qt_overlap = abs(state_overlap(projection.state, estimated_state))
    delta_qt_sq = scale * max(0.0, 1.0 - qt_overlap**2)
    return InfidelityChain(delta_sq, fidelity_bound, projection.delta_ps_sq, delta_qt_sq)


@dataclass(frozen=True)
class _LevelReadout:
    raw: np.ndarray
    projection: ProjectionResult


def _level_readout(target: GridFunction, n_p: int, K: int, n_c: int, seed) -> _LevelReadout:
    state = output_state(target, n_p, full_band(target.grid_size))
    projection = project_low_wavenumber(state, K)
    reconstructed = simulate_tomography(projection.state, K, n_c, seed)
    return _LevelReadout(readout_phase(reconstructed, target.grid_size), projection)


def ws_estimate(
    target: GridFunction,
    budget: ProbeBudget,
    cls: SmoothnessClass,
    seed: SeedLike = None,
    *,
    constants: KitaevConstants = KitaevConstants(),
    regime: Regime | None = None,
) -> EstimationRecord:
    """
    One WS trial. The SQL regime (n_p = 1) takes a single readout. The
    Heisenberg regime runs a level cascade with entanglement 2^0..2^n0, each
    level repeated on the probe_sim schedule and combined pointwise by
    circular median before interval refinement; at n0 = 0 that is the
    median of the level-0 repeats.
    """
    if cls.q > 1:
        raise RestrictionError(
            f"the wavenumber-state method needs q <= 1 (got q={cls.q}); "
            "the probe wavefunction does not inherit higher smoothness"
        )
    if budget.accounting is not Accounting.WAVENUMBER_STATE:
        raise PreconditionError("ws_estimate needs a wavenumber-state budget (N = n_p*n_c)")
    n_p, n_c, K = budget.n_p, budget.n_c, budget.K
    n0 = int(round(math.log2(n_p)))
    if 2**n0 != n_p:
        raise PreconditionError(f"entanglement size must be a power of two, got {n_p}")
    regime = Regime(regime) if regime is not None else (Regime.SQL if n0 == 0 else Regime.HEISENBERG)
    seq = as_sequence(seed)
    G = target.grid_size
    flags = []

    if regime is Regime.SQL and n0 == 0:
        deepest = _level_readout(target, 1, K, n_c, derive(seq, 0, 0))
        estimate = GridFunction(deepest.raw, target.length)
        particles = n_c
    else:
        readings = np.empty((n0 + 1, G))
        particles = 0
        for n in range(n0 + 1):
            repeats = repeats_at_level(n, n0, constants)
            runs = [_level_readout(target, 2**n, K, n_c, derive(seq, n, r)) for r in range(repeats)]
            readings[n] = circular_median_columns(np.stack([run.raw for run in runs]))
            particles += 2**n * n_c * repeats
            deepest = runs[0]
        theta, depth = refine_levels(readings)
        if n0 > 0 and np.mean(depth == 0) > DEGRADED_POINT_FRACTION:
            flags.append(KITAEV_DEGRADED)
            logger.info("WS cascade stopped at level 0 on %d of %d points", int(np.sum(depth == 0)), G)
        estimate = GridFunction(theta, target.length)

    chain = infidelity_chain(target, GridFunction(deepest.raw / n_p, target.length), deepest.projection, n_p)
    if not chain.holds:
        flags.append(INFIDELITY_CHAIN_VIOLATED)
        logger.warning("infidelity chain violated: slacks %.3e, %.3e", chain.first_slack, chain.second_slack)

    return EstimationRecord(
        method=Method.WS,
        regime=regime,
        q=cls.q,
        M=cls.M,
        N=budget.N,
        trial=0,
        seed=seed_value(seq),
        mspe=mspe(estimate, target),
        err_a_sq=chain.delta_ps_sq,
        err_b_sq=chain.delta_qt_sq,
        particles_used=particles,
        flags=tuple(flags),
        estimate=estimate,
    )
