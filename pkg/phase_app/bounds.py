"""
Theoretical error bounds for functional phase estimation.

A K-mode sine family phi_u(x) = sum_k sqrt(2) u_k sin(2 pi k x / L) stays in
the smoothness class while |u| <= rho = M / (c0 K^q). Over that ball the
uniform unbiased bound delta_UUB = (K / 8N)^(1/2) and the radius combine
into the worst-case biased bound 1/delta_WBB = 1/delta_UUB + 1/rho; choosing
K to maximise it gives the SQL floor. Allowing n_p-body entanglement turns
phi into n_p phi and gives the Heisenberg floor.

Usage:
    report = bound_report(q=1.0, M=2 * math.pi, N=4096)
    print(report.to_json())
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from phase_app.exceptions import PreconditionError
from phase_app.function_model import GridFunction, c0_constant
from phase_app.records import Regime

FD_STEP = 1e-5
K_SCAN_FACTOR = 4


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """Sine-basis coefficients u_1..u_K and the in-class radius rho."""

    u: np.ndarray
    rho: float
    length: float = 1.0

    def __post_init__(self) -> None:
        u = np.array(self.u, dtype=float)
        if u.ndim != 1 or u.size == 0:
            raise PreconditionError("phase vector needs at least one coefficient")
        object.__setattr__(self, "u", u)

    @property
    def K(self) -> int:
        return int(self.u.size)

    @property
    def in_class(self) -> bool:
        return float(np.linalg.norm(self.u)) <= self.rho

    def sine_basis(self, G: int) -> np.ndarray:
        x = np.arange(G) / G
        k = np.arange(1, self.K + 1)
        return math.sqrt(2.0) * np.sin(2.0 * np.pi * np.outer(k, x))

    def function(self, G: int) -> GridFunction:
        return GridFunction(self.u @ self.sine_basis(G), self.length)


def rho(q: float, M: float, K: int) -> float:
    return M / (c0_constant(q) * K**q)


def _probe_state(u: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Single-particle output state on the (branch, position) grid."""
    G = basis.shape[1]
    excited = np.exp(1j * (u @ basis)) / math.sqrt(2.0 * G)
    vacuum = np.full(G, 1.0 / math.sqrt(2.0 * G), dtype=complex)
    return np.concatenate([vacuum, excited])


def qfi_matrix(u: PhaseVector, G: int, *, finite_difference: bool = False) -> np.ndarray:
    """
    Pure-state Fisher information J_jk = 4 Re(<d_j psi|d_k psi> - <d_j psi|psi><psi|d_k psi>).

    Derivatives are analytic (d_j multiplies the excited branch by
    i sqrt(2) sin(2 pi j x / L)) or, with ``finite_difference``, central
    differences of the state with step 1e-5.
    """
    if G < 8 * u.K:
        raise PreconditionError(f"grid size {G} must be at least 8K = {8 * u.K}")
    basis = u.sine_basis(G)
    psi = _probe_state(u.u, basis)
    if finite_difference:
        derivatives = np.empty((u.K, psi.size), dtype=complex)
        for j in range(u.K):
            step = np.zeros(u.K)
            step[j] = FD_STEP
            derivatives[j] = (_probe_state(u.u + step, basis) - _probe_state(u.u - step, basis)) / (2 * FD_STEP)
    else:
        excited = psi[G:]
        derivatives = np.concatenate([np.zeros((u.K, G)), 1j * basis * excited[None, :]], axis=1)
    gram = derivatives.conj() @ derivatives.T
    berry = derivatives.conj() @ psi
    J = 4.0 * np.real(gram - np.outer(berry, berry.conj()))
    return (J + J.T) / 2.0


def uub(K: int, N: int) -> float:
    if K < 1 or N < 1:
        raise PreconditionError(f"K and N must be >= 1, got K={K}, N={N}")
    return math.sqrt(K / (8.0 * N))


def wbb(delta_uub: float, rho_value: float) -> float:
    if not (delta_uub > 0 and rho_value > 0):
        raise PreconditionError("worst-case bound needs positive delta_UUB and rho")
    if math.isinf(rho_value):
        return delta_uub
    return 1.0 / (1.0 / delta_uub + 1.0 / rho_value)


def c1_constant(q: float) -> float:
    c0 = c0_constant(q)
    return q / (2.0 * (2 * q + 1) ** 2) * (q / c0) ** (2 * q / (2 * q + 1))


def c2_constant(q: float) -> float:
    return (c1_constant(q) / np.pi) ** ((2 * q + 1) / (q + 1))


def sql_floor(q: float, M: float, N: float) -> float:
    return c1_constant(q) * (M ** (1 / q) / N) ** (q / (2 * q + 1))


def heisenberg_floor(q: float, M: float, N: float) -> float:
    return c2_constant(q) * (M ** (1 / q) / N) ** (q / (q + 1))


def reduced_sql(q: float, M: float, N: float, n_p: float) -> float:
    """Limit on delta when at most n_p particles are entangled."""
    return c1_constant(q) * (M * n_p ** (q + 1) * N ** (-q)) ** (1 / (2 * q + 1)) / n_p


def max_entanglement(q: float, M: float, N: float) -> float:
    """Largest n_p for which the reduced limit still resolves the 2pi/n_p ambiguity."""
    return ((np.pi / c1_constant(q)) ** ((2 * q + 1) / 2) / M * N**q) ** (1 / (q + 1))


def analytic_K(q: float, M: float, N: float) -> float:
    return (M**2 * N) ** (1 / (2 * q + 1))


class SQLBound(NamedTuple):
    bound: float
    K_star: int


class HeisenbergBound(NamedTuple):
    bound: float
    np_star: int


def _check_positive(q: float, M: float, N: float) -> None:
    if not (q > 0 and M > 0 and N > 0):
        raise PreconditionError(f"bounds need positive q, M, N (got {q}, {M}, {N})")


def sql_lower(q: float, M: float, N: int) -> SQLBound:
    """Largest delta_WBB over integer K in [K_a/4, 4 K_a] and K = 1."""
    _check_positive(q, M, N)
    k_a = analytic_K(q, M, N)
    candidates = set(range(max(1, math.floor(k_a / K_SCAN_FACTOR)), math.ceil(K_SCAN_FACTOR * k_a) + 1))
    candidates.add(1)
    best = max(sorted(candidates), key=lambda K: wbb(uub(K, N), rho(q, M, K)))
    return SQLBound(wbb(uub(best, N), rho(q, M, best)), best)


def heisenberg_lower(q: float, M: float, N: int) -> HeisenbergBound:
    _check_positive(q, M, N)
    np_star = math.floor(max_entanglement(q, M, N))
    if np_star < 1:
        return HeisenbergBound(sql_lower(q, M, N).bound, 1)
    return HeisenbergBound(heisenberg_floor(q, M, N), np_star)


class ResourcePlan(NamedTuple):
    """
    Integer resource split.

    SQL: (K = n1, n2 = N // K, 1). Heisenberg: (n1 = n_c, n2 = n_p, n_p).
    """

    n1: int
    n2: int
    n_p: int

    @property
    def K(self) -> int:
        return self.n1

    @property
    def n_c(self) -> int:
        return self.n1 * self.n2 // self.n_p


def resource_optima(q: float, M: float, N: int, regime: Regime, *, overhead: float = 1.0) -> ResourcePlan:
    """
    Analytic resource split rounded to integers.

    ``overhead`` divides the Heisenberg entanglement size, for schemes whose
    per-site cost exceeds one particle per unit of entanglement.
    """
    if N < 1:
        raise PreconditionError(f"N must be >= 1, got {N}")
    regime = Regime(regime)
    if regime is Regime.SQL:
        K = min(max(1, round(analytic_K(q, M, N))), N)
        return ResourcePlan(K, N // K, 1)
    n_p = min(max(1, math.floor(max_entanglement(q, M, N) / overhead)), N)
    return ResourcePlan(N // n_p, n_p, n_p)


@dataclass(frozen=True)
class BoundReport:
    q: float
    M: float
    N: int
    c0: float
    c1_floor: float
    c2_floor: float
    rho: float
    delta_uub: float
    delta_wbb: float
    sql_lower: float
    sql_floor: float
    hl_lower: float
    optimal_K: int
    max_np: int

    def floor(self, regime: Regime) -> float:
        return self.sql_floor if Regime(regime) is Regime.SQL else self.hl_lower

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def bound_report(q: float, M: float, N: int) -> BoundReport:
    sql = sql_lower(q, M, N)
    hl = heisenberg_lower(q, M, N)
    radius = rho(q, M, sql.K_star)
    delta_uub = uub(sql.K_star, N)
    return BoundReport(
        q=q,
        M=M,
        N=N,
        c0=c0_constant(q),
        c1_floor=c1_constant(q),
        c2_floor=c2_constant(q),
        rho=radius,
        delta_uub=delta_uub,
        delta_wbb=wbb(delta_uub, radius),
        sql_lower=sql.bound,
        sql_floor=sql_floor(q, M, N),
        hl_lower=hl.bound,
        optimal_K=sql.K_star,
        max_np=hl.np_star,
    )


def bound_table(q_values, M_values, N_values) -> list[dict]:
    """One BoundReport row per (q, M, N) combination."""
    return [bound_report(q, M, N).to_dict() for q in q_values for M in M_values for N in N_values]
