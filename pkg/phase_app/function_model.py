"""
Periodic phase functions, smoothness functionals and the periodic error metric.

The universal signal representation is GridFunction: a real function on
[0, L) sampled at G equispaced points x_j = jL/G with periodic wraparound.
FourierSpectrum holds the coefficients

    phi_k = (1/G) sum_j exp(-2 pi i k x_j / L) phi(x_j),   |k| <= K_max,

the discrete form of the continuum Fourier integral.

Smoothness classes (q = m + sigma, M, a, L) are checked two ways:

- holder_seminorm: the mean-square Hoelder quotient of the m-th periodic
  finite-difference derivative, maximised over grid-multiple shifts eps <= a;
  membership holds iff it is <= M^2 / L^(2q).
- fourier_constraint: sum_{k>=1} k^(2q) |phi_k|^2 <= M^2 / (2 c0^2), which is
  sufficient for membership.

The central-difference stencils used for the m-th derivative have transfer
functions no larger in magnitude than the exact derivative, so a spectrum
passing the Fourier test also passes the discrete seminorm test.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from phase_app.exceptions import (
    AliasingError,
    GridMismatchError,
    PreconditionError,
    SpectrumError,
)
from phase_app.seeding import SeedLike, make_rng

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEFAULT_GRID_SIZE = 4096
DEFAULT_CONSTRAINT_FRACTION = 0.9
DEFAULT_CUTOFF_FRACTION = 0.25

# Relative slack for "<=" comparisons against analytic budgets.
BUDGET_RTOL = 1e-9
SYMMETRY_ATOL = 1e-10
EVALUATE_CHUNK = 256


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real periodic function sampled on a uniform grid over [0, length)."""

    values: np.ndarray
    length: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise PreconditionError("GridFunction values must be a non-empty 1-D array")
        if not self.length > 0:
            raise PreconditionError(f"length must be positive, got {self.length}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def grid_size(self) -> int:
        return int(self.values.size)

    @property
    def spacing(self) -> float:
        return self.length / self.grid_size

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.grid_size) * self.spacing

    def same_grid(self, other: GridFunction) -> bool:
        return self.grid_size == other.grid_size and math.isclose(self.length, other.length)

    def with_values(self, values: np.ndarray, **metadata) -> GridFunction:
        return GridFunction(values, self.length, metadata=metadata)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """
        Trigonometric interpolation of the samples at arbitrary positions.

        Exact for functions band-limited below the grid's Nyquist wavenumber.
        """
        points = np.atleast_1d(np.asarray(points, dtype=float))
        G = self.grid_size
        coeffs = np.fft.rfft(self.values) / G
        weights = np.full(coeffs.size, 2.0)
        weights[0] = 1.0
        if G % 2 == 0:
            weights[-1] = 1.0
        k = np.arange(coeffs.size)
        out = np.empty(points.size)
        for start in range(0, points.size, EVALUATE_CHUNK):
            chunk = points[start:start + EVALUATE_CHUNK]
            phases = np.exp(2j * np.pi * np.outer(chunk, k) / self.length)
            out[start:start + EVALUATE_CHUNK] = (phases * (weights * coeffs)).real.sum(axis=1)
        return out

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "value"])
            for x, value in zip(self.x, self.values):
                writer.writerow([repr(float(x)), repr(float(value))])

    @classmethod
    def from_csv(cls, path: str | Path, length: float | None = None) -> GridFunction:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise PreconditionError(f"{path} holds no samples")
        values = np.array([float(r["value"]) for r in rows])
        if length is None:
            length = float(rows[1]["x"]) * len(rows) if len(rows) > 1 else 1.0
        return cls(values, length)


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Complex coefficients for wavenumbers -k_max..k_max (index k + k_max)."""

    coeffs: np.ndarray
    length: float = 1.0

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size % 2 == 0:
            raise SpectrumError("spectrum must hold an odd number of coefficients (k = -K..K)")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def k_max(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.k_max:
            return 0j
        return complex(self.coeffs[k + self.k_max])

    def positive(self) -> np.ndarray:
        """Coefficients for k = 1..k_max."""
        return self.coeffs[self.k_max + 1:]

    def is_conjugate_symmetric(self, atol: float = SYMMETRY_ATOL) -> bool:
        scale = max(1.0, float(np.abs(self.coeffs).max(initial=0.0)))
        return bool(np.allclose(self.coeffs, np.conj(self.coeffs[::-1]), rtol=0.0, atol=atol * scale))

    def to_json(self) -> str:
        return json.dumps({
            "length": self.length,
            "coefficients": [
                {"k": int(k), "re": float(c.real), "im": float(c.imag)}
                for k, c in zip(self.wavenumbers, self.coeffs)
            ],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> FourierSpectrum:
        data = json.loads(text)
        entries = sorted(data["coefficients"], key=lambda e: e["k"])
        k_max = max(abs(e["k"]) for e in entries)
        coeffs = np.zeros(2 * k_max + 1, dtype=complex)
        for e in entries:
            coeffs[e["k"] + k_max] = complex(e["re"], e["im"])
        return cls(coeffs, float(data.get("length", 1.0)))


@dataclass(frozen=True)
class SmoothnessClass:
    """
    Hoelder class of degree q = m + sigma with seminorm budget M.

    ``a`` is the cutoff of the eps-supremum; it defaults to L/4.
    """

    q: float
    M: float
    length: float = 1.0
    a: float | None = None

    def __post_init__(self) -> None:
        if not self.q > 0:
            raise PreconditionError(f"smoothness degree q must be positive, got {self.q}")
        if self.M < 0:
            raise PreconditionError(f"seminorm budget M must be non-negative, got {self.M}")
        if not self.length > 0:
            raise PreconditionError(f"length must be positive, got {self.length}")
        a = self.length * DEFAULT_CUTOFF_FRACTION if self.a is None else float(self.a)
        if not 0 < a <= self.length / 2:
            raise PreconditionError(f"cutoff a must lie in (0, L/2], got {a}")
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return math.ceil(self.q) - 1

    @property
    def sigma(self) -> float:
        return self.q - self.m

    @property
    def holder_budget(self) -> float:
        return self.M**2 / self.length ** (2 * self.q)

    @property
    def fourier_budget(self) -> float:
        return self.M**2 / (2.0 * c0_constant(self) ** 2)


class FourierConstraint(NamedTuple):
    value: float
    satisfied: bool


def wavenumber_coefficients(samples: np.ndarray, k_max: int) -> np.ndarray:
    """DFT coefficients (1/G normalisation) of real or complex samples for |k| <= k_max."""
    G = len(samples)
    if k_max < 0 or 2 * k_max >= G:
        raise AliasingError(f"K_max={k_max} must satisfy 0 <= K_max < G/2 = {G / 2}")
    full = np.fft.fft(samples) / G
    return full[np.arange(-k_max, k_max + 1) % G]


def grid_samples(coeffs: np.ndarray, G: int) -> np.ndarray:
    """Inverse of wavenumber_coefficients: complex samples on a G-point grid."""
    k_max = (len(coeffs) - 1) // 2
    if G <= 2 * k_max:
        raise AliasingError(f"grid size G={G} must exceed 2*K_max={2 * k_max}")
    full = np.zeros(G, dtype=complex)
    full[np.arange(-k_max, k_max + 1) % G] = coeffs
    return np.fft.ifft(full) * G


def fourier_transform(f: GridFunction, k_max: int) -> FourierSpectrum:
    return FourierSpectrum(wavenumber_coefficients(f.values, k_max), f.length)


def inverse_fourier(s: FourierSpectrum, G: int) -> GridFunction:
    if not s.is_conjugate_symmetric():
        raise SpectrumError("spectrum is not conjugate-symmetric; the function would be complex")
    return GridFunction(grid_samples(s.coeffs, G).real, s.length)


def periodic_derivative(values: np.ndarray, order: int, spacing: float) -> np.ndarray:
    """
    Order-``order`` derivative by second-order periodic central differences.

    Even orders repeat the three-point second difference; an odd order adds
    one centred first difference.
    """
    d = np.asarray(values)
    for _ in range(order // 2):
        d = (np.roll(d, -1) - 2.0 * d + np.roll(d, 1)) / spacing**2
    if order % 2:
        d = (np.roll(d, -1) - np.roll(d, 1)) / (2.0 * spacing)
    return d


def _holder_quotients(samples: np.ndarray, spacing: float, sigma: float, a: float) -> np.ndarray:
    """Mean-square quotients |g(x+eps) - g(x)|^2 / eps^(2 sigma) for eps = h, 2h, ... <= a."""
    G = len(samples)
    spectrum = np.fft.fft(samples)
    autocorr = (np.fft.ifft(np.abs(spectrum) ** 2).real) / G
    shifts = np.arange(1, int(math.floor(a / spacing + 1e-9)) + 1)
    if shifts.size == 0:
        return np.zeros(0)
    eps = shifts * spacing
    return np.clip(2.0 * (autocorr[0] - autocorr[shifts]), 0.0, None) / eps ** (2 * sigma)


def holder_seminorm(f: GridFunction, cls: SmoothnessClass) -> float:
    m = cls.m
    if f.grid_size < 16 * (m + 1):
        raise PreconditionError(f"grid size {f.grid_size} too small for order-{m} differences")
    if not math.isclose(f.length, cls.length):
        raise GridMismatchError(f"function length {f.length} differs from class length {cls.length}")
    derivative = periodic_derivative(f.values, m, f.spacing)
    quotients = _holder_quotients(derivative, f.spacing, cls.sigma, cls.a)
    return float(quotients.max(initial=0.0))


def satisfies_holder(f: GridFunction, cls: SmoothnessClass) -> bool:
    return holder_seminorm(f, cls) <= cls.holder_budget * (1 + BUDGET_RTOL)


@lru_cache(maxsize=None)
def _c0_for(q: float) -> float:
    m = math.ceil(q) - 1
    sigma = q - m

    def negative_ratio(x: float) -> float:
        # x^(-sigma) sin x, written to stay finite at x = 0
        return -(x ** (1.0 - sigma) * np.sinc(x / np.pi))

    result = minimize_scalar(negative_ratio, bounds=(0.0, np.pi), method="bounded",
                             options={"xatol": 1e-12})
    limit_at_zero = 1.0 if math.isclose(sigma, 1.0) else 0.0
    sup = max(-float(result.fun), limit_at_zero)
    return 2.0 * (TWO_PI**m) * (np.pi**sigma) * sup


def c0_constant(cls: SmoothnessClass | float) -> float:
    q = cls.q if isinstance(cls, SmoothnessClass) else float(cls)
    return _c0_for(float(q))


def fourier_constraint(s: FourierSpectrum, cls: SmoothnessClass) -> FourierConstraint:
    if not s.is_conjugate_symmetric():
        raise SpectrumError("Fourier constraint needs a conjugate-symmetric spectrum")
    k = np.arange(1, s.k_max + 1, dtype=float)
    value = float(np.sum(k ** (2 * cls.q) * np.abs(s.positive()) ** 2))
    return FourierConstraint(value, value <= cls.fourier_budget * (1 + BUDGET_RTOL))


def periodic_modulus(theta):
    """Minimal modulus [theta]_{2pi} = min_n |theta + 2 pi n|, in [0, pi]."""
    result = np.abs(np.remainder(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi)
    return float(result) if result.ndim == 0 else result


def mspe(estimate: GridFunction, target: GridFunction) -> float:
    if not estimate.same_grid(target):
        raise GridMismatchError(
            f"grids differ: G={estimate.grid_size}/L={estimate.length} "
            f"vs G={target.grid_size}/L={target.length}"
        )
    return float(np.mean(periodic_modulus(estimate.values - target.values) ** 2))


def phase_distance(chi: GridFunction, phi: GridFunction) -> float:
    """Distance D(chi, phi): root of the periodic mean-square difference."""
    return math.sqrt(mspe(chi, phi))


def derivative_bound(f: GridFunction) -> float:
    """Mean of phi'(x)^2 over the period (the q = 1 smoothness functional)."""
    return float(np.mean(periodic_derivative(f.values, 1, f.spacing) ** 2))


def lipschitz_inheritance(target: GridFunction, cls: SmoothnessClass) -> tuple[float, float]:
    """
    Hoelder seminorm of psi = exp(i phi)/sqrt(2) and its budget M^2 / (2 L^(2q)).

    Only meaningful for q <= 1, where psi inherits the class of phi.
    """
    if cls.q > 1:
        raise PreconditionError("wavefunction inheritance holds for q <= 1 only")
    psi = np.exp(1j * target.values) / math.sqrt(2.0)
    quotients = _holder_quotients(psi, target.spacing, cls.sigma, cls.a)
    return float(quotients.max(initial=0.0)), cls.holder_budget / 2.0


def sample_target(
    cls: SmoothnessClass,
    G: int = DEFAULT_GRID_SIZE,
    amplitude_cap: float | None = None,
    seed: SeedLike = None,
    *,
    fraction: float = DEFAULT_CONSTRAINT_FRACTION,
    k_gen: int | None = None,
) -> GridFunction:
    """
    Draw a random in-class target.

    Coefficients have |phi_k| proportional to k^-(q+1) with uniform random
    phases, rescaled so the Fourier constraint sits at ``fraction`` of its
    budget. With ``amplitude_cap`` the function is shrunk further until
    max |phi| <= cap, and metadata["cap_limited"] records that the requested
    fraction was not reached.
    """
    k_gen = max(1, G // 8) if k_gen is None else int(k_gen)
    if G <= 4 * k_gen:
        raise PreconditionError(f"grid size {G} must exceed 4*K_gen = {4 * k_gen}")
    if not 0 < fraction <= 1:
        raise PreconditionError(f"constraint fraction must lie in (0, 1], got {fraction}")
    metadata = {"k_gen": k_gen, "constraint_fraction": fraction, "cap_limited": False}
    if cls.M == 0:
        metadata["constraint_fraction"] = 0.0
        return GridFunction(np.zeros(G), cls.length, metadata=metadata)

    rng = make_rng(seed)
    k = np.arange(1, k_gen + 1, dtype=float)
    positive = k ** -(cls.q + 1.0) * np.exp(1j * rng.uniform(0.0, TWO_PI, size=k_gen))
    positive *= math.sqrt(fraction * cls.fourier_budget / np.sum(k ** (2 * cls.q) * np.abs(positive) ** 2))
    coeffs = np.concatenate([np.conj(positive[::-1]), [0.0], positive])
    values = grid_samples(coeffs, G).real

    if amplitude_cap is not None:
        peak = float(np.abs(values).max())
        if peak > amplitude_cap:
            shrink = amplitude_cap / peak
            # clip absorbs the last-ulp overshoot of the rescaled peak
            values = np.clip(values * shrink, -amplitude_cap, amplitude_cap)
            metadata["cap_limited"] = True
            metadata["constraint_fraction"] = fraction * shrink**2
            logger.debug("target shrunk by %.3f to respect amplitude cap %.3f", shrink, amplitude_cap)
    return GridFunction(values, cls.length, metadata=metadata)


def sample_gaussian_process(
    p: float,
    flux_scale: float,
    G: int = DEFAULT_GRID_SIZE,
    seed: SeedLike = None,
    *,
    length: float = 1.0,
    k_max: int | None = None,
) -> GridFunction:
    """
    Stationary Gaussian sample with E|phi_k|^2 = flux_scale * |k|^-p.

    Synthesised from independent complex Gaussian coefficients for
    1 <= k <= k_max (default G/4); the sample belongs, with high probability,
    to the class of degree slightly below q = (p - 1)/2.
    """
    if p <= 1:
        raise PreconditionError(f"spectral exponent p must exceed 1, got {p}")
    if flux_scale < 0:
        raise PreconditionError(f"flux scale must be non-negative, got {flux_scale}")
    k_max = G // 4 if k_max is None else int(k_max)
    metadata = {"p": p, "implied_q": (p - 1) / 2, "flux_scale": flux_scale, "k_max": k_max}
    if flux_scale == 0:
        return GridFunction(np.zeros(G), length, metadata=metadata)

    rng = make_rng(seed)
    k = np.arange(1, k_max + 1, dtype=float)
    std = np.sqrt(flux_scale * k**-p / 2.0)
    positive = std * (rng.standard_normal(k_max) + 1j * rng.standard_normal(k_max))
    coeffs = np.concatenate([np.conj(positive[::-1]), [0.0], positive])
    return GridFunction(grid_samples(coeffs, G).real, length, metadata=metadata)
