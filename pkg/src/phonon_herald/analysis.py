"""Characterize conditioned mechanical states: overlaps with Fock states, grids, sweeps.

Every Wigner function handled here has the shape ``A1 exp(-d^T P d) p(d)``
with a polynomial ``p``. Overlaps with Fock-state Wigner functions are then
computed twice: once exactly through Gaussian moments of the product
polynomial, once by Gauss-Hermite quadrature of the pointwise integrand.
The two must agree before a number is returned.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.signal import convolve2d
from scipy.special import comb

from .dynamics import CovariancePropagator, diffusion_matrix, drift_matrix, initial_covariance, stability_check
from .errors import NumericalIntegrityError, PhononHeraldError, StabilityError
from .fock import fock_wigner
from .gaussian import CovarianceMatrix, effective_phonon, logarithmic_negativity
from .params import DerivedParams, PhysicalParams, derive_params
from .subtraction import ConditionalWigner, conditioning_convention, heralding_weight

log = logging.getLogger(__name__)

QUAD_ORDER = 40
QUAD_CONVERGENCE = 1e-10
QUAD_MAX_ORDER = 320
METHOD_AGREEMENT = 1e-9
NEGATIVE_FLOOR = -1e-8
DEFAULT_EXTENT = 3.0
DEFAULT_RESOLUTION = 201


class PolynomialGaussianWigner:
    """Generic ``A1 exp(-d^T P d) p(d)`` phase-space function.

    ``coeffs[i, j]`` multiplies ``dr**i * di**j``.
    """

    def __init__(self, a1: float, precision, coeffs) -> None:
        self.a1 = float(a1)
        self.precision = np.array(precision, dtype=float)
        self.coeffs = np.array(coeffs, dtype=float)

    @classmethod
    def fock(cls, n: int) -> PolynomialGaussianWigner:
        return cls(2.0 / math.pi * (-1) ** n, 2.0 * np.eye(2), _laguerre_coeffs(n))

    @classmethod
    def vacuum(cls) -> PolynomialGaussianWigner:
        return cls.fock(0)

    def gaussian_form(self):
        return self.a1, self.precision, self.coeffs

    def __call__(self, dr, di):
        dr = np.asarray(dr, dtype=float)
        di = np.asarray(di, dtype=float)
        P = self.precision
        expo = P[0, 0] * dr**2 + (P[0, 1] + P[1, 0]) * dr * di + P[1, 1] * di**2
        poly = np.polynomial.polynomial.polyval2d(dr, di, self.coeffs)
        out = self.a1 * np.exp(-expo) * poly
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _laguerre_coeffs_cached(n: int) -> tuple:
    # L_n(4(x^2 + y^2)) expanded in monomials x^i y^j
    out = np.zeros((2 * n + 1, 2 * n + 1))
    for k in range(n + 1):
        ck = comb(n, k, exact=True) * (-1) ** k * 4.0**k / math.factorial(k)
        for i in range(k + 1):
            out[2 * i, 2 * (k - i)] += ck * comb(k, i, exact=True)
    return tuple(map(tuple, out))


def _laguerre_coeffs(n: int) -> np.ndarray:
    return np.array(_laguerre_coeffs_cached(n))


def gaussian_moments(cov: np.ndarray, max_x: int, max_y: int) -> np.ndarray:
    """Table ``E[x^a y^b]`` for a zero-mean bivariate normal, by Stein's recursion."""
    s11, s12, s22 = cov[0, 0], cov[0, 1], cov[1, 1]
    mom = np.zeros((max_x + 1, max_y + 1))
    mom[0, 0] = 1.0
    for b in range(2, max_y + 1):
        mom[0, b] = (b - 1) * s22 * mom[0, b - 2]
    for a in range(1, max_x + 1):
        for b in range(max_y + 1):
            val = 0.0
            if a >= 2:
                val += (a - 1) * s11 * mom[a - 2, b]
            if b >= 1:
                val += b * s12 * mom[a - 1, b - 1]
            mom[a, b] = val
    return mom


def _overlap_moments(w, g) -> float:
    a1, p1, c1 = w.gaussian_form()
    a2, p2, c2 = g.gaussian_form()
    A = p1 + p2
    A = (A + A.T) / 2
    poly = convolve2d(c1, c2)
    cov = np.linalg.inv(2.0 * A)
    mom = gaussian_moments(cov, poly.shape[0] - 1, poly.shape[1] - 1)
    gauss_norm = math.pi / math.sqrt(np.linalg.det(A))
    return math.pi * a1 * a2 * gauss_norm * float(np.sum(poly * mom))


def _overlap_quadrature(w, g) -> float:
    _, p1, _ = w.gaussian_form()
    _, p2, _ = g.gaussian_form()
    A = p1 + p2
    A = (A + A.T) / 2
    chol = np.linalg.cholesky(A)
    to_delta = np.linalg.inv(chol).T
    jac = 1.0 / np.prod(np.diag(chol))

    def estimate(order: int) -> float:
        nodes, weights = hermgauss(order)
        u1, u2 = np.meshgrid(nodes, nodes, indexing="ij")
        ww = np.outer(weights, weights)
        dr = to_delta[0, 0] * u1 + to_delta[0, 1] * u2
        di = to_delta[1, 0] * u1 + to_delta[1, 1] * u2
        f = w(dr, di) * g(dr, di) * np.exp(u1**2 + u2**2)
        return math.pi * jac * float(np.sum(ww * f))

    order = QUAD_ORDER
    prev = estimate(order)
    while True:
        order *= 2
        cur = estimate(order)
        if abs(cur - prev) < QUAD_CONVERGENCE:
            return cur
        if order >= QUAD_MAX_ORDER:
            raise NumericalIntegrityError(
                f"Gauss-Hermite quadrature did not converge (last change {abs(cur - prev):.3e})"
            )
        prev = cur


def integral(w) -> float:
    """Exact phase-space integral of ``w``; 1 for a normalized state."""
    a1, p, c = w.gaussian_form()
    A = (p + p.T) / 2
    mom = gaussian_moments(np.linalg.inv(2.0 * A), c.shape[0] - 1, c.shape[1] - 1)
    return a1 * math.pi / math.sqrt(np.linalg.det(A)) * float(np.sum(c * mom))


def overlap(w, g) -> float:
    """``pi * integral of w * g`` over the phase plane, checked by two methods.

    Equals ``tr(rho_w rho_g)`` for Wigner functions in the coherent-amplitude plane.
    """
    exact = _overlap_moments(w, g)
    quad = _overlap_quadrature(w, g)
    if abs(exact - quad) > METHOD_AGREEMENT:
        raise NumericalIntegrityError(
            f"overlap methods disagree: moments {exact!r} vs quadrature {quad!r}"
        )
    return exact


def fock_population(w, n: int) -> float:
    """``<n|rho|n>`` of the state with Wigner function ``w``."""
    return overlap(w, PolynomialGaussianWigner.fock(n))


def fidelity_single_phonon(w) -> float:
    """Overlap with the single-phonon Fock state; identical to ``fock_population(w, 1)``."""
    return fock_population(w, 1)


@dataclass(frozen=True)
class PhononDistribution:
    probabilities: tuple[float, ...]
    raw: tuple[float, ...]
    clamped: tuple[int, ...] = ()

    @property
    def n_max(self) -> int:
        return len(self.probabilities) - 1

    @property
    def total(self) -> float:
        return float(sum(self.probabilities))

    @property
    def mode(self) -> int:
        return int(np.argmax(self.probabilities))

    def __getitem__(self, n: int) -> float:
        return self.probabilities[n]


def phonon_distribution(w, n_max: int) -> PhononDistribution:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    raw = [float(fock_population(w, n)) for n in range(n_max + 1)]
    probs = []
    clamped = []
    for n, p in enumerate(raw):
        if p < NEGATIVE_FLOOR:
            raise NumericalIntegrityError(f"P({n}) = {p:.3e} is negative beyond round-off")
        if p < 0:
            log.info("clamping P(%d) = %.3e to 0", n, p)
            clamped.append(n)
            p = 0.0
        probs.append(p)
    return PhononDistribution(tuple(probs), tuple(raw), tuple(clamped))


@dataclass(frozen=True, eq=False)
class WignerGrid:
    axis: np.ndarray
    values: np.ndarray
    extent: float
    resolution: int

    @property
    def cell_area(self) -> float:
        h = self.axis[1] - self.axis[0]
        return float(h * h)

    @property
    def normalization(self) -> float:
        return float(self.values.sum() * self.cell_area)

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def min_location(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        return float(self.axis[i]), float(self.axis[j])

    def rows(self) -> Iterable[tuple[float, float, float]]:
        for i, x in enumerate(self.axis):
            for j, y in enumerate(self.axis):
                yield float(x), float(y), float(self.values[i, j])


def wigner_grid(w: Callable, extent: float = DEFAULT_EXTENT, resolution: int = DEFAULT_RESOLUTION) -> WignerGrid:
    """Sample ``w`` on a uniform square grid; ``values[i, j] = w(axis[i], axis[j])``."""
    if extent <= 0 or resolution < 2:
        raise ValueError("need extent > 0 and resolution >= 2")
    axis = np.linspace(-extent, extent, resolution)
    dr, di = np.meshgrid(axis, axis, indexing="ij")
    return WignerGrid(axis, np.asarray(w(dr, di), dtype=float), float(extent), int(resolution))


def radial_variation(w: Callable, max_radius: float = 2.0, n_radii: int = 40, n_angles: int = 72) -> float:
    """Largest spread of ``w`` along circles of radius up to ``max_radius``."""
    radii = np.linspace(max_radius / n_radii, max_radius, n_radii)
    theta = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    vals = w(rr * np.cos(tt), rr * np.sin(tt))
    return float((vals.max(axis=1) - vals.min(axis=1)).max())


# --- full pipeline -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointResult:
    t: float
    temperature: float
    covariance: CovarianceMatrix
    n_eff: float
    log_negativity: float
    heralding_weight: float
    fidelity: float | None = None
    phonon: PhononDistribution | None = None
    error: PhononHeraldError | None = None


class Scenario:
    """Parameters bound to their dynamics: derive once, evolve to any time."""

    def __init__(self, p: PhysicalParams) -> None:
        self.params = p
        self.derived: DerivedParams = derive_params(p)
        self.stability = stability_check(self.derived)
        if not self.stability.stable:
            raise StabilityError(
                f"parameters violate the stability conditions (c1={self.stability.c1:.4g}, "
                f"c2={self.stability.c2:.4g})"
            )
        self.k = drift_matrix(self.derived)
        self.D = diffusion_matrix(self.derived)
        self.propagator = CovariancePropagator(self.k, self.D, initial_covariance(self.derived.n_bar))

    def covariance(self, t: float) -> CovarianceMatrix:
        return self.propagator(t)

    def conditional_wigner(self, t: float) -> ConditionalWigner:
        return ConditionalWigner(conditioning_convention(self.covariance(t)))

    def evaluate(self, t: float, n_max: int | None = None, fidelity: bool = True) -> PointResult:
        v = self.covariance(t)
        en = logarithmic_negativity(v)
        if self.derived.delta < 0 and en > math.log(2):
            log.warning("E_N = %.4g exceeds ln 2 in the blue-detuned regime at t = %g s", en, t)
        base = dict(
            t=t,
            temperature=self.params.bath_temp,
            covariance=v,
            n_eff=effective_phonon(v),
            log_negativity=en,
            heralding_weight=heralding_weight(conditioning_convention(v)),
        )
        if not fidelity and n_max is None:
            return PointResult(**base)
        try:
            w = ConditionalWigner(conditioning_convention(v))
            phonon = phonon_distribution(w, n_max) if n_max is not None else None
            fid = fidelity_single_phonon(w) if fidelity else None
        except PhononHeraldError as exc:
            return PointResult(**base, error=_at_time(exc, t))
        return PointResult(**base, fidelity=fid, phonon=phonon)


def _at_time(exc: PhononHeraldError, t: float) -> PhononHeraldError:
    out = type(exc)(f"t = {t * 1e6:.6g} us: {exc}")
    out.__cause__ = exc
    return out


def _map(fn, items: Sequence, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class FidelityCurve:
    records: tuple[tuple[float, float], ...]

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.records]

    @property
    def fidelities(self) -> list[float]:
        return [f for _, f in self.records]


def fidelity_time_sweep(p: PhysicalParams, times: Sequence[float], workers: int = 1) -> FidelityCurve:
    """Conditional single-phonon fidelity at each time (seconds). Raises on the first failing point."""
    scenario = Scenario(p)

    def one(t):
        res = scenario.evaluate(t)
        if res.error is not None:
            raise res.error
        return (t, res.fidelity)

    return FidelityCurve(tuple(_map(one, list(times), workers)))


@dataclass(frozen=True)
class SweepRecord:
    temperature: float
    t: float
    fidelity: float | None
    phonon: tuple[float, ...] | None
    n_eff: float
    log_negativity: float
    heralding_weight: float
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...] = field(default_factory=tuple)

    def at(self, temperature: float, t: float) -> SweepRecord:
        for rec in self.records:
            if rec.temperature == temperature and rec.t == t:
                return rec
        raise KeyError((temperature, t))


def temperature_sweep(
    p: PhysicalParams,
    temps: Sequence[float],
    times: Sequence[float],
    n_max: int = 4,
    workers: int = 1,
) -> SweepResult:
    """Grid over bath temperature (kelvin) and measurement time (seconds), temperature-major."""
    temps = list(temps)
    times = list(times)
    scenarios: dict[float, Scenario] = {}
    for temp in temps:
        if temp not in scenarios:
            scenarios[temp] = Scenario(p.replace(bath_temp=temp))

    def one(cell):
        temp, t = cell
        res = scenarios[temp].evaluate(t, n_max=n_max)
        return SweepRecord(
            temperature=temp,
            t=t,
            fidelity=res.fidelity,
            phonon=None if res.phonon is None else res.phonon.probabilities,
            n_eff=res.n_eff,
            log_negativity=res.log_negativity,
            heralding_weight=res.heralding_weight,
            error=None if res.error is None else str(res.error),
        )

    cells = [(temp, t) for temp in temps for t in times]
    return SweepResult(tuple(_map(one, cells, workers)))
