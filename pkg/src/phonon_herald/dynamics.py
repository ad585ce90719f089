"""Linearized fluctuation dynamics: drift/diffusion matrices, stability, covariance flow.

The covariance obeys ``dv/dt = k v + v k^T + D``. For a stable drift matrix the
flow is evaluated in closed form,

    v(t) = v_ss + e^{kt} (v0 - v_ss) e^{k^T t},

with ``e^{kt}`` taken from one eigendecomposition of ``k``. Marginal or
unstable cases fall back to the exponential of the vectorized generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import NumericalIntegrityError, StabilityError
from .gaussian import CovarianceMatrix
from .params import DerivedParams

_IMAG_TOL = 1e-10
_COND_LIMIT = 1e12
# upper-triangle index pairs of a symmetric 4x4 matrix; the 10 unknowns
_SYM_INDEX = [(i, j) for i in range(4) for j in range(i, 4)]


@dataclass(frozen=True)
class StabilityReport:
    c1: float
    c2: float
    stable: bool


def drift_matrix(d: DerivedParams) -> np.ndarray:
    wm, gm, g, kap, dl = d.omega_m, d.gamma_m, d.g, d.kappa, d.delta
    return np.array(
        [
            [0.0, wm, 0.0, 0.0],
            [-wm, -gm, g, 0.0],
            [0.0, 0.0, -kap, dl],
            [g, 0.0, -dl, -kap],
        ]
    )


def diffusion_matrix(d: DerivedParams) -> np.ndarray:
    return np.diag([0.0, d.gamma_m * (2.0 * d.n_bar + 1.0), d.kappa, d.kappa])


def stability_check(d: DerivedParams) -> StabilityReport:
    """Routh-Hurwitz conditions for the drift matrix, as two polynomials in the rates."""
    wm, gm, g, kap, dl = d.omega_m, d.gamma_m, d.g, d.kappa, d.delta
    c1 = (
        dl * g**2 * wm * (2 * kap + gm) ** 2
        + 4 * kap * gm * wm**2 * (-(dl**2) + kap**2 + kap * gm)
        + 2 * kap * (dl**2 + kap**2) * gm * (dl**2 + kap**2 + 2 * kap * gm + gm**2)
        + 2 * kap * gm * wm**4
    )
    c2 = -dl * g**2 * wm + dl**2 * wm**2 + kap**2 * wm**2
    return StabilityReport(float(c1), float(c2), bool(c1 > 0 and c2 > 0))


def initial_covariance(n_bar: float) -> CovarianceMatrix:
    """Thermal mechanics with occupancy ``n_bar`` next to the field vacuum, at t = 0."""
    if n_bar < 0:
        raise ValueError(f"n_bar must be >= 0, got {n_bar!r}")
    return CovarianceMatrix(np.diag([n_bar + 0.5, n_bar + 0.5, 0.5, 0.5]), 0.0)


def lyapunov_residual(k, D, v) -> np.ndarray:
    k, D, v = (np.asarray(a, dtype=float) for a in (k, D, v))
    return k @ v + v @ k.T + D


def steady_state_covariance(k, D) -> CovarianceMatrix:
    """Symmetric solution of ``k v + v k^T + D = 0``.

    Solved as a 10x10 linear system in the independent entries of ``v``.
    Raises StabilityError if ``k`` is not Hurwitz or the system is singular.
    """
    k = np.asarray(k, dtype=float)
    D = np.asarray(D, dtype=float)
    if np.linalg.eigvals(k).real.max() >= 0:
        raise StabilityError("drift matrix has an eigenvalue with non-negative real part")

    pos = {pair: n for n, pair in enumerate(_SYM_INDEX)}

    def col(a, b):
        return pos[(a, b) if a <= b else (b, a)]

    A = np.zeros((10, 10))
    rhs = np.empty(10)
    for row, (i, j) in enumerate(_SYM_INDEX):
        for l in range(4):
            A[row, col(l, j)] += k[i, l]
            A[row, col(i, l)] += k[j, l]
        rhs[row] = -D[i, j]
    if np.linalg.cond(A) > _COND_LIMIT:
        raise StabilityError("steady-state system is singular: dynamics too close to instability")
    x = np.linalg.solve(A, rhs)
    v = np.empty((4, 4))
    for n, (i, j) in enumerate(_SYM_INDEX):
        v[i, j] = v[j, i] = x[n]
    return CovarianceMatrix(v, np.inf)


def _vectorized_flow(k: np.ndarray, D: np.ndarray, v0: np.ndarray, t: float) -> np.ndarray:
    # augmented generator: d/dt [vec v; 1] = [[k(x)I + I(x)k, vec D]; [0, 0]] [vec v; 1]
    n = k.shape[0]
    gen = np.zeros((n * n + 1, n * n + 1))
    gen[: n * n, : n * n] = np.kron(k, np.eye(n)) + np.kron(np.eye(n), k)
    gen[: n * n, n * n] = D.reshape(-1)
    x = expm(gen * t) @ np.append(v0.reshape(-1), 1.0)
    return x[: n * n].reshape(n, n)


class CovariancePropagator:
    """Evolves a fixed initial covariance under fixed ``(k, D)`` to arbitrary times.

    The eigendecomposition of ``k`` and the steady state are computed once, so
    repeated calls are cheap and give bit-identical results for equal ``t``.
    """

    def __init__(self, k, D, v0) -> None:
        self.k = np.asarray(k, dtype=float)
        self.D = np.asarray(D, dtype=float)
        self.v0 = np.array(v0, dtype=float)
        self.max_asymmetry = 0.0
        self.method = "vectorized"
        self.v_ss = None
        eigvals, vecs = np.linalg.eig(self.k)
        if eigvals.real.max() < 0 and np.linalg.cond(vecs) < _COND_LIMIT:
            try:
                self.v_ss = np.array(steady_state_covariance(self.k, self.D).v)
            except StabilityError:
                pass
            else:
                self.method = "closed_form"
                self._eigvals = eigvals
                self._vecs = vecs
                self._vecs_inv = np.linalg.inv(vecs)

    def flow_matrix(self, t: float) -> np.ndarray:
        """``e^{kt}`` from the eigendecomposition, checked to be real."""
        phases = np.exp(self._eigvals * t)
        e = (self._vecs * phases) @ self._vecs_inv
        scale = max(np.abs(e.real).max(), np.abs(phases).max(), 1e-300)
        if np.abs(e.imag).max() > _IMAG_TOL * scale:
            raise NumericalIntegrityError(
                f"flow matrix at t={t!r} has imaginary residue {np.abs(e.imag).max():.3e}"
            )
        return e.real

    def __call__(self, t: float) -> CovarianceMatrix:
        if t < 0:
            raise ValueError(f"t must be >= 0, got {t!r}")
        if t == 0:
            return CovarianceMatrix(self.v0, 0.0)
        if self.method == "closed_form":
            e = self.flow_matrix(t)
            v = self.v_ss + e @ (self.v0 - self.v_ss) @ e.T
        else:
            v = _vectorized_flow(self.k, self.D, self.v0, t)
        if not np.all(np.isfinite(v)):
            raise StabilityError(f"covariance diverged by t={t!r} s")
        drift = np.abs(v - v.T).max() / max(np.abs(v).max(), 1e-300)
        self.max_asymmetry = max(self.max_asymmetry, drift)
        return CovarianceMatrix((v + v.T) / 2.0, t)


def evolve_covariance(k, D, v0, t: float) -> CovarianceMatrix:
    return CovariancePropagator(k, D, v0)(t)


def evolve_series(k, D, v0, times: Sequence[float]) -> list[CovarianceMatrix]:
    times = list(times)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be sorted ascending")
    prop = CovariancePropagator(k, D, v0)
    return [prop(t) for t in times]
