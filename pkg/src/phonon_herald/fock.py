"""Number-basis tools: Fock-state Wigner functions and a brute-force subtraction oracle.

The oracle never touches the closed-form conditioning formulas. It builds the
two-mode state as a density matrix in a truncated number basis, applies the
field annihilation operator and traces the field out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import eval_genlaguerre, eval_laguerre, gammaln

from .errors import TruncationError, UnphysicalStateError, ZeroHeraldingError
from .gaussian import two_mode_squeezed_thermal

LEAKAGE_TOL = 1e-8


def fock_wigner(n: int, dr, di=None):
    """Wigner function of ``|n><n|`` at ``delta = dr + i di``.

    ``(2/pi) (-1)^n exp(-2|delta|^2) L_n(4|delta|^2)``. ``dr`` may also be a
    complex ``delta`` when ``di`` is omitted.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if di is None:
        delta = np.asarray(dr, dtype=complex)
        r2 = np.abs(delta) ** 2
    else:
        r2 = np.asarray(dr, dtype=float) ** 2 + np.asarray(di, dtype=float) ** 2
    out = (2.0 / math.pi) * (-1) ** n * np.exp(-2.0 * r2) * eval_laguerre(n, 4.0 * r2)
    return float(out) if np.ndim(out) == 0 else out


def density_matrix_wigner(rho, dr, di):
    """Wigner function of a single-mode density matrix in the ``(q + i p)/sqrt(2)`` plane.

    Sums the Laguerre kernels of ``|m><n|``; for ``m >= n``
    ``W_mn = (2/pi) (-1)^n sqrt(n!/m!) (2 conj(delta))^(m-n) e^{-2|delta|^2} L_n^(m-n)(4|delta|^2)``.
    """
    rho = np.asarray(rho, dtype=complex)
    dr = np.asarray(dr, dtype=float)
    di = np.asarray(di, dtype=float)
    delta_c = dr - 1j * di
    r2 = dr**2 + di**2
    gauss = np.exp(-2.0 * r2) * (2.0 / math.pi)
    out = np.zeros(np.broadcast(dr, di).shape)
    dim = rho.shape[0]
    for m in range(dim):
        for n in range(m + 1):
            if rho[m, n] == 0:
                continue
            k = m - n
            lognorm = 0.5 * (gammaln(n + 1) - gammaln(m + 1))
            kernel = (-1) ** n * math.exp(lognorm) * (2.0 * delta_c) ** k * eval_genlaguerre(n, k, 4.0 * r2)
            term = rho[m, n] * kernel
            # |n><m| contributes the complex conjugate kernel
            out = out + (term.real if k == 0 else 2.0 * term.real)
    return out * gauss


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    rho: np.ndarray
    n_max: int
    leakage: float = 0.0

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()

    def wigner(self, dr, di):
        return density_matrix_wigner(self.rho, dr, di)

    def check(self, tol: float = 1e-9) -> None:
        rho = self.rho
        if np.abs(rho - rho.conj().T).max() > tol:
            raise UnphysicalStateError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > tol:
            raise UnphysicalStateError(f"trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol:
            raise UnphysicalStateError("density matrix has a negative eigenvalue")


def squeezed_thermal_parameters(v, tol: float = 1e-9) -> tuple[float, float, float, float]:
    """Recover ``(r, n_mech, n_field, sign)`` from a two-mode squeezed thermal covariance.

    ``sign`` is the sign of ``c11``. Raises ValueError when ``v`` does not
    have that form.
    """
    v = np.asarray(v, dtype=float)
    m_diag = v[0, 0]
    f_diag = v[2, 2]
    x = v[0, 2]
    sign = -1.0 if x < 0 else 1.0
    total = math.sqrt(max((m_diag + f_diag) ** 2 - 4 * x * x, 0.0))
    r = 0.5 * math.atanh(min(2 * abs(x) / (m_diag + f_diag), 1.0 - 1e-16))
    a = 0.5 * (total + m_diag - f_diag)
    b = 0.5 * (total - m_diag + f_diag)
    n_mech, n_field = a - 0.5, b - 0.5
    rebuilt = two_mode_squeezed_thermal(r, n_mech, n_field)
    rebuilt[:2, 2:] *= sign
    rebuilt[2:, :2] *= sign
    err = np.abs(rebuilt - v).max()
    if err > tol * max(1.0, np.abs(v).max()) or n_mech < -tol or n_field < -tol:
        raise ValueError(
            f"covariance is not a two-mode squeezed thermal state (residual {err:.3e})"
        )
    return r, max(n_mech, 0.0), max(n_field, 0.0), sign


def _thermal_weights(n_bar: float, cutoff: int) -> np.ndarray:
    if n_bar == 0:
        w = np.zeros(cutoff + 1)
        w[0] = 1.0
        return w
    x = n_bar / (n_bar + 1.0)
    return (1.0 - x) * x ** np.arange(cutoff + 1)


def fock_oracle_conditional(v, n_max: int, *, pad: int = 20, weight_floor: float = 1e-18) -> FockDensityMatrix:
    """Brute-force conditional mechanical state after one field photon is removed.

    ``v`` must be a two-mode squeezed thermal covariance (vacuum variance 1/2).
    The state is synthesized as ``S(r) (rho_th x rho_th) S(r)^dagger`` in a
    two-mode number basis with cutoff ``n_max + pad``, then ``a rho a^dagger``
    is applied on the field and the field traced out. The mechanical density
    matrix is returned truncated to ``n_max`` and renormalized.
    """
    r, n_mech, n_field, sign = squeezed_thermal_parameters(v)
    cut = n_max + pad
    dim = cut + 1
    lower = sparse.diags(np.sqrt(np.arange(1, dim)), 1, format="csr")
    eye = sparse.identity(dim, format="csr")
    a_m = sparse.kron(lower, eye, format="csr")
    a_f = sparse.kron(eye, lower, format="csr")
    pair = a_m @ a_f
    # sign of c11 fixes the squeezing phase (0 or pi)
    generator = (sign * r) * (pair.T - pair)

    w_m = _thermal_weights(n_mech, cut)
    w_f = _thermal_weights(n_field, cut)
    tail = (1.0 - w_m.sum()) + (1.0 - w_f.sum())
    inputs = [(k, j, w_m[k] * w_f[j]) for k in range(dim) for j in range(dim) if w_m[k] * w_f[j] > weight_floor]
    start = np.zeros((dim * dim, len(inputs)))
    for col, (k, j, _) in enumerate(inputs):
        start[k * dim + j, col] = 1.0
    evolved = expm_multiply(generator, start) if r != 0 else start
    subtracted = a_f @ evolved
    weights = np.array([w for _, _, w in inputs])

    rho_full = np.zeros((dim, dim))
    for col in range(len(inputs)):
        psi = subtracted[:, col].reshape(dim, dim)  # rows: mechanics, cols: field
        rho_full += weights[col] * (psi @ psi.T)
    total = np.trace(rho_full)
    if not total > 0:
        raise ZeroHeraldingError("field mode carries no photons; nothing to subtract")
    kept = rho_full[: n_max + 1, : n_max + 1] / total
    leakage = 1.0 - np.trace(kept) + tail
    if leakage > LEAKAGE_TOL:
        raise TruncationError(f"truncation leakage {leakage:.3e} above {LEAKAGE_TOL:g}; raise n_max")
    rho = kept / np.trace(kept)
    out = FockDensityMatrix(rho.astype(complex), n_max, float(leakage))
    out.check()
    return out
