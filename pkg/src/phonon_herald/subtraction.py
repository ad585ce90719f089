"""Mechanical state conditioned on subtracting one photon from the field mode.

The closed forms below take the covariance in the *conditioning convention*
``sigma = 2 v``, where the vacuum is the identity matrix. Only in that
scaling does ``exp(-x sigma x^T / 2)`` equal the characteristic function of
the state, which the subtraction formulas assume.

Phase-space variables ``(dr, di)`` are real and imaginary parts of the
coherent amplitude ``delta``. The formulas pair ``(gamma_r, gamma_i)``
directly with ``(q, p)``, so the plane they produce is the standard
``delta = (q + i p) / sqrt(2)`` plane rotated by 90 degrees. Fock-diagonal
states, fidelities and phonon statistics do not see the rotation.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import UnphysicalStateError, ZeroHeraldingError

HERALD_TOL = 1e-12


def conditioning_convention(v) -> np.ndarray:
    """Scale a vacuum-1/2 covariance to the vacuum-identity convention."""
    return 2.0 * np.asarray(v, dtype=float)


def heralding_weight(sigma) -> float:
    """Mean field photon number ``(f11 + f22 - 2) / 4``; zero for the field vacuum."""
    sigma = np.asarray(sigma, dtype=float)
    return float((sigma[2, 2] + sigma[3, 3] - 2.0) / 4.0)


def _excess(sigma: np.ndarray) -> float:
    excess = sigma[2, 2] + sigma[3, 3] - 2.0
    if not excess > HERALD_TOL:
        raise ZeroHeraldingError(
            f"field mode is at the vacuum floor (f11 + f22 - 2 = {excess:.3e}); "
            "a photon subtraction has vanishing probability"
        )
    return float(excess)


def conditional_characteristic(sigma, gamma):
    """Characteristic function ``C_m(gamma) = (aleph/4) exp(g1) g2`` of the conditioned mechanics.

    ``gamma`` may be a complex scalar or array; the result is real with the same shape.
    """
    sigma = np.asarray(sigma, dtype=float)
    excess = _excess(sigma)
    aleph = 4.0 / excess
    gamma = np.asarray(gamma, dtype=complex)
    gr, gi = gamma.real, gamma.imag
    m11, m12, m21, m22 = sigma[0, 0], sigma[0, 1], sigma[1, 0], sigma[1, 1]
    c11, c12, c21, c22 = sigma[0, 2], sigma[0, 3], sigma[1, 2], sigma[1, 3]
    g1 = -0.5 * m22 * gi**2 - 0.5 * gr * (m12 * gi + m21 * gi + m11 * gr)
    g2 = (
        -(c21**2) * gi**2
        - c22**2 * gi**2
        - 2 * c11 * c21 * gi * gr
        - 2 * c12 * c22 * gi * gr
        - c11**2 * gr**2
        - c12**2 * gr**2
        + excess
    )
    out = aleph / 4.0 * np.exp(g1) * g2
    return float(out) if out.ndim == 0 else out


class ConditionalWigner:
    """Wigner function of the photon-subtracted mechanical state.

    ``W = A1 exp(A2) [B1 - B2 B3 / C^2 - B4 B5 / C + B6]`` with the
    coefficients built from the blocks of ``sigma``. Instances are immutable
    and callable on scalars or broadcastable arrays.
    """

    def __init__(self, sigma) -> None:
        sigma = np.array(sigma, dtype=float)
        sigma.setflags(write=False)
        self.sigma = sigma
        excess = _excess(sigma)
        self.aleph = 4.0 / excess

        m11, m12, m21, m22 = sigma[0, 0], sigma[0, 1], sigma[1, 0], sigma[1, 1]
        c11, c12, c21, c22 = sigma[0, 2], sigma[0, 3], sigma[1, 2], sigma[1, 3]
        s = m12 + m21
        self.c = s**2 - 4 * m11 * m22
        if not self.c < 0 or not m11 > 0:
            raise UnphysicalStateError(
                f"mechanical block is not positive definite (C = {self.c:.3e}, m11 = {m11:.3e})"
            )
        self._m = (m11, s, m22)
        self._q11 = c11**2 + c12**2
        self.a1 = self.aleph / math.pi * m11 ** (-2.5) * math.sqrt(m11 / (4 * m11 * m22 - s**2))
        self.b2 = 4 * (c21**2 + c22**2) * m11**2 - 4 * (c11 * c21 + c12 * c22) * s * m11 + self._q11 * s**2
        self.b4 = 8 * (c11**2 * s - 2 * c21 * c11 * m11 + c12 * (c12 * s - 2 * c22 * m11))
        self.b6 = excess * m11**2

    def a2(self, dr, di):
        m11, s, m22 = self._m
        return 8 * (m22 * di**2 + s * di * dr + m11 * dr**2) / self.c

    def b1(self, dr, di):
        return -self._q11 * (self._m[0] - 4 * di**2)

    def b3(self, dr, di):
        m11, s, m22 = self._m
        return -4 * s**2 * di**2 - s * m11 * (16 * di * dr + s) + 4 * m11**2 * (m22 - 4 * dr**2)

    def b5(self, dr, di):
        m11, s, _ = self._m
        return s * di**2 + 2 * m11 * di * dr

    def __call__(self, dr, di):
        dr = np.asarray(dr, dtype=float)
        di = np.asarray(di, dtype=float)
        bracket = (
            self.b1(dr, di)
            - self.b2 * self.b3(dr, di) / self.c**2
            - self.b4 * self.b5(dr, di) / self.c
            + self.b6
        )
        out = self.a1 * np.exp(self.a2(dr, di)) * bracket
        return float(out) if out.ndim == 0 else out

    def gaussian_form(self) -> tuple[float, np.ndarray, np.ndarray]:
        """Decompose ``W = A1 exp(-d^T P d) p(d)`` with ``d = (dr, di)``.

        Returns ``(A1, P, coeffs)`` where ``coeffs[i, j]`` multiplies ``dr**i di**j``.
        """
        m11, s, m22 = self._m
        precision = -(8.0 / self.c) * np.array([[m11, s / 2], [s / 2, m22]])
        p = np.zeros((3, 3))
        k3 = -self.b2 / self.c**2
        k5 = -self.b4 / self.c
        p[0, 0] = -self._q11 * m11 + k3 * (4 * m11**2 * m22 - s**2 * m11) + self.b6
        p[0, 2] = 4 * self._q11 + k3 * (-4 * s**2) + k5 * s
        p[1, 1] = k3 * (-16 * s * m11) + k5 * 2 * m11
        p[2, 0] = k3 * (-16 * m11**2)
        return self.a1, precision, p


def conditional_wigner(sigma) -> ConditionalWigner:
    return ConditionalWigner(sigma)
