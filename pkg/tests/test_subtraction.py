from __future__ import annotations

import math

import numpy as np
import pytest

from phonon_herald.errors import UnphysicalStateError, ZeroHeraldingError
from phonon_herald.fock import fock_oracle_conditional
from phonon_herald.gaussian import local_rotation, two_mode_squeezed_thermal
from phonon_herald.subtraction import (
    ConditionalWigner,
    conditional_characteristic,
    conditioning_convention,
    heralding_weight,
)

GRID = np.linspace(-3.0, 3.0, 41)
DR, DI = np.meshgrid(GRID, GRID, indexing="ij")


def squeezed_rotated(r=0.3, n1=0.1, n2=0.05, s=1.4, a=0.4, b=1.1):
    v = two_mode_squeezed_thermal(r, n1, n2)
    sq = np.diag([s, 1 / s, 1, 1])
    R = local_rotation(a, b)
    return R @ sq @ v @ sq.T @ R.T


def test_convention_doubles():
    v = two_mode_squeezed_thermal(0.2)
    np.testing.assert_array_equal(conditioning_convention(v), 2 * v)


@pytest.mark.parametrize("r", [0.05, 0.3, 1.0])
def test_heralding_weight_is_field_photon_number(r):
    sigma = conditioning_convention(two_mode_squeezed_thermal(r))
    assert heralding_weight(sigma) == pytest.approx(math.sinh(r) ** 2, rel=1e-12)


def test_characteristic_is_normalized():
    sigma = conditioning_convention(squeezed_rotated())
    assert conditional_characteristic(sigma, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_characteristic_transforms_to_wigner():
    sigma = conditioning_convention(squeezed_rotated())
    w = ConditionalWigner(sigma)
    g = np.linspace(-8, 8, 321)
    h = g[1] - g[0]
    gr, gi = np.meshgrid(g, g, indexing="ij")
    chi = conditional_characteristic(sigma, gr + 1j * gi)
    for dr, di in [(0.0, 0.0), (0.3, -0.2), (-0.1, 0.4), (0.7, 0.5)]:
        val = (chi * np.exp(2j * (gi * dr - gr * di))).sum().real * h * h / math.pi**2
        assert val == pytest.approx(w(dr, di), abs=1e-9)


@pytest.mark.parametrize("r", [0.05, 0.1, 0.3])
@pytest.mark.parametrize("n_mech", [0.0, 0.1])
def test_closed_form_matches_fock_oracle(r, n_mech):
    v = two_mode_squeezed_thermal(r, n_mech)
    w = ConditionalWigner(conditioning_convention(v))
    oracle = fock_oracle_conditional(v, 20)
    assert np.abs(w(DR, DI) - oracle.wigner(DR, DI)).max() < 1e-10


def test_oracle_agreement_survives_field_noise():
    v = two_mode_squeezed_thermal(0.2, 0.05, 0.3)
    w = ConditionalWigner(conditioning_convention(v))
    oracle = fock_oracle_conditional(v, 30)
    assert np.abs(w(DR, DI) - oracle.wigner(DR, DI)).max() < 1e-10


def test_uncorrelated_mechanics_is_untouched():
    # c = 0: the herald carries no information about the mirror
    vm = 0.7
    v = np.diag([vm, vm, 0.9, 0.9])
    w = ConditionalWigner(conditioning_convention(v))
    expected = np.exp(-(DR**2 + DI**2) / vm) / (math.pi * vm)
    np.testing.assert_allclose(w(DR, DI), expected, atol=1e-14)


def test_plane_is_rotated_by_quarter_turn():
    # squeezed mechanics, product with a noisy field: the closed form's
    # real axis carries the momentum variance, the imaginary axis the position one
    s = 3.0
    v = np.diag([s / 2, 1 / (2 * s), 0.7, 0.7])
    w = ConditionalWigner(conditioning_convention(v))
    var_r, var_i = v[1, 1] / 2, v[0, 0] / 2
    expected = np.exp(-(DR**2) / (2 * var_r) - DI**2 / (2 * var_i)) / (2 * math.pi * math.sqrt(var_r * var_i))
    np.testing.assert_allclose(w(DR, DI), expected, atol=1e-14)


def test_vacuum_field_has_zero_heralding():
    sigma = conditioning_convention(np.eye(4) / 2)
    assert heralding_weight(sigma) == 0.0
    with pytest.raises(ZeroHeraldingError):
        ConditionalWigner(sigma)
    with pytest.raises(ZeroHeraldingError):
        conditional_characteristic(sigma, 0.1)


def test_nonpositive_gaussian_part_is_rejected():
    sigma = conditioning_convention(np.diag([-0.5, 0.5, 0.7, 0.7]))
    with pytest.raises(UnphysicalStateError):
        ConditionalWigner(sigma)


def test_gaussian_form_reproduces_values():
    sigma = conditioning_convention(squeezed_rotated())
    w = ConditionalWigner(sigma)
    a1, precision, coeffs = w.gaussian_form()
    x = np.stack([DR, DI], axis=-1)
    quad = np.einsum("...i,ij,...j->...", x, precision, x)
    poly = np.polynomial.polynomial.polyval2d(DR, DI, coeffs)
    np.testing.assert_allclose(a1 * np.exp(-quad) * poly, w(DR, DI), atol=1e-13)
