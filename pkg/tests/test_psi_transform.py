"""Diagonal field <-> complex-variable transform and its energy identity."""

import math

import numpy as np
import pytest

from kgnls.psi_transform import (RealFieldState, from_psi,
                                 quadratic_energy_fields,
                                 quadratic_energy_psi, to_psi)
from kgnls.spectral_core import FourierState


def random_real_field(M, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1)
    u = 0.5 * (u + np.conj(u[::-1]))       # conjugate-symmetric
    v = rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1)
    v = 0.5 * (v + np.conj(v[::-1]))
    return RealFieldState(u_hat=u, v_hat=v)


def test_hand_value_single_mode():
    # u = cos-mode at j = +-1, u_t = 0, c = 1: w_1 = sqrt 2,
    # psi_1 = w_1^{1/2} u_1 / sqrt 2 = 2^{1/4} / 2 for u_1 = 1/sqrt2
    M, c = 2, 1.0
    u = np.zeros(2 * M + 1, dtype=complex)
    u[M + 1] = u[M - 1] = 1.0 / math.sqrt(2.0)
    state = RealFieldState(u_hat=u, v_hat=np.zeros(2 * M + 1))
    psi = to_psi(state, c)
    assert abs(psi.z[M + 1] - 2.0 ** 0.25 / 2.0) < 1e-14


@pytest.mark.parametrize("c", [1.0, 10.0, 300.0])
def test_roundtrip(c):
    state = random_real_field(8, seed=4)
    psi = to_psi(state, c)
    back = from_psi(psi, c)
    assert np.max(np.abs(back.u_hat - state.u_hat)) < 1e-12
    assert np.max(np.abs(back.v_hat - state.v_hat)) < 1e-9 * c * c


def test_inverse_on_arbitrary_psi():
    # from_psi is a left inverse of to_psi and also inverts on generic
    # conjugate-representation states
    rng = np.random.default_rng(9)
    M, c = 6, 3.0
    z = rng.normal(size=2 * M + 1) + 1j * rng.normal(size=2 * M + 1)
    psi = FourierState(z, np.conj(z))
    state = from_psi(psi, c)
    again = to_psi(state, c, tol=1e-8)
    assert np.max(np.abs(again.z - psi.z)) < 1e-12


def test_energy_identity():
    c = 7.0
    state = random_real_field(10, seed=2)
    psi = to_psi(state, c)
    e_fields = quadratic_energy_fields(state, c)
    e_psi = quadratic_energy_psi(psi, c)
    assert abs(e_fields - e_psi) < 1e-12 * max(1.0, e_psi)


def test_symmetry_rejection():
    M = 4
    u = np.zeros(2 * M + 1, dtype=complex)
    u[M + 1] = 1.0          # no matching conjugate at -1
    state = RealFieldState(u_hat=u, v_hat=np.zeros(2 * M + 1))
    assert state.symmetry_defect() == 1.0
    with pytest.raises(ValueError):
        to_psi(state, 2.0)


def test_state_shape_validation():
    with pytest.raises(ValueError):
        RealFieldState(u_hat=np.zeros(4), v_hat=np.zeros(4))
    with pytest.raises(ValueError):
        RealFieldState(u_hat=np.zeros(5), v_hat=np.zeros(7))
