"""Shared fixtures and independent reference implementations.

The reference dynamics here are written from the equations of motion with
plain numpy shifts, deliberately not reusing any package internals, so they
can serve as oracles for the production integrator.
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rltransport import LatticeState

settings.register_profile("suite", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

ALL_KINDS = ("linear", "a", "b", "c", "d", "e")


def make_random_state(half_width: int, seed: int) -> LatticeState:
    """Unit-norm state with Gaussian amplitudes and empty decay accumulators."""
    rng = np.random.default_rng(seed)
    n = 2 * half_width + 1
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    nrm = np.sqrt(np.sum(np.abs(a) ** 2 + np.abs(b) ** 2))
    return LatticeState(half_width, a / nrm, b / nrm, np.zeros(n))


def reference_derivatives(kind: str, mu: float, nu: float, gamma_a: float,
                          U: float, a: np.ndarray, b: np.ndarray):
    """Equations of motion written out independently of the package kernel."""
    z = np.zeros(1, complex)
    b_left = np.concatenate((z, b[:-1]))
    a_right = np.concatenate((a[1:], z))
    aa = np.abs(a) ** 2
    bb = np.abs(b) ** 2
    aa_right = np.concatenate((aa[1:], [0.0]))
    bb_left = np.concatenate(([0.0], bb[:-1]))
    if kind == "linear":
        c_in, c_left, c_right = mu, nu, nu
    elif kind == "a":
        c_in = mu
        c_left = nu - U * (aa + bb_left)
        c_right = nu - U * (aa_right + bb)
    elif kind == "b":
        c_in = mu - U * (aa + bb)
        c_left = c_right = nu
    elif kind == "c":
        c_in = mu
        c_left = nu - U * aa
        c_right = nu - U * aa_right
    elif kind == "d":
        c_in = mu - U * aa
        c_left = c_right = nu
    elif kind == "e":
        c_in = mu
        c_left = nu - U * bb_left
        c_right = nu - U * bb
    else:
        raise ValueError(kind)
    da = -gamma_a * a + 1j * (c_in * b + c_left * b_left)
    db = 1j * (c_in * a + c_right * a_right)
    ddecay = 2.0 * gamma_a * aa
    return da, db, ddecay


def euler_reference(kind: str, delta_g: float, gamma_a: float, U: float,
                    half_width: int, t_end: float, dt: float,
                    negate: bool = False):
    """Forward-Euler integration of the reference equations from |0,b>."""
    sign = -1.0 if negate else 1.0
    mu = sign * (0.5 - delta_g)
    nu = sign * (0.5 + delta_g)
    n = 2 * half_width + 1
    a = np.zeros(n, complex)
    b = np.zeros(n, complex)
    b[half_width] = 1.0
    dec = np.zeros(n)
    for _ in range(int(round(t_end / dt))):
        da, db, dd = reference_derivatives(kind, mu, nu, gamma_a, U, a, b)
        a = a + dt * da
        b = b + dt * db
        dec = dec + dt * dd
    return a, b, dec


@pytest.fixture
def random_state():
    return make_random_state
