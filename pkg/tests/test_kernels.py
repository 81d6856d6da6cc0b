from __future__ import annotations

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import theta_oracle
from partheta import _kernels

NB = _kernels.IMPLEMENTATIONS["numba"]
NP = _kernels.IMPLEMENTATIONS["numpy"]

q_mod = st.floats(min_value=0.05, max_value=0.7)
angle = st.floats(min_value=-3.1, max_value=3.1)


def _q(r, t):
    return complex(r * np.exp(1j * t))


def test_backend_flag_is_resolved():
    assert _kernels.BACKEND in ("numba", "numpy")
    assert _kernels.REQUESTED_BACKEND in ("numba", "numpy")


@given(q_mod, angle, st.integers(min_value=0, max_value=6))
def test_scaled_sum_parity_and_oracle(r, t, k):
    q = _q(r, t)
    z = r ** (-k) * np.exp(1j * np.linspace(0, 2 * np.pi, 17, endpoint=False))
    jmax = k + 40
    g1, d1 = NB["scaled_sum"](q, z, k, jmax)
    g2, d2 = NP["scaled_sum"](q, z, k, jmax)
    assert np.allclose(g1, g2, rtol=1e-12, atol=1e-12)
    assert np.allclose(d1, d2, rtol=1e-12, atol=1e-12 * np.max(np.abs(d2)))
    # theta = q^T_k z^k g
    with mpmath.workdps(30):
        zz = complex(z[3])
        ref = theta_oracle(q, zz, dps=30) / (mpmath.mpc(q) ** (k * (k + 1) // 2) * mpmath.mpc(zz) ** k)
        assert abs(complex(ref) - g1[3]) < 1e-10 * max(1.0, abs(g1[3]))


@given(st.floats(min_value=0.05, max_value=0.6), angle)
def test_triple_parity_and_oracle(r, t):
    q = _q(r, t)
    z = np.array([0.7 + 0.2j, -3.0 + 1.0j, 5.0j, -1.2])
    t1, dt1 = NB["triple"](q, z, 80, 40)
    t2, dt2 = NP["triple"](q, z, 80, 40)
    assert np.allclose(t1, t2, rtol=1e-12, atol=1e-12)
    assert np.allclose(dt1, dt2, rtol=1e-11, atol=1e-11)
    for zi, ti in zip(z, t1):
        ref = complex(theta_oracle(q, zi, dps=30))
        assert abs(ref - ti) < 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("q", [0.3 + 0.05j, 0.45j, -0.35 + 0.1j])
def test_roots_parity(q):
    r1 = np.sort_complex(NB["roots"](q, 14))
    r2 = np.sort_complex(NP["roots"](q, 14))
    assert np.allclose(r1, r2, rtol=1e-10)
    # each is a root of the truncation
    coeffs = [q ** (j * (j + 1) // 2) for j in range(15)]
    for z in r1:
        val = np.polyval(coeffs[::-1], z)
        scale = max(abs(c * z ** j) for j, c in enumerate(coeffs))
        assert abs(val) < 1e-10 * scale


def test_logdisc_parity_modulo_branch():
    qs = np.array([0.3 + 0.1j, 0.2 - 0.3j, 0.45j, -0.4 + 0.02j])
    a = NB["logdisc"](qs, 12)
    b = NP["logdisc"](qs, 12)
    assert np.allclose(a.real, b.real, atol=1e-10)
    turns = (a.imag - b.imag) / (2 * np.pi)
    assert np.allclose(turns, np.round(turns), atol=1e-10)


def test_dispatch_makes_contiguous_complex_arrays():
    z = np.arange(1, 5, dtype=float)[::2]  # non-contiguous real view
    g, dg = _kernels.scaled_sum(0.3, z, 0, 20)
    assert g.dtype == np.complex128 and g.shape == (2,)
