from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mpc, mpf

from partheta import _kernels
from partheta.mpnum import DomainError, MPComplex
from partheta.theta_core import eval_theta
from partheta.zero_locator import (
    annulus_count,
    certify_strong_separation,
    circle_radius,
    dominant_index,
    eighth_root_polynomial_roots,
    eighth_root_zero,
    find_xi,
    modulus_horizon,
    winding_count,
    winding_count_perturbed,
    zero_census,
)


def truncation_roots_oracle(q: complex, s: int, dps: int = 50):
    with mpmath.workdps(dps):
        qq = mpc(q)
        coeffs = [qq ** (j * (j + 1) // 2) for j in range(s + 1)]
        return sorted(mpmath.polyroots(coeffs[::-1], maxsteps=400, extraprec=4 * dps), key=abs)


@pytest.mark.parametrize("q", ["0.15", "0.1+0.12j", "-0.2", "0.05j"])
def test_find_xi_matches_polynomial_roots(q):
    # below the dominance threshold every zero is separated, and the degree-14
    # truncation reproduces the low zeros to many digits
    roots = truncation_roots_oracle(complex(q), 14)
    for k in range(1, 6):
        rec = find_xi(q, k)
        assert rec.separated and rec.annulus_count == 1 and not rec.multiple
        assert rec.residual < 1e-20
        closest = min(roots, key=lambda r: abs(r - rec.value.value))
        assert abs(closest - rec.value.value) < mpf("1e-15") * abs(closest)


def test_find_xi_flags_lost_separation():
    # past the first real spectral value the two lowest zeros leave their annuli
    rec = find_xi("0.3", 1)
    assert not rec.separated


def test_find_xi_seed_and_annulus():
    q = MPComplex.coerce("0.2-0.1j")
    for rec in zero_census(q, 8):
        k = rec.k
        z = rec.value.value
        with mpmath.workdps(40):
            aq = abs(q.value)
            assert aq ** (-k + mpf(1) / 2) < abs(z) < aq ** (-k - mpf(1) / 2)
            val, tail = eval_theta(q, rec.value, mpf("1e-20"))
            assert abs(val.value) <= mpf("1e-20")


def test_find_xi_rejects_bad_input():
    with pytest.raises(DomainError):
        find_xi("0.3", 0)
    with pytest.raises(DomainError):
        find_xi("1.5", 1)


def test_dominant_index_brackets_the_radius():
    for qa in (0.1, 0.37, 0.8):
        for k in range(0, 9):
            r = qa ** (-k)  # centre of the k-th annulus in log scale
            assert dominant_index(qa, r) == k


@given(st.floats(min_value=0.05, max_value=0.5), st.floats(min_value=-3.1, max_value=3.1))
def test_winding_counts_are_cumulative(qa, t):
    # for |q| <= 1/2, four zeros inside C_4 and one more per annulus after that
    q = qa * np.exp(1j * t)
    prev, _ = winding_count_perturbed(q, circle_radius(qa, 4))
    assert prev == 4
    for k in range(5, 12):
        n, _ = winding_count_perturbed(q, circle_radius(qa, k))
        assert n - prev == 1
        prev = n


def test_winding_against_polynomial_root_count():
    q = 0.45 + 0.3j
    s = 12
    roots = truncation_roots_oracle(q, s)
    for r in (0.7, 3.0, 11.0, 40.0):
        expected = sum(1 for z in roots if abs(z) < r)
        assert winding_count(q, r, s=s) == expected


def test_winding_with_plain_callable_and_center():
    f = lambda z: ((z - 1) * (z - 2j), (z - 2j) + (z - 1))
    assert winding_count(0.5, 1.5, f=f, center=0.5) == 1
    assert winding_count(0.5, 3.0, f=f) == 2
    with pytest.raises(DomainError):
        winding_count(0.5, -1.0, f=f)


def test_zero_free_disk_small_radius():
    for q in (0.9, 0.7j, -0.85, 0.6 - 0.6j):
        assert winding_count(q, 1 / (2 * abs(q))) == 0


def test_dominance_certificate_below_c0():
    cert = certify_strong_separation("0.2", 1)
    assert cert.method == "dominance" and cert.k_start == 1 and cert.margin > 0


def test_theorem_route_for_half_disk():
    cert = certify_strong_separation("0.45j", 4)
    assert cert.verified and cert.k_start == 4


def test_winding_route_for_large_q():
    cert = certify_strong_separation("0.8", 3, k_max=30)
    assert cert.method == "winding"
    assert cert.verified and cert.k_start == 13
    # below that index zeros come in pairs
    counts = [winding_count_perturbed(0.8, circle_radius(0.8, k))[0] for k in range(4, 14)]
    assert counts == [2, 2, 4, 4, 6, 6, 8, 10, 12, 13]


def test_annulus_count_near_spectral_value():
    # just past the first real spectral value the two lowest zeros have left the real axis
    # but they still sit in the union of the first two annuli
    q = 0.32
    assert annulus_count(q, 1) + annulus_count(q, 2) == 2


def test_modulus_horizon():
    val, n = modulus_horizon()
    assert n == 5
    assert abs(val - mpf("4.685636519e5")) < mpf("1e-8") * val


def test_eighth_root_zero_is_least_modulus_root():
    z0, r0 = eighth_root_zero(30)
    coeffs, roots = eighth_root_polynomial_roots(30)
    with mpmath.workdps(30):
        assert abs(mpmath.polyval(coeffs[::-1], z0.value)) < mpf("1e-25")
        assert abs(r0 - min(abs(r) for r in roots)) < mpf("1e-25")
        assert abs(r0 - mpf("0.5616599824")) < mpf("1e-10")


def test_kernel_roots_agree_with_oracle():
    q = 0.43 + 0.12j
    got = sorted(_kernels.truncation_roots(q, 16), key=abs)
    ref = truncation_roots_oracle(q, 16)
    for a, b in zip(got, ref):
        assert abs(a - complex(b)) < 1e-9 * abs(b)
