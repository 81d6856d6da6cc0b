from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from mpmath import mpc, mpf

from conftest import theta_oracle
from partheta import _kernels
from partheta.mpnum import ComplexBox, DomainError, MPComplex
from partheta.spectral_finder import (
    Q_A,
    Z_A,
    PathError,
    _dedupe,
    eta_derivative_bound,
    eta_path,
    homotopy_to_spectral,
    normalized_resultant_mp,
    real_collisions,
    real_spectrum_table,
    refine_double_zero,
    resultant_scan,
    spectral_order_key,
    sylvester_resultant,
    theta_partials,
    truncation_double_root,
    truncation_order_for,
)


@pytest.fixture(scope="module")
def q1():
    return refine_double_zero("0.31", "-7.5")


@pytest.fixture(scope="module")
def v_plus():
    return refine_double_zero("0.435+0.123j", "-5.96+6.10j")


def polyroots_double_zero(q: mpc, s: int = 26, dps: int = 60) -> mpc:
    """Mean of the two closest roots of the degree-s truncation, found by mpmath."""
    with mpmath.workdps(dps):
        coeffs = [q ** (j * (j + 1) // 2) for j in range(s + 1)]
        roots = sorted(mpmath.polyroots(coeffs[::-1], maxsteps=500, extraprec=6 * dps), key=abs)[:8]
        pairs = [(abs(a - b), (a + b) / 2) for i, a in enumerate(roots) for b in roots[i + 1:]]
        return min(pairs, key=lambda t: t[0])[1]


@pytest.mark.parametrize("s", [6, 9, 12])
@pytest.mark.parametrize("q", [0.3 + 0.1j, 0.45j, -0.38 + 0.05j])
def test_root_product_normalization_matches_sylvester(s, q):
    fast = _kernels.logdisc(np.array([q]), s)[0]
    ref = normalized_resultant_mp(q, s)
    with mpmath.workdps(30):
        assert abs(math.exp(fast.real) - abs(ref)) < 1e-11 * abs(ref)
        # log D is only defined modulo 2 pi i
        dphi = (fast.imag - float(mpmath.arg(ref)) + math.pi) % (2 * math.pi) - math.pi
        assert abs(dphi) < 1e-11


def test_sylvester_vanishes_at_truncation_double_root():
    pt = truncation_double_root(0.31, 10, precision=40)
    at = abs(sylvester_resultant(pt.q.value, 10))
    off = abs(sylvester_resultant(pt.q.value + mpf("1e-3"), 10))
    assert at < mpf("1e-25") * off


def test_first_real_spectral_value(q1):
    assert q1.kind == "real_positive"
    assert abs(q1.q.value - mpf("0.3092493386")) < mpf("1e-10")
    # independent checks: plain series at 80 digits, and the double root of a long truncation
    with mpmath.workdps(80):
        q, z = q1.q.value, q1.z_double.value
        h = mpf(10) ** -30
        f = theta_oracle(q, z, dps=80)
        fz = (theta_oracle(q, z + h, dps=80) - theta_oracle(q, z - h, dps=80)) / (2 * h)
        assert abs(f) < mpf(10) ** -35
        assert abs(fz) < mpf(10) ** -30
    z_or = polyroots_double_zero(q1.q.value)
    assert abs(z_or - q1.z_double.value) < mpf("1e-15")
    assert abs(q1.z_double.value - mpf("-7.5032559642")) < mpf("1e-9")


def test_complex_pair_and_conjugation(v_plus):
    vm = refine_double_zero("0.435-0.123j", "-5.96-6.10j")
    assert v_plus.kind == vm.kind == "complex_pair"
    with mpmath.workdps(40):
        assert abs(vm.q.value - mpmath.conj(v_plus.q.value)) < mpf(10) ** -35
        assert abs(vm.z_double.value - mpmath.conj(v_plus.z_double.value)) < mpf(10) ** -33
    assert abs(v_plus.q.value - mpc("0.4353184958", "0.1230440086")) < mpf("1e-10")
    assert v_plus.residual_theta < 1e-30 and v_plus.residual_theta_z < 1e-30


def test_local_quadratic_splitting(q1):
    # near a double zero theta ~ a (q - q*) + b (z - z*)^2, so moving q by h splits
    # the double zero into two simple zeros at distance 2 sqrt(|a h / b|)
    with mpmath.workdps(50):
        q0, z0 = q1.q.value, q1.z_double.value
        _, _, fzz, fq, _ = theta_partials(q0, z0)
        for h in (mpf("1e-5"), mpf("-1e-5")):
            d = mpmath.sqrt(-fq * h / (fzz / 2))
            zs = []
            for sgn in (1, -1):
                z = z0 + sgn * d
                for _ in range(60):
                    f, fz, _, _, _ = theta_partials(q0 + h, z)
                    z -= f / fz
                zs.append(z)
            sep = abs(zs[0] - zs[1])
            assert abs(sep - 2 * abs(d)) < mpf("1e-3") * sep
            assert abs((zs[0] + zs[1]) / 2 - z0) < 100 * abs(h)
            # real q past the spectral value gives a conjugate pair, below it two real zeros
            if h > 0:
                assert abs(zs[0].imag) > 1e-4 and abs(zs[0] - mpmath.conj(zs[1])) < mpf(10) ** -30
            else:
                assert abs(zs[0].imag) < mpf(10) ** -30


def test_truncated_and_full_series_agree(q1):
    pt = truncation_double_root(0.31, 18, precision=40)
    assert not pt.refined_with_full_series and pt.truncation_s == 18
    assert abs(pt.q.value - q1.q.value) < mpf("1e-30")


def test_refine_needs_order_for_truncation():
    with pytest.raises(DomainError):
        refine_double_zero("0.31", "-7.5", use_full_series=False)
    with pytest.raises(DomainError):
        refine_double_zero("1.1", "-7.5")


def test_truncation_order_rule():
    s = truncation_order_for(0.31, 7.5)
    first_dropped = 0.31 ** ((s + 1) * (s + 2) / 2) * 7.5 ** (s + 1)
    assert first_dropped < 1e-15
    prev = 0.31 ** (s * (s + 1) / 2) * 7.5 ** s
    assert prev >= 1e-15 or 0.31 ** s * 7.5 >= 0.5


def test_box_scan_finds_second_real_value():
    scan = resultant_scan(13, ComplexBox.rect("0.5", "0.55", "-0.01", "0.01"))
    assert len(scan.candidates) == 1 and not scan.warnings
    c = scan.candidates[0]
    assert c.winding == 2
    full = refine_double_zero(c.q, c.z)
    assert abs(full.q.value - mpf("0.5169593598")) < mpf("1e-10")
    assert abs(c.q.value - full.q.value) < mpf("1e-12")


def test_scan_rejects_bad_orders():
    for s in (3, 41):
        with pytest.raises(DomainError):
            resultant_scan(s)


def test_dedupe_and_ordering():
    items = [1 + 0j, 1 + 1e-10j, 0.5 + 0.1j]
    assert _dedupe(items, key=lambda x: x) == [1 + 0j, 0.5 + 0.1j]
    keys = sorted([mpc("0.43", "0.12"), mpc("0.43", "-0.12"), mpc("0.30", 0)], key=spectral_order_key)
    assert keys[0] == mpc("0.30", 0) and keys[1].imag < 0


def test_real_collisions_track_first_values():
    ev = real_collisions("positive", 3)
    qs = [e[0] for e in ev]
    assert qs == sorted(qs)
    assert abs(qs[0] - 0.3092493386) < 1e-9
    assert abs(qs[1] - 0.5169593598) < 1e-9
    neg = real_collisions("negative", 2)
    assert all(e[0] < 0 for e in neg)


def test_trend_of_positive_values():
    # 1 - q_s should approach pi / (2 s); at desk scale only a +-40% band is checked
    table = real_spectrum_table(10, "positive", refine=False)
    for s, pt in enumerate(table, 1):
        if s >= 3:
            ratio = (1 - float(pt.q.re)) / (math.pi / (2 * s))
            assert 0.6 < ratio < 1.4


def test_eta_path_stays_in_box():
    qa = MPComplex.coerce(Q_A)
    grid = [qa.value + mpc(d, e) for d in (-1e-10, 0, 1e-10) for e in (-1e-10, 1e-10)]
    path = eta_path(grid)
    assert path.in_V
    assert max(path.residuals) < 1e-30
    assert path.sampled_max <= path.derivative_bound
    assert abs(eta_derivative_bound() - mpf("87.4499243")) < mpf("1e-6")
    with pytest.raises(PathError):
        eta_path([mpc("0.3", "0.1")], z_seed="-3+3j")


def test_homotopy_lands_on_the_complex_value(v_plus):
    h = homotopy_to_spectral(Q_A, Z_A, steps=8)
    assert abs(h.q_dagger.value - v_plus.q.value) < mpf("1e-25")
    assert abs(h.q_dagger.value - MPComplex.coerce(Q_A).value) <= h.bound * 1.0001
