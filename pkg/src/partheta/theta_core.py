"""Evaluation of the partial theta function, its derivatives and bound functions.

All series evaluations carry a certified tail radius.  Terms are produced by
the recursion ``t_{j+1} = t_j * q^(j+1) * z`` so no power is ever recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import mpmath
from mpmath import mpc, mpf

from .mpnum import DEFAULT_PRECISION, DomainError, MPComplex, PrecisionError

MAX_TERMS = 200_000


def _prec_of(*xs) -> int:
    p = DEFAULT_PRECISION
    for x in xs:
        if isinstance(x, MPComplex):
            p = max(p, x.precision)
    return p


def _coerce(x, p: int) -> mpc:
    return MPComplex.coerce(x, p).value


def _check_q(q: mpc) -> None:
    if q == 0 or abs(q) >= 1:
        raise DomainError(f"need 0 < |q| < 1, got |q| = {mpmath.nstr(abs(q), 8)}")


def _rounding_radius(n_terms: int, abs_sum: mpf, value: mpc, p: int, work_dps: int) -> mpf:
    # accumulated rounding in the sum plus the final rounding to p digits
    return (4 * (n_terms + 5) * abs_sum * mpf(10) ** (-work_dps)
            + abs(value) * mpf(10) ** (1 - p))


# ---------------------------------------------------------------------------
# generic certified series
# ---------------------------------------------------------------------------


@dataclass
class _Component:
    weight: Callable[[int], int]  # polynomial multiplier c(j)
    qshift: int  # power of q removed from q^T_j
    zshift: int  # power of z removed from z^j
    j0: int  # first index with c(j) != 0


_COMPONENTS = {
    "value": _Component(lambda j: 1, 0, 0, 0),
    "dz": _Component(lambda j: j, 0, 1, 1),
    "dzz": _Component(lambda j: j * (j - 1), 0, 2, 2),
    "dq": _Component(lambda j: j * (j + 1) // 2, 1, 0, 1),
    "dqz": _Component(lambda j: j * j * (j + 1) // 2, 1, 1, 1),
}


def _sum_component(q: mpc, z: mpc, comp: _Component, tol: mpf, p: int, work_dps: int):
    """Return (sum, tail radius, number of kept terms)."""
    absq = abs(q)
    absz = abs(z)
    with mpmath.workdps(work_dps):
        j = comp.j0
        # base monomial q^(T_j - qshift) z^(j - zshift) at j = j0
        mono = q ** (j * (j + 1) // 2 - comp.qshift) * (z ** (j - comp.zshift) if j >= comp.zshift else 1)
        total = mpc(0)
        abs_sum = mpf(0)
        while True:
            term = comp.weight(j) * mono
            total += term
            abs_sum += abs(term)
            mono_next = mono * q ** (j + 1) * z
            nxt = abs(comp.weight(j + 1) * mono_next)
            c1 = comp.weight(j + 1)
            c2 = comp.weight(j + 2)
            ratio = absq ** (j + 2) * absz * (mpf(c2) / c1 if c1 else 1)
            if (nxt <= tol / 2 and ratio <= mpf(1) / 2) or (absz == 0 and j >= comp.j0):
                break
            j += 1
            mono = mono_next
            if j - comp.j0 > MAX_TERMS:
                raise PrecisionError("series did not reach the requested tolerance")
        tail = 2 * nxt if absz != 0 else mpf(0)
        tail += _rounding_radius(j - comp.j0 + 1, abs_sum, total, p, work_dps)
    return total, tail, j + 1


def _work_dps(p: int) -> int:
    return p + 10


def eval_theta(q, z, tol=mpf("1e-30")) -> tuple[MPComplex, mpf]:
    """theta(q, z) with a rigorous bound on the absolute error."""
    p = _prec_of(q, z)
    qv, zv = _coerce(q, p), _coerce(z, p)
    _check_q(qv)
    tol = mpf(tol)
    if tol <= 0:
        raise DomainError("tol must be positive")
    val, tail, _ = _sum_component(qv, zv, _COMPONENTS["value"], tol, p, _work_dps(p))
    if tail > tol:
        raise PrecisionError(f"tail {mpmath.nstr(tail, 3)} exceeds tol at {p} digits")
    return MPComplex(val, p), tail


@dataclass(frozen=True)
class ThetaJet:
    value: MPComplex
    dz: MPComplex
    dzz: MPComplex
    dq: MPComplex
    dqz: MPComplex
    theta_star: MPComplex
    tail_radius: dict
    terms_used: int

    def to_json(self) -> dict:
        out = {k: getattr(self, k).to_json() for k in ("value", "dz", "dzz", "dq", "dqz", "theta_star")}
        out["tail_radius"] = {k: mpmath.nstr(v, 6) for k, v in self.tail_radius.items()}
        out["terms_used"] = self.terms_used
        return out


def eval_jet(q, z, tol=mpf("1e-30")) -> ThetaJet:
    """theta together with theta_z, theta_zz, theta_q, theta_qz and theta* = theta_zz / 2q^3."""
    p = _prec_of(q, z)
    qv, zv = _coerce(q, p), _coerce(z, p)
    _check_q(qv)
    tol = mpf(tol)
    if tol <= 0:
        raise DomainError("tol must be positive")
    wd = _work_dps(p)
    vals, radii, used = {}, {}, 0
    for name, comp in _COMPONENTS.items():
        v, r, n = _sum_component(qv, zv, comp, tol, p, wd)
        if r > tol:
            raise PrecisionError(f"{name}: tail {mpmath.nstr(r, 3)} exceeds tol at {p} digits")
        vals[name], radii[name] = v, r
        used = max(used, n)
    with mpmath.workdps(wd):
        two_q3 = 2 * qv ** 3
        star = vals["dzz"] / two_q3
        radii["theta_star"] = radii["dzz"] / abs(two_q3)
    return ThetaJet(
        value=MPComplex(vals["value"], p),
        dz=MPComplex(vals["dz"], p),
        dzz=MPComplex(vals["dzz"], p),
        dq=MPComplex(vals["dq"], p),
        dqz=MPComplex(vals["dqz"], p),
        theta_star=MPComplex(star, p),
        tail_radius=radii,
        terms_used=used,
    )


def eval_truncation(q, z, s: int) -> MPComplex:
    """The polynomial sum_{j=0}^{s} q^(j(j+1)/2) z^j, evaluated by Horner's rule."""
    if s < 0:
        raise DomainError("truncation order must be nonnegative")
    p = _prec_of(q, z)
    qv, zv = _coerce(q, p), _coerce(z, p)
    with mpmath.workdps(_work_dps(p)):
        coeffs = truncation_coefficients(qv, s)
        acc = mpc(0)
        for c in reversed(coeffs):
            acc = acc * zv + c
    return MPComplex(acc, p)


def truncation_coefficients(q: mpc, s: int) -> list[mpc]:
    """[q^T_0, ..., q^T_s] at the current mpmath precision."""
    out = [mpc(1)]
    c = mpc(1)
    for j in range(1, s + 1):
        c = c * q ** j
        out.append(c)
    return out


def theta_mp(q: mpc, z: mpc, derivs: int = 0):
    """Raw series at the ambient mpmath precision, no certification.

    Returns theta and, when ``derivs`` is 1 or 2, also theta_z (and theta_zz).
    Intended for inner Newton loops that are certified separately.
    """
    absq, absz = abs(q), abs(z)
    eps = mpf(2) ** (-mpmath.mp.prec - 10)
    t = mpc(1)
    s0, s1, s2 = mpc(1), mpc(0), mpc(0)
    j = 0
    peak = mpf(1)
    while True:
        t = t * q ** (j + 1) * z
        j += 1
        s0 += t
        if derivs:
            s1 += j * t
            if derivs > 1:
                s2 += j * (j - 1) * t
        at = abs(t)
        peak = max(peak, at)
        if absq ** (j + 1) * absz < mpf(1) / 2 and at * j * j < eps * peak:
            break
        if j > MAX_TERMS:
            raise PrecisionError("series failed to converge")
    if derivs == 0:
        return s0
    if derivs == 1:
        return s0, s1 / z
    return s0, s1 / z, s2 / (z * z)


# ---------------------------------------------------------------------------
# Jacobi triple product
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TripleProductParts:
    Q: MPComplex
    U: MPComplex
    R: MPComplex
    G: MPComplex
    theta_star_full: MPComplex
    factors_used: int
    radius: dict = field(default_factory=dict)


def _product(factor: Callable[[int], mpc], tail_sum: Callable[[int], mpf], rel_tol: mpf, start: int = 1):
    """prod_{m>=start} factor(m), truncated once the remaining log deviation is small.

    ``tail_sum(M)`` bounds sum_{m>M} |x_m| where factor(m) = 1 + x_m; with
    |x_m| <= 1/2 the log deviation of the tail is at most twice that.
    """
    eps = mpf(2) ** (1 - mpmath.mp.prec)
    acc = mpc(1)
    upper = mpf(1)  # prod (|f_m| + e_m) with e_m bounding the rounding in f_m
    lower = mpf(1)  # prod |f_m|
    m = start
    while True:
        f = factor(m)
        acc *= f
        upper *= abs(f) + (m + 4) * eps * (1 + abs(f - 1))
        lower *= abs(f)
        rest = tail_sum(m)
        if 2 * rest < rel_tol and rest < mpf(1) / 4:
            break
        m += 1
        if m > MAX_TERMS:
            raise PrecisionError("product did not converge")
    dev = 2 * rest
    # rounding of the factors and of the running product, then the neglected tail
    rounding = upper * (1 + 2 * eps) ** (m - start + 1) - lower
    growth = mpmath.exp(dev)
    return acc, abs(acc) * (growth - 1) + rounding * growth, m


def eval_triple_product(q, z, tol=mpf("1e-30")) -> TripleProductParts:
    """Theta* = Q U R with Q = prod(1-q^m), U = prod(1+z q^m), R = prod(1+q^(m-1)/z)."""
    p = _prec_of(q, z)
    qv, zv = _coerce(q, p), _coerce(z, p)
    _check_q(qv)
    if zv == 0:
        raise DomainError("z = 0 is a pole of the factor R")
    tol = mpf(tol)
    wd = _work_dps(p)
    with mpmath.workdps(wd):
        aq, az = abs(qv), abs(zv)
        geo = 1 / (1 - aq)
        Q, rQ, mQ = _product(lambda m: 1 - qv ** m, lambda M: aq ** (M + 1) * geo, tol)
        U, rU, mU = _product(lambda m: 1 + zv * qv ** m, lambda M: az * aq ** (M + 1) * geo, tol)
        R, rR, mR = _product(lambda m: 1 + qv ** (m - 1) / zv, lambda M: aq ** M / az * geo, tol)
        star = Q * U * R
        r_star = (abs(Q) + rQ) * (abs(U) + rU) * (abs(R) + rR) - abs(Q) * abs(U) * abs(R)
        # G = sum_{j>=1} q^(j(j-1)/2) z^(-j); ratio of consecutive terms is |q|^j / |z|
        G = mpc(0)
        abs_sum = mpf(0)
        term = 1 / zv
        j = 1
        while True:
            G += term
            abs_sum += abs(term)
            nxt = term * qv ** j / zv
            if abs(nxt) <= tol / 2 and aq ** (j + 1) / az <= mpf(1) / 2:
                break
            term = nxt
            j += 1
            if j > MAX_TERMS:
                raise PrecisionError("G series did not converge")
        rG = 2 * abs(nxt) + _rounding_radius(j, abs_sum, G, p, wd)
    return TripleProductParts(
        Q=MPComplex(Q, p), U=MPComplex(U, p), R=MPComplex(R, p), G=MPComplex(G, p),
        theta_star_full=MPComplex(star, p), factors_used=max(mQ, mU, mR),
        radius={"Q": rQ, "U": rU, "R": rR, "G": rG, "theta_star_full": r_star},
    )


def theta_star_series(q, z, tol=mpf("1e-30")) -> tuple[MPComplex, mpf]:
    """Theta* = sum over all integers j of q^(j(j+1)/2) z^j, summed on both sides."""
    p = _prec_of(q, z)
    qv, zv = _coerce(q, p), _coerce(z, p)
    _check_q(qv)
    if zv == 0:
        raise DomainError("z = 0 is an essential singularity of Theta*")
    pos, rpos = eval_theta(MPComplex(qv, p), MPComplex(zv, p), tol / 2)
    # negative side: j = -i gives q^(i(i-1)/2) z^(-i), i >= 1
    wd = _work_dps(p)
    with mpmath.workdps(wd):
        aq, az = abs(qv), abs(zv)
        neg = mpc(0)
        abs_sum = mpf(0)
        term = 1 / zv
        i = 1
        while True:
            neg += term
            abs_sum += abs(term)
            nxt = term * qv ** i / zv
            if abs(nxt) <= tol / 4 and aq ** (i + 1) / az <= mpf(1) / 2:
                break
            term = nxt
            i += 1
        rneg = 2 * abs(nxt) + _rounding_radius(i, abs_sum, neg, p, wd)
        total = pos.value + neg
    return MPComplex(total, p), rpos + rneg


# ---------------------------------------------------------------------------
# scalar bound functions
# ---------------------------------------------------------------------------


def tau_of(qabs, doubled_terms: int | None = None) -> mpf:
    """tau(x) = 2 sum_{nu>=1} x^(nu^2/2).

    With ``doubled_terms = k`` only the first ``k`` summands are doubled, the
    variant whose root gives the sharper threshold for a single index.
    """
    x = mpf(qabs)
    if not 0 < x < 1:
        raise DomainError("tau_of needs 0 < x < 1")
    eps = mpf(2) ** (-mpmath.mp.prec - 4)
    total = mpf(0)
    nu = 1
    while True:
        t = x ** (mpf(nu * nu) / 2)
        total += t if (doubled_terms is not None and nu > doubled_terms) else 2 * t
        if t < eps:
            break
        nu += 1
    return total


def solve_c0(doubled_terms: int | None = None, xtol=mpf("1e-12")) -> mpf:
    """Root of tau(x) = 1 on (0, 1) by bisection."""
    lo, hi = mpf("1e-12"), mpf("0.99")
    with mpmath.workdps(30):
        while hi - lo > xtol / 4:
            mid = (lo + hi) / 2
            if tau_of(mid, doubled_terms) < 1:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


K1_THRESHOLD_TERMS = 1


@dataclass(frozen=True)
class BoundParts:
    """Closed-form minorations and the corresponding certified product values."""

    Q_min: mpf
    R_min: mpf
    P_min: mpf
    U_min: mpf
    G_max: mpf
    Q_prod: mpf
    R_prod: mpf
    P_prod: mpf
    U_prod: mpf
    G_sum: mpf
    theta_star_min: mpf


def _real_product(x_of_m: Callable[[int], mpf], geo_tail: Callable[[int], mpf], tol: mpf) -> tuple[mpf, mpf]:
    """Lower bound for prod_{m>=1}(1 - x_m), 0 <= x_m < 1, via a log-linear tail bound."""
    acc = mpf(1)
    m = 1
    while True:
        acc *= 1 - x_of_m(m)
        rest = geo_tail(m)
        if rest < tol and rest <= mpf(1) / 2:
            break
        m += 1
    # |log(1 - x)| <= 2x for x <= 1/2; the neglected factors are all < 1
    return acc * mpmath.exp(-2 * rest), acc


def bound_parts(qabs, n: int, alpha, zabs, tol=mpf("1e-25")) -> BoundParts:
    with mpmath.workdps(35):
        return _bound_parts(qabs, n, alpha, zabs, mpf(tol))


def _bound_parts(qabs, n: int, alpha, zabs, tol) -> BoundParts:
    """Minorations of |Q|, |R|, P, |U| and majoration of |G| at the given moduli.

    ``*_min`` are the closed-form bounds; ``*_prod`` are certified lower
    bounds from the defining products at ``qabs`` (the neglected tail of each
    product is bounded by a log-linear estimate).  ``U_prod`` is the bound
    |q|^(-n^2/2) prod_{m<=n}(1-|q|^(m-1/2)) P and ``G_sum`` is
    sum_{j>=1} |q|^(j(j-1)/2) / |z|^j.
    """
    x = mpf(qabs)
    a = mpf(alpha)
    zz = mpf(zabs)
    if not 0 < x < 1 or n < 1 or a <= 0:
        raise DomainError("bound_parts needs 0 < qabs < 1, n >= 1, alpha > 0")
    b = a * n
    if b <= 1 or x > 1 - 1 / b:
        raise DomainError("bound_parts needs qabs <= 1 - 1/(alpha n)")
    if zz <= 1:
        raise DomainError("bound_parts needs zabs > 1")
    pi2 = mpmath.pi ** 2
    s = mpmath.sqrt(b * (b - 1))
    Q_min = mpmath.exp(pi2 / 6 * (1 - b))
    R_min = (1 - 1 / zz) * Q_min
    P_min = mpmath.exp(-pi2 / 6 * s)
    U_min = x ** (-mpf(n * n) / 2) * mpmath.exp(-pi2 / 3 * s)
    G_max = mpf(1) if zz >= 2 else mpmath.inf
    geo = 1 / (1 - x)
    Q_prod, _ = _real_product(lambda m: x ** m, lambda M: x ** (M + 1) * geo, tol)
    R_prod, _ = _real_product(lambda m: x ** (m - 1) / zz, lambda M: x ** M / zz * geo, tol)
    P_prod, _ = _real_product(lambda m: x ** (m - mpf(1) / 2), lambda M: x ** (M + mpf(1) / 2) * geo, tol)
    head = mpf(1)
    for m in range(1, n + 1):
        head *= 1 - x ** (m - mpf(1) / 2)
    U_prod = x ** (-mpf(n * n) / 2) * head * P_prod
    G_sum = mpf(0)
    j = 1
    while True:
        t = x ** (mpf(j * (j - 1)) / 2) / zz ** j
        G_sum += t
        if t < tol * mpf("1e-5"):
            break
        j += 1
    G_sum += 2 * t  # geometric remainder
    return BoundParts(
        Q_min=Q_min, R_min=R_min, P_min=P_min, U_min=U_min, G_max=G_max,
        Q_prod=Q_prod, R_prod=R_prod, P_prod=P_prod, U_prod=U_prod, G_sum=G_sum,
        theta_star_min=Q_prod * R_prod * U_prod,
    )


def combined_theta_star_bound(alpha, n: int) -> mpf:
    """exp(pi^2/3 + (1/(2 alpha) - 2 pi^2 alpha / 3) n) / 2, the closed-form |Theta*| minoration."""
    a = mpf(alpha)
    pi2 = mpmath.pi ** 2
    return mpmath.exp(pi2 / 3 + (1 / (2 * a) - 2 * pi2 * a / 3) * n) / 2


ALPHA0_EXPR = "sqrt(3)/(2 pi)"


def alpha0() -> mpf:
    return mpmath.sqrt(3) / (2 * mpmath.pi)
