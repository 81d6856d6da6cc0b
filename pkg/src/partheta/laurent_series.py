"""Exact integer power series for the zeros xi_k(q).

With w = q^k xi_k the equation theta(q, xi_k) = 0 becomes F(w) = 0 where

    F(w) = sum_j q^((j-k)(j-k+1)/2) w^j,

a series with nonnegative powers of q.  Modulo q it reduces to
w^(k-1) (1 + w), so w = -1 is a simple root whose derivative is
(-1)^(k-1), a unit.  Newton's method therefore lifts it over the integers.
Then w + 1 = (-1)^k q^(k(k+1)/2) (1 + Phi_k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .mpnum import DomainError
from .theta_core import alpha0

Series = list  # list[int], ascending powers of q


class ConsistencyError(ArithmeticError):
    """An exactness invariant of the integer series failed."""


def _mul(a: Series, b: Series, n: int) -> Series:
    out = [0] * n
    for i, ai in enumerate(a[:n]):
        if ai:
            for j, bj in enumerate(b[: n - i]):
                if bj:
                    out[i + j] += ai * bj
    return out


def _inv(a: Series, n: int) -> Series:
    """Inverse of a series whose constant term is +-1."""
    if a[0] not in (1, -1):
        raise ConsistencyError("series inverse needs a unit constant term")
    c0 = a[0]
    out = [0] * n
    out[0] = c0
    for m in range(1, n):
        acc = 0
        for i in range(1, min(m, len(a) - 1) + 1):
            acc += a[i] * out[m - i]
        out[m] = -c0 * acc
    return out


def _pad(a: Series, n: int) -> Series:
    return (list(a) + [0] * n)[:n]


def _tri(m: int) -> int:
    return m * (m + 1) // 2


def _eval_F(w: Series, k: int, n: int) -> tuple[Series, Series]:
    """F(w) and F'(w) modulo q^n."""
    F = [0] * n
    dF = [0] * n
    # exponent e_j = (j-k)(j-k+1)/2 grows quadratically; collect all j with e_j < n
    js = [j for j in range(0, k + 2 * n + 2) if _tri(j - k) < n]
    powers = {0: _pad([1], n)}
    cur = powers[0]
    for j in range(1, max(js) + 1):
        cur = _mul(cur, w, n)
        powers[j] = cur
    for j in js:
        e = _tri(j - k)
        pj = powers[j]
        for i in range(n - e):
            F[i + e] += pj[i]
        if j >= 1:
            pm = powers[j - 1]
            for i in range(n - e):
                dF[i + e] += j * pm[i]
    return F, dF


@dataclass(frozen=True)
class IntLaurent:
    k: int
    phi_coeffs: list
    order: int
    h_coeffs: list
    residual_order: int = 0
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "order": self.order,
            "phi": [str(c) for c in self.phi_coeffs],
            "h": [str(c) for c in self.h_coeffs],
        }

    def xi(self, q) -> mpmath.mpc:
        """Evaluate -q^(-k) + (-1)^k q^(k(k-1)/2) (1 + Phi_k(q)) from the stored terms."""
        q = mpmath.mpmathify(q)
        phi = mpmath.polyval(list(reversed(self.phi_coeffs)), q)
        sign = -1 if self.k % 2 else 1
        return -q ** (-self.k) + sign * q ** (self.k * (self.k - 1) // 2) * (1 + phi)


def compute_phi(k: int, order: int) -> IntLaurent:
    """Integer coefficients of Phi_k through q^(order-1) and of q^k xi_k."""
    if k < 1 or order < 1:
        raise DomainError("need k >= 1 and order >= 1")
    tk = _tri(k)
    n = tk + order
    w = _pad([-1], n)
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        F, dF = _eval_F(_pad(w, prec), k, prec)
        step = _mul(F, _inv(dF, prec), prec)
        w = _pad([a - b for a, b in zip(_pad(w, prec), step)], n)
    F, _ = _eval_F(w, k, n)
    if any(F):
        raise ConsistencyError(f"F(w) does not vanish modulo q^{n}")
    for c in w:
        if not isinstance(c, int):
            raise ConsistencyError("non-integer coefficient")
    wp1 = list(w)
    wp1[0] += 1
    if any(wp1[:tk]):
        raise ConsistencyError("w + 1 has terms below q^(k(k+1)/2)")
    sign = -1 if k % 2 else 1
    one_plus_phi = [sign * c for c in wp1[tk:]]
    if one_plus_phi[0] != 1:
        raise ConsistencyError("leading coefficient of 1 + Phi_k is not 1")
    phi = list(one_plus_phi)
    phi[0] -= 1
    return IntLaurent(k=k, phi_coeffs=phi, order=order, h_coeffs=list(w), residual_order=n)


def substitution_residual(series: IntLaurent, order: int | None = None) -> Series:
    """Coefficients of q^(k(k-1)/2) theta(q, xi_k(q)) up to q^(k(k+1)/2 + order - 1)."""
    n = _tri(series.k) + (series.order if order is None else order)
    F, _ = _eval_F(_pad(series.h_coeffs, n), series.k, n)
    return F


def theta_at_series_residual(series: IntLaurent) -> Series:
    """theta(q, xi_k(q)) as a formal series in q, through q^(order-1).

    q^(k(k-1)/2) theta = F(w); since F(w) vanishes to order k(k+1)/2 + order,
    theta vanishes at least through q^(order-1).
    """
    F = substitution_residual(series)
    shift = series.k * (series.k - 1) // 2
    return F[shift: shift + series.order]


@dataclass(frozen=True)
class CauchyReport:
    k: int
    passed: bool
    margins: list  # bound_j - |h_j|
    bounds: list
    violations: list


def cauchy_bound(k: int, j: int) -> mpf:
    with mpmath.workdps(30):
        return (1 - 1 / (alpha0() * k)) ** (-j - mpf(1) / 2)


def check_cauchy_bounds(series: IntLaurent) -> CauchyReport:
    """Compare |h_{k,j}| with (1 - 1/(alpha0 k))^(-j-1/2)."""
    k = series.k
    if k < 5:
        raise DomainError("the coefficient bound is stated for k >= 5")
    bounds, margins, bad = [], [], []
    for j, h in enumerate(series.h_coeffs):
        b = cauchy_bound(k, j)
        bounds.append(b)
        margins.append(b - abs(h))
        if abs(h) > b:
            bad.append(j)
    return CauchyReport(k=k, passed=not bad, margins=margins, bounds=bounds, violations=bad)


@dataclass(frozen=True)
class StabilizationReport:
    k_range: tuple
    order: int
    onset: list  # onset[j] = smallest k from which phi_j is constant over the range
    monotone: bool
    table: dict


def check_stabilization(k_range, order: int) -> StabilizationReport:
    ks = list(k_range)
    if not ks:
        raise DomainError("empty k range")
    table = {k: compute_phi(k, order).phi_coeffs for k in ks}
    onset = []
    for j in range(order):
        start = ks[-1]
        for k in reversed(ks):
            if table[k][j] == table[ks[-1]][j]:
                start = k
            else:
                break
        onset.append(start)
    monotone = all(a <= b for a, b in zip(onset, onset[1:]))
    return StabilizationReport(k_range=(ks[0], ks[-1]), order=order, onset=onset,
                               monotone=monotone, table=table)


def as_fraction_free(series: IntLaurent) -> bool:
    """True if every stored coefficient is a Python int (never a Fraction or float)."""
    return all(type(c) is int for c in series.phi_coeffs + series.h_coeffs) and not any(
        isinstance(c, Fraction) for c in series.phi_coeffs)
