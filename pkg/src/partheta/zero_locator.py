"""Counting, refining and separating the zeros of theta(q, .).

Winding numbers are computed from float64 samples of a scaled series: on
``|z| = r`` the function is divided by its dominant monomial ``q^T_k z^k`` so
neither overflow nor underflow occurs, and ``k`` is added back to the count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np
from mpmath import mpc, mpf

from . import _kernels
from .mpnum import DEFAULT_PRECISION, DomainError, MPComplex
from .theta_core import alpha0, bound_parts, eval_theta, tau_of, theta_mp

MIN_SAMPLES = 64
START_SAMPLES = 256
MAX_SAMPLES = 2 ** 20
PERTURB_TRIES = 4


class ContourError(RuntimeError):
    """A zero lies on or too close to the integration contour."""


# ---------------------------------------------------------------------------
# circle evaluation
# ---------------------------------------------------------------------------


def dominant_index(qabs: float, radius: float) -> int:
    """Index j maximizing |q|^T_j r^j, i.e. the j with |q|^(-j+1/2) <= r < |q|^(-j-1/2)."""
    if radius <= 0:
        return 0
    return max(0, int(math.floor(-math.log(radius) / math.log(qabs) + 0.5)))


def _upper_index(qabs: float, radius: float, k: int, rel: float = 1e-18) -> int:
    # first j > k beyond which terms relative to the k-th are below rel and decay geometrically
    lq, lr = math.log(qabs), math.log(radius)
    logrel = math.log(rel)
    j = k
    acc = 0.0
    while True:
        j += 1
        acc += (j * lq + lr)
        if acc < logrel and (j + 1) * lq + lr < math.log(0.5):
            return j


class CircleFunction:
    """Scaled evaluator of a function on a circle: f = monomial * g with known winding offset."""

    def __init__(self, evaluate: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]], offset: int):
        self.evaluate = evaluate
        self.offset = offset


def theta_on_circle(q: complex, radius: float, s: int | None = None) -> CircleFunction:
    """theta(q, .) (or the truncation of degree ``s``) scaled by its dominant monomial."""
    qabs = abs(q)
    if not 0 < qabs < 1:
        raise DomainError("need 0 < |q| < 1")
    k = dominant_index(qabs, radius)
    if s is not None:
        k = min(k, s)
        jmax = s
    else:
        jmax = _upper_index(qabs, radius, k)

    def evaluate(z: np.ndarray):
        return _kernels.scaled_sum(q, z, k, jmax)

    return CircleFunction(evaluate, k)


def _winding_once(fn: CircleFunction, radius: float, center: complex, samples: int):
    n = samples
    while n <= MAX_SAMPLES:
        t = np.arange(n) * (2 * np.pi / n)
        z = center + radius * np.exp(1j * t)
        g, dg = fn.evaluate(z)
        ag = np.abs(g)
        scale = np.max(ag)
        if not np.all(np.isfinite(g)) or np.min(ag) <= 1e-12 * scale:
            raise ContourError(f"function nearly vanishes on |z - c| = {radius:g}")
        g1 = np.roll(g, -1)
        dg1 = np.roll(dg, -1)
        h = radius * 2 * np.pi / n
        variation = np.maximum(np.abs(g1 - g), h * np.maximum(np.abs(dg), np.abs(dg1)))
        floor = np.minimum(ag, np.abs(g1))
        if np.all(variation < 0.5 * floor):
            dphi = np.angle(g1 / g)
            total = float(np.sum(dphi)) / (2 * np.pi)
            count = int(round(total))
            if abs(total - count) > 1e-6:
                raise ContourError("argument increment is not an integer multiple of 2 pi")
            return count, n, float(np.min(ag) / scale)
        n *= 2
    raise ContourError("sample cap reached without resolving the argument")


def winding_count(q, radius, f: Callable | CircleFunction | None = None, samples: int = START_SAMPLES,
                  center: complex = 0j, s: int | None = None) -> int:
    """Number of zeros of ``f`` inside ``|z - center| = radius`` by the argument principle.

    ``f`` defaults to theta(q, .) (or its degree-``s`` truncation).  A plain
    callable must map a complex array to ``(f, f')``.
    """
    if samples < MIN_SAMPLES:
        raise DomainError(f"samples must be >= {MIN_SAMPLES}")
    r = float(radius)
    if r <= 0:
        raise DomainError("radius must be positive")
    if f is None:
        fn = theta_on_circle(complex(q), r, s) if center == 0 else CircleFunction(
            _unscaled_theta(complex(q), s), 0)
    elif isinstance(f, CircleFunction):
        fn = f
    else:
        fn = CircleFunction(f, 0)
    count, _, _ = _winding_once(fn, r, complex(center), samples)
    return count + fn.offset


def _unscaled_theta(q: complex, s: int | None):
    def evaluate(z):
        jmax = s if s is not None else _upper_index(abs(q), float(np.max(np.abs(z))), 0)
        g, dg = _kernels.scaled_sum(q, z, 0, jmax)
        return g, dg

    return evaluate


def winding_count_perturbed(q, radius, s: int | None = None) -> tuple[int, float]:
    """Winding of theta on |z| = radius, nudging the radius by |q|^(+-1/8) on contour trouble."""
    qabs = abs(complex(q))
    r0 = float(radius)
    e8, e16 = qabs ** 0.125, qabs ** 0.0625
    factors = [1.0, e8, 1 / e8, e16, 1 / e16][: PERTURB_TRIES + 1]
    last: Exception | None = None
    for fac in factors:
        try:
            return winding_count(q, r0 * fac, s=s), r0 * fac
        except ContourError as exc:
            last = exc
    raise ContourError(f"winding failed near radius {r0:g} after perturbation: {last}")


def circle_radius(qabs: float, k: int) -> float:
    """Radius of the circle C_k, |q|^(-k-1/2)."""
    return float(qabs) ** (-k - 0.5)


# ---------------------------------------------------------------------------
# zero refinement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroRecord:
    k: int | str
    value: MPComplex
    residual: float
    newton_steps: int
    separated: bool
    annulus_count: int | None = None
    multiple: bool = False

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "value": self.value.to_json(),
            "residual": mpmath.nstr(self.residual, 6),
            "newton_steps": self.newton_steps,
            "separated": self.separated,
            "annulus_count": self.annulus_count,
            "multiple": self.multiple,
        }


def _newton(q: mpc, z: mpc, dps: int, maxit: int = 80) -> tuple[mpc, int, bool]:
    with mpmath.workdps(dps + 10):
        eps = mpf(10) ** (-dps)
        for it in range(1, maxit + 1):
            f, fz = theta_mp(q, z, 1)
            if fz == 0:
                return z, it, False
            step = f / fz
            z = z - step
            if abs(step) <= eps * abs(z):
                return z, it, True
            if abs(z) > 1e300:
                return z, it, False
    return z, maxit, False


def _in_annulus(qabs: mpf, z: mpc, k: int) -> bool:
    return qabs ** (-k + mpf(1) / 2) < abs(z) < qabs ** (-k - mpf(1) / 2)


def annulus_count(q, k: int) -> int:
    """Zeros of theta(q, .) with |q|^(-k+1/2) < |z| < |q|^(-k-1/2)."""
    qabs = abs(complex(q))
    outer, _ = winding_count_perturbed(q, circle_radius(qabs, k))
    inner, _ = winding_count_perturbed(q, circle_radius(qabs, k - 1)) if k >= 1 else (0, 0.0)
    return outer - inner


def annulus_centroid(q, k: int, samples: int = 4096) -> complex:
    """Mean of the zeros in the k-th annulus from the contour moments of theta'/theta."""
    qc = complex(q)
    qabs = abs(qc)
    total = 0j
    count = 0.0
    for sign, kk in ((1, k), (-1, k - 1)):
        r = circle_radius(qabs, kk)
        fn = theta_on_circle(qc, r)
        t = np.arange(samples) * (2 * np.pi / samples)
        z = r * np.exp(1j * t)
        g, dg = fn.evaluate(z)
        logd = fn.offset / z + dg / g  # f'/f
        # (1/2 pi i) \oint z^m f'/f dz with dz = i z dt
        total += sign * np.mean(z * z * logd)
        count += sign * np.mean(z * logd).real
    n = int(round(count))
    if n <= 0:
        raise DomainError("annulus contains no zeros")
    return total / n


def find_xi(q, k: int, tol=mpf("1e-25"), precision: int | None = None) -> ZeroRecord:
    """The zero xi_k of theta(q, .), seeded at -q^(-k) and polished by Newton's method."""
    if k < 1:
        raise DomainError("k must be >= 1")
    qm = MPComplex.coerce(q, precision)
    p = qm.precision if precision is None else precision
    qv = qm.value
    qabs = abs(qv)
    if not 0 < qabs < 1:
        raise DomainError("need 0 < |q| < 1")
    cert = certify_strong_separation(qm, max(k, 1), k_max=k)
    separated = cert.verified and k >= cert.k_start
    count = None
    if not separated:
        count = annulus_count(complex(qv), k)
    seed = -qv ** (-k)
    z, steps, ok = _newton(qv, seed, p)
    if not (ok and _in_annulus(qabs, z, k)):
        if count is None:
            count = annulus_count(complex(qv), k)
        if count == 1:
            # retry from seeds spread over the middle circle of the annulus
            for a in range(16):
                s2 = qabs ** (-k) * mpmath.expjpi(mpf(a) / 8)
                z, steps, ok = _newton(qv, s2, p)
                if ok and _in_annulus(qabs, z, k):
                    break
    multiple = count is not None and count != 1
    if multiple and count and count > 0:
        # a cluster: report its centroid, Newton is ill-conditioned there
        z = mpc(annulus_centroid(complex(qv), k))
        steps = 0
    with mpmath.workdps(p):
        zm = MPComplex(z, p)
        val, tail = eval_theta(MPComplex(qv, p), zm, max(mpf(tol), mpf(10) ** (-p)))
        residual = abs(val.value) + tail
    ann_ok = _in_annulus(qabs, z, k)
    if count is None:
        count = 1 if ann_ok else None
    return ZeroRecord(
        k=k, value=zm, residual=float(residual), newton_steps=steps,
        separated=bool(separated and ann_ok), annulus_count=count, multiple=multiple,
    )


def zero_census(q, k_max: int) -> list[ZeroRecord]:
    """find_xi for k = 1..k_max."""
    return [find_xi(q, k) for k in range(1, k_max + 1)]


# ---------------------------------------------------------------------------
# separation certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationCertificate:
    q: MPComplex
    k_start: int
    method: str  # "dominance", "small_q" or "winding"
    margin: float
    circles_checked: tuple[int, int]
    verified: bool = True
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "q": self.q.to_json(),
            "k_start": self.k_start,
            "method": self.method,
            "margin": repr(float(self.margin)),
            "circles_checked": list(self.circles_checked),
            "verified": self.verified,
            "detail": {k: str(v) for k, v in self.detail.items()},
        }


def part4_constants() -> dict:
    """Certified |Theta*| minoration and |G| majoration for |q| <= 1/2, |z| >= 2^(7/2)."""
    d0 = mpf(2) ** (mpf(7) / 2)
    b = bound_parts(mpf(1) / 2, 3, 1, d0)
    return {"d0": d0, "theta_star_min": b.theta_star_min, "G_max": b.G_sum,
            "r0": b.R_prod, "p0": b.P_prod, "q0": b.Q_prod, "u0": b.U_prod}


def certify_strong_separation(q, n: int, k_max: int | None = None) -> SeparationCertificate:
    """First applicable route among dominance, the small-|q| bounds and explicit winding."""
    if n < 1:
        raise DomainError("n must be >= 1")
    qm = MPComplex.coerce(q)
    qabs = abs(qm.value)
    if not 0 < qabs < 1:
        raise DomainError("need 0 < |q| < 1")
    with mpmath.workdps(30):
        tau = tau_of(qabs)
        if tau <= 1:
            return SeparationCertificate(qm, 1, "dominance", float(1 - tau), (1, 1 << 30),
                                         detail={"tau": tau})
        a0 = alpha0()
        if n >= 5 and qabs <= 1 - 1 / (a0 * n):
            margin = mpmath.e ** (mpmath.pi ** 2 / 3) / 2 - 1
            return SeparationCertificate(qm, n, "small_q", float(margin), (n, 1 << 30),
                                         detail={"route": "part1", "alpha0": a0})
        if qabs <= mpf(1) / 2:
            c = part4_constants()
            margin = c["theta_star_min"] - c["G_max"]
            return SeparationCertificate(qm, 4, "small_q", float(margin), (4, 1 << 30),
                                         detail={"route": "part4", **c})
    # explicit winding on consecutive circles
    top = k_max if k_max is not None else n + 10
    qc = complex(qm.value)
    prev, _ = winding_count_perturbed(qc, circle_radius(qabs, n - 1))
    good_from = None
    margin = 1.0
    for k in range(n, top + 1):
        cur, _ = winding_count_perturbed(qc, circle_radius(qabs, k))
        if cur - prev == 1:
            if good_from is None:
                good_from = k
        else:
            good_from = None
        prev = cur
    verified = good_from is not None
    return SeparationCertificate(qm, good_from if verified else top + 1, "winding",
                                 margin if verified else 0.0, (n, top), verified=verified)


def modulus_horizon(n_max: int = 200) -> tuple[mpf, int]:
    """max over n >= 5 of (1 - 1/(alpha0 (n-1)))^(-n-1/2) and the maximizing n."""
    with mpmath.workdps(30):
        a0 = alpha0()
        vals = [(1 - 1 / (a0 * (n - 1))) ** (-n - mpf(1) / 2) for n in range(5, n_max + 1)]
        best = max(range(len(vals)), key=lambda i: vals[i])
        return +vals[best], best + 5


def horizon_profile(n_lo: int = 5, n_hi: int = 20) -> list[mpf]:
    with mpmath.workdps(30):
        a0 = alpha0()
        return [(1 - 1 / (a0 * (n - 1))) ** (-n - mpf(1) / 2) for n in range(n_lo, n_hi + 1)]


def eighth_root_zero(precision: int = DEFAULT_PRECISION) -> tuple[MPComplex, mpf]:
    """Least-modulus root of sum_{j=0}^{7} w^(j(j+1)/2) z^j with w = exp(3 i pi / 4)."""
    with mpmath.workdps(precision + 10):
        w = mpmath.expjpi(mpf(3) / 4)
        coeffs = [w ** (j * (j + 1) // 2) for j in range(8)]
        roots = mpmath.polyroots(coeffs[::-1], maxsteps=200, extraprec=2 * precision)
        roots = sorted(roots, key=abs)
        z0 = roots[0]
        gap = min(abs(z0 - r) for r in roots[1:])
        if gap <= mpf("1e-6"):
            raise DomainError("least-modulus root is not simple")
        return MPComplex(z0, precision), +abs(z0)


def eighth_root_polynomial_roots(precision: int = DEFAULT_PRECISION) -> tuple[list[mpc], list[mpc]]:
    """(coefficients low-to-high, roots) of the degree-7 numerator."""
    with mpmath.workdps(precision + 10):
        w = mpmath.expjpi(mpf(3) / 4)
        coeffs = [w ** (j * (j + 1) // 2) for j in range(8)]
        roots = mpmath.polyroots(coeffs[::-1], maxsteps=200, extraprec=2 * precision)
        return coeffs, list(roots)
