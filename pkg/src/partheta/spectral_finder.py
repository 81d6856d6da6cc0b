"""Spectral values of the partial theta function.

A spectral value is a q for which theta(q, .) has a multiple zero.  Three
routes are provided:

* ``resultant_scan``: the resultant of the truncation theta_(s) and its
  z-derivative is analytic in q; its zeros are localized by winding numbers
  on the boundaries of a grid of cells and then refined on theta_(s).
* ``real_spectrum_table``: marching along real q, tracking real critical
  points of theta(q, .) and detecting when the critical value changes sign
  (two real zeros collide).
* ``refine_double_zero``: two-variable Newton on (theta, theta_z) = 0.

The resultant is evaluated in its root-product form

    D(q) = prod_k (-1)^(k-1) q^((k^2-3k)/2) f'(xi_k),

which equals Res(f, f') / q^(s T_s - T_s) up to the fixed power of q
removed by the normalization, is analytic at q = 0 with D(0) = 1, and is far
better conditioned in float64 than a Sylvester determinant.  Because
theta_(s)(q, z) = q^T_s z^s theta_(s)(q, q^(-s-1)/z), every double root of
the truncation comes with a mirror double root, so each spectral candidate
is a double zero of D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from mpmath import mpc, mpf
from scipy.optimize import brentq

from . import _kernels
from .mpnum import DEFAULT_PRECISION, ComplexBox, DomainError, MPComplex, PrecisionError
from .theta_core import eval_jet, truncation_coefficients


class DegenerateError(ArithmeticError):
    """The Newton system for a double zero is singular."""


class PathError(RuntimeError):
    """A continuation left its admissible region."""


# ---------------------------------------------------------------------------
# multi-derivative evaluation in mpmath
# ---------------------------------------------------------------------------


def peak_digits(q, z) -> int:
    """log10 of the largest term |q|^T_j |z|^j, at least 0."""
    aq, az = float(abs(q)), float(abs(z))
    if az == 0 or aq == 0:
        return 0
    lq, lz = math.log(aq), math.log(az)
    j = max(0.0, -lz / lq - 0.5)
    best = 0.0
    for jj in (math.floor(j), math.ceil(j)):
        best = max(best, (jj * (jj + 1) / 2) * lq + jj * lz)
    return max(0, int(math.ceil(best / math.log(10))))


def theta_partials(q: mpc, z: mpc, s: int | None = None):
    """(theta, theta_z, theta_zz, theta_q, theta_qz) at the ambient precision.

    With ``s`` given the degree-s truncation is used instead of the series.
    """
    absq, absz = abs(q), abs(z)
    eps = mpf(2) ** (-mpmath.mp.prec - 8)
    f = fz = fzz = fq = fqz = mpc(0)
    # term_j = q^T_j z^j ; track t_j and the pieces of the derivatives
    t = mpc(1)
    j = 0
    peak = mpf(1)
    f = mpc(1)
    while True:
        t = t * q ** (j + 1) * z
        j += 1
        T = j * (j + 1) // 2
        f += t
        fz += j * t
        fzz += j * (j - 1) * t
        fq += T * t
        fqz += T * j * t
        at = abs(t) * j ** 3
        if at > peak:
            peak = at
        if s is not None:
            if j >= s:
                break
        elif absq ** (j + 1) * absz < mpf(1) / 2 and at < eps * peak:
            break
        if j > 100_000:
            raise PrecisionError("series failed to converge")
    return f, fz / z, fzz / (z * z), fq / q, fqz / (q * z)


# ---------------------------------------------------------------------------
# spectral points and two-variable Newton
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralPoint:
    q: MPComplex
    z_double: MPComplex
    kind: str  # real_positive, real_negative, complex_pair
    residual_theta: float
    residual_theta_z: float
    truncation_s: int | None
    refined_with_full_series: bool
    theta_zz_abs: float = 0.0
    newton_steps: int = 0
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "q": self.q.to_json(),
            "z": self.z_double.to_json(),
            "kind": self.kind,
            "residual_theta": mpmath.nstr(self.residual_theta, 6),
            "residual_theta_z": mpmath.nstr(self.residual_theta_z, 6),
            "truncation_s": self.truncation_s,
            "refined_with_full_series": self.refined_with_full_series,
            "theta_zz_abs": mpmath.nstr(self.theta_zz_abs, 10),
            "newton_steps": self.newton_steps,
            "provenance": {k: str(v) for k, v in self.provenance.items()},
        }


def _classify(q: mpc, p: int) -> str:
    if abs(q.imag) <= mpf(10) ** (-p // 2) * max(abs(q), 1):
        return "real_positive" if q.real > 0 else "real_negative"
    return "complex_pair"


def truncation_order_for(q, z, target=mpf("1e-15")) -> int:
    """Smallest s whose first dropped term |q|^T_(s+1) |z|^(s+1) is below ``target`` and decreasing."""
    aq, az = float(abs(q)), float(abs(z))
    lt = math.log(float(target))
    s = 0
    while True:
        j = s + 1
        if (j * (j + 1) / 2) * math.log(aq) + j * math.log(az) < lt and aq ** (j + 1) * az < 0.5:
            return s
        s += 1


def refine_double_zero(q0, z0, use_full_series: bool = True, s: int | None = None,
                       precision: int | None = None, maxit: int = 80) -> SpectralPoint:
    """Newton on (q, z) -> (theta, theta_z) with Jacobian [[theta_q, theta_z], [theta_qz, theta_zz]]."""
    qm, zm = MPComplex.coerce(q0, precision), MPComplex.coerce(z0, precision)
    p = precision or max(qm.precision, zm.precision)
    if not use_full_series and s is None:
        raise DomainError("a truncation order is required when use_full_series is False")
    trunc = None if use_full_series else s
    q, z = qm.value, zm.value
    if not 0 < abs(q) < 1:
        raise DomainError("need 0 < |q| < 1")
    extra = peak_digits(q, z) + 10
    errs = []
    with mpmath.workdps(p + extra):
        tiny = mpf(10) ** (-(p + 5))
        for it in range(1, maxit + 1):
            f, fz, fzz, fq, fqz = theta_partials(q, z, trunc)
            det = fq * fzz - fz * fqz
            if abs(det) < mpf("1e-30"):
                raise DegenerateError("singular Jacobian in the double-zero system")
            dq = (-f * fzz + fz * fz) / det
            dz = (-fq * fz + fqz * f) / det
            q += dq
            z += dz
            err = abs(dq) + abs(dz)
            errs.append(err)
            if err <= tiny * (1 + abs(z)):
                break
            if not abs(q) < 1:
                raise DomainError("Newton iterate left the unit disk")
        else:
            raise PrecisionError("double-zero Newton did not converge")
        f, fz, fzz, fq, fqz = theta_partials(q, z, trunc)
        # quadratic convergence: late errors shrink at least by half per step
        late = [b / a for a, b in zip(errs[-4:-1], errs[-3:]) if a > 0]
        if late and any(r > 0.5 for r in late if errs[-1] > tiny * 100):
            raise PrecisionError("Newton convergence was not quadratic")
    if q.imag != 0 and _classify(q, p) != "complex_pair":
        # a real spectral value reached from a complex seed: polish on the real axis
        return refine_double_zero(mpc(q.real), mpc(z.real), use_full_series, s, p, maxit)
    qv = MPComplex(q, p)
    zv = MPComplex(z, p)
    if use_full_series:
        # certified residuals from the jet with a precision covering the cancellation
        hp = p + extra
        jet = eval_jet(MPComplex(q, hp), MPComplex(z, hp), tol=mpf(10) ** (-(p - 5)))
        r0 = abs(jet.value.value) + jet.tail_radius["value"]
        r1 = abs(jet.dz.value) + jet.tail_radius["dz"]
        tzz = abs(jet.dzz.value)
    else:
        r0, r1, tzz = abs(f), abs(fz), abs(fzz)
    s_used = s if not use_full_series else truncation_order_for(q, z)
    return SpectralPoint(
        q=qv, z_double=zv, kind=_classify(q, p),
        residual_theta=float(r0), residual_theta_z=float(r1),
        truncation_s=s_used, refined_with_full_series=use_full_series,
        theta_zz_abs=float(tzz), newton_steps=len(errs),
        provenance={"seed_q": complex(qm.value), "seed_z": complex(zm.value)},
    )


# ---------------------------------------------------------------------------
# resultant of the truncation
# ---------------------------------------------------------------------------


def normalization_exponent(s: int) -> int:
    return sum((k * k - 3 * k) // 2 for k in range(1, s + 1))


def sylvester_resultant(q, s: int, precision: int = 60) -> mpc:
    """Res_z(theta_(s), d theta_(s)/dz) as a Sylvester determinant in mpmath."""
    with mpmath.workdps(precision):
        qv = MPComplex.coerce(q, precision).value
        a = truncation_coefficients(qv, s)[::-1]  # leading first
        b = [(s - i) * c for i, c in enumerate(a[:-1])]
        n = 2 * s - 1
        M = mpmath.zeros(n, n)
        for r in range(s - 1):
            for c, v in enumerate(a):
                M[r, r + c] = v
        for r in range(s):
            for c, v in enumerate(b):
                M[s - 1 + r, r + c] = v
        return mpmath.det(M)


def normalized_resultant_mp(q, s: int, precision: int = 60) -> mpc:
    """The root-product normalization of the Sylvester resultant, computed in mpmath.

    Res(f, f') = a_s^(s-1) prod f'(xi_k) with a_s = q^T_s, so
    D = Res * prod_k (-1)^(k-1) q^((k^2-3k)/2) / q^(T_s (s-1)).
    """
    with mpmath.workdps(precision):
        qv = MPComplex.coerce(q, precision).value
        res = sylvester_resultant(qv, s, precision)
        ts = s * (s + 1) // 2
        sign = (-1) ** (sum(k - 1 for k in range(1, s + 1)) % 2)
        return res * sign * qv ** normalization_exponent(s) / qv ** (ts * (s - 1))


def truncation_double_root(q_seed, s: int, precision: int | None = None) -> SpectralPoint:
    """Refine a double root of theta_(s) from a q seed, picking the closest pair of roots.

    The pair of smallest modulus is used; the mirror pair gives the same q.
    """
    qc = complex(MPComplex.coerce(q_seed).value)
    roots = _kernels.truncation_roots(qc, s)
    roots = roots[np.argsort(np.abs(roots))]
    best = None
    # only the lower half of the roots: the upper half mirrors it
    half = max(2, (s + 2) // 2)
    for i in range(half):
        for j in range(i + 1, min(i + 3, s)):
            d = abs(roots[i] - roots[j]) / max(abs(roots[i]), 1.0)
            if best is None or d < best[0]:
                best = (d, (roots[i] + roots[j]) / 2)
    z_seed = best[1]
    return refine_double_zero(qc, z_seed, use_full_series=False, s=s, precision=precision)


@dataclass(frozen=True)
class ScanCandidate:
    q: MPComplex  # refined on theta_(s)
    z: MPComplex
    cell: tuple  # (u0, u1, v0, v1) in the scan parametrization
    winding: int
    point: SpectralPoint | None = None

    def to_json(self) -> dict:
        return {"q": self.q.to_json(), "z": self.z.to_json(), "winding": self.winding,
                "cell": [repr(float(c)) for c in self.cell]}


@dataclass
class ScanResult:
    s: int
    candidates: list
    cells: int
    inner_winding: int | None
    total_winding: int
    warnings: list


class _Param:
    """Map from the (u, v) scan rectangle to the q-plane."""

    def __init__(self, kind: str, lo_u: float, hi_u: float, lo_v: float, hi_v: float):
        self.kind, self.u0, self.u1, self.v0, self.v1 = kind, lo_u, hi_u, lo_v, hi_v

    def __call__(self, u, v):
        if self.kind == "polar":
            return u * np.exp(1j * v)
        return u + 1j * v


def _segment_phase(L: np.ndarray) -> np.ndarray:
    d = np.diff(L)
    return d.real + 1j * (np.angle(np.exp(1j * d.imag)))


def _edge_increment(param: _Param, s: int, a: tuple, b: tuple, n0: int = 8, max_n: int = 4096):
    """Change of log D along the straight (u, v) segment from a to b, and its q-moment."""
    n = n0
    while True:
        t = np.linspace(0.0, 1.0, n + 1)
        u = a[0] + (b[0] - a[0]) * t
        v = a[1] + (b[1] - a[1]) * t
        qs = param(u, v)
        L = _kernels.logdisc(qs, s)
        if not np.all(np.isfinite(L)):
            raise PrecisionError("normalized resultant overflowed on a scan edge")
        dL = _segment_phase(L)
        if np.max(np.abs(dL.imag)) < 0.6 and np.max(np.abs(dL.real)) < 2.0:
            mid = 0.5 * (qs[1:] + qs[:-1])
            return complex(np.sum(dL)), complex(np.sum(mid * dL))
        n *= 2
        if n > max_n:
            raise PrecisionError("scan edge could not be resolved; a zero lies too close to it")


def _cell_integrals(param, s, u0, u1, v0, v1, cache):
    def edge(a, b):
        key = (a, b)
        if key in cache:
            return cache[key]
        rkey = (b, a)
        if rkey in cache:
            dl, mom = cache[rkey]
            return -dl, -mom
        val = _edge_increment(param, s, a, b)
        cache[key] = val
        return val

    total, moment = 0j, 0j
    corners = [(u0, v0), (u1, v0), (u1, v1), (u0, v1), (u0, v0)]
    for a, b in zip(corners[:-1], corners[1:]):
        dl, mom = edge(a, b)
        total += dl
        moment += mom
    if param.kind == "polar":
        # (u, v) -> u e^{iv} preserves orientation for u > 0
        pass
    wind = total.imag / (2 * np.pi)
    return wind, moment


_SHIFT = 0.0173


def resultant_scan(s: int, region=("disk", 0.5), grid: int = 48, r_min: float | None = None,
                   max_depth: int = 5, precision: int | None = None) -> ScanResult:
    """Locate the q where theta_(s) has a double root, inside ``region``.

    ``region`` is ``("disk", R)``, ``("annulus", r_in, r_out)`` or a
    :class:`ComplexBox`.  Cells with nonzero winding are subdivided until each
    holds one candidate (winding 2), which is then refined on theta_(s).
    """
    if not 5 <= s <= 40:
        raise DomainError("truncation order must satisfy 5 <= s <= 40")
    warnings = []
    if isinstance(region, ComplexBox):
        param = _Param("rect", float(region.re_lo), float(region.re_hi), float(region.im_lo), float(region.im_hi))
        nu = max(2, grid // 4)
        nv = max(2, grid // 4)
        if param.v1 - param.v0 == 0:
            raise DomainError("box region needs a nonzero imaginary width")
        inner_winding = None
    else:
        kind = region[0]
        if kind == "disk":
            R = float(region[1])
            r_in = float(r_min) if r_min is not None else 0.1 * R
        elif kind == "annulus":
            r_in, R = float(region[1]), float(region[2])
        else:
            raise DomainError(f"unknown region {region!r}")
        if not 0 < r_in < R < 1:
            raise DomainError("need 0 < r_in < R < 1")
        param = _Param("polar", r_in, R, 0.0, 2 * np.pi)
        nu = max(2, grid // 8)
        nv = max(4, grid)
        inner_winding = None
    cache: dict = {}
    us = np.linspace(param.u0, param.u1, nu + 1)
    vs = np.linspace(param.v0, param.v1, nv + 1)
    # real spectral values sit on the symmetry axis: keep grid lines off it
    us[1:-1] += _SHIFT * (us[1] - us[0])
    if param.kind == "polar":
        vs += _SHIFT * (vs[1] - vs[0])
    else:
        vs[1:-1] += _SHIFT * (vs[1] - vs[0])
    if param.kind == "polar":
        # winding on the inner circle: the disk |q| < r_in
        tot = 0j
        for j in range(nv):
            dl, _ = _edge_increment(param, s, (us[0], vs[j]), (us[0], vs[j + 1]))
            tot += dl
        inner_winding = int(round(tot.imag / (2 * np.pi)))
        if region[0] == "disk" and inner_winding != 0:
            warnings.append(f"inner disk |q| < {r_in:g} has winding {inner_winding}")
    found = []
    total_w = 0
    n_cells = 0

    def visit(u0, u1, v0, v1, depth):
        nonlocal total_w, n_cells
        n_cells += 1
        w, mom = _cell_integrals(param, s, u0, u1, v0, v1, cache)
        wi = int(round(w))
        if abs(w - wi) > 1e-6:
            raise PrecisionError("non-integer winding on a scan cell")
        if wi == 0:
            return
        if wi == 2 or depth >= max_depth:
            if wi % 2:
                warnings.append(f"odd winding {wi} in cell {(u0, u1, v0, v1)}")
            if wi < 0:
                warnings.append(f"negative winding {wi} (pole?) in cell {(u0, u1, v0, v1)}")
                return
            total_w += wi
            seed = mom / (2j * np.pi * wi)
            found.append(((u0, u1, v0, v1), wi, seed))
            return
        um = u0 + (0.5 + _SHIFT) * (u1 - u0)
        vm = v0 + (0.5 + _SHIFT) * (v1 - v0)
        for a, b in ((u0, um), (um, u1)):
            for c, d in ((v0, vm), (vm, v1)):
                visit(a, b, c, d, depth + 1)

    for i in range(nu):
        for j in range(nv):
            visit(us[i], us[i + 1], vs[j], vs[j + 1], 0)

    candidates = []
    for cell, wi, seed in found:
        try:
            pt = truncation_double_root(seed, s, precision)
        except (DegenerateError, PrecisionError, DomainError) as exc:
            warnings.append(f"refinement failed from {seed}: {exc}")
            continue
        candidates.append(ScanCandidate(q=pt.q, z=pt.z_double, cell=cell, winding=wi, point=pt))
    candidates = _dedupe(candidates, key=lambda c: complex(c.q.value))
    candidates.sort(key=lambda c: (round(float(abs(c.q.value)), 12), float(mpmath.arg(c.q.value))))
    return ScanResult(s=s, candidates=candidates, cells=n_cells, inner_winding=inner_winding,
                      total_winding=total_w, warnings=warnings)


def _dedupe(items, key, tol: float = 1e-8):
    out = []
    for it in items:
        k = key(it)
        if all(abs(k - key(o)) >= tol for o in out):
            out.append(it)
    return out


def spectral_order_key(q: mpc):
    return (round(float(abs(q)), 12), float(mpmath.arg(q)))


def disk_spectrum(radius: float = 0.5, s: int = 18, refine_full: bool = True, grid: int = 48,
                  precision: int | None = None) -> tuple[list, ScanResult]:
    """Spectral values with |q| <= radius found by a resultant scan of theta_(s)."""
    scan = resultant_scan(s, ("disk", radius), grid=grid, precision=precision)
    points = []
    for c in scan.candidates:
        if refine_full:
            pt = refine_double_zero(c.q, c.z, use_full_series=True, precision=precision)
            pt = SpectralPoint(**{**pt.__dict__, "truncation_s": s,
                                  "provenance": {**pt.provenance, "scan_s": s}})
        else:
            pt = c.point
        if abs(pt.q.value) <= radius:
            points.append(pt)
    points = _dedupe(points, key=lambda p: complex(p.q.value))
    points.sort(key=lambda p: spectral_order_key(p.q.value))
    return points, scan


# ---------------------------------------------------------------------------
# real spectral tables
# ---------------------------------------------------------------------------


def _product_orders(q: float, xmax: float) -> tuple[int, int]:
    aq = abs(q)
    mmax = int(math.ceil(math.log(1e-18 / (xmax + 1)) / math.log(aq))) + 2
    g = 1
    while (g * (g - 1) / 2) * math.log(aq) - g * math.log(1.01) > math.log(1e-18):
        g += 1
    return max(mmax, 4), g + 2


class _RealTheta:
    """theta and theta_x on the real axis via the triple product, float64."""

    def __init__(self, q: float, xmax: float):
        self.q = q
        self.mmax, self.gmax = _product_orders(q, xmax)

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        th, dth = _kernels.triple(self.q, x.astype(np.complex128), self.mmax, self.gmax)
        return th.real, dth.real


def _critical_points(q: float, grid: np.ndarray, xmax: float):
    f = _RealTheta(q, xmax)
    _, d = f(grid)
    out = []
    sgn = np.sign(d)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    for i in idx:
        a, b = grid[i], grid[i + 1]
        if a * b <= 0:
            continue
        x = brentq(lambda t: f(t)[1][0], a, b, xtol=1e-15 * abs(a), rtol=1e-15, maxiter=200)
        conv = 1.0 if d[i + 1] > d[i] else -1.0  # sign of theta_xx
        th = f(x)[0][0]
        out.append((x, -conv * th, conv))
    return out


def _critical_near(q: float, x0: float, conv: float, xmax: float, width: float = 0.03):
    f = _RealTheta(q, xmax)
    for w in (width, 2 * width, 4 * width):
        a, b = x0 * (1 - w), x0 * (1 + w)
        lo, hi = min(a, b), max(a, b)
        ts = np.linspace(lo, hi, 65)
        _, d = f(ts)
        cand = []
        for i in range(64):
            if d[i] == 0 or d[i] * d[i + 1] < 0:
                c = 1.0 if d[i + 1] > d[i] else -1.0
                if c == conv:
                    cand.append((ts[i], ts[i + 1]))
        if cand:
            a, b = min(cand, key=lambda ab: abs(0.5 * (ab[0] + ab[1]) - x0))
            x = brentq(lambda t: f(t)[1][0], a, b, xtol=1e-15 * abs(a), rtol=1e-15, maxiter=200)
            return x, -conv * f(x)[0][0]
    raise PathError("lost track of a real critical point")


def _real_grid(xmin: float, xmax: float, ratio: float = 1.002) -> np.ndarray:
    n = int(math.ceil(math.log(xmax / xmin) / math.log(ratio))) + 1
    pos = xmin * ratio ** np.arange(n)
    return np.concatenate([-pos[::-1], pos])


def real_collisions(sign: str, count: int, q_start: float | None = None, q_stop: float | None = None,
                    xmax: float = 60.0, steps_per_unit: int = 400):
    """March real q toward +1 or -1 and bracket every sign change of a real critical value.

    Returns a list of (q, x) float pairs, in the order met.
    """
    if sign not in ("positive", "negative"):
        raise DomainError("sign must be 'positive' or 'negative'")
    direction = 1.0 if sign == "positive" else -1.0
    q = direction * (q_start if q_start is not None else 0.2)
    stop = direction * (q_stop if q_stop is not None else 0.97)
    grid = _real_grid(1.01, xmax)
    prev = _critical_points(q, grid, xmax)
    events = []
    while len(events) < count and abs(q) < abs(stop):
        h = (1 - abs(q)) / steps_per_unit
        qn = q + direction * h
        cur = _critical_points(qn, grid, xmax)
        used = set()
        for (x0, d0, c0) in prev:
            best, bi = None, -1
            for i, (x1, d1, c1) in enumerate(cur):
                if c1 != c0 or i in used or x1 * x0 <= 0:
                    continue
                rel = abs(x1 - x0) / abs(x0)
                if rel < 0.015 and (best is None or rel < best):
                    best, bi = rel, i
            if bi < 0:
                continue
            used.add(bi)
            x1, d1, _ = cur[bi]
            if (d0 > 0) != (d1 > 0):
                events.append(_bracket_collision(q, qn, x0, c0, xmax, d0 > 0))
        prev = cur
        q = qn
    events.sort(key=lambda e: abs(e[0]))
    return events[:count]


def _bracket_collision(qa: float, qb: float, xa: float, conv: float, xmax: float, merging: bool):
    state = {"x": xa}

    def depth(qq):
        x, d = _critical_near(qq, state["x"], conv, xmax)
        state["x"] = x
        return d

    da = depth(qa)
    db = depth(qb)
    if da * db > 0:
        # the sign change sits at the step end points only up to rounding
        return (qb if abs(db) < abs(da) else qa, state["x"], merging)
    qc = brentq(depth, qa, qb, xtol=1e-15, rtol=1e-15, maxiter=200)
    x, _ = _critical_near(qc, state["x"], conv, xmax)
    return (qc, x, merging)


def real_spectrum_table(count: int, sign: str = "positive", refine: bool = True,
                        precision: int | None = None) -> list[SpectralPoint]:
    """The first ``count`` real spectral values of the given sign, ordered by modulus."""
    if count < 1:
        raise DomainError("count must be positive")
    events = real_collisions(sign, count)
    out = []
    for qf, xf, merging in events:
        if refine:
            pt = refine_double_zero(mpc(qf), mpc(xf), use_full_series=True, precision=precision)
        else:
            pt = SpectralPoint(q=MPComplex(mpc(qf)), z_double=MPComplex(mpc(xf)),
                               kind="real_positive" if qf > 0 else "real_negative",
                               residual_theta=float("nan"), residual_theta_z=float("nan"),
                               truncation_s=truncation_order_for(qf, xf),
                               refined_with_full_series=False)
        prov = {**pt.provenance, "collision": "merge" if merging else "split",
                "validated": (sign == "positive" and len(out) < 25) or (sign == "negative" and len(out) < 8)}
        out.append(SpectralPoint(**{**pt.__dict__, "provenance": prov}))
    return out


# ---------------------------------------------------------------------------
# the critical-point branch eta(q) and the flow to a spectral value
# ---------------------------------------------------------------------------

Z_A = ("-5.963923719619588", "6.104775174235743")
Q_A = ("0.4353184958244864", "0.1230440085519491")


@dataclass
class EtaPath:
    samples: list  # (q, eta) MPComplex pairs
    derivative_bound: float
    sampled_max: float
    residuals: list
    in_V: bool


def eta_derivative_bound() -> mpf:
    """(0.84^2+2.33^2)^(1/2) / (2 q*^3 (0.03^2+0.15^2)^(1/2)) with q* the least modulus on U."""
    with mpmath.workdps(30):
        qs = mpmath.sqrt(mpf("0.4353184956") ** 2 + mpf("0.1230440084") ** 2)
        return mpmath.sqrt(mpf("0.84") ** 2 + mpf("2.33") ** 2) / (
            2 * qs ** 3 * mpmath.sqrt(mpf("0.03") ** 2 + mpf("0.15") ** 2))


def _V_box() -> ComplexBox:
    return ComplexBox.rect("-5.965", "-5.961", "6.102", "6.106")


def _critical_newton(q: mpc, z: mpc, maxit: int = 60) -> mpc:
    eps = mpf(10) ** (-mpmath.mp.dps + 3)
    for _ in range(maxit):
        _, fz, fzz, _, _ = theta_partials(q, z)
        step = fz / fzz
        z -= step
        if abs(step) <= eps * abs(z):
            return z
    raise PathError("critical-point Newton failed to converge")


def eta_path(q_grid, z_seed=None, precision: int | None = None, check_V: bool = True) -> EtaPath:
    """Continue the simple zero of theta_z(q, .) across ``q_grid``."""
    p = precision or DEFAULT_PRECISION
    V = _V_box()
    with mpmath.workdps(p + 10):
        z = MPComplex.coerce(z_seed if z_seed is not None else Z_A, p).value
        samples, resid = [], []
        sampled = mpf(0)
        prev_q = None
        eta_q = mpc(0)
        inside = True
        for qq in q_grid:
            q = MPComplex.coerce(qq, p).value
            if prev_q is not None:
                z = z + eta_q * (q - prev_q)
            z = _critical_newton(q, z)
            _, fz, fzz, _, fqz = theta_partials(q, z)
            eta_q = -fqz / fzz
            sampled = max(sampled, abs(eta_q))
            resid.append(float(abs(fz)))
            if not V.contains(z):
                inside = False
                if check_V:
                    raise PathError(f"eta left V at q = {mpmath.nstr(q, 12)}")
            samples.append((MPComplex(q, p), MPComplex(z, p)))
            prev_q = q
    bound = eta_derivative_bound() if inside else sampled
    return EtaPath(samples=samples, derivative_bound=float(max(bound, sampled)), sampled_max=float(sampled),
                   residuals=resid, in_V=inside)


@dataclass
class HomotopyResult:
    q_dagger: MPComplex
    z_dagger: MPComplex
    bound: float
    theta_start: MPComplex
    inv_theta_q_max: float
    steps: int


def homotopy_to_spectral(q_start, z_start, inv_theta_q_max: float | None = None, steps: int = 8,
                         precision: int | None = None) -> HomotopyResult:
    """Integrate dq/dtheta = 1/theta_q, dz/dtheta = -theta_qz / (theta_zz theta_q) from theta(start) to 0.

    ``bound`` is max|1/theta_q| * |theta(q_start, z_start)|; without an
    externally certified ``inv_theta_q_max`` the local value at the start,
    inflated by one percent, is used.
    """
    p = precision or DEFAULT_PRECISION
    with mpmath.workdps(p + 15):
        q = MPComplex.coerce(q_start, p).value
        z = MPComplex.coerce(z_start, p).value
        th0, _, _, fq0, _ = theta_partials(q, z)
        if abs(fq0) < mpf("1e-6"):
            raise PathError("theta_q is too small at the start of the flow")
        local = 1 / abs(fq0)
        m = mpf(inv_theta_q_max) if inv_theta_q_max is not None else local * mpf("1.01")
        bound = m * abs(th0)
        if th0 == 0:
            return HomotopyResult(MPComplex(q, p), MPComplex(z, p), 0.0, MPComplex(th0, p), float(m), 0)

        def rhs(qq, zz):
            _, _, fzz, fq, fqz = theta_partials(qq, zz)
            if abs(fq) < mpf("1e-6"):
                raise PathError("theta_q is too small along the flow")
            dq = 1 / fq
            return dq, -fqz / fzz * dq

        # theta runs linearly from th0 to 0: dtheta = -th0 dl
        h = -th0 / steps
        for _ in range(steps):
            k1 = rhs(q, z)
            k2 = rhs(q + h / 2 * k1[0], z + h / 2 * k1[1])
            k3 = rhs(q + h / 2 * k2[0], z + h / 2 * k2[1])
            k4 = rhs(q + h * k3[0], z + h * k3[1])
            q = q + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            z = z + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return HomotopyResult(MPComplex(q, p), MPComplex(z, p), float(bound), MPComplex(th0, p), float(m), steps)
