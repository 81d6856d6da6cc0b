"""Float64 hot loops with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``PARTHETA_BACKEND=numpy`` to
force the fallback; the default uses numba when it can be imported.  Both
implementations are exposed through :data:`IMPLEMENTATIONS` so that tests and
benchmarks can compare them directly.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

REQUESTED_BACKEND = os.environ.get("PARTHETA_BACKEND", "numba").strip().lower() or "numba"
BACKEND = "numba" if (HAVE_NUMBA and REQUESTED_BACKEND != "numpy") else "numpy"


def _jit(fn):
    if HAVE_NUMBA:
        return _njit(cache=True, fastmath=False)(fn)
    return fn


# ---------------------------------------------------------------------------
# scaled partial theta sums
# ---------------------------------------------------------------------------
#
# For a reference index k the scaled sum is g(z) = sum_j r_j with
# r_j = q^(T_j - T_k) z^(j - k), T_j = j(j+1)/2, so theta(q, z) = q^T_k z^k g(z).
# Terms are generated outward from k so neither direction overflows.


def _scaled_sum_py(q, z, k, jmax):
    g = np.ones_like(z)
    dg = np.zeros_like(z)
    r = np.ones_like(z)
    for j in range(k, jmax):
        r = r * (q ** (j + 1)) * z
        g = g + r
        dg = dg + (j + 1 - k) * r
    r = np.ones_like(z)
    for j in range(k, 0, -1):
        r = r / ((q ** j) * z)
        g = g + r
        dg = dg + (j - 1 - k) * r
    return g, dg / z


@_jit
def _scaled_sum_nb(q, z, k, jmax):
    n = z.shape[0]
    g = np.empty(n, dtype=np.complex128)
    dg = np.empty(n, dtype=np.complex128)
    for i in range(n):
        zi = z[i]
        acc = 1.0 + 0.0j
        dacc = 0.0 + 0.0j
        r = 1.0 + 0.0j
        qp = q ** (k + 1)
        for j in range(k, jmax):
            r = r * qp * zi
            qp = qp * q
            acc += r
            dacc += (j + 1 - k) * r
        r = 1.0 + 0.0j
        qp = q ** k
        for j in range(k, 0, -1):
            r = r / (qp * zi)
            qp = qp / q
            acc += r
            dacc += (j - 1 - k) * r
        g[i] = acc
        dg[i] = dacc / zi
    return g, dg


# ---------------------------------------------------------------------------
# triple-product form  theta = Q U R - G
# ---------------------------------------------------------------------------


def _triple_py(q, z, mmax, gmax):
    Q = 1.0 + 0.0j
    for m in range(1, mmax + 1):
        Q *= 1.0 - q ** m
    U = np.ones_like(z)
    R = np.ones_like(z)
    dlog = np.zeros_like(z)
    inv = 1.0 / z
    for m in range(1, mmax + 1):
        a = (q ** m) * z
        b = (q ** (m - 1)) * inv
        U = U * (1.0 + a)
        R = R * (1.0 + b)
        dlog = dlog + (q ** m) / (1.0 + a) - b * inv / (1.0 + b)
    star = Q * U * R
    G = np.zeros_like(z)
    Gz = np.zeros_like(z)
    w = np.ones_like(z)
    for j in range(1, gmax + 1):
        w = w * (q ** (j - 1)) * inv
        G = G + w
        Gz = Gz - j * w * inv
    return star - G, star * dlog - Gz


@_jit
def _triple_nb(q, z, mmax, gmax):
    n = z.shape[0]
    th = np.empty(n, dtype=np.complex128)
    dth = np.empty(n, dtype=np.complex128)
    Q = 1.0 + 0.0j
    qm = q
    for m in range(1, mmax + 1):
        Q *= 1.0 - qm
        qm *= q
    for i in range(n):
        zi = z[i]
        inv = 1.0 / zi
        U = 1.0 + 0.0j
        R = 1.0 + 0.0j
        dlog = 0.0 + 0.0j
        qm = q
        qm1 = 1.0 + 0.0j
        for m in range(1, mmax + 1):
            a = qm * zi
            b = qm1 * inv
            U *= 1.0 + a
            R *= 1.0 + b
            dlog += qm / (1.0 + a) - b * inv / (1.0 + b)
            qm1 = qm
            qm *= q
        star = Q * U * R
        G = 0.0 + 0.0j
        Gz = 0.0 + 0.0j
        w = 1.0 + 0.0j
        qj = 1.0 + 0.0j
        for j in range(1, gmax + 1):
            w = w * qj * inv
            qj *= q
            G += w
            Gz -= j * w * inv
        th[i] = star - G
        dth[i] = star * dlog - Gz
    return th, dth


# ---------------------------------------------------------------------------
# roots of the truncation theta_(s) and the normalized discriminant
# ---------------------------------------------------------------------------


def _dominant_index(absq, absz, s):
    # maximizer over j of |q|^T_j |z|^j, clipped to [0, s]
    if absq <= 0.0:
        return 0
    lq = math.log(absq)
    j = int(round(-math.log(absz) / lq - 0.5)) if absz > 0 else 0
    return min(max(j, 0), s)


def _trunc_ratio_py(q, z, s):
    """Return (f/f', d, k) with f' = q^T_k z^(k-1) d for the truncation f."""
    k = _dominant_index(abs(q), abs(z), s)
    g = 1.0 + 0.0j
    dg = k + 0.0j
    r = 1.0 + 0.0j
    for j in range(k, s):
        r = r * (q ** (j + 1)) * z
        g += r
        dg += (j + 1) * r
    r = 1.0 + 0.0j
    for j in range(k, 0, -1):
        r = r / ((q ** j) * z)
        g += r
        dg += (j - 1) * r
    # f = q^T_k z^k g,  f' = q^T_k z^(k-1) dg
    return z * g / dg, dg, k


@_jit
def _trunc_ratio_nb(q, z, s):
    absq = abs(q)
    absz = abs(z)
    if absq <= 0.0:
        k = 0
    else:
        lq = math.log(absq)
        k = int(round(-math.log(absz) / lq - 0.5)) if absz > 0 else 0
        k = min(max(k, 0), s)
    g = 1.0 + 0.0j
    dg = k + 0.0j
    r = 1.0 + 0.0j
    for j in range(k, s):
        r = r * (q ** (j + 1)) * z
        g += r
        dg += (j + 1) * r
    r = 1.0 + 0.0j
    for j in range(k, 0, -1):
        r = r / ((q ** j) * z)
        g += r
        dg += (j - 1) * r
    return z * g / dg, dg, k


def _make_aberth(ratio):
    def aberth(q, s, maxiter, tol):
        z = np.empty(s, dtype=np.complex128)
        # a small rotation keeps real q from trapping the iterates on the axis
        tilt = complex(math.cos(0.1), math.sin(0.1))
        for k in range(1, s + 1):
            z[k - 1] = -(q ** (-k)) * tilt
        for _ in range(maxiter):
            worst = 0.0
            for i in range(s):
                w, _, _ = ratio(q, z[i], s)
                acc = 0.0 + 0.0j
                for m in range(s):
                    if m != i:
                        acc += 1.0 / (z[i] - z[m])
                step = w / (1.0 - w * acc)
                z[i] -= step
                rel = abs(step) / max(abs(z[i]), 1e-300)
                if rel > worst:
                    worst = rel
            if worst < tol:
                break
        return z

    return aberth


_aberth_py = _make_aberth(_trunc_ratio_py)
_aberth_nb = _jit(_make_aberth(_trunc_ratio_nb)) if HAVE_NUMBA else _aberth_py


def _make_logdisc(ratio, aberth):
    def logdisc(qs, s):
        """log of D(q) = prod_k (-1)^(k-1) q^((k^2-3k)/2) f'(xi_k) for each q."""
        out = np.empty(qs.shape[0], dtype=np.complex128)
        expo = 0
        sign_turns = 0
        for k in range(1, s + 1):
            expo += (k * k - 3 * k) // 2
            sign_turns += k - 1
        for n in range(qs.shape[0]):
            q = qs[n]
            roots = aberth(q, s, 200, 1e-15)
            lq = np.log(q)
            acc = expo * lq + 1j * math.pi * (sign_turns % 2)
            for i in range(s):
                _, dg, k = ratio(q, roots[i], s)
                acc += (k * (k + 1) // 2) * lq + (k - 1) * np.log(roots[i]) + np.log(dg)
            out[n] = acc
        return out

    return logdisc


_logdisc_py = _make_logdisc(_trunc_ratio_py, _aberth_py)
_logdisc_nb = _jit(_make_logdisc(_trunc_ratio_nb, _aberth_nb)) if HAVE_NUMBA else _logdisc_py


def _truncation_roots_py(q, s):
    return _aberth_py(q, s, 200, 1e-15)


def _truncation_roots_nb(q, s):
    return _aberth_nb(q, s, 200, 1e-15)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

IMPLEMENTATIONS = {
    "numpy": {
        "scaled_sum": _scaled_sum_py,
        "triple": _triple_py,
        "logdisc": _logdisc_py,
        "roots": _truncation_roots_py,
    },
    "numba": {
        "scaled_sum": _scaled_sum_nb if HAVE_NUMBA else _scaled_sum_py,
        "triple": _triple_nb if HAVE_NUMBA else _triple_py,
        "logdisc": _logdisc_nb,
        "roots": _truncation_roots_nb,
    },
}

_active = IMPLEMENTATIONS[BACKEND]


def scaled_sum(q: complex, z: np.ndarray, k: int, jmax: int):
    """(g, g') with theta_(jmax)(q, z) = q^T_k z^k g(z) for every entry of ``z``."""
    z = np.ascontiguousarray(z, dtype=np.complex128)
    return _active["scaled_sum"](complex(q), z, int(k), int(jmax))


def triple(q: complex, z: np.ndarray, mmax: int, gmax: int):
    """(theta, theta_z) through the Jacobi triple product minus the tail G."""
    z = np.ascontiguousarray(z, dtype=np.complex128)
    return _active["triple"](complex(q), z, int(mmax), int(gmax))


def logdisc(qs: np.ndarray, s: int) -> np.ndarray:
    """log of the normalized resultant of the truncation and its derivative."""
    qs = np.ascontiguousarray(qs, dtype=np.complex128)
    return _active["logdisc"](qs, int(s))


def truncation_roots(q: complex, s: int) -> np.ndarray:
    """All ``s`` roots of the degree-``s`` truncation, seeded at ``-q^-k``."""
    return _active["roots"](complex(q), int(s))
