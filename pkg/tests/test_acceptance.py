"""One test per acceptance criterion.

Each test prints a single PASS/FAIL line at the pinned tolerance, followed by
indented detail lines, and asserts the criterion.  Expected values are the
published figures; independent cross-checks live in the module tests.
"""

from __future__ import annotations

import json
import math
import time

import mpmath
import numpy as np
import pytest
from mpmath import mpc, mpf

from conftest import ACCEPTANCE_LINES
from partheta import certifier
from partheta.cli import main
from partheta.laurent_series import check_cauchy_bounds, compute_phi, theta_at_series_residual
from partheta.mpnum import MPComplex
from partheta.spectral_finder import real_spectrum_table, resultant_scan
from partheta.theta_core import eval_jet, eval_theta, eval_triple_product, solve_c0
from partheta.zero_locator import annulus_count, circle_radius, find_xi, winding_count, winding_count_perturbed

pytestmark = pytest.mark.slow

POSITIVE_TABLE = """0.309249 0.516959 0.630628 0.701265 0.749269 0.783984 0.810251 0.830816 0.847353
0.860942 0.872305 0.881949 0.890237 0.897435 0.903747 0.909325 0.914291 0.918741 0.922751 0.926384
0.929689 0.932711 0.935482 0.938035 0.940393""".split()
NEGATIVE_MODULI = "0.727133 0.783742 0.841601 0.861257 0.887952 0.897904 0.913191 0.919201".split()


def report(n: int, title: str, checks: list, seconds: float, limit: float):
    """Print the criterion line and its sub-lines, then assert."""
    timely = seconds < limit
    ok = all(c[1] for c in checks) and timely
    lines = [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}  [{seconds:.1f} s, limit {limit:.0f} s]"]
    for label, passed, detail in checks:
        lines.append(f"    {'ok  ' if passed else 'FAIL'} {label}: {detail}")
    if not timely:
        lines.append("    FAIL runtime limit exceeded")
    print("\n".join(lines))
    ACCEPTANCE_LINES.extend(lines)
    assert ok, "\n".join(lines)


def _s(x, d=12):
    return mpmath.nstr(x, d)


def test_criterion_01_half_disk_triple(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "disk.json"
    code = main(["--output", str(out), "spectrum", "--disk", "0.5", "-s", "18", "--refine-full"])
    dt = time.perf_counter() - t0
    pts = json.loads(out.read_text())["result"]["points"]
    checks = [("exit code 0", code == 0, code), ("exactly 3 points", len(pts) == 3, len(pts))]
    with mpmath.workdps(40):
        def c(p, key):
            return mpc(p[key]["re"], p[key]["im"])

        real = [p for p in pts if p["kind"] == "real_positive"]
        pair = sorted([p for p in pts if p["kind"] == "complex_pair"], key=lambda p: mpf(p["q"]["im"]))
        if len(real) == 1:
            q, z = c(real[0], "q"), c(real[0], "z")
            dq, dz = abs(q - mpf("0.3092493386")), abs(z - mpf("-7.5032559833"))
            checks.append(("q1 = 0.3092493386 +- 1e-9", dq <= mpf("1e-9"), f"{_s(q.real, 14)} (diff {_s(dq, 3)})"))
            checks.append(("double zero -7.5032559833 +- 1e-8", dz <= mpf("1e-8"),
                           f"{_s(z.real, 14)} (diff {_s(dz, 3)})"))
        else:
            checks.append(("one real positive point", False, len(real)))
        if len(pair) == 2:
            for p, sgn in zip(pair, (-1, 1)):
                q, z = c(p, "q"), c(p, "z")
                eq = max(abs(q.real - mpf("0.4353184958")), abs(q.imag - sgn * mpf("0.1230440086")))
                ez = max(abs(z.real - mpf("-5.963")), abs(z.imag - sgn * mpf("6.104")))
                tag = "+" if sgn > 0 else "-"
                checks.append((f"v{tag} parts +- 1e-9", eq <= mpf("1e-9"), f"{_s(q, 12)} (diff {_s(eq, 3)})"))
                checks.append((f"v{tag} double zero +- 1e-3", ez <= mpf("1e-3"), f"{_s(z, 8)} (diff {_s(ez, 3)})"))
        else:
            checks.append(("conjugate pair present", False, len(pair)))
    report(1, "spectral triple in the half-disk", checks, dt, 120)


def test_criterion_02_truncation_stability():
    t0 = time.perf_counter()
    scans = {s: resultant_scan(s, ("disk", 0.5)) for s in (13, 24)}
    dt = time.perf_counter() - t0
    a, b = scans[13].candidates, scans[24].candidates
    checks = [("same number of candidates", len(a) == len(b) == 3, f"{len(a)} vs {len(b)}"),
              ("no scan warnings", not scans[13].warnings and not scans[24].warnings,
               scans[13].warnings + scans[24].warnings)]
    for x in a:
        y = min(b, key=lambda c: abs(c.q.value - x.q.value))
        d = abs(x.q.value - y.q.value)
        checks.append((f"q = {_s(x.q.value, 12)} agrees to 1e-10", d < mpf("1e-10"), f"diff {_s(d, 3)}"))
    report(2, "candidates from s = 13 and s = 24 agree to 10 decimals", checks, dt, 600)


def test_criterion_03_positive_table():
    t0 = time.perf_counter()
    pts = real_spectrum_table(25, "positive")
    dt = time.perf_counter() - t0
    checks = [("25 values", len(pts) == 25, len(pts))]
    worst = 0.0
    bad = []
    for i, (p, ref) in enumerate(zip(pts, POSITIVE_TABLE), 1):
        d = abs(float(p.q.re) - float(ref))
        worst = max(worst, d)
        if d >= 1e-6:
            bad.append(f"#{i} {float(p.q.re):.8f} vs {ref}")
    checks.append(("all within 1e-6 of the 6-decimal table", not bad, f"worst diff {worst:.2e} {bad}"))
    smax = max(p.truncation_s or 0 for p in pts)
    checks.append(("adaptive truncation order <= 300", smax <= 300, f"max s = {smax}"))
    checks.append(("last value", True, f"{float(pts[-1].q.re):.10f}"))
    report(3, "first 25 real positive spectral values", checks, dt, 600)


def test_criterion_04_negative_table():
    t0 = time.perf_counter()
    pts = real_spectrum_table(8, "negative")
    dt = time.perf_counter() - t0
    checks = [("8 values", len(pts) == 8, len(pts)),
              ("all negative", all(p.q.re < 0 for p in pts), [p.kind for p in pts][:1])]
    worst = 0.0
    bad = []
    for i, (p, ref) in enumerate(zip(pts, NEGATIVE_MODULI), 1):
        d = abs(abs(float(p.q.re)) - float(ref))
        worst = max(worst, d)
        if d >= 1e-6:
            bad.append(f"#{i} {abs(float(p.q.re)):.8f} vs {ref}")
    checks.append(("moduli within 1e-6 of the 6-decimal table", not bad, f"worst diff {worst:.2e} {bad}"))
    report(4, "first 8 negative spectral values", checks, dt, 300)


def test_criterion_05_constants_audit(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "const.json"
    code = main(["--output", str(out), "certify", "--lemma", "constants"])
    dt = time.perf_counter() - t0
    stages = json.loads(out.read_text())["result"]["stages"]
    checks = [(s["name"], s["passed"], f"{s['value']} vs {s['target']}") for s in stages]
    checks.append(("exit code 0", code == 0, code))
    report(5, "constants reproduced to 8 significant digits", checks, dt, 60)


def test_criterion_06_box_lemmas(tmp_path):
    t0 = time.perf_counter()
    docs, codes = {}, {}
    for lemma in ("boxes", "separ"):
        out = tmp_path / f"{lemma}.json"
        codes[lemma] = main(["--output", str(out), "certify", "--lemma", lemma])
        docs[lemma] = json.loads(out.read_text())["result"]
    dt = time.perf_counter() - t0
    checks = []
    for lemma in ("boxes", "separ"):
        r = docs[lemma]
        checks.append((f"{lemma} passes with positive margin", codes[lemma] == 0 and r["passed"],
                       f"exit {codes[lemma]}, worst margin {r['worst_margin']}"))
        for s in r["stages"]:
            if lemma == "boxes" or not s["passed"]:
                checks.append((f"{lemma}: {s['name']}", s["passed"], f"{s['value']} vs {s['target']}"))
    report(6, "box lemmas and monomial tables", checks, dt, 300)


def test_criterion_07_homotopy(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "hom.json"
    code = main(["--precision", "40", "--output", str(out), "certify", "--lemma", "homotopy"])
    dt = time.perf_counter() - t0
    r = json.loads(out.read_text())["result"]
    st = {s["name"]: s for s in r["stages"]}
    th = float(st["|theta(q_a, z_a)|"]["value"])
    lo, hi = (float(x) for x in st["certified |1/theta_q| range"]["value"])
    bound = float(st["|q_dagger - q_a| bound (certified)"]["value"])
    checks = [
        ("|theta(q_a, z_a)| ~ 1.6e-15 (within a factor 2)", 0.8e-15 <= th <= 3.2e-15, f"{th:.3e}"),
        ("1/theta_q range within [1.2022, 1.6941]", 1.2022 <= lo and hi <= 1.6941, f"[{lo:.6f}, {hi:.6f}]"),
        ("|q_dagger - q_a| < 1e-10", bound < 1e-10, f"{bound:.3e}"),
        ("exit code 0", code == 0, code),
    ]
    report(7, "homotopy bound at 40 digits", checks, dt, 60)


def _disk_sample(rng, rmax, n, rmin=1e-3):
    out = []
    while len(out) < n:
        r = rmax * math.sqrt(rng.uniform())
        if r >= rmin:
            out.append(r * complex(math.cos(a := rng.uniform(-math.pi, math.pi)), math.sin(a)))
    return out


def test_criterion_08_separation_properties():
    rng = np.random.default_rng(20240808)
    t0 = time.perf_counter()
    c0 = float(solve_c0())
    bad1, bad2, bad3 = [], [], []
    for q in _disk_sample(rng, 0.5, 20):
        counts = [annulus_count(q, k) for k in range(4, 13)]
        inside, _ = winding_count_perturbed(q, circle_radius(abs(q), 4))
        if counts != [1] * 9 or inside != 4:
            bad1.append((q, counts, inside))
    for q in _disk_sample(rng, c0, 20):
        counts = [annulus_count(q, k) for k in range(1, 13)]
        if counts != [1] * 12:
            bad2.append((q, counts))
    for q in _disk_sample(rng, 0.9, 50):
        if winding_count(q, 1 / (2 * abs(q))) != 0:
            bad3.append(q)
    dt = time.perf_counter() - t0
    checks = [
        ("|q| <= 0.5: one zero per annulus k = 4..12, four inside C_4 (20 q)", not bad1, bad1 or "all 20"),
        ("|q| <= c0: one zero per annulus k = 1..12 (20 q)", not bad2, bad2 or "all 20"),
        ("zero-free disk |z| <= 1/(2|q|), |q| <= 0.9 (50 q)", not bad3, bad3 or "all 50"),
    ]
    report(8, "separation properties at random q (seed 20240808)", checks, dt, 300)


def _point(rng, rq, rz_lo, rz_hi):
    with mpmath.workdps(40):
        qa = mpf(rng.uniform(0.02, rq))
        za = mpf(math.exp(rng.uniform(math.log(rz_lo), math.log(rz_hi))))
        q = qa * mpmath.expj(mpf(rng.uniform(-math.pi, math.pi)))
        z = za * mpmath.expj(mpf(rng.uniform(-math.pi, math.pi)))
        return MPComplex(q, 40), MPComplex(z, 40)


def test_criterion_09_identity_suites():
    rng = np.random.default_rng(99)
    t0 = time.perf_counter()
    worst_tp = worst_fe = worst_fd = mpf(0)
    bad = [0, 0, 0]
    for _ in range(100):
        q, z = _point(rng, 0.8, 0.3, 30)
        tol = mpf("1e-28")
        parts = eval_triple_product(q, z, tol)
        th, rth = eval_theta(q, z, tol)
        with mpmath.workdps(45):
            radius = parts.radius["theta_star_full"] + parts.radius["G"] + rth
            gap = abs(parts.theta_star_full.value - (th.value + parts.G.value))
            worst_tp = max(worst_tp, gap / radius)
            bad[0] += gap > radius
    for _ in range(100):
        q, z = _point(rng, 0.8, 0.3, 12)
        jet = eval_jet(q, z)
        r = jet.tail_radius
        with mpmath.workdps(45):
            aq, az = abs(q.value), abs(z.value)
            lhs = 2 * q.value * jet.dq.value
            rhs = z.value ** 2 * jet.dzz.value + 2 * z.value * jet.dz.value
            radius = 2 * aq * r["dq"] + az ** 2 * r["dzz"] + 2 * az * r["dz"]
            gap = abs(lhs - rhs)
            worst_fe = max(worst_fe, gap / radius)
            bad[1] += gap > radius
    for _ in range(100):
        q, z = _point(rng, 0.8, 0.3, 12)
        jet = eval_jet(q, z)
        with mpmath.workdps(40):
            h = mpf("1e-12")
            f = lambda qq, zz: eval_theta(MPComplex(qq, 40), MPComplex(zz, 40))[0].value
            qv, zv = q.value, z.value
            d_z = (f(qv, zv + h) - f(qv, zv - h)) / (2 * h)
            d_q = (f(qv + h, zv) - f(qv - h, zv)) / (2 * h)
            err = max(abs(d_z - jet.dz.value) / max(1, abs(jet.dz.value)),
                      abs(d_q - jet.dq.value) / max(1, abs(jet.dq.value)))
            worst_fd = max(worst_fd, err)
            bad[2] += err > mpf("1e-8")
    dt = time.perf_counter() - t0
    checks = [
        ("Theta* = theta + G within combined radii (100 points)", bad[0] == 0,
         f"worst gap/radius {_s(worst_tp, 3)}"),
        ("2q theta_q = z^2 theta_zz + 2z theta_z within radii (100 points)", bad[1] == 0,
         f"worst gap/radius {_s(worst_fe, 3)}"),
        ("jet vs central differences to 1e-8 (100 points)", bad[2] == 0, f"worst rel err {_s(worst_fd, 3)}"),
    ]
    report(9, "identity suites", checks, dt, 120)


def test_criterion_10_series():
    t0 = time.perf_counter()
    checks = []
    q = "0.05"
    with mpmath.workdps(60):
        bound = 10 * mpf(q) ** 15
    for k in range(1, 9):
        ser = compute_phi(k, 15)
        ints = all(type(c) is int for c in ser.phi_coeffs)
        zero = not any(theta_at_series_residual(ser))
        with mpmath.workdps(60):
            num = find_xi(q, k, precision=60).value.value
            diff = abs(ser.xi(mpf(q)) - num)
        checks.append((f"k={k}: integer coefficients, formal residual 0", ints and zero, f"phi[:5] = {ser.phi_coeffs[:5]}"))
        checks.append((f"k={k}: |series - find_xi| at q=0.05 < 10 q^15 = {_s(bound, 3)}", diff < bound,
                       f"{_s(diff, 3)}"))
        if k >= 5:
            rep = check_cauchy_bounds(ser)
            checks.append((f"k={k}: Cauchy bounds", rep.passed, f"violations {rep.violations}"))
    dt = time.perf_counter() - t0
    report(10, "integer series for xi_k, k = 1..8, order 15", checks, dt, 120)
