"""Command-line front end.

Every subcommand writes one JSON document (or CSV for spectrum tables) with
numbers as decimal strings.  The ``manifest`` block records the inputs; its
``volatile`` part (timestamp, wall time) is excluded from the digest, so two
runs with the same inputs produce identical output outside that block.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import re
import sys
import time
from datetime import datetime, timezone
from importlib import metadata

import mpmath
from mpmath import mpf

from . import _kernels
from .mpnum import DEFAULT_PRECISION, MIN_PRECISION, DomainError, MPComplex, ParseError, PrecisionError

SCHEMA = "partheta/1"

EXIT_OK, EXIT_FAILED, EXIT_DOMAIN, EXIT_INCONCLUSIVE = 0, 1, 2, 3

CONFIG_KEYS = {"precision": int, "tol": str, "subdiv": int, "grid": int, "s": int, "k_max": int, "order": int}


def _version() -> str:
    try:
        return metadata.version("partheta")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "0+unknown"


def load_config(path: str | None) -> dict:
    """Read ``key = value`` lines; unknown keys are an error."""
    if not path:
        return {}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path, encoding="utf-8") as fh:
        parser.read_string("[partheta]\n" + fh.read())
    out = {}
    for key, raw in parser["partheta"].items():
        if key not in CONFIG_KEYS:
            raise DomainError(f"unknown config key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](raw)
        except ValueError as exc:
            raise DomainError(f"bad value for {key}: {raw!r}") from exc
    return out


def _setting(args, cfg: dict, key: str, default):
    val = getattr(args, key, None)
    if val is not None:
        return val
    return cfg.get(key, default)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_eval(args, cfg, p):
    from .theta_core import eval_jet, eval_theta

    q = MPComplex.coerce(args.q, p)
    z = MPComplex.coerce(args.z, p)
    # default tolerance follows the precision: 1e-30 at the standard 40 digits
    tol = mpf(_setting(args, cfg, "tol", f"1e-{max(p - 10, 6)}"))
    if args.jet:
        jet = eval_jet(q, z, tol)
        return {"value": jet.value.to_json(), "jet": jet.to_json(),
                "tail": mpmath.nstr(jet.tail_radius["value"], 6)}, EXIT_OK
    val, tail = eval_theta(q, z, tol)
    return {"value": val.to_json(), "tail": mpmath.nstr(tail, 6)}, EXIT_OK


def cmd_zeros(args, cfg, p):
    from .zero_locator import certify_strong_separation, find_xi

    q = MPComplex.coerce(args.q, p)
    k_max = _setting(args, cfg, "k_max", 8)
    if k_max < 1:
        raise DomainError("--k-max must be >= 1")
    records = [find_xi(q, k, precision=p).to_json() for k in range(1, k_max + 1)]
    out = {"q": q.to_json(), "zeros": records}
    code = EXIT_OK
    if args.certify:
        cert = certify_strong_separation(q, args.n, k_max=k_max)
        out["certificate"] = cert.to_json()
        code = EXIT_OK if cert.verified else EXIT_FAILED
    return out, code


SPECTRUM_COLUMNS = ("index", "q_re", "q_im", "q_abs", "z_re", "z_im", "kind",
                    "residual_theta", "residual_theta_z", "truncation_s")


def cmd_spectrum(args, cfg, p):
    from .spectral_finder import disk_spectrum, real_spectrum_table

    s = _setting(args, cfg, "s", 18)
    if args.disk is not None:
        grid = _setting(args, cfg, "grid", 48)
        points, scan = disk_spectrum(float(args.disk), s=s, refine_full=args.refine_full, grid=grid, precision=p)
        extra = {"mode": "disk", "radius": str(args.disk), "s": s, "grid": grid,
                 "cells": scan.cells, "total_winding": scan.total_winding, "warnings": scan.warnings}
    elif args.real_table is not None:
        points = real_spectrum_table(args.real_table, "positive", precision=p)
        extra = {"mode": "real_table", "count": args.real_table}
    else:
        points = real_spectrum_table(args.negative_table, "negative", precision=p)
        extra = {"mode": "negative_table", "count": args.negative_table}
    return {"points": [pt.to_json() for pt in points], **extra}, EXIT_OK


def _spectrum_csv(result: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_COLUMNS)
    with mpmath.workdps(40):
        for i, pt in enumerate(result["points"], 1):
            q = mpmath.mpc(pt["q"]["re"], pt["q"]["im"])
            w.writerow([i, pt["q"]["re"], pt["q"]["im"], mpmath.nstr(abs(q), 20), pt["z"]["re"], pt["z"]["im"],
                        pt["kind"], pt["residual_theta"], pt["residual_theta_z"], pt["truncation_s"]])
    return buf.getvalue()


def cmd_certify(args, cfg, p):
    from . import certifier

    lemma = args.lemma
    subdiv = _setting(args, cfg, "subdiv", None)
    if lemma == "domination":
        if args.q_abs is None or args.k is None:
            raise DomainError("--lemma domination needs --q-abs and --k")
        rep = certifier.circle_domination(args.q_abs, args.k)
    elif lemma in ("separ", "boxes", "homotopy"):
        fn = certifier.LEMMAS[lemma]
        kwargs = {} if subdiv is None else {"subdiv": subdiv}
        if lemma == "homotopy":
            kwargs["precision"] = max(p, 40)
        rep = fn(**kwargs)
    else:
        rep = certifier.LEMMAS[lemma]()
    if rep.status == "passed":
        code = EXIT_OK
    elif rep.status == "inconclusive":
        code = EXIT_INCONCLUSIVE if args.strict else EXIT_OK
    else:
        code = EXIT_FAILED
    return rep.to_json(), code


def cmd_series(args, cfg, p):
    from .laurent_series import check_cauchy_bounds, compute_phi, theta_at_series_residual
    from .zero_locator import find_xi

    order = _setting(args, cfg, "order", 12)
    ser = compute_phi(args.k, order)
    out = {"series": ser.to_json(), "formal_residual_zero": not any(theta_at_series_residual(ser))}
    if args.check_q is not None:
        with mpmath.workdps(p + 10):
            q = MPComplex.coerce(args.check_q, p + 10)
            num = find_xi(q, args.k, precision=p + 10).value.value
            diff = abs(ser.xi(q.value) - num)
        out["numeric_check"] = {"q": args.check_q, "difference": mpmath.nstr(diff, 6)}
    if args.k >= 5:
        rep = check_cauchy_bounds(ser)
        out["cauchy"] = {"passed": rep.passed, "violations": rep.violations}
    return out, EXIT_OK


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="partheta", description="Zeros and spectral values of the partial theta function.")
    ap.add_argument("--precision", type=int, default=None, help="decimal digits (default from THETA_PRECISION or 40)")
    ap.add_argument("--config", default=None, help="key = value file; flags override it")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="theta(q, z) with a tail bound")
    e.add_argument("q")
    e.add_argument("z")
    e.add_argument("--tol", default=None)
    e.add_argument("--jet", action="store_true", help="also theta_z, theta_zz, theta_q, theta_qz, theta*")

    z = sub.add_parser("zeros", help="the zeros xi_1 .. xi_kmax")
    z.add_argument("q")
    z.add_argument("--k-max", dest="k_max", type=int, default=None)
    z.add_argument("--certify", action="store_true", help="attach a strong-separation certificate")
    z.add_argument("--n", type=int, default=4, help="first index the certificate should cover")

    s = sub.add_parser("spectrum", help="spectral values")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--disk", type=float, default=None)
    g.add_argument("--real-table", dest="real_table", type=int, default=None)
    g.add_argument("--negative-table", dest="negative_table", type=int, default=None)
    s.add_argument("-s", dest="s", type=int, default=None, help="truncation order for the disk scan")
    s.add_argument("--grid", type=int, default=None)
    s.add_argument("--refine-full", dest="refine_full", action="store_true")

    c = sub.add_parser("certify", help="interval re-verification")
    c.add_argument("--lemma", required=True,
                   choices=("domination", "separ", "boxes", "homotopy", "constants", "theorem", "drift"))
    c.add_argument("--subdiv", type=int, default=None)
    c.add_argument("--strict", action="store_true", help="exit 3 when the report is inconclusive")
    c.add_argument("--q-abs", dest="q_abs", type=float, default=None)
    c.add_argument("--k", type=int, default=None)

    r = sub.add_parser("series", help="integer series for xi_k")
    r.add_argument("k", type=int)
    r.add_argument("--order", type=int, default=None)
    r.add_argument("--check-q", dest="check_q", default=None, help="compare with a numeric zero at this q")
    return ap


COMMANDS = {"eval": cmd_eval, "zeros": cmd_zeros, "spectrum": cmd_spectrum, "certify": cmd_certify,
            "series": cmd_series}


def _manifest(args, argv, cfg: dict, p: int, wall: float) -> dict:
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "config")}
    stable = {
        "command_line": list(argv),
        "inputs": {k: (v if isinstance(v, (int, float, str, bool)) or v is None else str(v)) for k, v in inputs.items()},
        "config": dict(sorted(cfg.items())),
        "precision": p,
        "seeds": {"rng": None},
        "backend": _kernels.BACKEND,
        "toolkit_version": _version(),
    }
    digest = hashlib.sha256(json.dumps(stable, sort_keys=True).encode()).hexdigest()
    return {**stable, "config_digest": digest,
            "volatile": {"timestamp": datetime.now(timezone.utc).isoformat(), "wall_time_s": f"{wall:.3f}"}}


_NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d|inf|nan)", re.IGNORECASE)


def _protect_negatives(argv: list) -> list:
    """argparse treats '-5.9+6.1j' as an option; a leading space hides the dash."""
    return [" " + a if _NEGATIVE_VALUE.match(a) else a for a in argv]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    args = ap.parse_args(_protect_negatives(argv))
    for key, val in vars(args).items():
        if isinstance(val, str):
            setattr(args, key, val.strip())
    try:
        cfg = load_config(args.config)
        p = args.precision if args.precision is not None else cfg.get("precision", DEFAULT_PRECISION)
        if p < MIN_PRECISION:
            raise DomainError(f"precision must be at least {MIN_PRECISION}")
        t0 = time.perf_counter()
        with mpmath.workdps(p):
            result, code = COMMANDS[args.command](args, cfg, p)
        wall = time.perf_counter() - t0
    except (DomainError, ParseError) as exc:
        print(json.dumps({"schema": SCHEMA, "error": {"kind": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return EXIT_DOMAIN
    except (PrecisionError, OSError) as exc:
        print(json.dumps({"schema": SCHEMA, "error": {"kind": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return EXIT_FAILED
    if args.format == "csv":
        if args.command != "spectrum":
            ap.error("--format csv is only available for spectrum")
        text = _spectrum_csv(result)
    else:
        doc = {"schema": SCHEMA, "command": args.command, "result": result,
               "manifest": _manifest(args, argv, cfg, p, wall)}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
