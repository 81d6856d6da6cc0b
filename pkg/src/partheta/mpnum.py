"""Extended-precision complex scalars and complex-rectangle interval arithmetic.

Scalars are thin immutable wrappers around :class:`mpmath.mpc` that carry their
working precision in significant decimal digits.  Boxes are pairs of
outward-rounded :mod:`mpmath.iv` intervals.
"""

from __future__ import annotations

import os
import re
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
from mpmath import iv, mpc, mpf

MIN_PRECISION = 16


def _env_precision() -> int:
    raw = os.environ.get("THETA_PRECISION", "").strip()
    return int(raw) if raw else 40


DEFAULT_PRECISION = max(MIN_PRECISION, _env_precision())


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PrecisionError(ArithmeticError):
    """The requested tolerance cannot be met at the current working precision."""


class ParseError(ValueError):
    """A decimal literal could not be parsed."""


_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def parse_decimal(text: str, precision: int = DEFAULT_PRECISION) -> mpf:
    text = text.strip()
    if not _DECIMAL.match(text):
        raise ParseError(f"malformed decimal literal: {text!r}")
    with mpmath.workdps(precision):
        return mpf(text)


def format_decimal(x: mpf, precision: int) -> str:
    """Fixed-format-free decimal rendering with ``precision`` significant digits."""
    with mpmath.workdps(precision):
        if x == 0:
            return "0"
        return mpmath.nstr(x, precision, strip_zeros=True, min_fixed=-6, max_fixed=precision)


@dataclass(frozen=True, eq=False)
class MPComplex:
    value: mpc
    precision: int = DEFAULT_PRECISION

    def __post_init__(self) -> None:
        if self.precision < MIN_PRECISION:
            raise ValueError(f"precision must be >= {MIN_PRECISION}, got {self.precision}")
        with mpmath.workdps(self.precision):
            object.__setattr__(self, "value", +mpc(self.value))

    # -- construction -------------------------------------------------------
    @classmethod
    def coerce(cls, x, precision: int | None = None) -> "MPComplex":
        if isinstance(x, MPComplex):
            if precision is None or precision == x.precision:
                return x
            return cls(x.value, max(precision, x.precision))
        p = DEFAULT_PRECISION if precision is None else precision
        if isinstance(x, str):
            return cls(_parse_complex(x, p), p)
        if isinstance(x, tuple) and len(x) == 2:
            re_part, im_part = x
            re_v = parse_decimal(re_part, p) if isinstance(re_part, str) else re_part
            im_v = parse_decimal(im_part, p) if isinstance(im_part, str) else im_part
            with mpmath.workdps(p):
                return cls(mpc(re_v, im_v), p)
        with mpmath.workdps(p):
            return cls(mpc(x), p)

    # -- components ---------------------------------------------------------
    @property
    def re(self) -> mpf:
        return self.value.real

    @property
    def im(self) -> mpf:
        return self.value.imag

    def _binary(self, other, op) -> "MPComplex":
        if isinstance(other, MPComplex):
            p = max(self.precision, other.precision)
            o = other.value
        else:
            p = self.precision
            o = other
        with mpmath.workdps(p):
            return MPComplex(op(self.value, mpc(o) if not isinstance(o, (mpc, mpf)) else o), p)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __neg__(self):
        return MPComplex(-self.value, self.precision)

    def __pow__(self, n: int) -> "MPComplex":
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        with mpmath.workdps(self.precision):
            if n == 0:
                return MPComplex(mpc(1), self.precision)
            return MPComplex(self.value**n, self.precision)

    def __abs__(self) -> mpf:
        with mpmath.workdps(self.precision):
            return abs(self.value)

    def __eq__(self, other) -> bool:
        if isinstance(other, MPComplex):
            return self.value == other.value
        try:
            return self.value == mpc(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __complex__(self) -> complex:
        return complex(self.value)

    def __repr__(self) -> str:
        re_s, im_s = self.to_strings()
        return f"MPComplex({re_s}, {im_s}, precision={self.precision})"

    def arg(self) -> mpf:
        with mpmath.workdps(self.precision):
            return mpmath.arg(self.value)

    def conjugate(self) -> "MPComplex":
        return MPComplex(mpmath.conj(self.value), self.precision)

    def exp(self) -> "MPComplex":
        with mpmath.workdps(self.precision):
            return MPComplex(mpmath.exp(self.value), self.precision)

    def log(self) -> "MPComplex":
        if self.value == 0:
            raise DomainError("log(0)")
        with mpmath.workdps(self.precision):
            return MPComplex(mpmath.log(self.value), self.precision)

    def sqrt(self) -> "MPComplex":
        with mpmath.workdps(self.precision):
            return MPComplex(mpmath.sqrt(self.value), self.precision)

    def with_precision(self, precision: int) -> "MPComplex":
        return MPComplex(self.value, precision)

    # -- serialization ------------------------------------------------------
    def to_strings(self) -> tuple[str, str]:
        return format_decimal(self.re, self.precision), format_decimal(self.im, self.precision)

    def to_json(self) -> dict:
        re_s, im_s = self.to_strings()
        return {"re": re_s, "im": im_s, "precision": self.precision}

    @classmethod
    def from_json(cls, data: dict) -> "MPComplex":
        return mp(data["re"], data["im"], int(data["precision"]))


def _parse_complex(text: str, precision: int) -> mpc:
    """Accept ``"a"``, ``"a+bj"``/``"a-bi"`` or ``"a,b"`` decimal forms."""
    t = text.strip().replace(" ", "")
    if "," in t:
        a, b = t.split(",", 1)
        with mpmath.workdps(precision):
            return mpc(parse_decimal(a, precision), parse_decimal(b, precision))
    if t and t[-1] in "ij":
        body = t[:-1]
        # split at the last sign that is not part of an exponent
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                a, b = body[:pos], body[pos:]
                if b in ("+", "-"):
                    b += "1"
                with mpmath.workdps(precision):
                    return mpc(parse_decimal(a, precision), parse_decimal(b, precision))
        b = body if body not in ("", "+", "-") else body + "1"
        with mpmath.workdps(precision):
            return mpc(0, parse_decimal(b, precision))
    with mpmath.workdps(precision):
        return mpc(parse_decimal(t, precision))


def mp(re_digits: str, im_digits: str = "0", precision: int = DEFAULT_PRECISION) -> MPComplex:
    """Build an :class:`MPComplex` from two signed decimal literals."""
    re_v = parse_decimal(re_digits, precision)
    im_v = parse_decimal(im_digits, precision)
    with mpmath.workdps(precision):
        return MPComplex(mpc(re_v, im_v), precision)


def as_mpc(x, precision: int | None = None) -> mpc:
    """Raw :class:`mpmath.mpc` view of anything :meth:`MPComplex.coerce` accepts."""
    if isinstance(x, mpc):
        return x
    if isinstance(x, mpf):
        return mpc(x)
    return MPComplex.coerce(x, precision).value


# ---------------------------------------------------------------------------
# interval boxes
# ---------------------------------------------------------------------------

BOX_DPS = 30


@contextmanager
def _ivdps(dps: int = BOX_DPS):
    saved = iv.prec
    iv.dps = dps
    try:
        yield
    finally:
        iv.prec = saved


def iv_endpoint(x) -> mpf:
    """An interval endpoint as an mpf, converted without rounding."""
    with mpmath.workprec(max(iv.prec, mpmath.mp.prec, 53) + 8):
        return +mpf(x)


def _ival(lo, hi=None):
    if hi is None:
        hi = lo
    return iv.mpf([mpf(lo), mpf(hi)])


@dataclass(frozen=True)
class ComplexBox:
    """Axis-aligned complex rectangle ``[re_lo, re_hi] + i [im_lo, im_hi]``.

    Arithmetic is done on :mod:`mpmath.iv` intervals, whose endpoints are
    rounded outward, so the true image of every point set contained in the
    operands is contained in the result.
    """

    re_lo: mpf
    re_hi: mpf
    im_lo: mpf
    im_hi: mpf

    def __post_init__(self) -> None:
        if self.re_lo > self.re_hi or self.im_lo > self.im_hi:
            raise ValueError("box endpoints out of order")

    @classmethod
    def from_intervals(cls, re_iv, im_iv) -> "ComplexBox":
        re_iv = iv.mpf(re_iv)
        im_iv = iv.mpf(im_iv)
        # endpoints carry iv.prec bits; convert without rounding
        with mpmath.workprec(max(iv.prec, 53) + 8):
            return cls(mpf(re_iv.a), mpf(re_iv.b), mpf(im_iv.a), mpf(im_iv.b))

    @classmethod
    def point(cls, z) -> "ComplexBox":
        z = as_mpc(z)
        with _ivdps():
            return cls.from_intervals(iv.mpf(z.real), iv.mpf(z.imag))

    @classmethod
    def rect(cls, re_lo, re_hi, im_lo, im_hi) -> "ComplexBox":
        with _ivdps():
            return cls.from_intervals(_ival(re_lo, re_hi), _ival(im_lo, im_hi))

    @classmethod
    def hull(cls, boxes: Iterable["ComplexBox"]) -> "ComplexBox":
        boxes = list(boxes)
        if not boxes:
            raise DomainError("hull of an empty list of boxes")
        return cls(
            min(b.re_lo for b in boxes),
            max(b.re_hi for b in boxes),
            min(b.im_lo for b in boxes),
            max(b.im_hi for b in boxes),
        )

    @property
    def re(self):
        with _ivdps():
            return iv.mpf([self.re_lo, self.re_hi])

    @property
    def im(self):
        with _ivdps():
            return iv.mpf([self.im_lo, self.im_hi])

    @property
    def center(self) -> mpc:
        return mpc((self.re_lo + self.re_hi) / 2, (self.im_lo + self.im_hi) / 2)

    @property
    def width_re(self) -> mpf:
        return self.re_hi - self.re_lo

    @property
    def width_im(self) -> mpf:
        return self.im_hi - self.im_lo

    def contains(self, z) -> bool:
        if isinstance(z, ComplexBox):
            return (self.re_lo <= z.re_lo and z.re_hi <= self.re_hi
                    and self.im_lo <= z.im_lo and z.im_hi <= self.im_hi)
        z = as_mpc(z)
        return self.re_lo <= z.real <= self.re_hi and self.im_lo <= z.imag <= self.im_hi

    # -- arithmetic ---------------------------------------------------------
    @staticmethod
    def _lift(x) -> "ComplexBox":
        return x if isinstance(x, ComplexBox) else ComplexBox.point(x)

    def __add__(self, other) -> "ComplexBox":
        o = self._lift(other)
        with _ivdps():
            return ComplexBox.from_intervals(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self) -> "ComplexBox":
        return ComplexBox(-self.re_hi, -self.re_lo, -self.im_hi, -self.im_lo)

    def __sub__(self, other) -> "ComplexBox":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "ComplexBox":
        return self._lift(other) - self

    def __mul__(self, other) -> "ComplexBox":
        o = self._lift(other)
        with _ivdps():
            a, b, c, d = self.re, self.im, o.re, o.im
            return ComplexBox.from_intervals(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def scale(self, factor) -> "ComplexBox":
        """Multiply by a real interval or real scalar."""
        with _ivdps():
            f = factor if isinstance(factor, type(iv.mpf(0))) else iv.mpf(factor)
            return ComplexBox.from_intervals(self.re * f, self.im * f)

    def __pow__(self, n: int) -> "ComplexBox":
        if n < 0:
            raise ValueError("negative powers not supported")
        result = ComplexBox.point(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conjugate(self) -> "ComplexBox":
        return ComplexBox(self.re_lo, self.re_hi, -self.im_hi, -self.im_lo)

    def abs_range(self) -> tuple[mpf, mpf]:
        """Outward-rounded [min, max] of |z| over the box."""
        with _ivdps():
            def closest(lo, hi):
                if lo <= 0 <= hi:
                    return iv.mpf(0)
                return iv.mpf(min(abs(lo), abs(hi)))

            def farthest(lo, hi):
                return iv.mpf(max(abs(lo), abs(hi)))

            lo = iv.sqrt(closest(self.re_lo, self.re_hi) ** 2 + closest(self.im_lo, self.im_hi) ** 2)
            hi = iv.sqrt(farthest(self.re_lo, self.re_hi) ** 2 + farthest(self.im_lo, self.im_hi) ** 2)
            return iv_endpoint(lo.a), iv_endpoint(hi.b)

    def abs_interval(self):
        lo, hi = self.abs_range()
        return iv.mpf([lo, hi])

    def subdivide(self, nre: int, nim: int | None = None) -> list["ComplexBox"]:
        nim = nre if nim is None else nim
        out = []
        for i in range(nre):
            r0 = self.re_lo + self.width_re * i / nre
            r1 = self.re_hi if i == nre - 1 else self.re_lo + self.width_re * (i + 1) / nre
            for k in range(nim):
                i0 = self.im_lo + self.width_im * k / nim
                i1 = self.im_hi if k == nim - 1 else self.im_lo + self.width_im * (k + 1) / nim
                out.append(ComplexBox(r0, r1, i0, i1))
        return out

    def corners(self) -> list[mpc]:
        return [mpc(self.re_lo, self.im_lo), mpc(self.re_hi, self.im_lo),
                mpc(self.re_hi, self.im_hi), mpc(self.re_lo, self.im_hi)]

    def to_json(self) -> dict:
        return {k: format_decimal(getattr(self, k), BOX_DPS)
                for k in ("re_lo", "re_hi", "im_lo", "im_hi")}


def unit_phase_box(t_lo, t_hi) -> ComplexBox:
    """Enclosure of ``exp(i t)`` for ``t`` in ``[t_lo, t_hi]``."""
    with _ivdps():
        t = _ival(t_lo, t_hi)
        return ComplexBox.from_intervals(iv.cos(t), iv.sin(t))


def box_oscillation(f_values: Sequence[ComplexBox]) -> tuple[mpf, mpf]:
    """Upper bounds (DR, DI) for the oscillation of Re f and Im f.

    ``f_values`` are enclosures of ``f`` over the cells of a cover; the hull
    widths bound ``sup |Re f(p) - Re f(p')|`` and the imaginary analogue.
    """
    if not f_values:
        raise DomainError("box_oscillation needs at least one enclosure")
    h = ComplexBox.hull(f_values)
    with _ivdps():
        dr = (iv.mpf(h.re_hi) - iv.mpf(h.re_lo)).b
        di = (iv.mpf(h.im_hi) - iv.mpf(h.im_lo)).b
        return iv_endpoint(dr), iv_endpoint(di)
