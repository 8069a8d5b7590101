"""Midpoint-radius real arithmetic on top of MPFR (via gmpy2).

A :class:`BoundedReal` is a pair (mid, rad): the exact real it stands for lies
in [mid - rad, mid + rad]. Midpoints are rounded to nearest at the working
precision; radii are 64-bit floats always rounded upward. MPFR rounds
``exp``/``log``/``sqrt`` correctly, so every operation adds at most
|mid| * 2^-bits of rounding error on top of the propagated input radii.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import gmpy2
from gmpy2 import mpfr, mpq

DEFAULT_BITS = 96
DEFAULT_MAX_BITS = 1024
MIN_BITS = 53

_RAD_BITS = 64
_UP = gmpy2.context(precision=_RAD_BITS, round=gmpy2.RoundUp)
_DOWN = gmpy2.context(precision=_RAD_BITS, round=gmpy2.RoundDown)
_ZERO = mpfr(0)


@lru_cache(maxsize=None)
def _near(bits: int) -> gmpy2.context:
    return gmpy2.context(precision=bits, round=gmpy2.RoundToNearest)


class PrecisionExhausted(ArithmeticError):
    """A comparison could not be certified even at the escalation ceiling."""


@dataclass(frozen=True)
class PrecisionContext:
    bits: int = DEFAULT_BITS
    max_bits: int = DEFAULT_MAX_BITS

    def __post_init__(self):
        if not (MIN_BITS <= self.bits <= self.max_bits):
            raise ValueError(
                f"need {MIN_BITS} <= bits <= max_bits, got bits={self.bits}, max_bits={self.max_bits}"
            )

    @property
    def can_escalate(self) -> bool:
        return self.bits < self.max_bits

    def escalate(self) -> "PrecisionContext":
        """Double the working precision, clamped at ``max_bits``."""
        return PrecisionContext(min(2 * self.bits, self.max_bits), self.max_bits)

    def at(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits, max(bits, self.max_bits))

    def ladder(self) -> Iterable["PrecisionContext"]:
        ctx = self
        yield ctx
        while ctx.can_escalate:
            ctx = ctx.escalate()
            yield ctx


def _round_err(m: mpfr, bits: int) -> mpfr:
    # round-to-nearest error is at most half an ulp <= |m| 2^-bits
    return _UP.mul(_UP.abs(m), mpfr(2) ** -bits) if m else _ZERO


def _exact_err(exact: mpq, m: mpfr) -> mpfr:
    if m == exact:
        return _ZERO
    return _up_q(abs(mpq(m) - exact))


def _up_q(q: mpq) -> mpfr:
    with gmpy2.context(_UP):
        return mpfr(q)


def _down_q(q: mpq) -> mpfr:
    with gmpy2.context(_DOWN):
        return mpfr(q)


class BoundedReal:
    __slots__ = ("mid", "rad", "bits")

    def __init__(self, mid: mpfr, rad: mpfr = _ZERO, bits: int = DEFAULT_BITS):
        if rad < 0:
            raise ValueError("radius must be non-negative")
        self.mid = mid
        self.rad = rad
        self.bits = bits

    # --- construction -----------------------------------------------------

    @classmethod
    def exact(cls, value, bits: int = DEFAULT_BITS) -> "BoundedReal":
        """Enclose an exact rational (int, Fraction, Decimal, mpq, or decimal string)."""
        q = to_mpq(value)
        m = _mpfr_from_q(q, bits)
        return cls(m, _exact_err(q, m), bits)

    @classmethod
    def from_bounds(cls, lo, hi, bits: int = DEFAULT_BITS) -> "BoundedReal":
        lo_q, hi_q = to_mpq(lo), to_mpq(hi)
        if hi_q < lo_q:
            raise ValueError("empty interval")
        mid_q = (lo_q + hi_q) / 2
        m = _mpfr_from_q(mid_q, bits)
        rad = _up_q(max(abs(mpq(m) - lo_q), abs(hi_q - mpq(m))))
        return cls(m, rad, bits)

    # --- views ------------------------------------------------------------

    @property
    def lo(self) -> mpq:
        return mpq(self.mid) - mpq(self.rad)

    @property
    def hi(self) -> mpq:
        return mpq(self.mid) + mpq(self.rad)

    def contains(self, value) -> bool:
        q = value if isinstance(value, type(mpq())) else to_mpq(value)
        return self.lo <= q <= self.hi

    def contains_interval(self, other: "BoundedReal") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "BoundedReal") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def certainly_lt(self, other: "BoundedReal") -> bool:
        return self.hi < other.lo

    def certainly_gt(self, other: "BoundedReal") -> bool:
        return self.lo > other.hi

    def certainly_positive(self) -> bool:
        return self.mid > self.rad

    def certainly_negative(self) -> bool:
        return _near(self.bits).minus(self.mid) > self.rad

    def sign(self) -> int:
        """+1 or -1 when certified, 0 when the interval straddles zero."""
        if self.certainly_positive():
            return 1
        if self.certainly_negative():
            return -1
        return 0

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        return f"BoundedReal({format_sig(self.mid, 12)} +/- {format_sig(self.rad, 3)}, bits={self.bits})"

    # --- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "BoundedReal":
        if isinstance(other, BoundedReal):
            return other
        return BoundedReal.exact(other, self.bits)

    def __neg__(self) -> "BoundedReal":
        # plain unary minus would round to gmpy2's global precision
        return BoundedReal(_near(self.bits).minus(self.mid), self.rad, self.bits)

    def __add__(self, other) -> "BoundedReal":
        other = self._coerce(other)
        bits = max(self.bits, other.bits)
        m = _near(bits).add(self.mid, other.mid)
        rad = _UP.add(_UP.add(self.rad, other.rad), _round_err(m, bits))
        return BoundedReal(m, rad, bits)

    __radd__ = __add__

    def __sub__(self, other) -> "BoundedReal":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "BoundedReal":
        return self._coerce(other) - self

    def __mul__(self, other) -> "BoundedReal":
        other = self._coerce(other)
        bits = max(self.bits, other.bits)
        m = _near(bits).mul(self.mid, other.mid)
        rad = _UP.add(_UP.mul(_UP.abs(self.mid), other.rad), _UP.mul(_UP.abs(other.mid), self.rad))
        rad = _UP.add(rad, _UP.mul(self.rad, other.rad))
        rad = _UP.add(rad, _round_err(m, bits))
        return BoundedReal(m, rad, bits)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "BoundedReal":
        other = self._coerce(other)
        bits = max(self.bits, other.bits)
        den_lo = _DOWN.sub(_DOWN.abs(other.mid), other.rad)
        if den_lo <= 0:
            raise ZeroDivisionError("divisor interval contains zero")
        m = _near(bits).div(self.mid, other.mid)
        q_up = _UP.div(_UP.abs(self.mid), den_lo)
        num = _UP.add(self.rad, _UP.mul(q_up, other.rad))
        rad = _UP.add(_UP.div(num, den_lo), _round_err(m, bits))
        return BoundedReal(m, rad, bits)

    def __rtruediv__(self, other) -> "BoundedReal":
        return self._coerce(other) / self

    def exp(self) -> "BoundedReal":
        bits = self.bits
        m = _near(bits).exp(self.mid)
        if self.rad:
            rad = _UP.mul(_UP.exp(self.mid), _UP.expm1(self.rad))
        else:
            rad = _ZERO
        return BoundedReal(m, _UP.add(rad, _round_err(m, bits)), bits)

    def log(self) -> "BoundedReal":
        bits = self.bits
        lo = _DOWN.sub(self.mid, self.rad)
        if lo <= 0:
            raise ValueError("log of an interval that is not certainly positive")
        m = _near(bits).log(self.mid)
        rad = _UP.div(self.rad, lo) if self.rad else _ZERO
        return BoundedReal(m, _UP.add(rad, _round_err(m, bits)), bits)

    def sqrt(self) -> "BoundedReal":
        bits = self.bits
        lo = _DOWN.sub(self.mid, self.rad)
        if lo < 0:
            raise ValueError("sqrt of an interval that is not certainly non-negative")
        m = _near(bits).sqrt(self.mid)
        # |sqrt(x) - sqrt(mid)| <= rad / (sqrt(mid - rad) + sqrt(mid))
        rad = _UP.div(self.rad, _DOWN.add(_DOWN.sqrt(lo), _DOWN.sqrt(self.mid))) if self.rad else _ZERO
        return BoundedReal(m, _UP.add(rad, _round_err(m, bits)), bits)

    def __pow__(self, t) -> "BoundedReal":
        """x**t for x certainly positive, via exp(t log x)."""
        return (self._coerce(t) * self.log()).exp()

    def at_bits(self, bits: int) -> "BoundedReal":
        """Re-round the midpoint to another precision, widening the radius."""
        m = _mpfr_from_q(mpq(self.mid), bits)
        rad = _UP.add(self.rad, _exact_err(mpq(self.mid), m))
        return BoundedReal(m, rad, bits)


Exact = Union[int, Fraction, Decimal, str]


_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def parse_decimal(text: str) -> Fraction:
    """Exact value of a decimal literal: sign, digits, optional fraction and exponent."""
    s = text.strip()
    if not _DECIMAL_RE.match(s):
        raise ValueError(f"not a decimal number: {text!r}")
    return Fraction(Decimal(s))


def to_mpq(value) -> mpq:
    if isinstance(value, type(mpq())):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a number here")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, Decimal):
        f = Fraction(value)
        return mpq(f.numerator, f.denominator)
    if isinstance(value, str):
        f = parse_decimal(value)
        return mpq(f.numerator, f.denominator)
    if isinstance(value, type(mpfr())):
        return mpq(value)
    if isinstance(value, float):
        return mpq(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def _mpfr_from_q(q: mpq, bits: int) -> mpfr:
    with gmpy2.context(_near(bits)):
        return mpfr(q)


def weighted_sum(coeffs: Iterable, terms: Iterable[BoundedReal], bits: int) -> BoundedReal:
    """sum(c_i * x_i) for exact rational c_i, accumulated exactly and rounded once."""
    mid = mpq(0)
    rad = mpq(0)
    for c, x in zip(coeffs, terms):
        if not c:
            continue
        cq = to_mpq(c)
        mid += cq * mpq(x.mid)
        if x.rad:
            rad += abs(cq) * mpq(x.rad)
    m = _mpfr_from_q(mid, bits)
    return BoundedReal(m, _up_q(rad + abs(mid - mpq(m))), bits)


def format_sig(x, digits: int = 12) -> str:
    """Scientific notation with ``digits`` significant digits, e.g. ``7.14617180911e-1``."""
    q = to_mpq(x)
    if not q:
        return "0"
    with localcontext() as dctx:
        dctx.prec = digits
        d = Decimal(int(q.numerator)) / Decimal(int(q.denominator))
    text = f"{d:.{digits - 1}e}"
    mant, exp10 = text.split("e")
    return f"{mant}e{int(exp10)}"


def golden_ratio(ctx: PrecisionContext) -> BoundedReal:
    return _golden_ratio(ctx.bits)


@lru_cache(maxsize=None)
def _golden_ratio(bits: int) -> BoundedReal:
    root5 = BoundedReal.exact(5, bits + 8).sqrt()
    return ((root5 + 1) / 2).at_bits(bits)
