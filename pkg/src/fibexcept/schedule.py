"""Parameter schedules t_1 > t_2 > ... > t_{n-1} interlaced with the s_i.

Every schedule is checked against certified enclosures of s_i:

    t_1 > s_1 > t_2 > s_2 > ... > t_{n-1} > s_{n-1}.

The t values themselves are exact decimals (``Fraction``) so they serialise
without loss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from gmpy2 import mpq

from .bounded import BoundedReal, PrecisionContext, format_sig, parse_decimal
from .highprec import exact_rational, solve_s

MODES = ("figure1", "auto", "midpoint", "file")

#: t_i - 1 for i = 1..38, as tabulated alongside the s_i values.
FIGURE1_T_MINUS_1 = (
    "8e-1", "2e-1", "8e-2", "3e-2", "2e-2", "4e-3", "2e-3", "6e-4", "3e-4", "9e-5",
    "4e-5", "2e-5", "5e-6", "2e-6", "7e-7", "3e-7", "2e-7", "4e-8", "2e-8", "6e-9",
    "3e-9", "9e-10", "4e-10", "2e-10", "5e-11", "2e-11", "7e-12", "3e-12", "1e-12", "4e-13",
    "2e-13", "6e-14", "3e-14", "9e-15", "5e-15", "2e-15", "8e-16", "2e-16",
)  # fmt: skip

#: s_i - 1 for i = 1..38 as printed (truncated to ten significant digits).
FIGURE1_S_MINUS_1 = (
    "7.146171809e-1", "1.940660944e-1", "7.478824327e-2", "2.743232714e-2", "1.050775991e-2",
    "3.990473545e-3", "1.524905897e-3", "5.819727416e-4", "2.223084584e-4", "8.490386498e-5",
    "3.243070303e-5", "1.238720471e-5", "4.731497826e-6", "1.807266635e-6", "6.903145697e-7",
    "2.636766023e-7", "1.007155030e-7", "3.846989684e-8", "1.469419311e-8", "5.612682286e-9",
    "2.143853866e-9", "8.188793092e-10", "3.127840634e-10", "1.194728810e-10", "4.563457984e-11",
    "1.743085843e-11", "6.657995469e-12", "2.543127972e-12", "9.713884477e-13", "3.710373707e-13",
    "1.417236645e-13", "5.413362284e-14", "2.067720399e-14", "7.897989132e-15", "3.016763405e-15",
    "1.152301085e-15", "4.401398491e-16", "1.681184625e-16",
)  # fmt: skip

#: Largest n the figure1 preset supports; index n-1 = 39 falls back to the auto rule.
FIGURE1_MAX_N = 40

AUTO_T1 = Fraction(9, 5)

#: Precision used for the s_i enclosures when validating schedules.
SCHEDULE_CTX = PrecisionContext(96, 4096)


class ScheduleError(ValueError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class InterlacingError(ScheduleError):
    pass


@dataclass(frozen=True)
class TSchedule:
    n: int
    t: tuple[Fraction, ...]
    s: tuple[BoundedReal, ...]
    mode: str

    def t_minus_1(self) -> list[str]:
        return [decimal_string(v - 1) for v in self.t]

    def __len__(self) -> int:
        return len(self.t)


def decimal_string(q) -> str:
    """Exact shortest decimal for a rational with a terminating expansion."""
    f = Fraction(q) if not isinstance(q, Fraction) else q
    d = f.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        raise ValueError(f"{f} has no terminating decimal expansion")
    scale = max(twos, fives)
    digits = f.numerator * 10**scale // f.denominator
    text = str(Decimal(digits).scaleb(-scale).normalize())
    if "E" in text:
        mant, exp = text.split("E")
        return f"{mant}e{int(exp)}"
    return text


def _s_enclosures(n: int, ctx: PrecisionContext) -> list[BoundedReal]:
    """s_1..s_{n-1}, escalating until consecutive enclosures are disjoint."""
    for c in ctx.ladder():
        s = [solve_s(i, c) for i in range(1, n)]
        if all(s[i + 1].certainly_lt(s[i]) for i in range(len(s) - 1)):
            return s
    raise ScheduleError(f"cannot separate s_1..s_{n - 1} at {ctx.max_bits} bits")


def _compare(t: Fraction, s_of, i: int, ctx: PrecisionContext) -> int:
    """Sign of t - s_i, certified with escalation; 0 only if t == s_i to the ceiling."""
    q = mpq(t.numerator, t.denominator)
    for c in ctx.ladder():
        s = s_of(i, c)
        if q > s.hi:
            return 1
        if q < s.lo:
            return -1
    return 0


def _interlaces(t: Fraction, i: int, s_of, ctx: PrecisionContext) -> bool | None:
    """True when s_i < t < s_{i-1} (t > s_1 for i = 1) is certified, False on violation."""
    above = _compare(t, s_of, i, ctx)
    below = -1 if i == 1 else _compare(t, s_of, i - 1, ctx)
    if above > 0 and below < 0:
        return True
    if above < 0 or below > 0:
        return False
    return None


def _s_of(i: int, c: PrecisionContext) -> BoundedReal:
    return solve_s(i, c)


def round_up_one_digit(x) -> Fraction:
    """Smallest d * 10^e (d = 1..9) strictly above the positive rational x."""
    xf = exact_rational(x)
    if xf <= 0:
        raise ValueError("expected a positive value")
    e = 0
    while Fraction(10) ** (e + 1) <= xf:
        e += 1
    while Fraction(10) ** e > xf:
        e -= 1
    unit = Fraction(10) ** e
    return (xf // unit + 1) * unit


def _short_mean(i: int, ctx: PrecisionContext) -> Fraction:
    """Mean of s_i and s_{i-1}, shortened to the fewest significant digits that still interlace."""
    delta = (exact_rational(solve_s(i, ctx).mid) + exact_rational(solve_s(i - 1, ctx).mid)) / 2 - 1
    for digits in range(1, 60):
        cand = 1 + parse_decimal(format_sig(delta, digits))
        if _interlaces(cand, i, _s_of, ctx):
            return cand
    raise ScheduleError(f"no decimal t_{i} found between s_{i} and s_{i - 1}", i)


def _auto_t(i: int, ctx: PrecisionContext) -> Fraction:
    if i == 1:
        return AUTO_T1
    for c in ctx.ladder():
        s = solve_s(i, c)
        s_minus_1 = mpq(s.mid) - 1
        cand = 1 + round_up_one_digit(s_minus_1)
        verdict = _interlaces(cand, i, _s_of, c)
        if verdict is True:
            return cand
        if verdict is False:
            break
    return _short_mean(i, ctx)


def validate(n: int, t: Sequence[Fraction], ctx: PrecisionContext = SCHEDULE_CTX) -> tuple[BoundedReal, ...]:
    """Check length, strict decrease, and interlacing; return the s enclosures used."""
    if len(t) != n - 1:
        raise ScheduleError(f"schedule for n={n} needs {n - 1} values, got {len(t)}")
    for i in range(len(t) - 1):
        if not t[i] > t[i + 1]:
            raise InterlacingError(f"t_{i + 1} <= t_{i + 2}: schedule must strictly decrease", i + 2)
    s = _s_enclosures(n, ctx)
    for i in range(1, n):
        verdict = _interlaces(t[i - 1], i, _s_of, ctx)
        if verdict is not True:
            lhs = f"s_{i} < t_{i}" + (f" < s_{i - 1}" if i > 1 else "")
            why = "violated" if verdict is False else "could not be certified"
            raise InterlacingError(f"interlacing {lhs} {why} (t_{i} - 1 = {decimal_string(t[i - 1] - 1)})", i)
    return tuple(s)


def t_schedule(
    n: int,
    mode: str = "auto",
    ctx: PrecisionContext = SCHEDULE_CTX,
    values: Sequence | None = None,
) -> TSchedule:
    """Build and validate t_1..t_{n-1}.

    ``figure1`` is the verbatim tabulated preset (n <= 40; t_39 comes from the
    auto rule), ``auto`` rounds s_i - 1 up to one significant digit and falls
    back to a shortened midpoint, ``midpoint`` always uses the midpoint, and
    ``file`` validates user-supplied t_i - 1 values passed in ``values``.
    """
    if n < 3:
        raise ScheduleError(f"n must be >= 3, got {n}")
    if mode == "figure1":
        if n > FIGURE1_MAX_N:
            raise ScheduleError(
                f"figure1 preset covers t_1..t_38 plus one extension index; n={n} exceeds {FIGURE1_MAX_N}"
            )
        t = [1 + parse_decimal(v) for v in FIGURE1_T_MINUS_1[: n - 1]]
        t += [_auto_t(i, ctx) for i in range(len(FIGURE1_T_MINUS_1) + 1, n)]
    elif mode == "auto":
        t = [_auto_t(i, ctx) for i in range(1, n)]
    elif mode == "midpoint":
        t = [AUTO_T1] + [_short_mean(i, ctx) for i in range(2, n)]
    elif mode == "file":
        if values is None:
            raise ScheduleError("file mode needs values")
        t = [1 + (v if isinstance(v, Fraction) else parse_decimal(str(v))) for v in values]
    else:
        raise ScheduleError(f"unknown schedule mode {mode!r}; expected one of {', '.join(MODES)}")
    s = validate(n, t, ctx)
    return TSchedule(n, tuple(t), s, mode)


def read_schedule_file(path: str | Path) -> list[Fraction]:
    """Read t_i - 1 values: one decimal per line (``#`` comments) or a certificate JSON."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return [parse_decimal(v) for v in data["schedule"]["t_minus_1"]]
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        out.extend(parse_decimal(tok) for tok in line.replace(",", " ").split())
    return out
