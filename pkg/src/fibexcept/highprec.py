"""Certified evaluation of the weighted objectives G_x(t) and H_{x,k}(t), and of s_i.

The weights are w_i = max{f_i, phi f_{i-1}}: w_i = f_i for odd i and
phi f_{i-1} for even i. The parity rule is checked by interval comparison the
first time each index is used.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Union

from gmpy2 import mpq

from .bounded import (
    BoundedReal,
    PrecisionContext,
    PrecisionExhausted,
    golden_ratio,
    to_mpq,
    weighted_sum,
)
from .candidates import CandidateVector
from .fib import fib

TValue = Union[BoundedReal, Fraction, int, str]
PsiSource = Union[BoundedReal, Callable[[PrecisionContext], BoundedReal]]

#: Bits of slack between the working precision and the target radius of s_i.
S_GUARD_BITS = 8

_parity_checked: set[int] = set()


class AmbiguousMax(ArithmeticError):
    """f_j and psi f_{j-1} could not be ordered at the precision ceiling."""

    def __init__(self, j: int, bits: int):
        super().__init__(f"cannot separate f_{j} from psi*f_{j - 1} at {bits} bits")
        self.j = j
        self.bits = bits


class BracketFailure(ArithmeticError):
    """The sign change h(1) < 0 < h(2) could not be certified."""


def _check_parity(i: int, ctx: PrecisionContext) -> None:
    if i in _parity_checked or i == 1:
        return
    for c in ctx.at(max(ctx.bits, 64)).ladder():
        other = golden_ratio(c) * fib(i - 1)
        fi = BoundedReal.exact(fib(i), c.bits)
        if fi.certainly_gt(other):
            if i % 2 == 0:
                raise AssertionError(f"parity rule broken: f_{i} > phi f_{i - 1} for even i")
            break
        if fi.certainly_lt(other):
            if i % 2 == 1:
                raise AssertionError(f"parity rule broken: f_{i} < phi f_{i - 1} for odd i")
            break
    else:
        raise PrecisionExhausted(f"cannot order f_{i} and phi f_{i - 1}")
    _parity_checked.add(i)


def weight(i: int, ctx: PrecisionContext) -> BoundedReal:
    """max{f_i, phi f_{i-1}}: exact f_i for odd i, phi f_{i-1} for even i."""
    if i < 1:
        raise ValueError(f"weight index must be >= 1, got {i}")
    _check_parity(i, ctx)
    return _weight(i, ctx.bits)


@lru_cache(maxsize=None)
def _weight(i: int, bits: int) -> BoundedReal:
    if i % 2:
        return BoundedReal.exact(fib(i), bits)
    return golden_ratio(PrecisionContext(bits, max(bits, 1024))) * fib(i - 1)


@lru_cache(maxsize=None)
def _log_weight(i: int, bits: int) -> BoundedReal:
    return _weight(i, bits).log()


def as_bounded(t: TValue, ctx: PrecisionContext) -> BoundedReal:
    if isinstance(t, BoundedReal):
        return t
    return BoundedReal.exact(t, ctx.bits)


def weight_powers(n: int, t: TValue, ctx: PrecisionContext) -> list[BoundedReal]:
    """[w_1^t, ..., w_n^t] sharing one conversion of t."""
    tb = as_bounded(t, ctx)
    out = []
    for i in range(1, n + 1):
        _check_parity(i, ctx)
        out.append((tb * _log_weight(i, ctx.bits)).exp())
    return out


def _entries(x) -> Sequence:
    return x.entries if isinstance(x, CandidateVector) else x


def g_eval(x, t: TValue, ctx: PrecisionContext) -> BoundedReal:
    """G_x(t) = sum_i x_i w_i^t, summed in ascending i."""
    entries = _entries(x)
    powers = weight_powers(len(entries), t, ctx)
    return weighted_sum(entries, powers, ctx.bits)


def g_eval_with(entries: Sequence, powers: Sequence[BoundedReal], bits: int) -> BoundedReal:
    """G_x(t) from precomputed weight powers (only the support of x is touched)."""
    idx = [i for i, v in enumerate(entries) if v]
    return weighted_sum([entries[i] for i in idx], [powers[i] for i in idx], bits)


def _psi_at(psi: PsiSource, ctx: PrecisionContext) -> BoundedReal:
    return psi(ctx) if callable(psi) else psi


def psi_weights(n: int, psi: PsiSource, ctx: PrecisionContext) -> list[BoundedReal]:
    """[max{f_j, psi f_{j-1}} for j = 1..n], each max certified by interval comparison."""
    out: list[BoundedReal] = []
    for j in range(1, n + 1):
        if j == 1:
            out.append(BoundedReal.exact(1, ctx.bits))
            continue
        for c in ctx.ladder():
            p = _psi_at(psi, c)
            scaled = p * fib(j - 1)
            fj = BoundedReal.exact(fib(j), c.bits)
            if fj.certainly_gt(scaled):
                out.append(BoundedReal.exact(fib(j), ctx.bits))
                break
            if fj.certainly_lt(scaled):
                out.append(scaled if c.bits == ctx.bits else _psi_at(psi, ctx) * fib(j - 1))
                break
            if not callable(psi):
                raise AmbiguousMax(j, c.bits)
        else:
            raise AmbiguousMax(j, ctx.max_bits)
    return out


def psi_weight_powers(n: int, psi: PsiSource, t: TValue, ctx: PrecisionContext) -> list[BoundedReal]:
    tb = as_bounded(t, ctx)
    return [w ** tb for w in psi_weights(n, psi, ctx)]


def h_eval(x, psi: PsiSource, t: TValue, ctx: PrecisionContext) -> BoundedReal:
    """H(t) = sum_j x_j max{f_j, psi f_{j-1}}^t.

    ``psi`` is either a fixed enclosure or a callable returning one at a given
    precision; only the callable form can be re-evaluated when a max is tied.
    """
    entries = _entries(x)
    powers = psi_weight_powers(len(entries), psi, t, ctx)
    return weighted_sum(entries, powers, ctx.bits)


# --- s_i ------------------------------------------------------------------


def _h_three(i: int, s: BoundedReal, bits: int) -> BoundedReal:
    lw = [_log_weight(i + d, bits) for d in range(3)]
    p = [(s * w).exp() for w in lw]
    return p[2] - p[1] - p[0]


def s_residual(i: int, s: TValue, ctx: PrecisionContext) -> BoundedReal:
    """w_{i+2}^s - w_{i+1}^s - w_i^s; vanishes exactly at s = s_i."""
    for d in range(3):
        _check_parity(i + d, ctx)
    return _h_three(i, as_bounded(s, ctx), ctx.bits)


def solve_s(i: int, ctx: PrecisionContext) -> BoundedReal:
    """Enclose s_i with radius <= 2^-(bits - S_GUARD_BITS) by certified bisection on [1, 2]."""
    if i < 1:
        raise ValueError(f"s index must be >= 1, got {i}")
    return _solve_s(i, ctx.bits, ctx.max_bits)


@lru_cache(maxsize=None)
def _solve_s(i: int, bits: int, max_bits: int) -> BoundedReal:
    ctx = PrecisionContext(bits, max_bits)
    for d in range(3):
        _check_parity(i + d, ctx)
    target = mpq(1, 2 ** (bits - S_GUARD_BITS))
    lo, hi = mpq(1), mpq(2)

    work = ctx
    while True:
        if _h_three(i, BoundedReal.exact(lo, work.bits), work.bits).certainly_negative() and _h_three(
            i, BoundedReal.exact(hi, work.bits), work.bits
        ).certainly_positive():
            break
        if not work.can_escalate:
            raise BracketFailure(f"cannot certify h(1) < 0 < h(2) for s_{i} at {work.bits} bits")
        work = work.escalate()

    while hi - lo > target:
        mid = (lo + hi) / 2
        sign = _h_three(i, BoundedReal.exact(mid, work.bits), work.bits).sign()
        if sign < 0:
            lo = mid
        elif sign > 0:
            hi = mid
        elif work.can_escalate:
            work = work.escalate()
        else:
            break
    return BoundedReal.from_bounds(lo, hi, bits)


def s_minus_one(i: int, ctx: PrecisionContext) -> BoundedReal:
    return solve_s(i, ctx) - 1


def exact_rational(value) -> Fraction:
    q = to_mpq(value)
    return Fraction(int(q.numerator), int(q.denominator))
