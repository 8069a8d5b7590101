"""Independent reference computations used only by the tests.

Nothing here imports the package under test: Fibonacci numbers come from
fast doubling, weights and s_i from mpmath at 80 digits, lattice points from
plain itertools brute force.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath

DPS = 80


def fib_doubling(n: int) -> int:
    def go(k):
        if k == 0:
            return 0, 1
        a, b = go(k >> 1)
        c = a * (2 * b - a)
        d = a * a + b * b
        return (d, c + d) if k & 1 else (c, d)

    return go(n)[0]


def phi():
    with mpmath.workdps(DPS):
        return (1 + mpmath.sqrt(5)) / 2


def weight(i: int):
    with mpmath.workdps(DPS):
        a, b = mpmath.mpf(fib_doubling(i)), phi() * fib_doubling(i - 1)
        return max(a, b)


def psi_weight(j: int, psi):
    with mpmath.workdps(DPS):
        return max(mpmath.mpf(fib_doubling(j)), psi * fib_doubling(j - 1))


def g_value(entries, t):
    with mpmath.workdps(DPS):
        t = mpmath.mpf(Fraction(t).numerator) / Fraction(t).denominator
        total = mpmath.mpf(0)
        for i, x in enumerate(entries, start=1):
            if x:
                x = Fraction(x)
                total += mpmath.mpf(x.numerator) / x.denominator * weight(i) ** t
        return total


def h_value(entries, p, q, t):
    with mpmath.workdps(DPS):
        psi = mpmath.log(q) / mpmath.log(p)
        t = mpmath.mpf(Fraction(t).numerator) / Fraction(t).denominator
        total = mpmath.mpf(0)
        for j, x in enumerate(entries, start=1):
            if x:
                x = Fraction(x)
                total += mpmath.mpf(x.numerator) / x.denominator * psi_weight(j, psi) ** t
        return total


def s_value(i: int):
    """Root of w_{i+2}^s = w_{i+1}^s + w_i^s on (1, 2] with mpmath (Anderson bracketing)."""
    with mpmath.workdps(DPS):
        a, b, c = weight(i), weight(i + 1), weight(i + 2)
        f = lambda s: c**s - b**s - a**s  # noqa: E731
        return mpmath.findroot(f, (mpmath.mpf(1), mpmath.mpf(2)), solver="anderson")


def lattice_brute(n: int) -> list[tuple[int, ...]]:
    """Every non-negative integer x with A_n x = (f_n, f_{n-1}), by box search."""
    f = [fib_doubling(i) for i in range(n + 1)]
    ranges = [range(f[n] // f[i] + 1) for i in range(1, n + 1)]
    out = []
    for x in itertools.product(*ranges):
        if sum(v * f[i + 1] for i, v in enumerate(x)) == f[n] and sum(v * f[i] for i, v in enumerate(x)) == f[n - 1]:
            out.append(x)
    return sorted(out)


def y_closed(n: int, k: int, l: int) -> tuple[Fraction, ...]:
    f = fib_doubling
    e = [Fraction(0)] * n
    e[k - 1] = Fraction((-1) ** (l - k + 1) * f(n - l), f(l - k))
    e[l - 1] = Fraction(f(n - k), f(l - k))
    return tuple(e)
