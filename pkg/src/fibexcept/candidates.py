"""Candidate vectors y_n(k, l), the sets F_n and F_n^+, and the lattice V_n^+(Z).

Every vector here solves the two-row system

    A_n x = (f_n, f_{n-1})^T,   A_n = [[f_1 ... f_n], [f_0 ... f_{n-1}]],

and all arithmetic is exact (``Fraction`` entries, ``int`` lattice points).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .fib import fib

#: Largest n for which :func:`enumerate_lattice` runs without ``force=True``.
LATTICE_MAX_N = 25


class IndexRangeError(ValueError):
    """Raised when (n, k, l) or (n, i) indices violate their preconditions."""


class LatticeCapExceeded(RuntimeError):
    """The lattice enumeration hit its point cap before finishing.

    ``partial_count`` is the number of distinct points found, so a caller can
    still use it as a certified lower bound on #V_n^+(Z).
    """

    def __init__(self, n: int, partial_count: int, points: list[tuple[int, ...]]):
        super().__init__(f"lattice enumeration for n={n} exceeded cap after {partial_count} points")
        self.n = n
        self.partial_count = partial_count
        self.points = points


@dataclass(frozen=True)
class CandidateVector:
    """One y_n(k, l). Equality and hashing use the exact entries only."""

    n: int
    k: int = field(compare=False)
    l: int = field(compare=False)
    entries: tuple[Fraction, ...]

    @property
    def support(self) -> tuple[int, ...]:
        """1-based indices of the non-zero entries."""
        return tuple(i + 1 for i, v in enumerate(self.entries) if v)

    @property
    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.entries)

    @property
    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.entries)

    def entry(self, i: int) -> Fraction:
        """1-based access, matching the indexing of the constraint matrix."""
        return self.entries[i - 1]

    def as_strings(self) -> list[str]:
        return [str(v) for v in self.entries]

    def __str__(self) -> str:
        return f"y_{self.n}({self.k},{self.l})"


@dataclass(frozen=True)
class ConstraintSystem:
    n: int
    rows: tuple[tuple[int, ...], tuple[int, ...]]
    target: tuple[int, int]

    def apply(self, x: Sequence) -> tuple:
        r1, r2 = self.rows
        return (sum(a * v for a, v in zip(r1, x)), sum(a * v for a, v in zip(r2, x)))

    def satisfied_by(self, x: Sequence) -> bool:
        return self.apply(x) == self.target


@dataclass(frozen=True)
class KernelVector:
    n: int
    i: int
    entries: tuple[int, ...]


def constraint_system(n: int) -> ConstraintSystem:
    if n < 1:
        raise IndexRangeError(f"n must be >= 1, got {n}")
    row1 = tuple(fib(i) for i in range(1, n + 1))
    row2 = tuple(fib(i - 1) for i in range(1, n + 1))
    return ConstraintSystem(n, (row1, row2), (fib(n), fib(n - 1)))


def _check_pair(n: int, k: int, l: int) -> None:
    if not (1 <= k < l <= n):
        raise IndexRangeError(f"need 1 <= k < l <= n, got n={n}, k={k}, l={l}")


def y_vector(n: int, k: int, l: int) -> CandidateVector:
    """Closed-form y_n(k, l)."""
    if n < 2:
        raise IndexRangeError(f"n must be >= 2, got {n}")
    _check_pair(n, k, l)
    d = fib(l - k)
    sign = -1 if (l - k) % 2 == 0 else 1
    entries = [Fraction(0)] * n
    entries[k - 1] = Fraction(sign * fib(n - l), d)
    entries[l - 1] = Fraction(fib(n - k), d)
    return CandidateVector(n, k, l, tuple(entries))


def _solve_2x2(m: list[list[Fraction]], rhs: list[Fraction]) -> tuple[Fraction, Fraction]:
    # Gaussian elimination with partial pivoting over Q.
    a = [row[:] + [b] for row, b in zip(m, rhs)]
    if abs(a[1][0]) > abs(a[0][0]):
        a[0], a[1] = a[1], a[0]
    if a[0][0] == 0:
        raise ArithmeticError("singular 2x2 system")
    factor = a[1][0] / a[0][0]
    a[1] = [u - factor * v for u, v in zip(a[1], a[0])]
    if a[1][1] == 0:
        raise ArithmeticError("singular 2x2 system")
    x2 = a[1][2] / a[1][1]
    x1 = (a[0][2] - a[0][1] * x2) / a[0][0]
    return x1, x2


def solve_pair(n: int, k: int, l: int) -> tuple[Fraction, Fraction]:
    """Solve [[f_k, f_l], [f_{k-1}, f_{l-1}]] (x1, x2)^T = (f_n, f_{n-1})^T exactly.

    This deliberately does not use the closed form, so it can cross-check
    :func:`y_vector`.
    """
    _check_pair(n, k, l)
    m = [[Fraction(fib(k)), Fraction(fib(l))], [Fraction(fib(k - 1)), Fraction(fib(l - 1))]]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    assert abs(det) == fib(l - k) != 0, "B_{k,l} must have determinant +-f_{l-k}"
    return _solve_2x2(m, [Fraction(fib(n)), Fraction(fib(n - 1))])


def _dedupe(vectors: Iterator[CandidateVector]) -> list[CandidateVector]:
    # Input arrives in (k, l) lexicographic order, so the first occurrence
    # carries the smallest provenance.
    seen: dict[CandidateVector, CandidateVector] = {}
    for v in vectors:
        seen.setdefault(v, v)
    return list(seen.values())


def enumerate_f(n: int) -> list[CandidateVector]:
    """All distinct y_n(k, l), 1 <= k < l <= n."""
    if n < 3:
        raise IndexRangeError(f"n must be >= 3, got {n}")
    return _dedupe(y_vector(n, k, l) for k in range(1, n) for l in range(k + 1, n + 1))


def enumerate_f_plus(n: int) -> list[CandidateVector]:
    """Distinct y_n(k, l) with l - k odd; t_n is among them as y_n(n-1, n)."""
    if n < 3:
        raise IndexRangeError(f"n must be >= 3, got {n}")
    return _dedupe(
        y_vector(n, k, l) for k in range(1, n) for l in range(k + 1, n + 1) if (l - k) % 2 == 1
    )


def t_vector(n: int) -> CandidateVector:
    return y_vector(n, n - 1, n)


# --- lattice oracle -------------------------------------------------------


@lru_cache(maxsize=None)
def _cone_bounds(n: int) -> tuple[tuple[tuple[int, int], tuple[int, int]] | None, ...]:
    """For each start index j (1-based, 2..n) the extreme ratios f_i/f_{i-1}, i >= j.

    Residuals reachable by non-negative real combinations of columns j..n are
    exactly the cone between these two rays (all such columns have f_{i-1} > 0).
    """
    out: list = [None, None]
    for j in range(2, n + 1):
        ratios = [(fib(i), fib(i - 1)) for i in range(j, min(j + 2, n + 1))]
        lo = min(ratios, key=lambda r: Fraction(*r))
        hi = max(ratios, key=lambda r: Fraction(*r))
        out.append((lo, hi))
    out.append(None)
    return tuple(out)


def _x_range(a: int, b: int, r1: int, r2: int, cone) -> tuple[int, int]:
    """Values x >= 0 for which (r1 - a x, r2 - b x) stays in the cone of the later columns.

    ``cone`` is None when no columns remain, in which case the residual must
    vanish. Returns an empty range as (1, 0).
    """
    if cone is None:
        if a == 0:
            return (1, 0) if (r1 or r2) else (0, 0)
        if r1 % a or r2 * a != r1 * b:
            return (1, 0)
        return (r1 // a, r1 // a)
    (pl, ql), (ph, qh) = cone
    lo, hi = 0, r1 // a if a else None
    if b:
        hi = min(hi, r2 // b) if hi is not None else r2 // b
    # u/v >= pl/ql  <=>  u*ql - pl*v >= 0, linear in x with slope -(a*ql - pl*b)
    for c0, c1 in ((r1 * ql - pl * r2, a * ql - pl * b), (ph * r2 - r1 * qh, ph * b - a * qh)):
        # need c0 - x*c1 >= 0
        if c1 > 0:
            hi = min(hi, c0 // c1) if hi is not None else c0 // c1
        elif c1 < 0:
            lo = max(lo, -(c0 // -c1))
        elif c0 < 0:
            return (1, 0)
    if hi is None:
        raise ArithmeticError("unbounded coordinate in lattice search")
    return lo, hi


def iter_lattice(n: int) -> Iterator[tuple[int, ...]]:
    """Yield V_n^+(Z) in lexicographic order (coordinates left to right, ascending)."""
    if n < 3:
        raise IndexRangeError(f"n must be >= 3, got {n}")
    f = [fib(i) for i in range(n + 1)]
    cones = _cone_bounds(n)
    x = [0] * n
    # Explicit stack of (coordinate index j, next value, last value, r1, r2).
    r1, r2 = f[n], f[n - 1]
    lo, hi = _x_range(f[1], f[0], r1, r2, cones[2])
    stack = [[1, lo, hi, r1, r2]]
    while stack:
        top = stack[-1]
        j, v, last, r1, r2 = top
        if v > last:
            stack.pop()
            continue
        top[1] = v + 1
        x[j - 1] = v
        nr1, nr2 = r1 - f[j] * v, r2 - f[j - 1] * v
        if j == n:
            if nr1 == 0 and nr2 == 0:
                yield tuple(x)
            continue
        lo, hi = _x_range(f[j + 1], f[j], nr1, nr2, cones[j + 2])
        if lo <= hi:
            stack.append([j + 1, lo, hi, nr1, nr2])


def enumerate_lattice(n: int, limit: int | None = None, force: bool = False) -> list[tuple[int, ...]]:
    """Return the complete set V_n^+(Z) as sorted tuples.

    Raises :class:`LatticeCapExceeded` once more than ``limit`` points exist;
    the exception carries the first ``limit`` points.
    """
    if n < 3:
        raise IndexRangeError(f"n must be >= 3, got {n}")
    if n > LATTICE_MAX_N and not force:
        raise IndexRangeError(
            f"enumerate_lattice refuses n={n} > {LATTICE_MAX_N}; #V_n^+(Z) grows at least like f_n"
        )
    points: list[tuple[int, ...]] = []
    for p in iter_lattice(n):
        if limit is not None and len(points) >= limit:
            raise LatticeCapExceeded(n, len(points), points)
        points.append(p)
    return points


def count_lattice(n: int) -> int:
    """#V_n^+(Z) by memoised counting over residuals (no enumeration).

    Independent of :func:`iter_lattice`: it walks coordinates from x_n down
    and lets x_1 absorb the rest of the first row.
    """
    f = [fib(i) for i in range(n + 1)]

    @lru_cache(maxsize=None)
    def count(j: int, r1: int, r2: int) -> int:
        if j == 1:
            return 1 if r2 == 0 and r1 >= 0 else 0
        total, v = 0, 0
        while f[j] * v <= r1 and f[j - 1] * v <= r2:
            total += count(j - 1, r1 - f[j] * v, r2 - f[j - 1] * v)
            v += 1
        return total

    return count(n, f[n], f[n - 1])


def kernel_vector(n: int, i: int) -> KernelVector:
    if not (1 <= i <= n - 2):
        raise IndexRangeError(f"need 1 <= i <= n-2, got n={n}, i={i}")
    e = [0] * n
    e[i - 1] = e[i] = -1
    e[i + 1] = 1
    return KernelVector(n, i, tuple(e))


def kernel_family(n: int, i: int) -> tuple[KernelVector, list[tuple[int, ...]]]:
    """b_n(i) and the family {y_n(i, i+1) + k b_n(i) : 0 <= k < f_{n-i-1}}."""
    b = kernel_vector(n, i)
    base = y_vector(n, i, i + 1)
    assert base.is_integral
    start = [int(v) for v in base.entries]
    system = constraint_system(n)
    assert system.apply(b.entries) == (0, 0)
    family = []
    for k in range(fib(n - i - 1)):
        p = tuple(s + k * d for s, d in zip(start, b.entries))
        if min(p) < 0 or not system.satisfied_by(p):
            raise AssertionError(f"family member {p} of Lambda_{n}({i}) is not in V_n^+(Z)")
        family.append(p)
    return b, family


# --- cardinalities --------------------------------------------------------


def cardinality_f(n: int) -> int:
    if n < 3:
        raise IndexRangeError(f"n must be >= 3, got {n}")
    return (n * n - 3 * n + 4) // 2


def cardinality_f_plus(n: int) -> int:
    if n < 3:
        raise IndexRangeError(f"n must be >= 3, got {n}")
    if n % 2:
        return (n * n - 2 * n + 5) // 4
    return (n * n - 2 * n + 4) // 4


def cardinality_search_space(n: int) -> int:
    """#(F_n^+ x T_n) with #T_n = n - 1."""
    if n < 3:
        raise IndexRangeError(f"n must be >= 3, got {n}")
    if n % 2:
        value = (n**3 - 3 * n**2 + 7 * n - 5) // 4
    else:
        value = (n**3 - 3 * n**2 + 6 * n - 4) // 4
    assert value == cardinality_f_plus(n) * (n - 1)
    return value
