"""Certified minimisation of G over F_n^+ and the checks built on it.

For each scheduled t_i we find the minimiser of G_x(t_i) over F_n^+ and
certify that it is unique (every other candidate's enclosure lies strictly
above). Overlaps trigger precision doubling up to ``max_bits``; anything still
overlapping is reported as ambiguous, never silently resolved.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .bounded import BoundedReal, PrecisionContext, golden_ratio, parse_decimal
from .candidates import (
    LATTICE_MAX_N,
    CandidateVector,
    enumerate_f_plus,
    enumerate_lattice,
    y_vector,
)
from .fib import fib
from .highprec import (
    TValue,
    as_bounded,
    g_eval_with,
    psi_weight_powers,
    weight_powers,
)
from .schedule import TSchedule

log = logging.getLogger(__name__)

UNIQUE = "unique"
AMBIGUOUS = "ambiguous"

#: Largest n accepted by the lattice oracle.
ORACLE_MAX_N = 20


@dataclass(frozen=True)
class MinimizationResult:
    i: int
    t: TValue
    argmin: CandidateVector
    min_value: BoundedReal
    runner_up: CandidateVector | None
    runner_up_gap: BoundedReal | None
    status: str
    bits_used: int
    tied: tuple[CandidateVector, ...] = ()

    @property
    def unique(self) -> bool:
        return self.status == UNIQUE


@dataclass(frozen=True)
class Certificate:
    n: int
    schedule: TSchedule
    precision: PrecisionContext
    results: tuple[MinimizationResult, ...]
    verdict_A: bool
    verdict_B: bool
    verdict_C: bool
    expected_pattern_matched: bool
    ambiguous_indices: tuple[int, ...]

    @property
    def holds(self) -> bool:
        return self.verdict_A and self.verdict_B and self.verdict_C

    @property
    def exceptional_points_at_least(self) -> int | None:
        return self.n - 2 if self.holds else None

    @property
    def conclusion(self) -> str | None:
        if not self.holds:
            return None
        k = self.n - 2
        noun = "exceptional point" if k == 1 else "exceptional points"
        return (
            f">= {k} {noun} for infinitely many p^{fib(self.n)}/q^{fib(self.n - 1)} "
            f"(p, q prime, n = {self.n})"
        )


def _pick(values: Sequence[BoundedReal]) -> int:
    # smallest midpoint; ties go to the earlier candidate
    best = 0
    for j in range(1, len(values)):
        if values[j].mid < values[best].mid:
            best = j
    return best


def certified_argmin(values: Sequence[BoundedReal]):
    """Return (best index, runner-up index, gap, tied indices) for one evaluation pass."""
    best = _pick(values)
    gaps = [(values[j] - values[best], j) for j in range(len(values)) if j != best]
    if not gaps:
        return best, None, None, []
    gap, runner = min(gaps, key=lambda g: (g[0].lo, g[1]))
    tied = [j for d, j in gaps if not d.certainly_positive()]
    return best, runner, gap, tied


def _minimize(candidates, evaluate, ctx: PrecisionContext, i: int, t) -> MinimizationResult:
    for c in ctx.ladder():
        values = evaluate(c)
        best, runner, gap, tied = certified_argmin(values)
        if not tied:
            break
        log.debug("index %s: %d candidates tie at %d bits", i, len(tied), c.bits)
    status = AMBIGUOUS if tied else UNIQUE
    return MinimizationResult(
        i=i,
        t=t,
        argmin=candidates[best],
        min_value=values[best],
        runner_up=candidates[runner] if runner is not None else None,
        runner_up_gap=gap,
        status=status,
        bits_used=c.bits,
        tied=tuple(candidates[j] for j in tied),
    )


def minimize_over_fplus(
    n: int,
    t: TValue,
    ctx: PrecisionContext = PrecisionContext(),
    i: int = 0,
    candidates: Sequence[CandidateVector] | None = None,
) -> MinimizationResult:
    """Certified argmin of G_x(t) over F_n^+."""
    cands = list(candidates) if candidates is not None else enumerate_f_plus(n)

    def evaluate(c: PrecisionContext) -> list[BoundedReal]:
        powers = weight_powers(n, t, c)
        return [g_eval_with(x.entries, powers, c.bits) for x in cands]

    return _minimize(cands, evaluate, ctx, i, t)


def verify_main(n: int, schedule: TSchedule, ctx: PrecisionContext = PrecisionContext()) -> Certificate:
    """Check hypotheses (A), (B), (C) at every scheduled t_i."""
    if schedule.n != n or len(schedule.t) != n - 1:
        raise ValueError(f"schedule is for n={schedule.n} with {len(schedule.t)} points; need n={n}")
    cands = enumerate_f_plus(n)
    results = tuple(
        minimize_over_fplus(n, t, ctx, i=i, candidates=cands) for i, t in enumerate(schedule.t, start=1)
    )
    ambiguous = tuple(r.i for r in results if not r.unique)
    verdict_a = not ambiguous
    # (B) and (C) are only asserted for certified minimisers.
    verdict_b = all(r.unique and r.argmin.is_integral for r in results)
    verdict_c = all(
        a.unique and b.unique and a.argmin != b.argmin for a, b in zip(results, results[1:])
    )
    pattern = all(r.argmin == y_vector(n, r.i, r.i + 1) for r in results)
    return Certificate(n, schedule, ctx, results, verdict_a, verdict_b, verdict_c, pattern, ambiguous)


# --- lattice oracle -------------------------------------------------------


@lru_cache(maxsize=4)
def lattice_matrix(n: int, limit: int | None = None, force: bool = False) -> np.ndarray:
    """V_n^+(Z) as a read-only int64 array, one point per row, lexicographic order."""
    pts = np.array(enumerate_lattice(n, limit=limit, force=force), dtype=np.int64)
    pts.setflags(write=False)
    return pts


# Generous relative bound on float64 dot-product error for n <= 25 terms
# (gamma_n ~ 25 * 2^-53 ~ 3e-15, plus weight conversion error).
_FLOAT_REL_ERR = 1e-12
_SCREEN_MARGIN = 1e-9


def _fixed_point(values: Sequence[BoundedReal], scale_bits: int) -> tuple[list[int], list[int]]:
    scale = mpq(2) ** scale_bits
    lo = [int(math.floor(v.lo * scale)) for v in values]
    hi = [int(math.ceil(v.hi * scale)) for v in values]
    return lo, hi


@dataclass(frozen=True)
class LatticeMin:
    value: BoundedReal
    argmin: tuple[int, ...]
    unique: bool
    screened: int
    size: int


def lattice_minimum(points: np.ndarray, powers: Sequence[BoundedReal], bits: int) -> LatticeMin:
    """Brute-force min of sum_i x_i w_i over every row of ``points``.

    A float64 pass discards points whose value is certainly above the minimum
    (relative error <= 1e-12 vs a 1e-9 screening margin); survivors are then
    evaluated exactly with fixed-point integer enclosures of the weights.
    """
    approx = points.astype(np.float64) @ np.array([float(p.mid) for p in powers])
    vmin = float(approx.min())
    keep = np.nonzero(approx <= vmin * (1 + _SCREEN_MARGIN))[0]
    scale_bits = bits + 16
    lo_w, hi_w = _fixed_point(powers, scale_bits)
    best_hi, best_row = None, None
    lows: list[tuple[int, int]] = []
    for r in keep.tolist():
        row = points[r].tolist()
        lo = sum(x * w for x, w in zip(row, lo_w) if x)
        hi = sum(x * w for x, w in zip(row, hi_w) if x)
        lows.append((lo, r))
        if best_hi is None or hi < best_hi:
            best_hi, best_row = hi, r
    lows.sort()
    min_lo = lows[0][0]
    other_lo = next((lo for lo, r in lows if r != best_row), None)
    # Non-survivors exceed vmin (1 + margin)(1 - err) > vmin (1 + err) >= the minimum.
    unique = other_lo is None or best_hi < other_lo
    scale = mpq(2) ** scale_bits
    value = BoundedReal.from_bounds(mpq(min_lo) / scale, mpq(best_hi) / scale, bits)
    return LatticeMin(value, tuple(points[best_row].tolist()), unique, len(keep), len(points))


@dataclass(frozen=True)
class OracleReport:
    n: int
    t: TValue
    lattice_min: BoundedReal
    fplus_min: BoundedReal
    lattice_argmin: tuple[int, ...]
    fplus_argmin: CandidateVector
    lattice_unique: bool
    fplus_status: str
    lattice_size: int
    equal: bool
    unique_match: bool | None


def oracle_crosscheck(
    n: int,
    t: TValue,
    ctx: PrecisionContext = PrecisionContext(),
    i: int = 0,
    max_n: int = ORACLE_MAX_N,
    limit: int | None = None,
) -> OracleReport:
    """Compare the F_n^+ minimum with a brute-force minimum over V_n^+(Z).

    ``max_n`` widens the accepted range (past 25 it also lifts the
    enumeration guard); ``limit`` caps the number of lattice points.
    """
    if not (3 <= n <= max_n):
        raise ValueError(f"oracle range is 3 <= n <= {max_n}, got n={n}")
    points = lattice_matrix(n, limit, n > LATTICE_MAX_N)
    fres = minimize_over_fplus(n, t, ctx, i=i)
    c = ctx.at(fres.bits_used)
    lat = lattice_minimum(points, weight_powers(n, t, c), c.bits)
    equal = lat.value.overlaps(fres.min_value)
    unique_match = None
    if fres.argmin.is_integral:
        unique_match = tuple(int(v) for v in fres.argmin.entries) == lat.argmin
    return OracleReport(
        n=n,
        t=t,
        lattice_min=lat.value,
        fplus_min=fres.min_value,
        lattice_argmin=lat.argmin,
        fplus_argmin=fres.argmin,
        lattice_unique=lat.unique,
        fplus_status=fres.status,
        lattice_size=lat.size,
        equal=equal,
        unique_match=unique_match,
    )


def oracle_crosscheck_schedule(
    n: int,
    schedule: TSchedule,
    ctx: PrecisionContext = PrecisionContext(),
    max_n: int = ORACLE_MAX_N,
    limit: int | None = None,
) -> list[OracleReport]:
    return [
        oracle_crosscheck(n, t, ctx, i=i, max_n=max_n, limit=limit)
        for i, t in enumerate(schedule.t, start=1)
    ]


# --- prime pairs and switch profiling --------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime_u64(m: int) -> bool:
    """Deterministic Miller-Rabin, valid for m < 2^64."""
    if m < 2:
        return False
    for p in _MR_BASES:
        if m % p == 0:
            return m == p
    d, r = m - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(r - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimePairContext:
    """(p, q, n) standing for alpha = p^{f_n} / q^{f_{n-1}}; psi = log q / log p.

    ``p = q = None`` is the synthetic pair with psi = phi exactly.
    """

    p: int | None
    q: int | None
    n: int
    unchecked: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if self.synthetic:
            return
        if self.p is None or self.q is None:
            raise ValueError("give both p and q, or neither for the synthetic psi = phi pair")
        if self.p < 2 or self.q < 2 or self.p == self.q:
            raise ValueError(f"need distinct p, q >= 2, got p={self.p}, q={self.q}")
        unchecked = False
        for v in (self.p, self.q):
            if v < 2**64:
                if not is_prime_u64(v):
                    raise ValueError(f"{v} is not prime")
            else:
                unchecked = True
        object.__setattr__(self, "unchecked", unchecked)

    @classmethod
    def synthetic_phi(cls, n: int) -> "PrimePairContext":
        return cls(None, None, n)

    @property
    def synthetic(self) -> bool:
        return self.p is None and self.q is None

    def psi(self, ctx: PrecisionContext) -> BoundedReal:
        if self.synthetic:
            return golden_ratio(ctx)
        return BoundedReal.exact(self.q, ctx.bits).log() / BoundedReal.exact(self.p, ctx.bits).log()

    def log_p(self, ctx: PrecisionContext) -> BoundedReal | None:
        return None if self.synthetic else BoundedReal.exact(self.p, ctx.bits).log()


@dataclass(frozen=True)
class GridSample:
    t: Fraction
    argmin: object
    status: str
    min_value: BoundedReal
    measure_candidate: BoundedReal | None
    bits_used: int


@dataclass(frozen=True)
class SwitchInterval:
    t_left: Fraction
    t_right: Fraction
    argmin_before: object
    argmin_after: object


@dataclass(frozen=True)
class SwitchProfile:
    pair: PrimePairContext
    candidate_set: str
    samples: tuple[GridSample, ...]
    switches: tuple[SwitchInterval, ...]
    caveat: str


MEASURE_CAVEAT = (
    "measure values are candidates: (min H)^(1/t) * log p equals m_t(alpha) only for "
    "prime pairs beyond a non-effective threshold; switch intervals witness exceptional "
    "points under the same condition"
)


def _candidate_set(n: int, which: str):
    if which == "fplus":
        return enumerate_f_plus(n)
    if which == "lattice":
        if n > ORACLE_MAX_N:
            raise ValueError(f"lattice candidate set needs n <= {ORACLE_MAX_N}")
        return lattice_matrix(n)
    raise ValueError(f"unknown candidate set {which!r}")


def _h_values(cands, powers, bits):
    return [g_eval_with(c.entries if isinstance(c, CandidateVector) else c, powers, bits) for c in cands]


def _minimize_lattice(points: np.ndarray, pair: PrimePairContext, t, ctx: PrecisionContext, k: int):
    for c in ctx.ladder():
        lat = lattice_minimum(points, psi_weight_powers(pair.n, pair.psi, t, c), c.bits)
        if lat.unique:
            break
    return MinimizationResult(
        i=k,
        t=t,
        argmin=lat.argmin,
        min_value=lat.value,
        runner_up=None,
        runner_up_gap=None,
        status=UNIQUE if lat.unique else AMBIGUOUS,
        bits_used=c.bits,
    )


def _exact(v) -> Fraction:
    return parse_decimal(v) if isinstance(v, str) else Fraction(v)


def switch_profile(
    pair: PrimePairContext,
    t_lo,
    t_hi,
    grid_size: int,
    ctx: PrecisionContext = PrecisionContext(),
    candidate_set: str = "fplus",
) -> SwitchProfile:
    """Scan H over a uniform t-grid and bracket every change of certified argmin."""
    lo, hi = _exact(t_lo), _exact(t_hi)
    if not (0 < lo < hi):
        raise ValueError("need 0 < t_lo < t_hi")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    n = pair.n
    cands = _candidate_set(n, candidate_set)
    caveat = MEASURE_CAVEAT
    if candidate_set == "fplus":
        caveat += "; minimised over F_n^+ rather than V_n^+(Z)"

    samples = []
    for k in range(grid_size):
        t = lo + (hi - lo) * k / (grid_size - 1)
        if candidate_set == "lattice":
            res = _minimize_lattice(cands, pair, t, ctx, k)
        else:

            def evaluate(c: PrecisionContext, t=t):
                return _h_values(cands, psi_weight_powers(n, pair.psi, t, c), c.bits)

            res = _minimize(cands, evaluate, ctx, k, t)
        measure = None
        logp = pair.log_p(ctx)
        if logp is not None:
            measure = (res.min_value.log() / as_bounded(t, ctx)).exp() * logp
        samples.append(GridSample(t, res.argmin, res.status, res.min_value, measure, res.bits_used))

    certified = [s for s in samples if s.status == UNIQUE]
    switches = tuple(
        SwitchInterval(a.t, b.t, a.argmin, b.argmin)
        for a, b in zip(certified, certified[1:])
        if a.argmin != b.argmin
    )
    return SwitchProfile(pair, candidate_set, tuple(samples), switches, caveat)


def refine_switch(
    pair: PrimePairContext,
    switch: SwitchInterval,
    ctx: PrecisionContext = PrecisionContext(),
    iterations: int = 40,
) -> tuple[Fraction, Fraction]:
    """Bisect on the sign of H_before - H_after to narrow a switch bracket.

    Only the two bracketing minimisers are compared, so the result locates
    their crossing, not necessarily a change of the global argmin.
    """
    a, b = switch.argmin_before, switch.argmin_after
    ea = a.entries if isinstance(a, CandidateVector) else a
    eb = b.entries if isinstance(b, CandidateVector) else b
    n = pair.n

    def diff_sign(t: Fraction) -> int:
        for c in ctx.ladder():
            powers = psi_weight_powers(n, pair.psi, t, c)
            s = (g_eval_with(ea, powers, c.bits) - g_eval_with(eb, powers, c.bits)).sign()
            if s:
                return s
        return 0

    lo, hi = switch.t_left, switch.t_right
    s_lo = diff_sign(lo)
    for _ in range(iterations):
        mid = (lo + hi) / 2
        s_mid = diff_sign(mid)
        if s_mid == 0:
            break
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi
