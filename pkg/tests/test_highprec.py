from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from fibexcept.bounded import BoundedReal, PrecisionContext, format_sig
from fibexcept.candidates import enumerate_f_plus, t_vector, y_vector
from fibexcept.highprec import (
    AmbiguousMax,
    BracketFailure,
    g_eval,
    h_eval,
    psi_weights,
    s_residual,
    solve_s,
    weight,
)
from fibexcept.schedule import FIGURE1_S_MINUS_1
import oracles

CTX = PrecisionContext()
mpmath.mp.dps = oracles.DPS


def q(x: mpmath.mpf):
    m, e = mpmath.mpf(x).man_exp
    return mpq(m) * mpq(2) ** e if e >= 0 else mpq(m, 2**-e)


def test_weight_examples():
    assert weight(1, CTX).contains(1) and weight(1, CTX).rad == 0
    assert weight(3, CTX).contains(2) and weight(3, CTX).rad == 0
    w4 = weight(4, CTX)
    assert w4.contains(q(2 * oracles.phi()))
    assert format_sig(w4.mid, 6) == "3.23607e0"


@pytest.mark.parametrize("i", range(1, 60))
def test_weights_enclose_reference(i):
    assert weight(i, CTX).contains(q(oracles.weight(i)))


def test_weights_are_increasing():
    ws = [weight(i, CTX) for i in range(2, 50)]
    assert all(a.certainly_lt(b) for a, b in zip(ws, ws[1:]))


def test_g_examples():
    assert g_eval(t_vector(3), 1, CTX).contains(2)
    g = g_eval(y_vector(7, 3, 4), 1, CTX)
    assert g.contains(q(4 + 6 * oracles.phi()))


def test_g_linear_in_x():
    x, y = y_vector(9, 2, 5), y_vector(9, 3, 4)
    t = Fraction(3, 2)
    both = g_eval([a + b for a, b in zip(x.entries, y.entries)], t, CTX)
    assert both.overlaps(g_eval(x, t, CTX) + g_eval(y, t, CTX))


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 30), st.data(), st.fractions(min_value=Fraction(1, 5), max_value=Fraction(5, 2), max_denominator=997))
def test_g_against_mpmath(n, data, t):
    x = data.draw(st.sampled_from(enumerate_f_plus(n)))
    assert g_eval(x, t, CTX).contains(q(oracles.g_value(x.entries, t)))


def test_h_example():
    psi = BoundedReal.exact(3, 128).log() / BoundedReal.exact(2, 128).log()
    assert h_eval(t_vector(3), psi, 1, PrecisionContext(128)).contains(2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 3), (3, 5), (5, 7), (2, 11), (7, 13)]), st.integers(3, 15), st.data())
def test_h_against_mpmath(pq, n, data):
    p, qq = pq
    x = data.draw(st.sampled_from(enumerate_f_plus(n)))
    t = data.draw(st.fractions(min_value=Fraction(1, 2), max_value=2, max_denominator=101))
    psi = BoundedReal.exact(qq, 128).log() / BoundedReal.exact(p, 128).log()
    assert h_eval(x, psi, t, PrecisionContext(128)).contains(q(oracles.h_value(x.entries, p, qq, t)))


def test_h_tends_to_g():
    # psi_k -> phi: the gap shrinks uniformly on a t-grid in (0, 2]
    x = y_vector(8, 2, 3)
    grid = [Fraction(k, 10) for k in range(1, 21)]
    last = None
    for k in (4, 8, 16, 32):
        psi = BoundedReal.exact(Fraction(1, 10**k) + 0, 256) + _phi(256)
        worst = max(float(abs((h_eval(x, psi, t, PrecisionContext(256)) - g_eval(x, t, PrecisionContext(256))).mid)) for t in grid)
        if last is not None:
            assert worst < last / 1000
        last = worst
    assert last < 1e-25


def _phi(bits):
    from fibexcept.bounded import golden_ratio

    return golden_ratio(PrecisionContext(bits, bits))


def test_psi_max_tie_is_reported():
    # psi exactly 2 makes f_3 = 2 = psi * f_2
    with pytest.raises(AmbiguousMax):
        psi_weights(4, BoundedReal.exact(2, 96), CTX)


@pytest.mark.parametrize("i", [1, 2, 5, 10, 20, 30, 37, 38, 39, 45])
def test_s_against_mpmath(i):
    s = solve_s(i, CTX)
    assert s.contains(q(oracles.s_value(i)))
    assert float(s.rad) <= 2.0 ** (8 - CTX.bits)
    assert s_residual(i, s.lo, CTX).certainly_negative() or s_residual(i, s.lo, CTX).sign() == 0


def test_s_strictly_decreasing():
    s = [solve_s(i, CTX) for i in range(1, 45)]
    assert all(b.certainly_lt(a) for a, b in zip(s, s[1:]))
    assert all(x.certainly_gt(BoundedReal.exact(1)) for x in s)


def _trunc(x, digits: int) -> str:
    # truncate a positive rational to `digits` significant digits
    x = Fraction(int(x.numerator), int(x.denominator))
    e = 0
    while x >= 10:
        x /= 10
        e += 1
    while x < 1:
        x *= 10
        e -= 1
    m = int(x * 10 ** (digits - 1))
    s = str(m)
    return f"{s[0]}.{s[1:]}e{e}"


def _nine_digit_match(value: Fraction, text: str) -> bool:
    mant, exp = text.split("e")
    table = Fraction(mant) * Fraction(10) ** int(exp)
    return abs(value - table) < Fraction(1, 2) * Fraction(10) ** (int(exp) - 8)


def test_table_values_agree_to_nine_digits():
    for i, text in enumerate(FIGURE1_S_MINUS_1, start=1):
        s1 = solve_s(i, CTX) - 1
        for end in (s1.lo, s1.hi):
            assert _nine_digit_match(Fraction(int(end.numerator), int(end.denominator)), text), i


def test_table_is_truncated_not_rounded():
    # at 96 bits the s_37 enclosure straddles a 10-digit boundary, hence 256
    ctx = PrecisionContext(256, 512)
    for i, text in enumerate(FIGURE1_S_MINUS_1, start=1):
        s1 = solve_s(i, ctx) - 1
        assert _trunc(s1.lo, 10) == _trunc(s1.hi, 10) == text, i


def test_half_gap():
    half = (solve_s(37, CTX) - solve_s(38, CTX)) / 2
    assert format_sig(half.mid, 6) == "1.36011e-16"


def test_bracket_failure_at_double_precision():
    with pytest.raises(BracketFailure):
        solve_s(38, PrecisionContext(53, 53))
