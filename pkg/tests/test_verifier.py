from fractions import Fraction

import pytest

from fibexcept.bounded import PrecisionContext
from fibexcept.candidates import enumerate_f_plus, y_vector
from fibexcept.schedule import t_schedule
from fibexcept.verifier import (
    AMBIGUOUS,
    UNIQUE,
    PrimePairContext,
    is_prime_u64,
    lattice_matrix,
    lattice_minimum,
    minimize_over_fplus,
    oracle_crosscheck,
    oracle_crosscheck_schedule,
    refine_switch,
    switch_profile,
    verify_main,
)
from fibexcept.highprec import weight_powers
import oracles


def test_n3_minimisers():
    r = minimize_over_fplus(3, Fraction(9, 5))
    assert r.argmin.entries == (1, 1, 0) and r.status == UNIQUE
    # 2^1.8 - (1 + phi^1.8), from the mpmath reference
    ref = oracles.g_value((0, 0, 1), Fraction(9, 5)) - oracles.g_value((1, 1, 0), Fraction(9, 5))
    assert abs(float(r.runner_up_gap.mid) - float(ref)) < 1e-12
    assert round(float(r.min_value.mid), 8) == 3.3778133
    assert minimize_over_fplus(3, Fraction(6, 5)).argmin.entries == (0, 0, 1)


def test_n39_first_point():
    assert minimize_over_fplus(39, Fraction(9, 5)).argmin == y_vector(39, 1, 2)


def test_verify_n3_auto():
    cert = verify_main(3, t_schedule(3, "auto"))
    assert cert.holds
    assert [r.argmin for r in cert.results] == [y_vector(3, 1, 2), y_vector(3, 2, 3)]
    assert cert.conclusion.startswith(">= 1 exceptional point ")


def test_verify_rejects_wrong_schedule():
    with pytest.raises(ValueError):
        verify_main(5, t_schedule(4, "auto"))


@pytest.mark.parametrize("n", [4, 7, 12, 25])
def test_auto_schedules_follow_expected_pattern(n):
    cert = verify_main(n, t_schedule(n, "auto"))
    assert cert.holds and cert.expected_pattern_matched
    assert cert.exceptional_points_at_least == n - 2


def test_ambiguity_is_reported_not_resolved():
    cert = verify_main(40, t_schedule(40, "figure1"), PrecisionContext(53, 53))
    assert 38 in cert.ambiguous_indices
    assert not cert.verdict_A and not cert.holds and cert.conclusion is None
    r = cert.results[37]
    assert r.status == AMBIGUOUS and r.tied


def test_escalation_records_bits():
    cert = verify_main(40, t_schedule(40, "figure1"), PrecisionContext(53, 256))
    assert not cert.ambiguous_indices
    assert max(r.bits_used for r in cert.results) > 53
    assert cert.results[0].bits_used == 53


def test_lattice_minimum_matches_fplus_small():
    for n in range(3, 9):
        for t in (Fraction(11, 10), Fraction(3, 2), Fraction(19, 10)):
            rep = oracle_crosscheck(n, t)
            assert rep.equal and rep.unique_match is not False


def test_oracle_examples():
    rep = oracle_crosscheck(3, Fraction(9, 5))
    assert rep.equal and rep.lattice_argmin == (1, 1, 0) and rep.fplus_argmin.entries == (1, 1, 0)
    assert all(r.equal for r in oracle_crosscheck_schedule(4, t_schedule(4, "auto")))
    sched = t_schedule(12, "auto")
    assert oracle_crosscheck(12, sched.t[4]).equal
    with pytest.raises(ValueError):
        oracle_crosscheck(21, Fraction(3, 2))


def test_lattice_minimum_screen_keeps_true_minimum():
    pts = lattice_matrix(9)
    t = Fraction(13, 10)
    ctx = PrecisionContext()
    lat = lattice_minimum(pts, weight_powers(9, t, ctx), ctx.bits)
    best = min(oracles.g_value(p, t) for p in pts.tolist())
    assert lat.value.contains(_q(best))
    assert lat.size == 695 and 1 <= lat.screened < lat.size


def _q(x):
    from gmpy2 import mpq

    m, e = x.man_exp
    return mpq(m) * mpq(2) ** e if e >= 0 else mpq(m, 2**-e)


def test_primality():
    primes = [2, 3, 5, 97, 2**61 - 1, 18446744073709551557]
    composites = [1, 4, 561, 2**61 + 1, 3215031751, 18446744073709551615]
    assert all(is_prime_u64(p) for p in primes)
    assert not any(is_prime_u64(c) for c in composites)


def test_prime_pair_validation():
    with pytest.raises(ValueError):
        PrimePairContext(4, 3, 3)
    with pytest.raises(ValueError):
        PrimePairContext(3, 3, 3)
    with pytest.raises(ValueError):
        PrimePairContext(2, None, 3)
    big = PrimePairContext(2, 2**127 - 1, 3)
    assert big.unchecked


def test_switch_profile_n3():
    pair = PrimePairContext(2, 3, 3)
    prof = switch_profile(pair, "1.0", "2.0", 101)
    assert len(prof.switches) == 1
    sw = prof.switches[0]
    assert sw.argmin_before.entries == (0, 0, 1) and sw.argmin_after.entries == (1, 1, 0)
    lo, hi = refine_switch(pair, sw)
    assert sw.t_left <= lo < hi <= sw.t_right and hi - lo < Fraction(1, 10**9)
    assert "candidate" in prof.caveat
    assert all(s.measure_candidate is not None for s in prof.samples)


def test_switch_profile_synthetic_matches_fplus():
    prof = switch_profile(PrimePairContext.synthetic_phi(8), "1.0", "2.0", 21)
    for s in prof.samples:
        assert s.argmin == minimize_over_fplus(8, s.t).argmin
        assert s.measure_candidate is None


def test_switch_profile_lattice_set():
    prof = switch_profile(PrimePairContext(2, 3, 5), "1", "2", 21, candidate_set="lattice")
    fp = switch_profile(PrimePairContext(2, 3, 5), "1", "2", 21)
    for a, b in zip(prof.samples, fp.samples):
        assert a.min_value.overlaps(b.min_value)
