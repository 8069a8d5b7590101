from fractions import Fraction

import pytest

from fibexcept.schedule import (
    FIGURE1_T_MINUS_1,
    InterlacingError,
    ScheduleError,
    decimal_string,
    read_schedule_file,
    round_up_one_digit,
    t_schedule,
    validate,
)


def test_figure1_n39():
    s = t_schedule(39, "figure1")
    assert s.t_minus_1()[0] == "0.8"
    assert s.t_minus_1()[-1] == "2e-16"
    assert len(s) == 38
    assert [Fraction(v) for v in s.t_minus_1()] == [Fraction(v) for v in _floats(FIGURE1_T_MINUS_1)]


def _floats(xs):
    from fibexcept.bounded import parse_decimal

    return [str(parse_decimal(x)) for x in xs]


def test_figure1_extension_n40():
    s = t_schedule(40, "figure1")
    assert s.t_minus_1()[-1] == "7e-17"
    with pytest.raises(ScheduleError):
        t_schedule(41, "figure1")


def test_auto_small():
    assert t_schedule(5, "auto").t_minus_1() == ["0.8", "0.2", "0.08", "0.03"]


@pytest.mark.parametrize("mode", ["auto", "midpoint"])
def test_generated_schedules_interlace(mode):
    s = t_schedule(45, mode)
    for i, (t, si) in enumerate(zip(s.t, s.s), start=1):
        assert si.certainly_lt(_b(t))
        if i > 1:
            assert _b(t).certainly_lt(s.s[i - 2])


def _b(t):
    from fibexcept.bounded import BoundedReal

    return BoundedReal.exact(t, 128)


def test_file_mode_and_validation(tmp_path):
    good = tmp_path / "t.txt"
    good.write_text("# t_i - 1\n0.8\n0.2\n8e-2 3e-2\n", encoding="utf-8")
    vals = read_schedule_file(good)
    assert t_schedule(5, "file", values=vals).t_minus_1() == ["0.8", "0.2", "0.08", "0.03"]
    with pytest.raises(InterlacingError) as info:
        t_schedule(5, "file", values=["0.8", "0.1", "0.08", "0.03"])
    assert info.value.index == 2
    with pytest.raises(InterlacingError):
        t_schedule(5, "file", values=["0.8", "0.08", "0.2", "0.03"])
    with pytest.raises(ScheduleError):
        t_schedule(5, "file", values=["0.8", "0.2"])


def test_certificate_json_as_schedule(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"schedule": {"mode": "auto", "t_minus_1": ["0.8", "0.2"]}}', encoding="utf-8")
    assert read_schedule_file(p) == [Fraction(4, 5), Fraction(1, 5)]


def test_validate_rejects_non_decreasing():
    with pytest.raises(InterlacingError):
        validate(4, [Fraction(9, 5), Fraction(9, 5), Fraction(11, 10)])


def test_helpers():
    assert round_up_one_digit(Fraction(1941, 10000)) == Fraction(2, 10)
    assert round_up_one_digit(Fraction(2, 10)) == Fraction(3, 10)
    assert decimal_string(Fraction(9, 10**15)) == "9e-15"
    assert decimal_string(Fraction(4, 5)) == "0.8"
    with pytest.raises(ValueError):
        decimal_string(Fraction(1, 3))


def test_unknown_mode():
    with pytest.raises(ScheduleError):
        t_schedule(5, "nope")
    with pytest.raises(ScheduleError):
        t_schedule(2, "auto")
