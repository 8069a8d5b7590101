import pytest
from hypothesis import given, strategies as st

from fibexcept.fib import docagne, fib, fib_prefix
from oracles import fib_doubling


def test_small_values():
    assert fib(0) == 0
    assert fib(1) == 1
    assert fib(7) == 13
    assert fib(39) == 63245986


def test_matches_fast_doubling():
    for n in range(0, 300, 7):
        assert fib(n) == fib_doubling(n)


def test_prefix_is_a_copy():
    p = fib_prefix(10)
    assert p == [0, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55]
    p[3] = -1
    assert fib(3) == 2


@pytest.mark.parametrize("bad", [-1, -20])
def test_negative_index(bad):
    with pytest.raises(ValueError):
        fib(bad)


@pytest.mark.parametrize("bad", [1.0, "3", True])
def test_non_integer_index(bad):
    with pytest.raises(TypeError):
        fib(bad)


def test_docagne_examples():
    assert docagne(5, 3) == -1 == (-1) ** 3 * fib(2)
    assert docagne(4, 4) == 0
    assert docagne(9, 2) == 13 == fib(7)


def test_docagne_rejects_b_above_a():
    with pytest.raises(ValueError):
        docagne(2, 3)
    with pytest.raises(ValueError):
        docagne(3, -1)


@given(st.integers(0, 400), st.integers(0, 400))
def test_docagne_property(a, b):
    a, b = max(a, b), min(a, b)
    assert docagne(a, b) == (-1) ** b * fib(a - b)
