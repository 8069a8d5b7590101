"""Exact Fibonacci numbers and d'Ocagne's identity.

The cache is process-global and append-only; every other module asks for
overlapping prefixes of the sequence, so it is extended once and shared.
"""

from __future__ import annotations

import threading

_values: list[int] = [0, 1]
_lock = threading.Lock()


def _extend(n: int) -> None:
    with _lock:
        vals = _values
        while len(vals) <= n:
            vals.append(vals[-1] + vals[-2])


def fib(n: int) -> int:
    """Return f_n with f_0 = 0, f_1 = 1."""
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"fib index must be an int, got {type(n).__name__}")
    if n < 0:
        raise ValueError(f"fib index must be non-negative, got {n}")
    if n >= len(_values):
        _extend(n)
    return _values[n]


def fib_prefix(n: int) -> list[int]:
    """Return [f_0, ..., f_n] as a fresh list."""
    fib(n)
    return _values[: n + 1]


def reserve(n: int) -> None:
    """Pre-extend the cache so later reads never take the lock."""
    fib(n)


def docagne(a: int, b: int) -> int:
    """Evaluate f_a f_{b+1} - f_b f_{a+1} directly from cached values.

    For 0 <= b <= a this equals (-1)^b f_{a-b}.
    """
    if b < 0 or a < b:
        raise ValueError(f"docagne requires 0 <= b <= a, got a={a}, b={b}")
    return fib(a) * fib(b + 1) - fib(b) * fib(a + 1)
