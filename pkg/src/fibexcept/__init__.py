"""Certified computation of exceptional points of the t-metric Mahler measure
for rationals of the form p^{f_n} / q^{f_{n-1}} (f_n the Fibonacci numbers)."""

from .bounded import BoundedReal, PrecisionContext, PrecisionExhausted
from .candidates import (
    CandidateVector,
    LatticeCapExceeded,
    cardinality_f,
    cardinality_f_plus,
    cardinality_search_space,
    enumerate_f,
    enumerate_f_plus,
    enumerate_lattice,
    y_vector,
)
from .fib import docagne, fib
from .highprec import g_eval, h_eval, solve_s, weight
from .schedule import TSchedule, t_schedule
from .verifier import (
    Certificate,
    PrimePairContext,
    minimize_over_fplus,
    oracle_crosscheck,
    switch_profile,
    verify_main,
)

__version__ = "0.1.0"

__all__ = [
    "BoundedReal",
    "CandidateVector",
    "Certificate",
    "LatticeCapExceeded",
    "PrecisionContext",
    "PrecisionExhausted",
    "PrimePairContext",
    "TSchedule",
    "cardinality_f",
    "cardinality_f_plus",
    "cardinality_search_space",
    "docagne",
    "enumerate_f",
    "enumerate_f_plus",
    "enumerate_lattice",
    "fib",
    "g_eval",
    "h_eval",
    "minimize_over_fplus",
    "oracle_crosscheck",
    "solve_s",
    "switch_profile",
    "t_schedule",
    "verify_main",
    "weight",
]
