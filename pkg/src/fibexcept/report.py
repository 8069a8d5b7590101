"""Serialisation of certificates and tables (JSON, CSV, plain text).

Everything here is deterministic: key order is fixed, no timestamps, and
numbers are written as exact rationals or as a 12-digit midpoint plus a
radius rounded outward so the printed interval still contains the value.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import ROUND_CEILING, Decimal, localcontext
from pathlib import Path
from typing import Iterable, Sequence

from .bounded import BoundedReal, format_sig, parse_decimal, to_mpq
from .candidates import CandidateVector
from .schedule import TSchedule, decimal_string
from .verifier import Certificate, MinimizationResult, OracleReport, SwitchProfile

MID_DIGITS = 12
RADIUS_DIGITS = 3


def _ceil_sig(q, digits: int = RADIUS_DIGITS) -> str:
    q = to_mpq(q)
    if not q:
        return "0"
    with localcontext() as dctx:
        dctx.prec = digits
        dctx.rounding = ROUND_CEILING
        d = Decimal(int(q.numerator)) / Decimal(int(q.denominator))
    mant, exp10 = f"{d:.{digits - 1}e}".split("e")
    return f"{mant}e{int(exp10)}"


def enclosure(b: BoundedReal, digits: int = MID_DIGITS) -> dict[str, str]:
    """{"value", "radius"} with the radius widened to cover the printing error too."""
    text = format_sig(b.mid, digits)
    shown = parse_decimal(text)
    slack = abs(to_mpq(b.mid) - to_mpq(shown))
    return {"value": text, "radius": _ceil_sig(to_mpq(b.rad) + slack)}


def candidate_dict(x: CandidateVector) -> dict:
    return {"k": x.k, "l": x.l, "entries": x.as_strings()}


def _point(x) -> object:
    if isinstance(x, CandidateVector):
        return candidate_dict(x)
    return {"entries": [str(v) for v in x]}


def result_dict(r: MinimizationResult) -> dict:
    out = {
        "i": r.i,
        "t_minus_1": decimal_string(r.t - 1),
        "argmin": candidate_dict(r.argmin),
        "min_value": enclosure(r.min_value),
        "gap": enclosure(r.runner_up_gap) if r.runner_up_gap is not None else None,
        "runner_up": candidate_dict(r.runner_up) if r.runner_up is not None else None,
        "bits_used": r.bits_used,
        "status": r.status,
    }
    if r.tied:
        out["tied_with"] = [candidate_dict(x) for x in r.tied]
    return out


def certificate_dict(cert: Certificate) -> dict:
    return {
        "n": cert.n,
        "schedule": {"mode": cert.schedule.mode, "t_minus_1": cert.schedule.t_minus_1()},
        "precision": {"bits": cert.precision.bits, "max_bits": cert.precision.max_bits},
        "results": [result_dict(r) for r in cert.results],
        "verdicts": {"A": cert.verdict_A, "B": cert.verdict_B, "C": cert.verdict_C},
        "expected_pattern_matched": cert.expected_pattern_matched,
        "exceptional_points_at_least": cert.exceptional_points_at_least,
        "ambiguous_indices": list(cert.ambiguous_indices),
        "conclusion": cert.conclusion,
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def certificate_json(cert: Certificate) -> str:
    return dumps(certificate_dict(cert))


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# --- rows ------------------------------------------------------------------


def certificate_rows(cert: Certificate) -> list[dict[str, str]]:
    rows = []
    for r in cert.results:
        gap = enclosure(r.runner_up_gap) if r.runner_up_gap is not None else {"value": "", "radius": ""}
        rows.append(
            {
                "i": str(r.i),
                "t_minus_1": decimal_string(r.t - 1),
                "k": str(r.argmin.k),
                "l": str(r.argmin.l),
                "entries": " ".join(r.argmin.as_strings()),
                "gap": gap["value"],
                "gap_radius": gap["radius"],
                "bits_used": str(r.bits_used),
                "status": r.status,
            }
        )
    return rows


def stable_rows(schedule: TSchedule) -> list[dict[str, str]]:
    """One row per i: certified s_i - 1 and the scheduled t_i - 1."""
    rows = []
    for i, (s, t) in enumerate(zip(schedule.s, schedule.t), start=1):
        e = enclosure(s - 1)
        rows.append({"i": str(i), "s_minus_1": e["value"], "t_minus_1": decimal_string(t - 1), "radius": e["radius"]})
    return rows


def oracle_rows(reports: Sequence[OracleReport]) -> list[dict[str, str]]:
    rows = []
    for i, r in enumerate(reports, start=1):
        lat = enclosure(r.lattice_min)
        fp = enclosure(r.fplus_min)
        rows.append(
            {
                "i": str(i),
                "t_minus_1": decimal_string(r.t - 1),
                "fplus_min": fp["value"],
                "fplus_radius": fp["radius"],
                "lattice_min": lat["value"],
                "lattice_radius": lat["radius"],
                "fplus_argmin": " ".join(r.fplus_argmin.as_strings()),
                "lattice_argmin": " ".join(str(v) for v in r.lattice_argmin),
                "lattice_size": str(r.lattice_size),
                "equal": flag(r.equal),
                "argmin_match": "" if r.unique_match is None else flag(r.unique_match),
            }
        )
    return rows


def switch_rows(profile: SwitchProfile) -> list[dict[str, str]]:
    rows = []
    for s in profile.samples:
        h = enclosure(s.min_value)
        m = enclosure(s.measure_candidate) if s.measure_candidate is not None else {"value": "", "radius": ""}
        rows.append(
            {
                "t": decimal_string(s.t),
                "argmin": " ".join(_entries_str(s.argmin)),
                "status": s.status,
                "min_h": h["value"],
                "min_h_radius": h["radius"],
                "measure_candidate": m["value"],
                "measure_radius": m["radius"],
                "bits_used": str(s.bits_used),
            }
        )
    return rows


def switch_dict(profile: SwitchProfile, refined: Sequence | None = None) -> dict:
    pair = profile.pair
    switches = []
    for j, sw in enumerate(profile.switches):
        d = {
            "t_left": decimal_string(sw.t_left),
            "t_right": decimal_string(sw.t_right),
            "argmin_before": _point(sw.argmin_before),
            "argmin_after": _point(sw.argmin_after),
        }
        if refined is not None:
            lo, hi = refined[j]
            d["refined"] = {"lo": str(lo), "hi": str(hi)}
        switches.append(d)
    return {
        "pair": {"p": pair.p, "q": pair.q, "n": pair.n, "synthetic_phi": pair.synthetic, "primality_unchecked": pair.unchecked},
        "candidate_set": profile.candidate_set,
        "grid": switch_rows(profile),
        "switches": switches,
        "caveat": profile.caveat,
    }


def _entries_str(x) -> list[str]:
    if isinstance(x, CandidateVector):
        return x.as_strings()
    return [str(v) for v in x]


def flag(v: bool) -> str:
    return "true" if v else "false"


def rows_to_csv(rows: Iterable[dict[str, str]], fieldnames: Sequence[str] | None = None) -> str:
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def csv_to_rows(text: str) -> list[dict[str, str]]:
    return [dict(r) for r in csv.DictReader(io.StringIO(text))]


def rows_to_text(rows: Sequence[dict[str, str]], fieldnames: Sequence[str] | None = None) -> str:
    """Left-aligned fixed-width table."""
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    widths = {f: max([len(f)] + [len(r.get(f, "")) for r in rows]) for f in fieldnames}
    lines = ["  ".join(f.ljust(widths[f]) for f in fieldnames).rstrip()]
    for r in rows:
        lines.append("  ".join(r.get(f, "").ljust(widths[f]) for f in fieldnames).rstrip())
    return "\n".join(lines) + "\n"


def certificate_text(cert: Certificate) -> str:
    head = (
        f"n = {cert.n}, schedule {cert.schedule.mode}, "
        f"bits {cert.precision.bits} (max {cert.precision.max_bits})\n"
    )
    rows = [
        {
            "i": row["i"],
            "t_i - 1": row["t_minus_1"],
            "argmin": str(r.argmin),
            "gap": f"{row['gap']} +/- {row['gap_radius']}" if row["gap"] else "-",
            "bits": row["bits_used"],
            "status": row["status"],
        }
        for r, row in zip(cert.results, certificate_rows(cert))
    ]
    tail = (
        f"verdicts: A={flag(cert.verdict_A)} B={flag(cert.verdict_B)} C={flag(cert.verdict_C)}; "
        f"expected pattern matched: {flag(cert.expected_pattern_matched)}\n"
    )
    if cert.ambiguous_indices:
        tail += "ambiguous at: " + ", ".join(str(i) for i in cert.ambiguous_indices) + "\n"
    tail += f"conclusion: {cert.conclusion or 'none (hypotheses not certified)'}\n"
    return head + rows_to_text(rows) + tail
