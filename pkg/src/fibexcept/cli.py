"""Command-line entry point: ``fibexcept <command> [options]``.

Commands: verify, stable, enumerate, card, oracle-check, switch.

Exit codes: 0 success / conclusion holds, 2 a verdict fails, 3 ambiguity left
at the precision ceiling, 4 usage or I/O error, 5 lattice cap exceeded.

Defaults are resolved as flag > ``--config`` file > environment
(``FIBEXCEPT_BITS``, ``FIBEXCEPT_MAX_BITS``) > built-in.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

from .bounded import DEFAULT_BITS, DEFAULT_MAX_BITS, PrecisionContext, parse_decimal
from .candidates import (
    IndexRangeError,
    LatticeCapExceeded,
    cardinality_f,
    cardinality_f_plus,
    cardinality_search_space,
    enumerate_f,
    enumerate_f_plus,
    enumerate_lattice,
)
from .fib import fib
from .schedule import FIGURE1_MAX_N, MODES, ScheduleError, read_schedule_file, t_schedule
from . import report
from .verifier import (
    ORACLE_MAX_N,
    PrimePairContext,
    oracle_crosscheck_schedule,
    refine_switch,
    switch_profile,
    verify_main,
)

log = logging.getLogger("fibexcept")

EXIT_OK = 0
EXIT_VERDICT = 2
EXIT_AMBIGUOUS = 3
EXIT_USAGE = 4
EXIT_CAP = 5

ENV_BITS = "FIBEXCEPT_BITS"
ENV_MAX_BITS = "FIBEXCEPT_MAX_BITS"

COMMANDS = ("verify", "stable", "enumerate", "card", "oracle-check", "switch")
FORMATS = ("text", "json", "csv")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    schedule: str | None = None
    schedule_file: str | None = None
    bits: int = DEFAULT_BITS
    max_bits: int = DEFAULT_MAX_BITS
    format: str = "text"
    output: str | None = None
    oracle_max_n: int = ORACLE_MAX_N
    limit: int | None = None
    max_i: int | None = None
    set: str = "fplus"
    lattice: bool = False
    p: int | None = None
    q: int | None = None
    synthetic: bool = False
    t_lo: str = "1"
    t_hi: str = "2"
    grid: int = 101
    refine: bool = False

    @property
    def precision(self) -> PrecisionContext:
        return PrecisionContext(self.bits, self.max_bits)

    def validate(self) -> "RunConfig":
        """Reject bad combinations, naming the offending flag."""
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise UsageError(f"--format must be one of {', '.join(FORMATS)}")
        if self.bits < 53:
            raise UsageError(f"--bits must be >= 53, got {self.bits}")
        if self.max_bits < self.bits:
            raise UsageError(f"--max-bits ({self.max_bits}) must be >= --bits ({self.bits})")
        needs_n = self.command in ("verify", "enumerate", "card", "oracle-check", "switch")
        if needs_n:
            if self.n is None:
                raise UsageError("--n is required")
            if self.n < 3:
                raise UsageError(f"--n must be >= 3, got {self.n}")
        if self.command == "stable":
            if self.max_i is None or self.max_i < 1:
                raise UsageError("--max-i must be a positive integer")
        if self.schedule is not None and self.schedule not in MODES:
            raise UsageError(f"--schedule must be one of {', '.join(MODES)}")
        if self.schedule == "file" and not self.schedule_file:
            raise UsageError("--schedule file needs --schedule-file")
        if self.schedule_file and self.schedule not in (None, "file"):
            raise UsageError("--schedule-file only goes with --schedule file")
        if self.schedule == "figure1":
            n = self.n if self.n is not None else (self.max_i or 0) + 1
            if n > FIGURE1_MAX_N:
                flag = "--n" if self.n is not None else "--max-i"
                raise UsageError(f"{flag}: the figure1 schedule covers n <= {FIGURE1_MAX_N}")
        if self.command == "enumerate" and self.set not in ("f", "fplus", "lattice"):
            raise UsageError("--set must be f, fplus or lattice")
        if self.command == "switch" and self.set not in ("fplus", "lattice"):
            raise UsageError("--set for switch must be fplus or lattice")
        if self.limit is not None and self.limit < 0:
            raise UsageError("--limit must be >= 0")
        if self.command == "oracle-check" and not (3 <= self.n <= self.oracle_max_n):
            raise UsageError(f"--n must lie in 3..{self.oracle_max_n} (raise --oracle-max-n to go further)")
        if self.command == "switch":
            if self.synthetic and (self.p is not None or self.q is not None):
                raise UsageError("--synthetic excludes --p/--q")
            if not self.synthetic and (self.p is None or self.q is None):
                raise UsageError("--p and --q are required unless --synthetic is given")
            if self.grid < 2:
                raise UsageError("--grid must be >= 2")
            try:
                lo, hi = parse_decimal(self.t_lo), parse_decimal(self.t_hi)
            except ValueError as exc:
                raise UsageError(f"--t-lo/--t-hi: {exc}") from None
            if not (0 < lo < hi):
                raise UsageError("--t-lo and --t-hi need 0 < t-lo < t-hi")
        return self


# --- configuration ----------------------------------------------------------

_INT_KEYS = {"n", "bits", "max_bits", "oracle_max_n", "limit", "max_i", "p", "q", "grid"}
_BOOL_KEYS = {"lattice", "synthetic", "refine"}


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; keys mirror the long flags (``max-bits`` or ``max_bits``)."""
    known = {f.name for f in fields(RunConfig)} - {"command"}
    out: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value, f"{path}:{lineno}")
    return out


def _coerce(key: str, value: str, where: str):
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise UsageError(f"{where}: {key} must be an integer, got {value!r}") from None
    if key in _BOOL_KEYS:
        low = value.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError(f"{where}: {key} must be true or false")
        return low in ("true", "1", "yes")
    return value


def _env_defaults(environ) -> dict:
    out = {}
    for var, key in ((ENV_BITS, "bits"), (ENV_MAX_BITS, "max_bits")):
        if environ.get(var):
            out[key] = _coerce(key, environ[var], var)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fibexcept", description="Certify exceptional-point counts for Fibonacci-exponent rationals.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log precision escalations")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, schedule: bool = False) -> None:
        p.add_argument("--config", help="key=value file mirroring the flags")
        p.add_argument("--bits", type=int, help=f"starting precision in bits (default {DEFAULT_BITS}, env {ENV_BITS})")
        p.add_argument("--max-bits", type=int, help=f"escalation ceiling (default {DEFAULT_MAX_BITS}, env {ENV_MAX_BITS})")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--output", "-o", help="write here instead of standard output")
        if schedule:
            p.add_argument("--schedule", choices=MODES)
            p.add_argument("--schedule-file", help="t_i - 1 values, one per line, or a certificate JSON")

    p = sub.add_parser("verify", help="check hypotheses (A)(B)(C) along a schedule")
    p.add_argument("--n", type=int)
    common(p, schedule=True)

    p = sub.add_parser("stable", help="tabulate certified s_i and the chosen t_i")
    p.add_argument("--max-i", type=int)
    common(p, schedule=True)

    p = sub.add_parser("enumerate", help="list F_n, F_n^+ or V_n^+(Z)")
    p.add_argument("--n", type=int)
    p.add_argument("--set", choices=("f", "fplus", "lattice"))
    p.add_argument("--limit", type=int, help="lattice point cap (exit 5 when exceeded)")
    common(p)

    p = sub.add_parser("card", help="cardinalities and closed forms")
    p.add_argument("--n", type=int)
    p.add_argument("--lattice", action="store_true", default=None, help="also check #V_n^+(Z) >= f_n")
    common(p)

    p = sub.add_parser("oracle-check", help="compare F_n^+ minima with brute force over V_n^+(Z)")
    p.add_argument("--n", type=int)
    p.add_argument("--oracle-max-n", type=int, help=f"widen the accepted n range (default {ORACLE_MAX_N})")
    p.add_argument("--limit", type=int, help="lattice point cap (exit 5 when exceeded)")
    common(p, schedule=True)

    p = sub.add_parser("switch", help="scan argmin H over a t-grid for a prime pair")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--synthetic", action="store_true", default=None, help="use psi = phi instead of a prime pair")
    p.add_argument("--t-lo")
    p.add_argument("--t-hi")
    p.add_argument("--grid", type=int)
    p.add_argument("--set", choices=("fplus", "lattice"))
    p.add_argument("--refine", action="store_true", default=None, help="bisect each switch bracket")
    common(p)
    return parser


def config_from_args(ns: argparse.Namespace, environ=os.environ) -> RunConfig:
    values: dict = _env_defaults(environ)
    if getattr(ns, "config", None):
        values.update(read_config_file(ns.config))
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    values["command"] = ns.command
    if "max_bits" not in values and values.get("bits", DEFAULT_BITS) > DEFAULT_MAX_BITS:
        values["max_bits"] = values["bits"]
    if values.get("schedule_file") and not values.get("schedule"):
        values["schedule"] = "file"
    return RunConfig(**values).validate()


# --- output -----------------------------------------------------------------


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        try:
            Path(cfg.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"--output: cannot write {cfg.output}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _render(cfg: RunConfig, obj, rows: Sequence[dict] | None = None, text: str | None = None) -> str:
    if cfg.format == "json":
        return report.dumps(obj)
    if cfg.format == "csv":
        return report.rows_to_csv(rows if rows is not None else [obj])
    return text if text is not None else report.rows_to_text(rows if rows is not None else [obj])


def _schedule(cfg: RunConfig, n: int, default: str):
    mode = cfg.schedule or default
    values = None
    if mode == "file":
        try:
            values = read_schedule_file(cfg.schedule_file)
        except OSError as exc:
            raise UsageError(f"--schedule-file: cannot read {cfg.schedule_file}: {exc.strerror}") from None
        except (ValueError, KeyError) as exc:
            raise UsageError(f"--schedule-file: {exc}") from None
    try:
        return t_schedule(n, mode, values=values)
    except ScheduleError as exc:
        raise UsageError(f"--schedule {mode}: {exc}") from None


# --- commands ---------------------------------------------------------------


def cmd_verify(cfg: RunConfig) -> int:
    sched = _schedule(cfg, cfg.n, "figure1" if cfg.n <= FIGURE1_MAX_N else "auto")
    cert = verify_main(cfg.n, sched, cfg.precision)
    obj = report.certificate_dict(cert)
    _emit(cfg, _render(cfg, obj, report.certificate_rows(cert), report.certificate_text(cert)))
    if cert.holds:
        return EXIT_OK
    if cert.ambiguous_indices:
        return EXIT_AMBIGUOUS
    return EXIT_VERDICT


def cmd_stable(cfg: RunConfig) -> int:
    n = cfg.max_i + 1
    sched = _schedule(cfg, n, "figure1" if n <= FIGURE1_MAX_N else "auto")
    rows = report.stable_rows(sched)
    obj = {"schedule": sched.mode, "rows": rows}
    _emit(cfg, _render(cfg, obj, rows))
    return EXIT_OK


def _enumerate_rows(cfg: RunConfig) -> tuple[dict, list[dict]]:
    n = cfg.n
    if cfg.set == "lattice":
        pts = enumerate_lattice(n, limit=cfg.limit)
        rows = [{"entries": " ".join(str(v) for v in p)} for p in pts]
        obj = {"n": n, "set": "lattice", "count": len(pts), "points": [list(p) for p in pts]}
        return obj, rows
    vecs = enumerate_f(n) if cfg.set == "f" else enumerate_f_plus(n)
    rows = [{"k": str(v.k), "l": str(v.l), "entries": " ".join(v.as_strings())} for v in vecs]
    obj = {"n": n, "set": cfg.set, "count": len(vecs), "points": [report.candidate_dict(v) for v in vecs]}
    return obj, rows


def cmd_enumerate(cfg: RunConfig) -> int:
    obj, rows = _enumerate_rows(cfg)
    text = report.rows_to_text(rows, list(rows[0]) if rows else ["entries"]) + f"count: {obj['count']}\n"
    _emit(cfg, _render(cfg, obj, rows, text))
    return EXIT_OK


def cmd_card(cfg: RunConfig) -> int:
    n = cfg.n
    obj: dict = {
        "n": n,
        "F": cardinality_f(n),
        "F_plus": cardinality_f_plus(n),
        "search_space": cardinality_search_space(n),
        "enumerated_F": len(enumerate_f(n)),
        "enumerated_F_plus": len(enumerate_f_plus(n)),
    }
    if cfg.lattice:
        # Stop as soon as more than f_n points turn up: the bound is then proven.
        try:
            count = len(enumerate_lattice(n, limit=fib(n)))
            exact = True
        except LatticeCapExceeded as exc:
            count, exact = exc.partial_count + 1, False
        obj["f_n"] = fib(n)
        obj["lattice_count"] = count if exact else None
        obj["lattice_lower_bound"] = count
        obj["lattice_at_least_f_n"] = count >= fib(n)
    row = {k: "" if v is None else str(v).lower() if isinstance(v, bool) else str(v) for k, v in obj.items()}
    _emit(cfg, _render(cfg, obj, [row]))
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    sched = _schedule(cfg, cfg.n, "auto")
    reports = oracle_crosscheck_schedule(cfg.n, sched, cfg.precision, max_n=cfg.oracle_max_n, limit=cfg.limit)
    rows = report.oracle_rows(reports)
    ok = all(r.equal and r.unique_match is not False for r in reports)
    obj = {"n": cfg.n, "schedule": sched.mode, "all_equal": all(r.equal for r in reports), "rows": rows}
    text = report.rows_to_text(rows, ["i", "t_minus_1", "fplus_min", "lattice_min", "lattice_size", "equal", "argmin_match"])
    text += f"all indices equal: {report.flag(obj['all_equal'])}\n"
    _emit(cfg, _render(cfg, obj, rows, text))
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_switch(cfg: RunConfig) -> int:
    try:
        pair = PrimePairContext.synthetic_phi(cfg.n) if cfg.synthetic else PrimePairContext(cfg.p, cfg.q, cfg.n)
    except ValueError as exc:
        raise UsageError(f"--p/--q: {exc}") from None
    if pair.unchecked:
        log.warning("primality of inputs >= 2^64 was not checked")
    prof = switch_profile(pair, cfg.t_lo, cfg.t_hi, cfg.grid, cfg.precision, cfg.set)
    refined = [refine_switch(pair, sw, cfg.precision) for sw in prof.switches] if cfg.refine else None
    obj = report.switch_dict(prof, refined)
    rows = obj["grid"]
    text = report.rows_to_text(rows, ["t", "argmin", "status", "min_h", "measure_candidate"])
    for sw in obj["switches"]:
        text += f"switch in [{sw['t_left']}, {sw['t_right']}]\n"
    text += f"note: {prof.caveat}\n"
    _emit(cfg, _render(cfg, obj, rows, text))
    return EXIT_OK


HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    "verify": cmd_verify,
    "stable": cmd_stable,
    "enumerate": cmd_enumerate,
    "card": cmd_card,
    "oracle-check": cmd_oracle_check,
    "switch": cmd_switch,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(ns)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"fibexcept: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LatticeCapExceeded as exc:
        print(f"fibexcept: lattice cap exceeded for n={exc.n}: {exc.partial_count} points so far", file=sys.stderr)
        return EXIT_CAP
    except IndexRangeError as exc:
        print(f"fibexcept: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
