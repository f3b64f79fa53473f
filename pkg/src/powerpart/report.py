"""Sweeps over (k, n, channel), report serialization, and the verification suites."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources

import mpmath

from . import coefficients, counting, estimator, expsums, phi
from .errors import PowerPartError, PreconditionError

SCHEMA = 1
COLUMNS = ("k", "n", "X", "Y", "log_exact", "log_estimate", "ratio", "J", "channel", "timestamp", "status", "note")
CHANNELS = ("value", "difference")


def _fmt(x, digits: int = 15) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.{digits}g}"


def default_timestamp() -> str:
    """SOURCE_DATE_EPOCH if set, else the Unix epoch, so reports are byte-stable."""
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class ReportRow:
    k: int
    n: int
    X: float | None
    Y: float | None
    log_exact: float | None
    log_estimate: float | None
    ratio: float | None  # exp(log_estimate - log_exact)
    J: int
    channel: str
    timestamp: str
    status: str = "ok"  # ok | out_of_envelope | unsolvable
    note: str = ""

    def as_strings(self) -> dict[str, str]:
        return {
            "k": str(self.k),
            "n": str(self.n),
            "X": _fmt(self.X),
            "Y": _fmt(self.Y),
            "log_exact": _fmt(self.log_exact),
            "log_estimate": _fmt(self.log_estimate),
            "ratio": _fmt(self.ratio, 12),
            "J": str(self.J),
            "channel": self.channel,
            "timestamp": self.timestamp,
            "status": self.status,
            "note": self.note,
        }

    def as_json(self) -> dict:
        out = asdict(self)
        if self.ratio is not None:
            out["ratio"] = float(_fmt(self.ratio, 12))
        return out


@dataclass
class SweepConfig:
    ks: list[int] = field(default_factory=lambda: [2])
    ns: list[int] = field(default_factory=list)
    J: int = estimator.DEFAULT_J
    channels: list[str] = field(default_factory=lambda: ["value"])
    exact: bool = True
    precision: int = 30
    jobs: int = 1
    seed: int = 0
    format: str = "csv"
    out: str | None = None
    timestamp: str | None = None  # None: default_timestamp(); "now": wall clock

    def __post_init__(self):
        for c in self.channels:
            if c not in CHANNELS:
                raise PreconditionError(f"unknown channel {c!r}; expected one of {CHANNELS}")
        if self.format not in ("csv", "json"):
            raise PreconditionError(f"unknown format {self.format!r}")
        if self.J < 0:
            raise PreconditionError(f"J must be >= 0, got {self.J}")


_LIST_KEYS = {"k": "ks", "ks": "ks", "n": "ns", "ns": "ns", "channel": "channels", "channels": "channels"}
_SCALAR_KEYS = {"J": int, "precision": int, "jobs": int, "seed": int, "format": str, "out": str, "timestamp": str}


def parse_config(text: str) -> SweepConfig:
    """Flat ``key = value`` lines; lists are comma separated; ``#`` starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _LIST_KEYS:
            items = [s.strip() for s in value.split(",") if s.strip()]
            target = _LIST_KEYS[key]
            values[target] = items if target == "channels" else [int(float(s)) for s in items]
        elif key in _SCALAR_KEYS:
            values[key] = _SCALAR_KEYS[key](value)
        elif key == "exact":
            values["exact"] = value.lower() in ("1", "true", "yes", "on")
        else:
            raise PreconditionError(f"config line {lineno}: unknown key {key!r}")
    return SweepConfig(**values)


def _row_task(args) -> ReportRow:
    k, n, J, channel, dps, log_exact, stamp = args
    note = []
    try:
        if channel == "difference":
            est = estimator.estimate_log_diff(k, n, J, dps)
            if est.J_clamped:
                note.append(f"J clamped from {J} to {est.J_used} (k-1)")
        else:
            est = estimator.estimate_log_p(k, n, J, dps)
    except (PreconditionError, PowerPartError) as exc:
        return ReportRow(k, n, None, None, log_exact, None, None, J, channel, stamp, "unsolvable", str(exc))
    log_est = float(est.log_value)
    ratio = math.exp(log_est - log_exact) if log_exact is not None else None
    status = "ok" if est.in_envelope else "out_of_envelope"
    if not est.in_envelope:
        note.append(f"X < {estimator.ENVELOPE_X}")
    return ReportRow(k, n, float(est.X), float(est.Y), log_exact, log_est, ratio, est.J_used, channel, stamp,
                     status, "; ".join(note))


def _exact_logs(k: int, ns: list[int], channels: list[str]) -> dict[tuple[int, str], float | None]:
    if not ns:
        return {}
    table = counting.count_table(k, max(ns) + 1)
    out = {}
    for n in ns:
        if "value" in channels:
            out[(n, "value")] = counting.log_big(table[n]) if table[n] > 0 else None
        if "difference" in channels:
            diff = table[n + 1] - table[n]
            out[(n, "difference")] = counting.log_big(diff) if diff > 0 else None
    return out


def run_sweep(config: SweepConfig) -> list[ReportRow]:
    """One row per (k, n, channel), in config order."""
    if config.timestamp == "now":
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    else:
        stamp = config.timestamp or default_timestamp()
    tasks = []
    for k in config.ks:
        logs = _exact_logs(k, config.ns, config.channels) if config.exact else {}
        for n in config.ns:
            for channel in config.channels:
                tasks.append((k, n, config.J, channel, config.precision, logs.get((n, channel)), stamp))
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_row_task, tasks))
    return [_row_task(t) for t in tasks]


def render_rows(rows: list[ReportRow], fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, "rows": [r.as_json() for r in rows]}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"schema={SCHEMA}\n")
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r.as_strings())
    return buf.getvalue()


def read_csv_report(text: str) -> list[dict[str, str]]:
    lines = text.splitlines()
    if not lines or lines[0] != f"schema={SCHEMA}":
        raise PreconditionError(f"not a schema={SCHEMA} report")
    return list(csv.DictReader(lines[1:]))


def write_report(rows: list[ReportRow], fmt: str, path: str | None) -> str:
    text = render_rows(rows, fmt)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    known_failure: bool = False  # fails for a documented reason; see ``KNOWN_FAILURES``

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VerifySummary:
    level: str
    results: list[SuiteResult]

    @property
    def unexpected_failures(self) -> list[str]:
        return [r.name for r in self.results if not r.passed and not r.known_failure]

    @property
    def failures(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]

    @property
    def ok(self) -> bool:
        return not self.unexpected_failures

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "ok": self.ok,
            "failures": self.failures,
            "unexpected_failures": self.unexpected_failures,
            "results": [r.to_dict() for r in self.results],
        }

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            tag = "PASS" if r.passed else ("FAIL (known)" if r.known_failure else "FAIL")
            out.append(f"{tag:<12} {r.name:<28} {r.seconds:7.2f}s  {r.detail}")
        return out


# The leading-order ratio log p^3(n) / n^(1/4) closes on its limit like n^(-1/4);
# at n = 10^4 it is still 36% short, and only drops under 15% near n = 1.2e6.
KNOWN_FAILURES = {"hardy_ramanujan_k3": "leading-order convergence is too slow at n <= 1e4"}


def load_asymptotic_calibration() -> dict:
    text = resources.files("powerpart").joinpath("data/asymptotic_calibration.json").read_text()
    return json.loads(text)


def brute_force_count(k: int, n: int) -> int:
    """Enumerate non-increasing sequences of k-th powers summing to n."""
    powers = counting.parts(k, n)

    def rec(remaining: int, max_index: int) -> int:
        if remaining == 0:
            return 1
        return sum(rec(remaining - powers[i], i) for i in range(max_index, -1, -1) if powers[i] <= remaining)

    return rec(n, len(powers) - 1) if n > 0 else 1


def euler_product_coefficients(k: int, N: int) -> list[int]:
    """Coefficients of prod_{m^k <= N} (1 - z^(m^k))^(-1) up to z^N by polynomial multiplication."""
    poly = [1] + [0] * N
    for p in counting.parts(k, N):
        geometric = [1 if i % p == 0 else 0 for i in range(N + 1)]
        new = [0] * (N + 1)
        for i, a in enumerate(poly):
            if a:
                for j in range(0, N + 1 - i, p):
                    new[i + j] += a * geometric[j]
        poly = new
    return poly


def _suite(name, fn, results, known=None):
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing suite is a failing suite
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    results.append(SuiteResult(name, passed, detail, time.perf_counter() - t0, known is not None and not passed))


def check_c1(faults=()) -> tuple[bool, str]:
    bad = []
    for k in range(2, 7):
        c1 = compute_c_checked(k, faults)
        if c1 != coefficients.c1_closed_form(k):
            bad.append(f"k={k}: {c1} != {coefficients.c1_closed_form(k)}")
    return (not bad, "; ".join(bad) or "c_1 exact for k=2..6")


def compute_c_checked(k: int, faults=()) -> Fraction:
    c1 = coefficients.compute_c(k, 1).coefficient(1)
    if "c1" in faults:
        c1 += Fraction(1, 1000)
    return c1


def check_structure() -> tuple[bool, str]:
    problems = []
    for k in range(2, 7):
        for J in (1, 2):
            E = coefficients.truncated_exp(coefficients.build_H(k, J), J, v_max=2 * J)
            if E.coefficient(0, 0) != (1, 0) or E.row(0) != {0: (1, 0)}:
                problems.append(f"k={k} J={J}: p_0 != 1")
            if E.row(1) or E.row(2):
                problems.append(f"k={k} J={J}: p_1 or p_2 nonzero")
            if any((u - v) % 2 for (u, v) in E.terms):
                problems.append(f"k={k} J={J}: parity mismatch")
            coefficients.compute_c(k, J)  # raises if half-integer powers survive
    return (not problems, "; ".join(problems) or "p_0=1, p_1=p_2=0, parity, integer powers for k=2..6, J=1,2")


def check_exact_count(n_brute: int = 60, n_euler: int = 200) -> tuple[bool, str]:
    bad = []
    for k in (2, 3, 4):
        table = counting.count_table(k, max(n_brute, n_euler))
        for n in range(n_brute + 1):
            if table[n] != brute_force_count(k, n):
                bad.append(f"brute k={k} n={n}")
        if list(table.counts[: n_euler + 1]) != euler_product_coefficients(k, n_euler):
            bad.append(f"euler k={k}")
    return (not bad, ", ".join(bad) or f"brute force n<={n_brute}, Euler product N<={n_euler}, k=2,3,4")


def _asymptotic_ratios(ns: list[int]) -> list[float]:
    table = counting.count_table(2, max(ns) + 1)
    return [math.exp(float(estimator.estimate_log_p(2, n, 2).log_value) - counting.log_big(table[n])) for n in ns]


def check_asymptotic(ns: list[int]) -> tuple[bool, str]:
    ratios = _asymptotic_ratios(ns)
    errs = [abs(r - 1) for r in ratios]
    calib = {int(n): float(v) for n, v in load_asymptotic_calibration()["ratio_minus_one"].items()}
    ok = all(a > b for a, b in zip(errs, errs[1:]))
    if 100_000 in ns:
        ok &= errs[ns.index(100_000)] < 0.05
    for n, r in zip(ns, ratios):
        ref = calib.get(n)
        if ref is not None:
            lo, hi = sorted((0.8 * ref, 1.2 * ref))
            ok &= lo <= r - 1 <= hi
    detail = ", ".join(f"n={n}: ratio-1={r - 1:.4e}" for n, r in zip(ns, ratios))
    return ok, detail


def check_hardy_ramanujan(k: int, ns: list[int]) -> tuple[bool, str]:
    C = float(estimator.hardy_ramanujan_constant(k))
    table = counting.count_table(k, max(ns))
    vals = [counting.log_big(table[n]) / n ** (1.0 / (k + 1)) for n in ns]
    gaps = [abs(C - v) / C for v in vals]
    ok = all(a > b for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 0.15
    return ok, f"C={C:.6f}; " + ", ".join(f"n={n}: {v:.4f} (gap {g:.1%})" for n, v, g in zip(ns, vals, gaps))


def difference_ratio(n: int, table=None) -> float:
    table = table or counting.count_table(2, n + 1)
    X = float(estimator.solve_saddle(2, n).X)
    return (table[n + 1] - table[n]) * X / table[n]


def check_difference_ratio(n_lo: int, n_hi: int) -> tuple[bool, str]:
    table = counting.count_table(2, n_hi + 1)
    lo, hi = difference_ratio(n_lo, table), difference_ratio(n_hi, table)
    ok = 0.8 < hi < 1.2 and abs(hi - 1) < abs(lo - 1)
    return ok, f"n={n_lo}: {lo:.5f}, n={n_hi}: {hi:.5f}"


def check_gap_scan(r_max: int, jobs: int = 1) -> tuple[bool, str]:
    parts, ok = [], True
    for k in (2, 3, 4, 5):
        rep = expsums.gap_scan(k, r_max, jobs)
        ok &= rep.delta_empirical > 0 and rep.c_fit <= 10
        parts.append(f"k={k}: delta={rep.delta_empirical:.4f} C={rep.c_fit:.3f}")
    return ok, "; ".join(parts)


def origin_error(k: int, X, theta=0, start_dps: int = 40, max_dps: int = 640) -> tuple[mpmath.mpf, int]:
    """|phi_direct - xi_approx|, raising the precision until it clears the noise floor."""
    dps = start_dps
    while True:
        value = phi.phi_direct(k, X, theta, dps=dps)
        diff = abs(value.value - phi.xi_approx(k, X, theta, dps=dps))
        floor = mpmath.mpf(10) ** (10 - dps) * abs(value.value) + value.truncation_error_bound
        if diff > 100 * floor or dps >= max_dps:
            return diff, dps
        dps *= 2


def check_origin_approx(Xs: list[int]) -> tuple[bool, str]:
    errs = [origin_error(2, X)[0] for X in Xs]
    ok = all(a >= 5 * b for a, b in zip(errs, errs[1:]))
    return ok, ", ".join(f"X={X}: {mpmath.nstr(e, 4)}" for X, e in zip(Xs, errs))


def check_major_arc(X: float, qmax: int = 5, k: int = 2) -> tuple[bool, str]:
    worst = 0.0
    for q in range(1, qmax + 1):
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            val = phi.phi_direct(k, X, Fraction(a, q)).value
            approx = phi.major_arc_approx(k, X, q, a, 0).value
            worst = max(worst, abs(val - approx) / phi.major_arc_envelope(X, q, 0))
    return worst < 10, f"max error/envelope = {worst:.3f} over q<={qmax} at X={X:g}"


def check_round_trip(samples: int, seed: int = 0) -> tuple[bool, str]:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(samples):
        Xstar = 10 ** rng.uniform(1, 6)
        for k in (2, 3):
            n = estimator.n_of_X(k, Xstar)
            X = estimator.solve_saddle(k, n).X
            worst = max(worst, float(abs(X - mpmath.mpf(Xstar)) / Xstar))
    return worst < 1e-9, f"max relative error {worst:.2e} over {samples} X* per k"


def verify_all(level: str = "quick", faults=(), jobs: int = 1, seed: int = 0) -> VerifySummary:
    if level not in ("quick", "full"):
        raise PreconditionError(f"level must be quick or full, got {level!r}")
    full = level == "full"
    results: list[SuiteResult] = []
    _suite("coefficient_c1", lambda: check_c1(faults), results)
    _suite("coefficient_structure", check_structure, results)
    _suite("exact_count", lambda: check_exact_count(60 if full else 40, 200), results)
    _suite("asymptotic_vs_exact", lambda: check_asymptotic([1000, 10000, 100000] if full else [1000, 10000]), results)
    _suite("hardy_ramanujan_k2", lambda: check_hardy_ramanujan(2, [1000, 10000, 100000]), results)
    _suite("hardy_ramanujan_k3", lambda: check_hardy_ramanujan(3, [1000, 10000]), results,
           known=KNOWN_FAILURES["hardy_ramanujan_k3"])
    _suite("difference_ratio", lambda: check_difference_ratio(10000, 100000) if full else check_difference_ratio(1000, 10000), results)
    _suite("gap_scan", lambda: check_gap_scan(2000 if full else 500, jobs), results)
    _suite("origin_approx", lambda: check_origin_approx([100, 400, 1600] if full else [100, 400]), results)
    _suite("major_arc_approx", lambda: check_major_arc(1e4 if full else 1e3), results)
    _suite("saddle_round_trip", lambda: check_round_trip(100 if full else 20, seed), results)
    return VerifySummary(level, results)


# ---------------------------------------------------------------------------
# lemma tables for ``verify-lemma``
# ---------------------------------------------------------------------------

def lemma_rows(which: int, k: int, Xs: list[float] | None = None, seed: int = 0, samples: int = 16) -> list[dict]:
    if which == 2:
        rows = []
        for X in Xs or [100, 400, 1600]:
            err, dps = origin_error(k, X)
            env = phi.xi_envelope(k, X, 0)
            rows.append({"k": k, "X": X, "theta": 0, "delta": 1.0, "error": mpmath.nstr(err, 6),
                         "envelope": mpmath.nstr(env, 6), "error_over_envelope": mpmath.nstr(err / env, 6),
                         "dps": dps})
        return rows
    if which == 3:
        rows = []
        for X in Xs or [1e3, 1e4]:
            for q in range(1, 6):
                for a in range(q):
                    if math.gcd(a, q) != 1 or q**k > X:
                        continue
                    val = phi.phi_direct(k, X, Fraction(a, q)).value
                    approx = phi.major_arc_approx(k, X, q, a, 0).value
                    err = abs(val - approx)
                    env = phi.major_arc_envelope(X, q, 0)
                    rows.append({"k": k, "X": X, "q": q, "a": a, "error": f"{err:.6g}", "envelope": f"{env:.6g}",
                                 "error_over_envelope": f"{err / env:.6g}"})
        return rows
    if which == 4:
        rows = []
        for X in Xs or [1e3, 1e4]:
            rep = phi.minor_arc_diagnostic(k, X, samples, seed)
            d = rep.to_dict()
            rows.append({key: (f"{v:.6g}" if isinstance(v, float) else v) for key, v in d.items()})
        return rows
    raise PreconditionError(f"--which must be 2, 3 or 4, got {which}")


def render_dicts(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, "rows": rows}, indent=2, sort_keys=True, default=str) + "\n"
    buf = io.StringIO()
    buf.write(f"schema={SCHEMA}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()
