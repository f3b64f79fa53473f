"""Phi_k(rho e(Theta)) = sum_j sum_n z^(j n^k) / j with z = e^(-1/X) e(Theta).

``phi_direct`` sums the double series with certified truncation bounds; the
other functions evaluate the near-origin (``xi_approx``) and major-arc
(``major_arc_approx``) approximations and the arc geometry they live on.

Two summation kernels are used.  At double precision the inner j-series for
each n is summed with numpy.  Beyond that the inner series runs in fixed-point
integer arithmetic (values scaled by 2^P), which is several times faster than
mpmath objects at a few hundred digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from .errors import PreconditionError, ResourceError
from .expsums import singular_series, singular_sum
from .special import gamma_real, to_mpf, working_dps, zeta_negative_integer, zeta_real

EPS = np.finfo(float).eps
FLOAT_TOL_FLOOR = 1e-13
DEFAULT_MAX_TERMS = 50_000_000
_CHUNK = 1 << 20


def delta_of(X, theta) -> float:
    """Delta = (1 + 4 pi^2 X^2 Theta^2)^(-1/2)."""
    X = float(X)
    if X < 1:
        raise PreconditionError(f"X must be >= 1, got {X}")
    return (1.0 + 4.0 * math.pi**2 * X * X * float(theta) ** 2) ** -0.5


@dataclass(frozen=True)
class PhiValue:
    value: complex | mpmath.mpc
    truncation_error_bound: float
    terms_used: int
    dps: int | None = None  # None for the double-precision kernel


def _exact_theta(theta):
    """Theta as a Fraction when that is exact, else as an mpf."""
    if isinstance(theta, (int, Fraction, float)):
        return Fraction(theta)
    if isinstance(theta, str):
        try:
            return Fraction(theta)
        except ValueError:
            return mp.mpf(theta)
    return theta


def _frac_of_multiple(power: int, theta) -> Fraction | mpmath.mpf:
    # fractional part of power * theta, exact when theta is rational
    if isinstance(theta, Fraction):
        x = power * theta
        return x - math.floor(x)
    return mp.frac(power * theta)


def _outer_cutoff(k: int, X: float, log_tol: float) -> tuple[int, float]:
    """Smallest N with sum_{n>N} -log(1 - e^(-n^k/X)) below e^log_tol, and that bound."""
    N = 1
    while True:
        t = (N + 1) ** k / X
        ratio = k * (N + 1) ** (k - 1) / X
        # w/(1-w) summed over a geometric majorant with ratio e^(-k (N+1)^(k-1)/X)
        log_bound = -t - math.log(-math.expm1(-t)) - math.log(-math.expm1(-ratio))
        if log_bound <= log_tol:
            return N, math.exp(log_bound)
        N += 1


def _inner_cutoff(t: float, log_tol: float) -> tuple[int, float]:
    """J with sum_{j>J} w^j/j <= w^(J+1)/((J+1)(1-w)) below e^log_tol, w = e^(-t)."""
    log_1mw = math.log(-math.expm1(-t))
    J = max(1, math.ceil((log_tol + log_1mw) / -t) - 1)
    while True:
        log_bound = -(J + 1) * t - math.log(J + 1) - log_1mw
        if log_bound <= log_tol:
            return J, math.exp(log_bound)
        J += 1


def _phi_float(k, X, theta, tol_abs, max_terms):
    X = float(X)
    N, outer = _outer_cutoff(k, X, math.log(tol_abs / 2))
    inner_log_tol = math.log(tol_abs / (2 * N))
    total = 0j
    bound = outer
    terms = 0
    for n in range(1, N + 1):
        t = n**k / X
        J, tail = _inner_cutoff(t, inner_log_tol)
        terms += J
        if terms > max_terms:
            raise ResourceError(f"phi_direct exceeded {max_terms} terms", partial=total)
        f = float(_frac_of_multiple(n**k, theta))
        for start in range(1, J + 1, _CHUNK):
            j = np.arange(start, min(start + _CHUNK, J + 1), dtype=float)
            phase = np.mod(j * f, 1.0)
            total += complex(np.sum(np.exp(-j * t + 2j * math.pi * phase) / j))
        w = math.exp(-t)
        abs_sum = -math.log1p(-w)
        # phase error <= 2 pi j 2^-51 per term, plus per-term and pairwise-summation rounding
        rounding = 2 * math.pi * 2.0**-51 * w / (1 - w) + (16 + math.log2(J + 1)) * EPS * abs_sum
        bound += tail + rounding
    bound += (N + 4) * EPS * abs(total)
    return total, bound, terms


def _phi_fixed(k, X, theta, tol_abs, dps, max_terms):
    P = math.ceil((dps + 10) * math.log2(10)) + 64
    scale = mp.mpf(2) ** P
    Xf = float(X)
    N, outer = _outer_cutoff(k, Xf, math.log(tol_abs / 2))
    inner_log_tol = math.log(tol_abs / (2 * N))
    sr = si = 0
    bound = outer
    terms = 0
    ulp = 2.0**-P
    with mp.workdps(dps + 20):
        Xm = to_mpf(X)
        for n in range(1, N + 1):
            t = n**k / Xf
            J, tail = _inner_cutoff(t, inner_log_tol)
            terms += J
            if terms > max_terms:
                raise ResourceError(f"phi_direct exceeded {max_terms} terms", partial=mp.mpc(sr, si) / scale)
            f = _frac_of_multiple(n**k, theta)
            w = mp.exp(-mp.mpf(n**k) / Xm)
            if f == 0:
                zr, zi = int(mp.floor(w * scale)), 0
            else:
                angle = 2 * mp.pi * to_mpf(f)
                zr = int(mp.floor(w * mp.cos(angle) * scale))
                zi = int(mp.floor(w * mp.sin(angle) * scale))
            pr, pi = zr, zi
            acc_r, acc_i = pr, pi
            if zi == 0:
                for j in range(2, J + 1):
                    pr = (pr * zr) >> P
                    acc_r += pr // j
            else:
                for j in range(2, J + 1):
                    pr, pi = (pr * zr - pi * zi) >> P, (pr * zi + pi * zr) >> P
                    acc_r += pr // j
                    acc_i += pi // j
            sr += acc_r
            si += acc_i
            wf = math.exp(-t)
            bound += tail + 4 * (3 / (1 - wf) + 1) * (math.log(J) + 2) * ulp
        value = mp.mpc(sr, si) / scale
    with mp.workdps(dps):
        return +value, bound, terms


def phi_direct(k: int, X, theta=0, rel_tol: float | None = None, dps: int | None = None,
               max_terms: int = DEFAULT_MAX_TERMS) -> PhiValue:
    """Sum the double series for Phi_k(e^(-1/X) e(theta)).

    Truncation: n is cut where the remaining rows are bounded by a geometric
    majorant, and each row's j-series where its geometric tail drops below the
    per-row share of the budget.  The reported bound adds floating or
    fixed-point rounding and is compared against rel_tol * |value|; when the
    first pass was budgeted against too large a scale it is repeated once.

    ``rel_tol`` below 1e-13 (or an explicit ``dps``) selects the fixed-point
    kernel and returns an mpmath mpc.  The default tolerance is 1e-12, or
    10^(5 - dps) when ``dps`` is given.
    """
    if rel_tol is None:
        rel_tol = 1e-12 if dps is None else 10.0 ** (5 - dps)
    if float(X) < 1:
        raise PreconditionError(f"X must be >= 1, got {X}")
    if rel_tol <= 0:
        raise PreconditionError(f"rel_tol must be positive, got {rel_tol}")
    theta = _exact_theta(theta)
    high = dps is not None or rel_tol < FLOAT_TOL_FLOOR
    if high and dps is None:
        dps = math.ceil(-math.log10(rel_tol)) + 5
    Xf = float(X)
    # |Phi| <= Phi(0) = sum_n -log(1 - e^(-n^k/X)); start from that scale
    scale = sum(-math.log1p(-math.exp(-(n**k) / Xf)) for n in range(1, int((60 * Xf) ** (1 / k)) + 2))
    for _ in range(3):
        tol_abs = rel_tol * scale
        if high:
            value, bound, terms = _phi_fixed(k, X, theta, tol_abs, dps, max_terms)
        else:
            value, bound, terms = _phi_float(k, X, theta, tol_abs, max_terms)
        magnitude = float(abs(value))
        if bound <= rel_tol * magnitude or magnitude >= scale / 2 or magnitude == 0:
            break
        scale = magnitude / 2
    return PhiValue(value, bound, terms, dps if high else None)


def euler_product(k: int, X, theta, M: int) -> complex:
    """prod_{m^k <= M} (1 - z^(m^k))^(-1) at double precision."""
    z_abs = math.exp(-1.0 / float(X))
    theta = _exact_theta(theta)
    out = 1 + 0j
    m = 1
    while m**k <= M:
        p = m**k
        f = float(_frac_of_multiple(p, theta))
        out /= 1 - z_abs**p * complex(math.cos(2 * math.pi * f), math.sin(2 * math.pi * f))
        m += 1
    return out


def xi_applicable(X, theta) -> bool:
    """X Delta^3 >= 1."""
    return float(X) * delta_of(X, theta) ** 3 >= 1


def xi_approx(k: int, X, theta=0, dps: int | None = None, strict: bool = True) -> mpmath.mpc:
    """(1/k) zeta((k+1)/k) Gamma(1/k) (X/w)^(1/k) - (1/2) log((2 pi)^k X / w) + (1/2) zeta(-k) w / X,
    with w = 1 - 2 pi i X Theta.

    Re w = 1, so arg w stays in (-pi/2, pi/2) and principal branches coincide
    with continuation from Theta = 0.  With ``strict`` the call is refused
    outside X Delta^3 >= 1.
    """
    if strict and not xi_applicable(X, theta):
        raise PreconditionError(f"X Delta^3 < 1 at X={X}, Theta={theta}")
    dps = working_dps(dps)
    with mp.workdps(dps + 10):
        Xm = to_mpf(X)
        th = to_mpf(_exact_theta(theta))
        w = mp.mpc(1, -2 * mp.pi * Xm * th)
        assert -mp.pi / 2 < mp.arg(w) < mp.pi / 2
        zg = zeta_real(Fraction(k + 1, k), dps + 10) * gamma_real(Fraction(1, k), dps + 10)
        value = (
            zg / k * mp.power(Xm / w, mp.mpf(1) / k)
            - mp.log((2 * mp.pi) ** k * Xm / w) / 2
            + to_mpf(zeta_negative_integer(k)) * w / (2 * Xm)
        )
    with mp.workdps(dps):
        return +value


def xi_envelope(k: int, X, theta=0) -> mpmath.mpf:
    """Delta^(-1/2) exp(-(1/k) (2 (pi Delta)^(k+1) X)^(1/k))."""
    with mp.workdps(30):
        d = to_mpf(delta_of(X, theta))
        return d ** -0.5 * mp.exp(-(2 * (mp.pi * d) ** (k + 1) * to_mpf(X)) ** (mp.mpf(1) / k) / k)


@dataclass(frozen=True)
class MajorArcValue:
    value: complex
    series_tail_bound: float  # contribution bound of the omitted j-terms (0 for the exact series)
    prefactor: complex
    series: complex


def major_arc_approx(k: int, X, q: int, a: int, theta, J_terms: int | None = None,
                     use_full_theta: bool = False) -> MajorArcValue:
    """Gamma((k+1)/k) (X/(1 - 2 pi i X t))^(1/k) sum_j S_k(q_j, a_j)/(j^((k+1)/k) q_j).

    t is the offset theta = Theta - a/q by default; ``use_full_theta`` uses
    Theta = a/q + theta instead.  With ``J_terms=None`` the j-series is summed
    exactly by residue classes mod q; otherwise it is truncated and the zeta
    tail is reported.
    """
    if float(X) <= 1:
        raise PreconditionError(f"X must be > 1, got {X}")
    if J_terms is None:
        series = complex(singular_series(k, q, a))
        tail = 0.0
    else:
        part = singular_sum(k, q, a, J_terms)
        series, tail = part.value, part.tail_bound
    t = float(theta) + (a / q if use_full_theta else 0.0)
    Xf = float(X)
    g = float(gamma_real(Fraction(k + 1, k)))
    prefactor = g * (Xf / complex(1.0, -2 * math.pi * Xf * t)) ** (1.0 / k)
    return MajorArcValue(prefactor * series, abs(prefactor) * tail, prefactor, series)


def major_arc_envelope(X, q: int, theta) -> float:
    """q^(1/2) log X (1 + X^(1/2) |theta|^(1/2))."""
    return math.sqrt(q) * math.log(float(X)) * (1 + math.sqrt(float(X) * abs(float(theta))))


# ---------------------------------------------------------------------------
# arc geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcPoint:
    Theta: float
    q: int
    a: int
    theta: float  # Theta - a/q
    major: bool

    @property
    def classification(self) -> str:
        return f"major({self.q},{self.a})" if self.major else "minor"


def arc_radius_scale(k: int, X) -> float:
    """X^(1/k - 1): the window offset and the q = 1 arc radius."""
    return float(X) ** (1.0 / k - 1.0)


def max_denominator(k: int, X) -> int:
    """Largest q with q^k <= X."""
    Xf = float(X)
    q = max(1, int(Xf ** (1.0 / k)))
    while (q + 1) ** k <= Xf:
        q += 1
    while q > 1 and q**k > Xf:
        q -= 1
    return q


def in_window(k: int, X, Theta) -> bool:
    c = arc_radius_scale(k, X)
    return -c < float(Theta) <= 1 - c


def classify_arc(k: int, X, Theta) -> ArcPoint:
    """The major arc containing Theta with the smallest q, or minor.

    For a minor point q/a record the closest fraction with q <= X^(1/k).
    """
    if not in_window(k, X, Theta):
        raise PreconditionError(f"Theta={Theta} is outside the window (-X^(1/k-1), 1-X^(1/k-1)]")
    Th = float(Theta)
    c = arc_radius_scale(k, X)
    best = None
    for q in range(1, max_denominator(k, X) + 1):
        a = round(Th * q)
        if math.gcd(a, q) != 1:
            continue
        dist = abs(Th - a / q)
        if dist <= c / q:
            return ArcPoint(Th, q, a, Th - a / q, True)
        if best is None or dist < best[0]:
            best = (dist, q, a)
    _, q, a = best
    return ArcPoint(Th, q, a, Th - a / q, False)


def major_arc_intervals(k: int, X) -> list[tuple[int, int, float, float]]:
    """(q, a, lo, hi) for every major arc, clipped to the window."""
    c = arc_radius_scale(k, X)
    out = [(1, 0, -c, c)]
    for q in range(2, max_denominator(k, X) + 1):
        r = c / q
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                out.append((q, a, max(a / q - r, -c), min(a / q + r, 1 - c)))
    return out


def minor_arc_intervals(k: int, X) -> list[tuple[float, float]]:
    """Complement of the major arcs inside the window, as disjoint open intervals."""
    c = arc_radius_scale(k, X)
    spans = sorted((lo, hi) for _, _, lo, hi in major_arc_intervals(k, X))
    gaps = []
    cursor = -c
    for lo, hi in spans:
        if lo > cursor:
            gaps.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < 1 - c:
        gaps.append((cursor, 1 - c))
    return gaps


def overlapping_major_arcs(k: int, X) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Pairs of distinct major arcs whose closed intervals intersect."""
    arcs = sorted(major_arc_intervals(k, X), key=lambda t: t[2])
    hits = []
    for (q1, a1, lo1, hi1), (q2, a2, lo2, hi2) in zip(arcs, arcs[1:]):
        if lo2 <= hi1:
            hits.append(((q1, a1), (q2, a2)))
    return hits


@dataclass(frozen=True)
class MinorArcReport:
    k: int
    X: float
    sample_count: int
    seed: int
    degenerate: bool
    minor_measure: float
    exponent: float  # 1/k - 1/(k 2^(k-1))
    phi_origin_abs: float
    max_abs_phi: float = float("nan")
    argmax_theta: float = float("nan")
    ratio: float = float("nan")  # max |Phi| / X^exponent
    samples: tuple[tuple[float, float], ...] = field(default=())

    @property
    def all_below_origin(self) -> bool:
        return all(abs_phi < self.phi_origin_abs for _, abs_phi in self.samples)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "X": self.X, "sample_count": self.sample_count, "seed": self.seed,
            "degenerate": self.degenerate, "minor_measure": self.minor_measure,
            "exponent": self.exponent, "phi_origin_abs": self.phi_origin_abs,
            "max_abs_phi": self.max_abs_phi, "argmax_theta": self.argmax_theta,
            "ratio": self.ratio, "all_below_origin": self.all_below_origin,
        }


def minor_arc_diagnostic(k: int, X, sample_count: int = 32, seed: int = 0,
                         rel_tol: float = 1e-10) -> MinorArcReport:
    """Sample Theta uniformly from the minor arcs and compare max |Phi| to X^(1/k - 1/(k 2^(k-1))).

    Purely diagnostic: the implied constant of the bound is unknown, so nothing
    is asserted.
    """
    gaps = minor_arc_intervals(k, X)
    measure = sum(hi - lo for lo, hi in gaps)
    exponent = 1.0 / k - 1.0 / (k * 2 ** (k - 1))
    origin = abs(phi_direct(k, X, 0, rel_tol).value)
    if measure <= 1e-12:
        return MinorArcReport(k, float(X), 0, seed, True, measure, exponent, float(origin))
    rng = np.random.default_rng(seed)
    lengths = np.array([hi - lo for lo, hi in gaps])
    picks = rng.choice(len(gaps), size=sample_count, p=lengths / lengths.sum())
    offsets = rng.random(sample_count)
    samples = []
    for i, u in zip(picks, offsets):
        lo, hi = gaps[i]
        theta = lo + u * (hi - lo)
        samples.append((theta, float(abs(phi_direct(k, X, theta, rel_tol).value))))
    theta_max, phi_max = max(samples, key=lambda s: s[1])
    return MinorArcReport(
        k, float(X), sample_count, seed, False, measure, exponent, float(origin),
        phi_max, theta_max, phi_max / float(X) ** exponent, tuple(samples),
    )
