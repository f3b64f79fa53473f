"""Complete exponential sums S_k(r, b) = sum_{m=1}^{r} e(b m^k / r).

Residues b*m^k mod r are always formed in exact integer arithmetic; the only
floating step is the final weighting by roots of unity.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp

from .errors import PreconditionError, VerificationError
from .special import hurwitz_zeta, to_mpf, working_dps, zeta_real

# a scan may not come closer to |S| = r than this
GAP_VIOLATION_SLACK = 1e-12


@dataclass(frozen=True)
class ExpSum:
    r: int
    b: int
    value: complex

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class GapReport:
    k: int
    r_max: int
    worst_ratio: float
    worst_pair: tuple[int, int]
    c_fit: float  # max over the scan of |S_k(r,b)| / r^(1-1/k)
    c_fit_pair: tuple[int, int]
    pairs_scanned: int

    @property
    def delta_empirical(self) -> float:
        return 1.0 - self.worst_ratio

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "r_max": self.r_max,
            "worst_ratio": self.worst_ratio,
            "worst_pair": list(self.worst_pair),
            "delta_empirical": self.delta_empirical,
            "c_fit": self.c_fit,
            "c_fit_pair": list(self.c_fit_pair),
            "pairs_scanned": self.pairs_scanned,
        }


def power_residue_counts(k: int, r: int) -> np.ndarray:
    """counts[t] = #{1 <= m <= r : m^k = t (mod r)}."""
    m = np.arange(1, r + 1, dtype=np.int64) % r
    power = m.copy()
    for _ in range(k - 1):
        power = (power * m) % r
    return np.bincount(power, minlength=r)


def s_k(k: int, r: int, b: int) -> ExpSum:
    """S_k(r, b) by direct summation over m = 1..r."""
    if r < 1:
        raise PreconditionError(f"r must be >= 1, got {r}")
    counts = power_residue_counts(k, r)
    total = 0j
    for t in np.nonzero(counts)[0]:
        residue = (b * int(t)) % r
        total += int(counts[t]) * cmath.exp(2j * math.pi * residue / r)
    return ExpSum(r, b, total)


def all_sums(k: int, r: int) -> np.ndarray:
    """S_k(r, b) for every b in 0..r-1 at once.

    sum_t N(t) e(bt/r) is a DFT of the residue histogram N.
    """
    counts = power_residue_counts(k, r).astype(float)
    return np.conj(np.fft.fft(counts))


def _scan_chunk(args):
    k, rs = args
    worst = (-1.0, (0, 0))
    cfit = (-1.0, (0, 0))
    scanned = 0
    for r in rs:
        sums = np.abs(all_sums(k, r))
        b = np.arange(r)
        coprime = np.gcd(b, r) == 1
        mags = np.where(coprime, sums, -1.0)
        i = int(np.argmax(mags))
        ratio = float(mags[i]) / r
        if ratio > worst[0]:
            worst = (ratio, (r, i))
        c = float(mags[i]) / r ** (1.0 - 1.0 / k)
        if c > cfit[0]:
            cfit = (c, (r, i))
        scanned += int(coprime.sum())
    return worst, cfit, scanned


def gap_scan(k: int, r_max: int, jobs: int = 1) -> GapReport:
    """Worst |S_k(r,b)|/r over 2 <= r <= r_max, 1 <= b <= r, gcd(b, r) = 1.

    Raises VerificationError if a ratio reaches 1 (up to a 1e-12 slack).
    """
    if r_max < 2:
        raise PreconditionError(f"r_max must be >= 2, got {r_max}")
    rs = list(range(2, r_max + 1))
    if jobs > 1:
        chunks = [(k, rs[i::jobs]) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_chunk, chunks))
    else:
        results = [_scan_chunk((k, rs))]
    worst = max((res[0] for res in results), key=lambda w: (w[0], -w[1][0]))
    cfit = max((res[1] for res in results), key=lambda c: (c[0], -c[1][0]))
    scanned = sum(res[2] for res in results)
    ratio, (r, b) = worst
    # b = 0 is only coprime to r = 1, so the argmax index is a valid b in 1..r-1
    if ratio >= 1.0 - GAP_VIOLATION_SLACK:
        raise VerificationError(f"|S_{k}({r},{b})| / r = {ratio} reaches 1")
    return GapReport(k, r_max, ratio, (r, b), cfit[0], cfit[1], scanned)


@dataclass(frozen=True)
class SingularSum:
    value: complex
    tail_bound: float
    terms: int


def _reduced_terms(k: int, q: int, a: int) -> list[complex]:
    """S_k(q_j, a_j)/q_j for j = 1..q; the sequence is periodic in j with period q."""
    out = []
    for j in range(1, q + 1):
        g = math.gcd(q, j)
        qj = q // g
        aj = (a * j // g) % qj
        out.append(s_k(k, qj, aj).value / qj)
    return out


def _check_arc(q: int, a: int) -> None:
    if q < 1:
        raise PreconditionError(f"q must be >= 1, got {q}")
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"gcd(a, q) must be 1, got a={a}, q={q}")


def singular_sum(k: int, q: int, a: int, J_terms: int) -> SingularSum:
    """Partial sum over j <= J_terms of S_k(q_j, a_j) / (j^((k+1)/k) q_j).

    q_j = q/gcd(q, j), a_j = a j / gcd(q, j).  ``tail_bound`` is the zeta tail
    sum_{j > J_terms} j^(-(k+1)/k), which dominates the omitted terms since
    |S_k(q_j, a_j)| <= q_j.
    """
    _check_arc(q, a)
    if J_terms < 1:
        raise PreconditionError(f"J_terms must be >= 1, got {J_terms}")
    period = _reduced_terms(k, q, a)
    alpha = (k + 1) / k
    j = np.arange(1, J_terms + 1, dtype=float)
    weights = j ** (-alpha)
    coeffs = np.array(period)[(np.arange(J_terms)) % q]
    value = complex(np.sum(coeffs * weights))
    tail = float(hurwitz_zeta(Fraction(k + 1, k), J_terms + 1, dps=20))
    return SingularSum(value, tail, J_terms)


def singular_series(k: int, q: int, a: int, dps: int | None = None):
    """The full series over all j >= 1, summed exactly by residue class of j mod q.

    sum_j c(j mod q) j^(-s) = q^(-s) sum_{r=1}^{q} c(r) zeta(s, r/q), Hurwitz zeta.
    Returns an mpmath mpc at ``dps`` digits.
    """
    _check_arc(q, a)
    dps = working_dps(dps)
    s = Fraction(k + 1, k)
    period = _reduced_terms(k, q, a)
    with mp.workdps(dps + 5):
        total = mp.mpc(0)
        for r, c in enumerate(period, start=1):
            if c == 0:
                continue
            total += mp.mpc(c) * hurwitz_zeta(s, Fraction(r, q), dps=dps + 5)
        total *= mp.power(q, -to_mpf(s))
    with mp.workdps(dps):
        return +total


def singular_series_bound(k: int, delta: float, dps: int | None = None) -> float:
    """(1 - delta/2) zeta((k+1)/k): the bound on the series for q > 1 given a gap delta."""
    return (1.0 - delta / 2.0) * float(zeta_real(Fraction(k + 1, k), dps=dps))
