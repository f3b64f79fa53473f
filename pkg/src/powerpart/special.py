"""Exact and high-precision special values: zeta, gamma, Bernoulli numbers.

Floating results are ``mpmath.mpf`` values computed at a requested number of
decimal digits (``dps``, default :data:`DEFAULT_DPS`).  Everything rational
(Bernoulli numbers, zeta at negative integers, gamma at half integers over
sqrt(pi)) is returned as an exact :class:`fractions.Fraction`.

Only real arguments are supported.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp

from .errors import PreconditionError

DEFAULT_DPS = 30

_GUARD_DIGITS = 10


def working_dps(dps: int | None) -> int:
    return DEFAULT_DPS if dps is None else int(dps)


def to_mpf(x) -> mpmath.mpf:
    """Convert ints, Fractions, floats, strings and mpf to mpf at the current precision."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def _cache_key(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    return x


# ---------------------------------------------------------------------------
# Bernoulli numbers
# ---------------------------------------------------------------------------

_bernoulli_table: list[Fraction] = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(m: int) -> Fraction:
    """Exact Bernoulli number B_m with the convention B_1 = -1/2.

    Uses the recurrence sum_{j=0}^{m} C(m+1, j) B_j = 0.  The table is grown
    under a lock; reads of already computed entries need no locking.
    """
    if m < 0:
        raise PreconditionError(f"bernoulli index must be >= 0, got {m}")
    table = _bernoulli_table
    if m < len(table):
        return table[m]
    with _bernoulli_lock:
        while len(table) <= m:
            n = len(table)
            if n > 1 and n % 2 == 1:
                table.append(Fraction(0))
                continue
            acc = Fraction(0)
            binom = 1  # C(n+1, j) updated incrementally
            for j in range(n):
                acc += binom * table[j]
                binom = binom * (n + 1 - j) // (j + 1)
            table.append(-acc / (n + 1))
    return table[m]


def zeta_negative_integer(m: int) -> Fraction:
    """zeta(-m) = -B_{m+1}/(m+1) for m >= 1 (zero for even m)."""
    if m < 1:
        raise PreconditionError(f"zeta_negative_integer needs m >= 1, got {m}")
    return -bernoulli(m + 1) / (m + 1)


def gamma_halfinteger(h: int) -> Fraction:
    """Rational r with Gamma(h + 1/2) = r * sqrt(pi)."""
    if h < 0:
        raise PreconditionError(f"gamma_halfinteger needs h >= 0, got {h}")
    return Fraction(math.factorial(2 * h), 4**h * math.factorial(h))


# ---------------------------------------------------------------------------
# zeta via Euler-Maclaurin
# ---------------------------------------------------------------------------

def _hurwitz_em(s, a, dps: int):
    """Euler-Maclaurin evaluation of sum_{n>=0} (n+a)^(-s) for real s > 1, a > 0."""
    n_terms = 10 * dps
    tol = mp.mpf(10) ** (-(dps + 5))
    total = mp.fsum((n + a) ** (-s) for n in range(n_terms))
    base = n_terms + a
    total += base ** (1 - s) / (s - 1) + base ** (-s) / 2
    # B_{2p}/(2p)! * s(s+1)...(s+2p-2) * base^(-s-2p+1)
    rising = s
    power = base ** (-s - 1)
    inv_base_sq = 1 / (base * base)
    fact = mp.mpf(2)
    prev = None
    for p in range(1, 4 * dps + 20):
        term = to_mpf(bernoulli(2 * p)) / fact * rising * power
        total += term
        if abs(term) <= tol * abs(total):
            return total
        if prev is not None and abs(term) > abs(prev):
            break
        prev = term
        rising *= (s + 2 * p - 1) * (s + 2 * p)
        power *= inv_base_sq
        fact *= (2 * p + 1) * (2 * p + 2)
    raise ArithmeticError("Euler-Maclaurin tail did not reach the requested precision")


@lru_cache(maxsize=512)
def _zeta_cached(s_key, a_key, dps: int):
    with mp.workdps(dps + _GUARD_DIGITS):
        value = _hurwitz_em(to_mpf(s_key), to_mpf(a_key), dps + _GUARD_DIGITS)
    with mp.workdps(dps):
        return +value


def zeta_real(s, dps: int | None = None) -> mpmath.mpf:
    """Riemann zeta at a real s > 1."""
    dps = working_dps(dps)
    with mp.workdps(dps + _GUARD_DIGITS):
        if to_mpf(s) <= 1:
            raise PreconditionError(f"zeta_real needs s > 1, got {s}")
    return _zeta_cached(_cache_key(s), Fraction(1), dps)


def hurwitz_zeta(s, a, dps: int | None = None) -> mpmath.mpf:
    """Hurwitz zeta sum_{n>=0} (n+a)^(-s) for real s > 1 and a > 0."""
    dps = working_dps(dps)
    with mp.workdps(dps + _GUARD_DIGITS):
        if to_mpf(s) <= 1:
            raise PreconditionError(f"hurwitz_zeta needs s > 1, got {s}")
        if to_mpf(a) <= 0:
            raise PreconditionError(f"hurwitz_zeta needs a > 0, got {a}")
    return _zeta_cached(_cache_key(s), _cache_key(a), dps)


# ---------------------------------------------------------------------------
# gamma via shifted Stirling series
# ---------------------------------------------------------------------------

def _log_gamma_stirling(z, dps: int):
    tol = mp.mpf(10) ** (-(dps + 5))
    total = (z - mp.mpf(1) / 2) * mp.log(z) - z + mp.log(2 * mp.pi) / 2
    inv_z = 1 / z
    inv_z_sq = inv_z * inv_z
    power = inv_z
    for p in range(1, 4 * dps + 20):
        term = to_mpf(bernoulli(2 * p)) / (2 * p * (2 * p - 1)) * power
        total += term
        if abs(term) <= tol * max(abs(total), 1):
            return total
        power *= inv_z_sq
    raise ArithmeticError("Stirling series did not reach the requested precision")


@lru_cache(maxsize=512)
def _gamma_cached(x_key, dps: int):
    work = dps + _GUARD_DIGITS
    with mp.workdps(work):
        x = to_mpf(x_key)
        shift = max(0, math.ceil(max(20, work) - float(x)))
        z = x + shift
        value = mp.exp(_log_gamma_stirling(z, work))
        denom = mp.mpf(1)
        for i in range(shift):
            denom *= x + i
        value /= denom
    with mp.workdps(dps):
        return +value


def gamma_real(x, dps: int | None = None) -> mpmath.mpf:
    """Gamma at a real x > 0."""
    dps = working_dps(dps)
    with mp.workdps(dps + _GUARD_DIGITS):
        if to_mpf(x) <= 0:
            raise PreconditionError(f"gamma_real needs x > 0, got {x}")
    return _gamma_cached(_cache_key(x), dps)
