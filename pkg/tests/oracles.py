"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import mpmath
from mpmath import mp


def brute_partitions(k: int, n: int) -> int:
    """Count non-increasing sequences of k-th powers summing to n by explicit enumeration."""
    powers = []
    m = 1
    while m**k <= n:
        powers.append(m**k)
        m += 1

    def gen(remaining, largest):
        if remaining == 0:
            yield ()
            return
        for p in reversed(powers):
            if p <= largest and p <= remaining:
                for rest in gen(remaining - p, p):
                    yield (p,) + rest

    return sum(1 for _ in gen(n, n))


def euler_product_series(k: int, N: int) -> list[int]:
    """Coefficients of prod (1 - z^(m^k))^-1 by repeated series division by (1 - z^p)."""
    coeffs = [1] + [0] * N
    m = 1
    while m**k <= N:
        p = m**k
        # multiply by 1/(1 - z^p) == divide by (1 - z^p): c[j] += c[j-p] in increasing j
        out = coeffs[:]
        for j in range(p, N + 1):
            out[j] = coeffs[j] + out[j - p]
        coeffs = out
        m += 1
    return coeffs


def borwein_zeta(s, dps: int = 40):
    """zeta(s) for Re s > 0, s != 1, from Borwein's accelerated alternating series."""
    with mp.workdps(dps + 10):
        s = mp.mpf(s)
        n = int(1.31 * dps) + 10
        d = []
        acc = mp.mpf(0)
        for i in range(n + 1):
            acc += mp.mpf(n) * mp.factorial(n + i - 1) * 4**i / (mp.factorial(n - i) * mp.factorial(2 * i))
            d.append(acc)
        total = mp.mpf(0)
        for j in range(n):
            total += (-1) ** j * (d[j] - d[n]) / mp.power(j + 1, s)
        eta = -total / d[n]
        return eta / (1 - mp.power(2, 1 - s))


def direct_exp_sum(k: int, r: int, b: int) -> complex:
    return sum(cmath.exp(2j * math.pi * (b * pow(m, k, r) % r) / r) for m in range(1, r + 1))


def phi_reference(k: int, X: float, theta: float, n_max: int, j_max: int) -> complex:
    """Plain double loop over the defining series."""
    rho = math.exp(-1.0 / X)
    total = 0j
    for n in range(1, n_max + 1):
        p = n**k
        z = rho**p * cmath.exp(2j * math.pi * ((p * theta) % 1.0))
        term = 1 + 0j
        for j in range(1, j_max + 1):
            term *= z
            total += term / j
            if abs(term) < 1e-300:
                break
    return total


@lru_cache(maxsize=None)
def saddle_integral(k: int, Y: int, odd: bool = False, dps: int = 30):
    """Integral of the saddle expansion: even part against phi^(-1/2), odd part against 1.

    Its expansion in Y^-1 (resp. Y^-1/2) reproduces sqrt(pi) (1 + c_1/Y + ...) (resp. the c~ series).
    """
    with mp.workdps(dps):
        Y = mp.mpf(Y)
        inv_k = mp.mpf(1) / k

        def integrand(phi):
            w = 1j * mp.sqrt(phi / Y)
            A = mp.mpf(2 * k * k) / (k + 1) * ((1 - w) ** (-inv_k) - 1 - w / k - (k + 1) * w**2 / (2 * k * k))
            L = -mp.log(1 - w) - w - w**2 / 2
            e = mp.exp(-phi + (Y + mp.mpf(1) / 4) * A - L / 2)
            return mp.im(e) if odd else mp.re(e) / mp.sqrt(phi)

        return mp.quad(integrand, [0, 1, 5, 20, 60, 9 * Y / 16])
