"""Saddle parameters X, Y and the asymptotic formulas for p^k(n) and its first difference.

All results are reported as natural logarithms; the estimates themselves
overflow doubles long before the interesting range of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp

from .coefficients import compute_c, compute_d
from .errors import PreconditionError, SolverError, VerificationError
from .special import gamma_real, to_mpf, working_dps, zeta_negative_integer, zeta_real

RESIDUAL_TOL = mpmath.mpf("1e-20")
MAX_NEWTON_STEPS = 200
# solves with X below this are reported but flagged as outside the asymptotic regime
ENVELOPE_X = 10

DEFAULT_J = 2


@lru_cache(maxsize=64)
def saddle_constant(k: int, dps: int) -> mpmath.mpf:
    """A = zeta((k+1)/k) Gamma(1/k) / k^2."""
    with mp.workdps(dps + 10):
        value = zeta_real(Fraction(k + 1, k), dps + 10) * gamma_real(Fraction(1, k), dps + 10) / (k * k)
    with mp.workdps(dps):
        return +value


@dataclass(frozen=True)
class SaddleParams:
    k: int
    n: mpmath.mpf
    X: mpmath.mpf
    Y: mpmath.mpf
    residual: mpmath.mpf  # |f(X)| / n
    iterations: int

    @property
    def in_envelope(self) -> bool:
        return self.X >= ENVELOPE_X


def n_of_X(k: int, X, dps: int | None = None) -> mpmath.mpf:
    """n = X (A X^(1/k) - 1/2 - zeta(-k)/(2X))."""
    dps = working_dps(dps)
    A = saddle_constant(k, dps)
    zk = to_mpf(zeta_negative_integer(k))
    with mp.workdps(dps):
        X = to_mpf(X)
        return A * X ** (1 + mp.mpf(1) / k) - X / 2 - zk / 2


def Y_of_X(k: int, X, dps: int | None = None) -> mpmath.mpf:
    """Y = ((k+1)/(2k)) A X^(1/k) - 1/4."""
    dps = working_dps(dps)
    A = saddle_constant(k, dps)
    with mp.workdps(dps):
        X = to_mpf(X)
        return mp.mpf(k + 1) / (2 * k) * A * X ** (mp.mpf(1) / k) - mp.mpf(1) / 4


def solve_saddle(k: int, n, dps: int | None = None) -> SaddleParams:
    """Solve n = X(A X^(1/k) - 1/2 - zeta(-k)/(2X)) for X by Newton's method.

    ``n`` may be any positive real (round trips use non-integer n).  Raises
    PreconditionError when the solution has X < 1.
    """
    if k < 2:
        raise PreconditionError(f"k must be >= 2, got {k}")
    dps = working_dps(dps)
    A = saddle_constant(k, dps + 10)
    zk = to_mpf(zeta_negative_integer(k))
    with mp.workdps(dps + 10):
        n = to_mpf(n)
        if n <= 0:
            raise PreconditionError(f"n must be positive, got {n}")
        inv_k = mp.mpf(1) / k

        def f(X):
            return A * X ** (1 + inv_k) - X / 2 - zk / 2 - n

        def fprime(X):
            return A * (1 + inv_k) * X**inv_k - mp.mpf(1) / 2

        X0 = (n / A) ** (k / mp.mpf(k + 1))
        X = X0
        lo, hi = X0 / 4, X0 * 4
        for it in range(1, MAX_NEWTON_STEPS + 1):
            fx = f(X)
            if abs(fx) <= RESIDUAL_TOL * n * mp.mpf(10) ** -5:
                break
            d = fprime(X)
            step = X - fx / d if d > 0 else None
            if step is None or not (lo < step < hi):
                # bisection fallback inside the bracket [X0/4, 4 X0]
                if f(lo) * f(hi) > 0:
                    raise SolverError(f"no sign change of the saddle equation on [{lo}, {hi}]")
                mid = (lo + hi) / 2
                if f(mid) * f(lo) <= 0:
                    hi = mid
                else:
                    lo = mid
                step = mid
            X = step
        else:
            raise SolverError(f"saddle solve for k={k}, n={n} did not converge in {MAX_NEWTON_STEPS} steps")
        residual = abs(f(X)) / n
        if residual > RESIDUAL_TOL:
            raise SolverError(f"saddle residual {residual} above {RESIDUAL_TOL}")
        if X < 1:
            raise PreconditionError(f"n={mpmath.nstr(n, 10)} is too small: the saddle point X={mpmath.nstr(X, 6)} < 1")
        Y = mp.mpf(k + 1) / (2 * k) * A * X**inv_k - mp.mpf(1) / 4
    with mp.workdps(dps):
        return SaddleParams(k, +n, +X, +Y, +residual, it)


@dataclass(frozen=True)
class Estimate:
    k: int
    n: mpmath.mpf
    X: mpmath.mpf
    Y: mpmath.mpf
    log_value: mpmath.mpf
    J_used: int
    leading_exponent: mpmath.mpf
    log_prefactor: mpmath.mpf
    bracket: mpmath.mpf
    channel: str = "value"
    J_clamped: bool = False

    @property
    def in_envelope(self) -> bool:
        return self.X >= ENVELOPE_X


def _bracket(poly, J: int, Y) -> mpmath.mpf:
    total = mp.mpf(1)
    for j in range(1, J + 1):
        c = poly.coefficient(j)
        if c:
            total += to_mpf(c) * Y ** (-j)
    return mp.sqrt(mp.pi) * total


def _estimate(k: int, n, J: int, dps: int | None, channel: str, x_power, poly_for_J, clamped=False) -> Estimate:
    if J < 0:
        raise PreconditionError(f"J must be >= 0, got {J}")
    dps = working_dps(dps)
    sp = solve_saddle(k, n, dps)
    A = saddle_constant(k, dps + 10)
    with mp.workdps(dps + 10):
        X, Y = sp.X, sp.Y
        exponent = (k + 1) * A * X ** (mp.mpf(1) / k) - mp.mpf(1) / 2
        log_pref = -mp.mpf(k + 2) / 2 * mp.log(2 * mp.pi) - x_power * mp.log(X) - mp.log(Y) / 2
        bracket = _bracket(poly_for_J(J), J, Y) if J > 0 else mp.sqrt(mp.pi)
        if bracket <= 0:
            raise VerificationError(f"non-positive bracket {mpmath.nstr(bracket, 6)} at k={k}, n={mpmath.nstr(n, 10)}, J={J}")
        log_value = exponent + log_pref + mp.log(bracket)
    with mp.workdps(dps):
        return Estimate(k, sp.n, sp.X, sp.Y, +log_value, J, +exponent, +log_pref, +bracket, channel, clamped)


def estimate_log_p(k: int, n, J: int = DEFAULT_J, dps: int | None = None, b_convention: str = "quarter") -> Estimate:
    """log of exp(((k+1)/k^2) zeta Gamma X^(1/k) - 1/2) / ((2 pi)^((k+2)/2) X^(3/2) Y^(1/2))
    times (sqrt(pi) + sum_{j<=J} c_j Y^-j)."""
    return _estimate(k, n, J, dps, "value", mp.mpf(3) / 2, lambda j: compute_c(k, j, b_convention))


def estimate_log_diff(
    k: int,
    n,
    J: int = DEFAULT_J,
    dps: int | None = None,
    b_convention: str = "quarter",
    allow_J_above_k: bool = False,
) -> Estimate:
    """log of the estimate for p^k(n+1) - p^k(n): X^(5/2) in place of X^(3/2), d_j in place of c_j.

    J is capped at k - 1, where the X^-1 error of the expansion takes over, unless
    ``allow_J_above_k`` is set.
    """
    clamped = False
    if not allow_J_above_k and J > k - 1:
        J, clamped = k - 1, True
    est = _estimate(k, n, J, dps, "difference", mp.mpf(5) / 2, lambda j: compute_d(k, j, b_convention))
    if clamped:
        est = Estimate(**{**est.__dict__, "J_clamped": True})
    return est


@lru_cache(maxsize=64)
def hardy_ramanujan_constant(k: int, dps: int | None = None) -> mpmath.mpf:
    """(k+1) ((1/k) Gamma(1+1/k) zeta(1+1/k))^(k/(k+1)).

    Checks that (1/k) Gamma(1 + 1/k) equals Gamma(1/k)/k^2 at the working precision.
    """
    if k < 2:
        raise PreconditionError(f"k must be >= 2, got {k}")
    dps = working_dps(dps)
    with mp.workdps(dps + 10):
        g_shift = gamma_real(Fraction(k + 1, k), dps + 10) / k
        g_plain = gamma_real(Fraction(1, k), dps + 10) / (k * k)
        if abs(g_shift - g_plain) > mp.mpf(10) ** (-(dps - 5)) * g_plain:
            raise VerificationError(f"Gamma recurrence mismatch at k={k}: {g_shift} vs {g_plain}")
        z = zeta_real(Fraction(k + 1, k), dps + 10)
        value = (k + 1) * (g_shift * z) ** (mp.mpf(k) / (k + 1))
    with mp.workdps(dps):
        return +value


def log_value_float(est: Estimate) -> float:
    return float(est.log_value)


def ratio_to_exact(est: Estimate, log_exact: float) -> float:
    """exp(log_estimate - log_exact)."""
    return math.exp(float(est.log_value) - log_exact)
