"""Correction coefficients of the saddle-point expansion, in exact arithmetic.

With u = phi^(1/2) and v = Y^(-1/2) the truncated exponent is

    H_J = sum_{m=3}^{2J+2} i^m (a_m u^m v^(m-2) + b_m u^m v^m),

a polynomial in (u, v) whose coefficients are complex numbers with rational
real and imaginary parts.  The truncated exponential sum_{l<=4J+3} H_J^l / l!
is split into its real plane (even u-powers) and imaginary plane (odd
u-powers).  Integrating a u^h row against e^(-phi) phi^(-1/2) (real plane) or
e^(-phi) (imaginary plane) produces Gamma at a half integer, so every
coefficient is a rational multiple of sqrt(pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

from .errors import PreconditionError, VerificationError
from .special import gamma_halfinteger

ZERO = Fraction(0)

B_CONVENTIONS = ("quarter", "half")


@dataclass(frozen=True)
class SeriesCoeffPair:
    m: int
    a: Fraction
    b: Fraction


def rising_ratio(k: int, m: int) -> Fraction:
    """Gamma(m + 1/k) / (m! Gamma(1/k)) = prod_{i<m} (i + 1/k) / m!."""
    prod = Fraction(1)
    for i in range(m):
        prod *= Fraction(i * k + 1, k)
    return prod / math.factorial(m)


def series_coefficients(k: int, m: int, b_convention: str = "quarter") -> SeriesCoeffPair:
    """a_m and b_m such that the m-th coefficient of the saddle exponent is a_m Y + b_m.

    a_m = (2k^2/(k+1)) Gamma(m+1/k)/(m! Gamma(1/k)).  Expanding the exponent with
    zeta((k+1)/k) Gamma(1/k) X^(1/k) = (2k^3/(k+1)) (Y + 1/4) gives
    b_m = a_m/4 - 1/(2m) ("quarter", the default; it makes b_2 = 0 so that the
    quadratic coefficient is exactly Y).  ``b_convention="half"`` gives the
    alternative normalization b_m = a_m/2 - 1/(2m).
    """
    if k < 2:
        raise PreconditionError(f"k must be >= 2, got {k}")
    if m < 1:
        raise PreconditionError(f"m must be >= 1, got {m}")
    a = Fraction(2 * k * k, k + 1) * rising_ratio(k, m)
    if b_convention == "quarter":
        b = a / 4 - Fraction(1, 2 * m)
    elif b_convention == "half":
        b = a / 2 - Fraction(1, 2 * m)
    else:
        raise PreconditionError(f"unknown b_convention {b_convention!r}")
    return SeriesCoeffPair(m, a, b)


# i^m as (real, imag)
_I_POWERS = ((1, 0), (0, 1), (-1, 0), (0, -1))


class HalfPowerPoly:
    """Finitely supported polynomial in u = phi^(1/2), v = Y^(-1/2).

    ``terms`` maps (u_power, v_power) to (real, imag) Fraction pairs.  Zero
    coefficients are never stored.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], tuple[Fraction, Fraction]] | None = None):
        clean = {}
        for key, (re, im) in (terms or {}).items():
            if re or im:
                clean[key] = (Fraction(re), Fraction(im))
        self._terms = MappingProxyType(clean)

    @property
    def terms(self) -> Mapping[tuple[int, int], tuple[Fraction, Fraction]]:
        return self._terms

    def __eq__(self, other) -> bool:
        return isinstance(other, HalfPowerPoly) and dict(self._terms) == dict(other._terms)

    def __repr__(self) -> str:
        return f"HalfPowerPoly({len(self._terms)} terms, u-degree {self.u_degree})"

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, u: int, v: int) -> tuple[Fraction, Fraction]:
        return self._terms.get((u, v), (ZERO, ZERO))

    @property
    def u_degree(self) -> int:
        return max((u for u, _ in self._terms), default=0)

    @property
    def u_powers(self) -> list[int]:
        return sorted({u for u, _ in self._terms})

    def add(self, other: "HalfPowerPoly") -> "HalfPowerPoly":
        out = dict(self._terms)
        for key, (re, im) in other._terms.items():
            r0, i0 = out.get(key, (ZERO, ZERO))
            out[key] = (r0 + re, i0 + im)
        return HalfPowerPoly(out)

    def scale(self, factor: Fraction) -> "HalfPowerPoly":
        return HalfPowerPoly({key: (re * factor, im * factor) for key, (re, im) in self._terms.items()})

    def multiply(self, other: "HalfPowerPoly", v_max: int | None = None) -> "HalfPowerPoly":
        """Product; with ``v_max`` monomials of v-degree above it are dropped."""
        out: dict[tuple[int, int], list[Fraction]] = {}
        right = list(other._terms.items())
        for (u1, v1), (r1, i1) in self._terms.items():
            for (u2, v2), (r2, i2) in right:
                v = v1 + v2
                if v_max is not None and v > v_max:
                    continue
                acc = out.get((u1 + u2, v))
                if acc is None:
                    acc = out[(u1 + u2, v)] = [ZERO, ZERO]
                acc[0] += r1 * r2 - i1 * i2
                acc[1] += r1 * i2 + i1 * r2
        return HalfPowerPoly({key: tuple(val) for key, val in out.items()})

    def real_part(self) -> "HalfPowerPoly":
        return HalfPowerPoly({key: (re, ZERO) for key, (re, _) in self._terms.items()})

    def imag_part(self) -> "HalfPowerPoly":
        """Imaginary plane, stored in the real slot (the result is a real polynomial)."""
        return HalfPowerPoly({key: (im, ZERO) for key, (_, im) in self._terms.items()})

    def row(self, u: int) -> dict[int, tuple[Fraction, Fraction]]:
        """The coefficient of u^h as a polynomial in v: {v_power: (re, im)}."""
        return {v: c for (uu, v), c in self._terms.items() if uu == u}

    def evaluate(self, u: float, v: float) -> complex:
        return sum(complex(float(re), float(im)) * u**uu * v**vv for (uu, vv), (re, im) in self._terms.items())


def build_H(k: int, J: int, b_convention: str = "quarter") -> HalfPowerPoly:
    """H_J = sum_{m=3}^{2J+2} i^m (a_m u^m v^(m-2) + b_m u^m v^m)."""
    if J < 1:
        raise PreconditionError(f"J must be >= 1, got {J}")
    terms = {}
    for m in range(3, 2 * J + 3):
        pair = series_coefficients(k, m, b_convention)
        pr, pi = _I_POWERS[m % 4]
        terms[(m, m - 2)] = (pr * pair.a, pi * pair.a)
        terms[(m, m)] = (pr * pair.b, pi * pair.b)
    return HalfPowerPoly(terms)


def degree_bound(J: int) -> int:
    """L = (2J+2)(4J+3), the u-degree of the truncated exponential."""
    return (2 * J + 2) * (4 * J + 3)


def truncated_exp(H: HalfPowerPoly, J: int, v_max: int | None = None) -> HalfPowerPoly:
    """sum_{l=0}^{4J+3} H^l / l!, optionally dropping v-powers above ``v_max``.

    Every monomial of H has v-degree >= 1, so v-truncation never changes the
    coefficients that are kept.
    """
    total = HalfPowerPoly({(0, 0): (Fraction(1), ZERO)})
    power = total
    for ell in range(1, 4 * J + 4):
        power = power.multiply(H, v_max).scale(Fraction(1, ell))
        total = total.add(power)
    if total.u_degree > degree_bound(J):
        raise VerificationError(f"u-degree {total.u_degree} exceeds {degree_bound(J)}")
    return total


def exp_real_part(H: HalfPowerPoly, J: int, v_max: int | None = None) -> HalfPowerPoly:
    """Real plane of the truncated exponential; rows p_h live at even u-powers h."""
    return truncated_exp(H, J, v_max).real_part()


def exp_imag_part(H: HalfPowerPoly, J: int, v_max: int | None = None) -> HalfPowerPoly:
    """Imaginary plane of the truncated exponential; rows live at odd u-powers."""
    return truncated_exp(H, J, v_max).imag_part()


@dataclass(frozen=True)
class PiRationalPoly:
    """sqrt(pi) * sum_p coeffs[p] * x^p with exact rational ``coeffs``.

    ``variable`` names x: ``"Y^-1"`` for the c and d channels, ``"Y^-1/2"`` for
    the odd channel.
    """

    coeffs: Mapping[int, Fraction]
    variable: str = "Y^-1"
    sqrt_pi: bool = True

    def coefficient(self, power: int) -> Fraction:
        return self.coeffs.get(power, ZERO)

    @property
    def powers(self) -> list[int]:
        return sorted(p for p, c in self.coeffs.items() if c)

    def evaluate(self, Y: float) -> float:
        x = Y**-1 if self.variable == "Y^-1" else Y**-0.5
        total = sum(float(c) * x**p for p, c in self.coeffs.items())
        return total * math.sqrt(math.pi) if self.sqrt_pi else total

    def terms_as_floats(self) -> dict[int, float]:
        root = math.sqrt(math.pi) if self.sqrt_pi else 1.0
        return {p: float(c) * root for p, c in sorted(self.coeffs.items())}


def _gamma_weighted(poly: HalfPowerPoly, odd_rows: bool) -> dict[int, Fraction]:
    """Integrate each row against e^(-phi) phi^(-1/2) (even rows) or e^(-phi) (odd rows).

    Row u^h contributes Gamma(h/2 + 1/2) for even h and Gamma(h/2 + 1) for odd h;
    both are half-integer Gammas, returned as multiples of sqrt(pi).
    """
    out: dict[int, Fraction] = {}
    for (u, v), (re, _) in poly.terms.items():
        if odd_rows:
            if u % 2 != 1:
                raise VerificationError(f"imaginary plane has an even row u^{u}")
            weight = gamma_halfinteger((u + 1) // 2)
        else:
            if u % 2 != 0:
                raise VerificationError(f"real plane has an odd row u^{u}")
            weight = gamma_halfinteger(u // 2)
        out[v] = out.get(v, ZERO) + weight * re
    return out


def _check_kJ(k: int, J: int) -> None:
    if k < 2:
        raise PreconditionError(f"k must be >= 2, got {k}")
    if J < 1:
        raise PreconditionError(f"J must be >= 1, got {J}")


@lru_cache(maxsize=64)
def compute_c(k: int, J: int, b_convention: str = "quarter") -> PiRationalPoly:
    """1 + c_1 Y^-1 + ... + c_J Y^-J, all in units of sqrt(pi).

    The constant term is the leading sqrt(pi); coefficients beyond Y^-J are
    discarded.
    """
    _check_kJ(k, J)
    H = build_H(k, J, b_convention)
    collected = _gamma_weighted(exp_real_part(H, J, v_max=2 * J), odd_rows=False)
    odd = {v: c for v, c in collected.items() if v % 2 and c}
    if odd:
        raise VerificationError(f"odd powers of Y^-1/2 survived in the c channel: {odd}")
    coeffs = {v // 2: c for v, c in collected.items() if v % 2 == 0 and v // 2 <= J}
    return PiRationalPoly(MappingProxyType(coeffs), "Y^-1")


@lru_cache(maxsize=64)
def compute_c_tilde(k: int, J: int, b_convention: str = "quarter") -> PiRationalPoly:
    """sum_j c~_j (Y^-1/2)^(2j-1) for j <= J, in units of sqrt(pi)."""
    _check_kJ(k, J)
    H = build_H(k, J, b_convention)
    collected = _gamma_weighted(exp_imag_part(H, J, v_max=2 * J - 1), odd_rows=True)
    even = {v: c for v, c in collected.items() if v % 2 == 0 and c}
    if even:
        raise VerificationError(f"even powers of Y^-1/2 survived in the odd channel: {even}")
    return PiRationalPoly(MappingProxyType(dict(collected)), "Y^-1/2")


@lru_cache(maxsize=64)
def compute_d(k: int, J: int, b_convention: str = "quarter", include_odd: bool = True) -> PiRationalPoly:
    """1 + d_1 Y^-1 + ... + d_J Y^-J with d_j = c_j + c~_j, in units of sqrt(pi).

    c~_j is the coefficient of (Y^-1/2)^(2j-1) in the odd channel.
    ``include_odd=False`` drops that channel, leaving d_j = c_j.
    """
    c = compute_c(k, J, b_convention)
    coeffs = dict(c.coeffs)
    if include_odd:
        tilde = compute_c_tilde(k, J, b_convention)
        for v, value in tilde.coeffs.items():
            j = (v + 1) // 2
            coeffs[j] = coeffs.get(j, ZERO) + value
    return PiRationalPoly(MappingProxyType(coeffs), "Y^-1")


def c1_closed_form(k: int) -> Fraction:
    """c_1 / sqrt(pi) = -(k^2 + 5k/2 + 1) / (24 k^2)."""
    return -(Fraction(k * k) + Fraction(5 * k, 2) + 1) / (24 * k * k)
