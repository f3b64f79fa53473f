import cmath
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from oracles import phi_reference
from powerpart.errors import PreconditionError, ResourceError
from powerpart.expsums import gap_scan
from powerpart.phi import (
    classify_arc,
    delta_of,
    euler_product,
    xi_envelope,
    major_arc_envelope,
    major_arc_approx,
    major_arc_intervals,
    max_denominator,
    minor_arc_diagnostic,
    minor_arc_intervals,
    overlapping_major_arcs,
    phi_direct,
    xi_approx,
)
from powerpart.special import gamma_real, to_mpf, zeta_negative_integer, zeta_real


def test_delta_examples():
    assert delta_of(50, 0) == 1
    X = 10.0
    theta = math.sqrt(3) / (2 * math.pi * X)
    assert delta_of(X, theta) == pytest.approx(0.5, rel=1e-14)
    lo = (1 + 4 * math.pi**2) ** -0.5
    for theta in (-1 / X, -0.3 / X, 0.7 / X, 1 / X):
        assert lo - 1e-15 <= delta_of(X, theta) <= 1
    with pytest.raises(PreconditionError):
        delta_of(0.5, 0)


def test_phi_at_X1_against_reference():
    ref = phi_reference(2, 1.0, 0.0, 5000, 5000)
    assert abs(phi_direct(2, 1, 0).value - ref) < 1e-12


@pytest.mark.parametrize("k,X,theta", [(2, 30.0, 0.1234), (3, 50.0, 0.37), (2, 7.0, 0.5)])
def test_phi_against_reference_complex(k, X, theta):
    ref = phi_reference(k, X, theta, 400, 20000)
    v = phi_direct(k, X, theta, rel_tol=1e-12)
    assert abs(v.value - ref) <= 1e-12 * abs(ref) + 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.floats(1, 300), st.floats(-0.5, 0.5))
def test_conjugate_symmetry_and_periodicity(k, X, theta):
    a = phi_direct(k, X, theta)
    b = phi_direct(k, X, -theta)
    c = phi_direct(k, X, Fraction(theta) + 1)
    tol = a.truncation_error_bound + b.truncation_error_bound + c.truncation_error_bound + 1e-12 * abs(a.value)
    assert abs(a.value - b.value.conjugate()) <= tol
    assert abs(a.value - c.value) <= tol


def test_truncation_bound_is_relative():
    v = phi_direct(2, 200, 0.3, rel_tol=1e-9)
    assert v.truncation_error_bound <= 1e-9 * abs(v.value)
    assert v.terms_used > 0 and v.dps is None


@pytest.mark.parametrize("theta", [0, 0.25, 0.1, Fraction(1, 3)])
def test_exp_phi_is_euler_product(theta):
    X = 20
    v = phi_direct(2, X, theta)
    prod = euler_product(2, X, theta, 4000)
    assert abs(cmath.exp(v.value) - prod) < 1e-9 * abs(prod)


def test_high_precision_path_against_mpmath():
    with mp.workdps(60):
        X = mp.mpf(10)
        ref = mp.nsum(lambda n: -mp.log(1 - mp.exp(-n**3 / X) * mp.expjpi(2 * n**3 * mp.mpf("0.2"))), [1, mp.inf])
        v = phi_direct(3, 10, Fraction(1, 5), dps=50)
        assert isinstance(v.value, mpmath.mpc)
        assert abs(v.value - ref) < mp.mpf(10) ** -44


def test_term_budget():
    with pytest.raises(ResourceError) as info:
        phi_direct(2, 1e4, 0.1, max_terms=1000)
    assert info.value.partial is not None


def test_precondition():
    with pytest.raises(PreconditionError):
        phi_direct(2, 0.5, 0)


def test_xi_at_zero_reduces():
    k, X = 3, 200
    with mp.workdps(40):
        expected = (
            zeta_real(Fraction(4, 3)) * gamma_real(Fraction(1, 3)) / 3 * mp.mpf(X) ** (mp.mpf(1) / 3)
            - 1.5 * mp.log(2 * mp.pi) - mp.log(X) / 2 + to_mpf(zeta_negative_integer(3)) / (2 * X)
        )
        assert abs(xi_approx(k, X, 0) - expected) < mp.mpf(10) ** -25


def test_xi_conjugate_symmetry():
    with mp.workdps(30):
        a = xi_approx(2, 100, 0.0004)
        b = xi_approx(2, 100, -0.0004)
        assert abs(a - mpmath.conj(b)) < 1e-25


def test_xi_refuses_outside_condition():
    with pytest.raises(PreconditionError):
        xi_approx(2, 100, 0.3)
    assert mpmath.isfinite(abs(xi_approx(2, 100, 0.3, strict=False)))


def test_origin_error_decreases():
    errs = []
    for X, dps in ((100, 80), (400, 130), (1600, 240)):
        v = phi_direct(2, X, 0, dps=dps)
        errs.append(abs(v.value - xi_approx(2, X, 0, dps=dps)))
    assert errs[0] > 5 * errs[1] > 25 * errs[2]
    for X, e in zip((100, 400, 1600), errs):
        assert e < xi_envelope(2, X, 0)


def test_origin_approx_away_from_zero():
    X = 100
    theta = mpmath.mpf("0.0005")
    v = phi_direct(2, X, theta, dps=60)
    err = abs(v.value - xi_approx(2, X, theta, dps=60))
    assert err < xi_envelope(2, X, theta)


def test_major_arc_q1_matches_xi_leading_term():
    k, X = 2, 500
    m = major_arc_approx(k, X, 1, 0, 0)
    with mp.workdps(30):
        lead = zeta_real(Fraction(3, 2)) * gamma_real(Fraction(1, 2)) / 2 * mp.sqrt(X)
    assert m.value == pytest.approx(complex(lead), rel=1e-13)


def test_major_arc_half_at_1e4():
    X = 1e4
    v = phi_direct(2, X, Fraction(1, 2)).value
    m = major_arc_approx(2, X, 2, 1, 0).value
    assert abs(v - m) <= major_arc_envelope(X, 2, 0)


def test_major_arc_truncated_series_tail():
    full = major_arc_approx(3, 1e3, 3, 1, 0)
    part = major_arc_approx(3, 1e3, 3, 1, 0, J_terms=200)
    assert abs(full.value - part.value) <= part.series_tail_bound


def test_major_arc_theta_variants_agree_at_q1():
    a = major_arc_approx(2, 100, 1, 0, 0.001)
    b = major_arc_approx(2, 100, 1, 0, 0.001, use_full_theta=True)
    assert a.value == b.value


@pytest.mark.parametrize("k", [2, 3, 4])
def test_major_arc_magnitude_bound(k):
    X = 1e4
    delta = gap_scan(k, 200).delta_empirical
    with mp.workdps(30):
        cap = float((1 - delta / 2) * zeta_real(Fraction(k + 1, k)) * gamma_real(Fraction(1, k)) / k) * X ** (1 / k)
    for q in range(2, 6):
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                assert abs(major_arc_approx(k, X, q, a, 0).value) <= cap


def test_major_arc_rejects_non_coprime():
    with pytest.raises(PreconditionError):
        major_arc_approx(2, 100, 4, 2, 0)


def test_classify_examples():
    assert classify_arc(2, 100, 0).classification == "major(1,0)"
    p = classify_arc(3, 1000, 0.5)
    assert (p.q, p.a, p.major) == (2, 1, True)
    with pytest.raises(PreconditionError):
        classify_arc(3, 1000, 0.999)


def test_classify_minor_between_farey_neighbours():
    # midpoint of 3/10 and 2/7 at X=1000, k=3: q <= 10, arcs of radius 0.01/q
    X = 1000
    theta = (Fraction(3, 10) + Fraction(2, 7)) / 2
    p = classify_arc(3, X, float(theta))
    assert not p.major
    c = X ** (1 / 3 - 1)
    for q in range(1, 11):
        for a in range(q + 1):
            if math.gcd(a, q) == 1:
                assert abs(float(theta) - a / q) > c / q


def test_classify_matches_definition():
    k, X = 3, 1000
    c = X ** (1 / 3 - 1)
    for i in range(2000):
        theta = -c + (i + 0.5) / 2000
        p = classify_arc(k, X, theta)
        if p.major:
            assert p.q <= max_denominator(k, X) and abs(p.theta) <= c / p.q + 1e-15
        else:
            assert all(
                abs(theta - a / q) > c / q
                for q in range(1, max_denominator(k, X) + 1) for a in range(q + 1) if math.gcd(a, q) == 1
            )


@pytest.mark.parametrize("k,X", [(3, 1e3), (3, 1e4), (3, 1e5), (4, 1e4), (4, 1e6), (5, 1e6)])
def test_major_arcs_disjoint(k, X):
    assert overlapping_major_arcs(k, X) == []


def test_k2_major_arcs_cover_window():
    # with k = 2 the arc radius X^(-1/2)/q meets q + q' > X^(1/2) for Farey neighbours
    assert overlapping_major_arcs(2, 1e4)
    assert minor_arc_intervals(2, 1e4) == []


def test_arc_intervals_inside_window():
    k, X = 3, 1e4
    c = X ** (1 / 3 - 1)
    for _, _, lo, hi in major_arc_intervals(k, X):
        assert -c <= lo < hi <= 1 - c


def test_minor_arc_diagnostic():
    rep = minor_arc_diagnostic(3, 1e3, sample_count=8)
    assert not rep.degenerate and len(rep.samples) == 8
    assert rep.all_below_origin
    assert math.isfinite(rep.ratio)
    again = minor_arc_diagnostic(3, 1e3, sample_count=8)
    assert again.samples == rep.samples


def test_minor_arc_diagnostic_degenerate():
    rep = minor_arc_diagnostic(2, 1e3)
    assert rep.degenerate and rep.samples == ()
