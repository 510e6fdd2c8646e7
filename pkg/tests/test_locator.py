"""Zero and pole location by the argument principle."""

import cmath
import math
import random

import numpy as np
import pytest

from nevlab.expr import parse_expr
from nevlab.locator import (Divisor, DivisorPoint, RadiusMismatchError,
                            RingTooCloseError, clear_radius, divisor_of,
                            divisor_pair_at, find_zeros, winding_number)


def poly_expr(coeffs):
    """Grammar string for sum(coeffs[j] * z^j)."""
    terms = []
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        if j == 0:
            terms.append(f"({c})")
        elif j == 1:
            terms.append(f"({c})*z")
        else:
            terms.append(f"({c})*z^{j}")
    return parse_expr(" + ".join(terms))


def locations(divisor):
    return sorted(divisor.locations, key=lambda w: (w.real, w.imag))


def test_simple_cubic():
    e = parse_expr("(z - 1)*(z + 2)*(z - 3*i)")
    d = find_zeros(e, 4.0)
    got = locations(d)
    want = sorted([1.0, -2.0, 3.0j], key=lambda w: (w.real, w.imag))
    assert len(got) == 3
    for g, w in zip(got, want):
        assert abs(g - w) < 1e-10
    assert all(p.multiplicity == 1 for p in d.points)


def test_multiple_root_multiplicity():
    e = parse_expr("(z - 1)^3*(z + 2)")
    d = find_zeros(e, 3.0)
    by_mult = {p.multiplicity: p.location for p in d.points}
    assert set(by_mult) == {1, 3}
    assert abs(by_mult[3] - 1.0) < 1e-7
    assert abs(by_mult[1] + 2.0) < 1e-10
    assert d.degree == 4


def test_exponential_lattice_roots():
    d = find_zeros(parse_expr("exp(3*z) - 1"), 3.0)
    want = [0.0, 2j * math.pi / 3, -2j * math.pi / 3]
    got = locations(d)
    assert len(got) == 3
    for g, w in zip(got, sorted(want, key=lambda v: (v.real, v.imag))):
        assert abs(g - w) < 1e-10


def test_winding_counts_zeros_minus_poles():
    assert winding_number(parse_expr("(z - 2)^5/z^2"), 3.0) == 3
    assert winding_number(parse_expr("z^4"), 1.0) == 4
    assert winding_number(parse_expr("exp(z)"), 10.0) == 0


def test_winding_of_cosine_at_large_radius():
    """26 simple zeros in |z| <= 40; fails if circle sampling aliases."""
    assert winding_number(parse_expr("cos(z)"), 40.0) == 26


def test_winding_with_fast_rotation():
    assert winding_number(parse_expr("exp(5*i*z)*(z - 1)"), 30.0) == 1


def test_quotient_divisor_of_tangent():
    zeros, poles = divisor_pair_at(parse_expr("tan(z)"), 5.0, 0)
    assert {round(w.real, 6) for w in zeros.locations} == {
        0.0, round(math.pi, 6), round(-math.pi, 6)}
    assert {round(w.real, 6) for w in poles.locations} == {
        round(math.pi / 2, 6), round(-math.pi / 2, 6),
        round(3 * math.pi / 2, 6), round(-3 * math.pi / 2, 6)}
    assert all(p.multiplicity == 1 for p in zeros.points + poles.points)


def test_on_circle_zero_raises_then_negotiates():
    e = parse_expr("z - 3")
    with pytest.raises(RingTooCloseError):
        find_zeros(e, 3.0)
    zeros, _ = divisor_of(e, 3.0, 0)
    assert zeros.degree == 1


def test_negotiation_on_exponential_ring():
    """Roots exactly on |z| = r are picked up at a nudged radius."""
    zeros, _ = divisor_of(parse_expr("exp(z) - 1"), 2 * math.pi, 0)
    assert zeros.degree == 3


def test_clear_radius():
    rt, perturbed = clear_radius(5.0, [5.0001])
    assert perturbed
    assert abs(rt - 5.0001) >= 1e-4 * rt
    rt, perturbed = clear_radius(5.0, [7.0])
    assert (rt, perturbed) == (5.0, False)


def test_restrict_and_algebra():
    d = Divisor(10.0, (DivisorPoint(1.0, 0.0, 2), DivisorPoint(8.0, 0.0, 1)))
    inner = d.restrict(5.0)
    assert inner.degree == 2 and inner.radius == 5.0
    with pytest.raises(RadiusMismatchError):
        inner.restrict(10.0)

    other = Divisor(10.0, (DivisorPoint(1.0, 0.0, 1),))
    assert d.subtract(other).degree == 2
    assert (d + other).degree == 4


def test_conservation_against_winding():
    cases = [(parse_expr("(z^2 + 1)*exp(z)"), 3.0),
             (parse_expr("sin(z)"), 10.0),
             (parse_expr("z^3*(z - 1)"), 2.5)]
    for e, r in cases:
        d = find_zeros(e, r)
        assert d.degree == winding_number(e, r)


def test_random_polynomials_match_companion_roots():
    rng = random.Random(1404)
    for _ in range(10):
        deg = rng.randint(2, 6)
        while True:
            coeffs = [rng.randint(-9, 9) for _ in range(deg + 1)]
            if coeffs[0] != 0 and coeffs[-1] != 0:
                roots = np.roots(coeffs[::-1])
                if np.min(np.abs(roots[:, None] - roots[None, :])
                          + np.eye(deg) * 1e9) > 1e-3:
                    break
        r = float(np.max(np.abs(roots))) * 1.3 + 0.5
        d = find_zeros(poly_expr(coeffs), r)
        assert d.degree == deg
        remaining = list(map(complex, roots))
        for g in d.locations:
            best = min(remaining, key=lambda w: abs(g - w))
            assert abs(g - best) < 1e-8
            remaining.remove(best)


def test_pole_target_duplicates_divisor():
    a, b = divisor_of(parse_expr("tan(z)"), 2.0, "inf")
    assert a.degree == b.degree == 2
    assert {round(w.real, 6) for w in a.locations} == {
        round(math.pi / 2, 6), round(-math.pi / 2, 6)}


def test_divisors_of_tangent_shifted_by_i():
    """tangent minus i never vanishes: its numerator collapses to one
    exponential, so only the cos poles remain, even out at radius 40."""
    zeros, poles = divisor_of(parse_expr("tan(z) - (i)"), 40.0, 0)
    assert zeros.degree == 0
    assert poles.degree == 26
    assert all(abs(w.imag) < 1e-6 for w in poles.locations)
