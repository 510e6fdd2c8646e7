"""Proximity quadrature, counting modes, characteristic."""

import math
import random

import pytest

from nevlab.expr import parse_expr
from nevlab.locator import Divisor, DivisorPoint
from nevlab.nevanlinna import (CountingMode, QuadratureError, characteristic,
                               counting, nevanlinna_rows, proximity,
                               radial_grid)

E = math.e


def test_proximity_of_exponential():
    # (1/2pi) int log+ |e^(r cos t)| dt = r/pi
    assert proximity(parse_expr("exp(z)"), math.pi) == pytest.approx(
        1.0, abs=1e-8)
    assert proximity(parse_expr("exp(z)"), 10.0) == pytest.approx(
        10 / math.pi, abs=1e-8)


def test_proximity_of_monomials():
    assert proximity(parse_expr("z"), E) == pytest.approx(1.0, abs=1e-9)
    assert proximity(parse_expr("z^10"), E) == pytest.approx(10.0, abs=1e-9)
    assert proximity(parse_expr("1/z"), E) == pytest.approx(0.0, abs=1e-9)


def test_proximity_needs_the_positive_part():
    # log|z - 5| is negative near theta = 0 on the circle |z| = 4.9, so the
    # mean of the positive part sits strictly between 0 and the crude bound
    m = proximity(parse_expr("z - 5"), 4.9)
    assert 0 < m < math.log(9.9)


def test_pole_on_the_circle_is_an_explicit_failure():
    with pytest.raises(QuadratureError):
        proximity(parse_expr("1/(z - 2)"), 2.0)


def cubic_divisor(r=10.0):
    """Zeros of z^3 (z - 1): a triple zero at 0 and a simple zero at 1."""
    return Divisor(r, (DivisorPoint(0.0, 0.0, 3), DivisorPoint(1.0, 0.0, 1)))


def test_counting_closed_forms():
    d = cubic_divisor()
    for r in (7.5, E ** 2):
        assert counting(d, r) == pytest.approx(4 * math.log(r), abs=1e-12)
        assert counting(d, r, CountingMode.reduced()) == pytest.approx(
            2 * math.log(r), abs=1e-12)
        assert counting(d, r, CountingMode.capped(2)) == pytest.approx(
            3 * math.log(r), abs=1e-12)
        assert counting(d, r, CountingMode.trunc_le(1)) == pytest.approx(
            math.log(r), abs=1e-12)
        assert counting(d, r, CountingMode.trunc_ge(2)) == pytest.approx(
            3 * math.log(r), abs=1e-12)
        assert counting(d, r, CountingMode.trunc_ge_reduced(2)) == \
            pytest.approx(math.log(r), abs=1e-12)


def test_counting_rejects_larger_radius():
    with pytest.raises(ValueError):
        counting(cubic_divisor(5.0), 6.0)


def random_divisor(rng):
    pts = []
    for _ in range(rng.randint(1, 6)):
        w = rng.uniform(0.1, 9.0) * complex(math.cos(a := rng.uniform(0, 6.28)),
                                            math.sin(a))
        pts.append(DivisorPoint(w.real, w.imag, rng.randint(1, 5)))
    return Divisor(10.0, tuple(pts))


def test_counting_mode_algebra():
    """Structural identities between the counting variants."""
    rng = random.Random(20260823)
    for _ in range(25):
        d = random_divisor(rng)
        r = 10.0
        k = rng.randint(1, 4)
        full = counting(d, r)
        red = counting(d, r, CountingMode.reduced())
        low = counting(d, r, CountingMode.trunc_le(k))
        high = counting(d, r, CountingMode.trunc_ge(k + 1))
        cap = counting(d, r, CountingMode.capped(k))
        assert low + high == pytest.approx(full, rel=1e-12, abs=1e-12)
        assert red <= full + 1e-12
        assert cap <= full + 1e-12
        assert cap <= k * red + 1e-12
        assert counting(d, r, CountingMode.trunc_le_reduced(k)) <= low + 1e-12
        assert counting(d, r, CountingMode.trunc_ge_reduced(k + 1)) <= \
            high + 1e-12


def test_characteristic_of_entire_function_is_proximity():
    f = parse_expr("exp(z)")
    empty = Divisor(20.0, ())
    for r in (5.0, 12.0):
        assert characteristic(f, r, empty) == pytest.approx(r / math.pi,
                                                            abs=1e-8)


def test_characteristic_of_reciprocal_monomial():
    f = parse_expr("1/z")
    origin = Divisor(20.0, (DivisorPoint(0.0, 0.0, 1),))
    for r in (E, E ** 2):
        assert characteristic(f, r, origin) == pytest.approx(math.log(r),
                                                             abs=1e-9)


def test_radial_grid():
    g = radial_grid(2.0, 40.0, 32)
    assert len(g) == 32
    assert g[0] == pytest.approx(2.0) and g[-1] == pytest.approx(40.0)
    assert all(a < b for a, b in zip(g, g[1:]))
    lin = radial_grid(1.0, 5.0, 5, "linear")
    assert lin == pytest.approx([1, 2, 3, 4, 5])
    with pytest.raises(ValueError):
        radial_grid(5.0, 2.0, 8)
    with pytest.raises(ValueError):
        radial_grid(1.0, 2.0, 8, "cubic")


def test_rows_for_entire_function():
    rows = nevanlinna_rows(parse_expr("exp(z)"), radial_grid(2, 20, 8))
    for w in rows:
        assert w.error is None and not w.perturbed_r
        assert w.N == 0
        assert w.T == pytest.approx(w.r / math.pi, abs=1e-8)


def test_rows_for_tangent():
    rows = nevanlinna_rows(parse_expr("tan(z)"), radial_grid(5, 20, 6))
    for w in rows:
        assert w.error is None
        assert w.T == pytest.approx(2 * w.r / math.pi, abs=1.0)
        assert w.N > 0


def test_rows_survive_exponential_absorption():
    """1/(tan - i) has a denominator that is secretly -i*exp(i*z); the raw
    sum underflows to exact zero high on a radius-40 circle, so clean rows
    here prove the collapsed form is used throughout."""
    rows = nevanlinna_rows(parse_expr("1/(tan(z) - (i))"), radial_grid(2, 40, 8))
    for w in rows:
        assert w.error is None
        # i*cos(z)*exp(-i*z) grows like exp(2*Im z) in the upper half plane
        assert w.T == pytest.approx(2 * w.r / math.pi, abs=1.0)
