import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_star, frac_quaternion
from sliceregular.errors import CenterMismatchError, DegreeCapError, OffSliceError
from sliceregular.quaternion import ImaginaryUnit, Quaternion
from sliceregular.starpoly import (
    LaurentCoeffs,
    StarPoly,
    evaluate,
    recenter,
    star_divide_linear,
    star_mul,
    star_pow,
)

coef = st.tuples(*[st.integers(-9, 9)] * 4)
coef_list = st.lists(coef, min_size=1, max_size=8)


def _rows(p: StarPoly):
    return [tuple(int(v) for v in r) for r in p.coeffs] if not p.is_zero() else []


def _trimmed(rows):
    rows = list(rows)
    while rows and rows[-1] == (0, 0, 0, 0):
        rows.pop()
    return rows


@given(coef_list, coef_list)
def test_star_mul_is_convolution(a, b):
    got = star_mul(StarPoly(a, exact=True), StarPoly(b, exact=True))
    assert _rows(got) == brute_star(_trimmed(a), _trimmed(b))


@given(coef_list, coef_list, coef_list)
@settings(max_examples=50)
def test_star_mul_associative_and_distributive(a, b, c):
    A, B, C = (StarPoly(x, exact=True) for x in (a, b, c))
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C


def test_star_mul_is_not_commutative():
    i, j = StarPoly([(0, 1, 0, 0)], exact=True), StarPoly([(0, 0, 1, 0)], exact=True)
    assert i * j != j * i


def test_product_rule_pointwise():
    """``(f*g)(q) = f(q) g(f(q)^-1 q f(q))`` for ``f(q) != 0``."""
    rng = np.random.default_rng(5)
    for _ in range(20):
        f = StarPoly(rng.normal(size=(4, 4)))
        g = StarPoly(rng.normal(size=(3, 4)))
        q = Quaternion(*rng.normal(size=4))
        fq = f(q)
        want = fq * g(fq.inverse() * q * fq)
        assert (f * g)(q).isclose(want, 1e-9)


def test_degree_cap():
    f = StarPoly([1] * 6)
    with pytest.raises(DegreeCapError):
        star_mul(f, f, degree_cap=8)
    with pytest.raises(DegreeCapError):
        star_pow(1, 20, degree_cap=10)


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_star_pow_on_slice(n):
    q0 = Quaternion(1, 2, 0, 0)
    p = star_pow(q0, n)
    q = Quaternion(-0.5, 0.7, 0, 0)
    assert p(q).isclose((q - q0) ** n, 1e-10)


def test_star_pow_exact_for_integer_center():
    p = star_pow(frac_quaternion(1, 1, 0, 0), 3)
    assert p.exact
    assert p == StarPoly([(2, -2, 0, 0), (0, 6, 0, 0), (-3, -3, 0, 0), (1, 0, 0, 0)], exact=True)


@given(coef_list, coef)
def test_divide_linear_exact(a, q0):
    f = StarPoly(a, exact=True)
    q0 = frac_quaternion(*q0)
    g, r = star_divide_linear(f, q0)
    assert r == evaluate(f, q0)
    assert StarPoly.linear(q0, exact=True) * g + StarPoly([r], exact=True) == f


def test_divide_linear_needs_center_zero():
    with pytest.raises(CenterMismatchError):
        star_divide_linear(StarPoly([1, 1], center=Quaternion(1)), 0)


def test_center_mismatch():
    with pytest.raises(CenterMismatchError):
        StarPoly([1], center=Quaternion(1)) + StarPoly([1])


def test_recenter_preserves_values():
    rng = np.random.default_rng(0)
    f = StarPoly(rng.normal(size=(6, 4)))
    c = Quaternion(0.3, 0.4, 0, 0)
    g = recenter(f, c)
    for _ in range(5):
        q = Quaternion(*rng.normal(size=4))
        assert g(q).isclose(f(q), 1e-9)
    back = recenter(g, Quaternion(0.0))
    assert back.allclose(f, 1e-10)


def test_recenter_off_slice_rejected():
    f = StarPoly([1, 2], center=Quaternion(0, 1, 0, 0))
    with pytest.raises(OffSliceError):
        recenter(f, Quaternion(0, 0, 1, 0))


def test_evaluate_on_slice_vectorised():
    rng = np.random.default_rng(2)
    f = StarPoly(rng.normal(size=(5, 4)))
    I = ImaginaryUnit.random(rng)
    zs = rng.normal(size=7) + 1j * rng.normal(size=7)
    vals = f.evaluate_on_slice(I, zs)
    assert vals.shape == (7, 4)
    for z, v in zip(zs, vals):
        assert np.allclose(v, f(Quaternion(z.real) + I * z.imag).to_list(), atol=1e-12)


def test_json_round_trip():
    f = StarPoly([(1, 2, 3, 4), (0.5, 0, 0, -1)], center=Quaternion(1, 1, 0, 0))
    g = StarPoly.from_json(json.loads(json.dumps(f.to_json())))
    assert g.allclose(f) and g.center == f.center


def test_laurent_coeffs_on_slice():
    c = Quaternion(0, 1, 0, 0)
    L = LaurentCoeffs((Quaternion(2), Quaternion(0), Quaternion(1)), -1, c)
    assert L.pole_order == 1
    q = Quaternion(0.5, 1.5, 0, 0)
    d = q - c
    assert L(q).isclose(d.inverse() * 2 + d, 1e-12)
    with pytest.raises(OffSliceError):
        L(Quaternion(0, 0, 1, 0))


def test_immutable():
    f = StarPoly([1])
    with pytest.raises(AttributeError):
        f.center = Quaternion(1)
