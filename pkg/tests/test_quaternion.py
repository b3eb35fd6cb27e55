import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import frac_quaternion, hamilton
from sliceregular.quaternion import (
    UNIT_I,
    UNIT_J,
    UNIT_K,
    ImaginaryUnit,
    Quaternion,
    SigmaBall,
    Sphere2,
    SymmetricShell,
    decompose,
    format_quaternion,
    omega,
    parse_quaternion,
    qmul_array,
    same_slice,
    sigma,
    sigma_array,
    slice_frame,
)

small_int = st.integers(-9, 9)
int_quat = st.tuples(small_int, small_int, small_int, small_int)
real = st.floats(-10, 10, allow_nan=False)
float_quat = st.tuples(real, real, real, real).map(lambda t: Quaternion(*t))


@given(int_quat, int_quat)
def test_product_matches_written_out_formula(a, b):
    assert (Quaternion(*a) * Quaternion(*b)).components == hamilton(a, b)


@pytest.mark.parametrize(
    "a,b,expected",
    [
        (UNIT_I, UNIT_J, UNIT_K),
        (UNIT_J, UNIT_K, UNIT_I),
        (UNIT_K, UNIT_I, UNIT_J),
        (UNIT_J, UNIT_I, -UNIT_K),
        (UNIT_I, UNIT_I, Quaternion(-1)),
    ],
)
def test_unit_table(a, b, expected):
    assert a * b == expected


@given(int_quat, int_quat, int_quat)
def test_associative_exact(a, b, c):
    a, b, c = (frac_quaternion(*t) for t in (a, b, c))
    assert (a * b) * c == a * (b * c)


@given(float_quat)
def test_inverse_and_norm(q):
    if abs(q) < 1e-3:
        return
    assert (q * q.inverse()).isclose(Quaternion(1), 1e-12)
    assert math.isclose(abs(q) ** 2, float(q.norm2()), rel_tol=1e-12)
    assert (q * q.conjugate()).isclose(Quaternion(q.norm2()), 1e-9)


def test_exact_inverse_is_fraction():
    q = frac_quaternion(1, 2, 3, 4)
    inv = q.inverse()
    assert inv * q == Quaternion(1)
    assert all(isinstance(c, Fraction) for c in inv.components)


def test_qmul_array_matches_scalar():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(20, 4)), rng.normal(size=(20, 4))
    out = qmul_array(a, b)
    for x, y, z in zip(a, b, out):
        assert np.allclose(hamilton(x, y), z)


@given(float_quat)
def test_decompose_reconstructs(q):
    x, y, I = decompose(q)
    if I is None:
        assert q.imag == Quaternion(0)
        return
    assert y >= 0
    assert abs(abs(I) - 1) < 1e-12
    assert (Quaternion(x) + I * y).isclose(q, 1e-9)


def test_imaginary_unit_squares_to_minus_one():
    rng = np.random.default_rng(3)
    for _ in range(10):
        I = ImaginaryUnit.random(rng)
        assert (I * I).isclose(Quaternion(-1), 1e-12)
    with pytest.raises(ValueError):
        ImaginaryUnit(0, 0, 0)


def test_slice_frame_is_orthonormal():
    I, J, K = slice_frame(ImaginaryUnit(1, 2, 3))
    assert (I * J).isclose(K)
    assert (J * I).isclose(-K)
    assert (J * J).isclose(Quaternion(-1))


@pytest.mark.parametrize(
    "p,q,expected",
    [
        (Quaternion(1, 2, 0, 0), Quaternion(3, -5, 0, 0), True),
        (Quaternion(1, 2, 0, 0), Quaternion(3, 0, 1, 0), False),
        (Quaternion(7), Quaternion(3, 0, 1, 0), True),
    ],
)
def test_same_slice(p, q, expected):
    assert same_slice(p, q) is expected


def test_sigma_on_and_off_slice():
    p, q = Quaternion(0, 1, 0, 0), Quaternion(0, 0, 1, 0)
    assert sigma(p, q) == pytest.approx(2.0)
    assert sigma(p, Quaternion(0, 3, 0, 0)) == pytest.approx(2.0)
    assert omega(p, q) == pytest.approx(2.0)


@settings(max_examples=300)
@given(float_quat, float_quat, float_quat)
def test_sigma_metric_axioms(a, b, c):
    assert sigma(a, b) == sigma(b, a)
    assert sigma(a, a) == 0
    assert sigma(a, c) <= sigma(a, b) + sigma(b, c) + 1e-12
    assert sigma(a, b) >= abs(a - b) - 1e-12


def test_sphere_geometry():
    s = Sphere2(3, -4)
    assert s.y0 == 4 and s.modulus == 5
    rng = np.random.default_rng(0)
    q = s.point(ImaginaryUnit.random(rng))
    assert s.contains(q, 1e-12)
    assert abs(s.characteristic(q)) < 1e-12
    assert s.to_json() == [3.0, 4.0]


def test_balls_and_shells():
    ball = SigmaBall(Quaternion(0, 1, 0, 0), 0.5)
    assert Quaternion(0, 1.2, 0, 0) in ball
    assert Quaternion(0, 0, 1, 0) not in ball
    shell = SymmetricShell(Sphere2(0, 1), 0.5)
    assert Quaternion(0, 0, 1.05, 0) in shell
    assert Quaternion(0, 0, 2, 0) not in shell
    with pytest.raises(ValueError):
        SigmaBall(Quaternion(0), 0)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("1+2i-3j+4k", Quaternion(1, 2, -3, 4)),
        ("i", Quaternion(0, 1, 0, 0)),
        ("-0.5k", Quaternion(0, 0, 0, -0.5)),
        ("2.5", Quaternion(2.5)),
        ("1e-3 + j", Quaternion(1e-3, 0, 1, 0)),
        ("[1, 2, 3, 4]", Quaternion(1, 2, 3, 4)),
    ],
)
def test_parse(text, expected):
    assert parse_quaternion(text) == expected


@pytest.mark.parametrize("bad", ["", "1+", "2x", "ii"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_quaternion(bad)


@given(float_quat)
def test_format_round_trip(q):
    assert parse_quaternion(format_quaternion(q)) == q


def test_sigma_array_matches_scalar():
    rng = np.random.default_rng(8)
    a = rng.normal(size=(200, 4))
    b = rng.normal(size=(200, 4))
    # half of the pairs share a slice, some are real
    b[:100, 1:] = a[:100, 1:] * rng.uniform(-2, 2, size=(100, 1))
    a[150:160, 1:] = 0
    got = sigma_array(a, b)
    want = [sigma(Quaternion(*x), Quaternion(*y)) for x, y in zip(a, b)]
    assert np.allclose(got, want, rtol=1e-14, atol=1e-15)
