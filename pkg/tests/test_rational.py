import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import frac_quaternion
from sliceregular.errors import DegreeCapError, PoleError
from sliceregular.quaternion import ImaginaryUnit, Quaternion, Sphere2
from sliceregular.rational import (
    Factor,
    PrincipalPart,
    SemiRational,
    TruncatedSeries,
    minimal_truncation,
    pole_extract,
    principal_to_rational,
    taylor_truncate,
)
from sliceregular.starpoly import StarPoly

I = frac_quaternion(0, 1, 0, 0)


def unpaired(n: int) -> SemiRational:
    """``((q-n)^2+1)^{-1} (q - n - i)`` as an exact principal part."""
    return principal_to_rational(PrincipalPart(Sphere2(n, 1), ((Quaternion(0), Quaternion(1)),), I))


def test_canonical_form_cancels_common_factor():
    w = Factor(0, 1)
    f = SemiRational(StarPoly([1, 0, 1], exact=True), {w: 2})
    assert f.denominator == {w: 1}
    assert f.numerator == StarPoly([1], exact=True)


def test_arithmetic_pointwise():
    rng = np.random.default_rng(4)
    f = SemiRational(StarPoly(rng.normal(size=(3, 4))), {Factor(0.5, 1.0): 1})
    g = SemiRational(StarPoly(rng.normal(size=(2, 4))), {Factor(-1.0): 1})
    for _ in range(10):
        q = Quaternion(*rng.normal(size=4))
        assert (f + g)(q).isclose(f(q) + g(q), 1e-9)
        assert (f - g)(q).isclose(f(q) - g(q), 1e-9)


def test_scalar_product_and_equality():
    f = unpaired(1)
    assert f * 2 == f + f
    assert (f - f).is_zero()


@pytest.mark.parametrize("n", range(1, 6))
def test_paired_identity_exact(n):
    total = unpaired(n) + unpaired(-n)
    assert total.exact
    num = StarPoly([-I * (n * n + 1), 1 - n * n, -I, 1], exact=True) * 2
    want = SemiRational(num, {Factor(n, 1): 1, Factor(-n, 1): 1})
    assert total == want


def test_principal_part_matches_rational():
    rng = np.random.default_rng(7)
    pp = PrincipalPart(
        Sphere2(0.5, 1.5),
        tuple((Quaternion(*rng.normal(size=4)), Quaternion(*rng.normal(size=4))) for _ in range(3)),
        ImaginaryUnit.random(rng),
    )
    r = principal_to_rational(pp)
    assert pp.k == 3
    for _ in range(10):
        q = Quaternion(*rng.normal(size=4))
        assert r(q).isclose(pp(q), 1e-9 * max(1, abs(pp(q))))


def test_principal_part_trailing_zero_pairs_dropped():
    pp = PrincipalPart(Sphere2(0, 1), ((Quaternion(1), Quaternion(0)), (Quaternion(0), Quaternion(0))))
    assert pp.k == 1


def test_principal_part_json_round_trip():
    pp = PrincipalPart(Sphere2(1, 2), ((Quaternion(1, 2, 3, 4), Quaternion(0, 0, 1, 0)),), ImaginaryUnit(0, 1, 0))
    back = PrincipalPart.from_json(json.loads(json.dumps(pp.to_json())))
    assert back.sphere == pp.sphere and back.pairs == pp.pairs and back.unit == pp.unit
    with pytest.raises(ValueError):
        PrincipalPart.from_json({"x0": 0, "y0": 1, "k": 2, "A": [[1, 0, 0, 0]]})


def test_pole_at_sphere_raises():
    f = unpaired(0)
    with pytest.raises(PoleError):
        f(Quaternion(0, 0, 1, 0))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_pole_extract(k):
    s = Sphere2(Fraction(1), Fraction(2))
    g0 = SemiRational(StarPoly([1, 1], exact=True), {Factor(3): 1})
    f = SemiRational(g0.numerator, {Factor(3): 1, Factor(s.x0, s.y0): k})
    kk, g = pole_extract(f, s)
    assert kk == k and g == g0
    assert pole_extract(f, Sphere2(5, 1))[0] == 0


def test_poles_and_singularities():
    f = unpaired(3) + unpaired(1)
    assert [s.to_json() for s in f.poles()] == [[1.0, 1.0], [3.0, 1.0]]
    assert len(f.singularities(2.0)) == 1


def test_json_round_trip():
    f = unpaired(2) + SemiRational(StarPoly([1], exact=True), {Factor(-1): 2})
    g = SemiRational.from_json(json.loads(json.dumps(f.to_json())))
    q = Quaternion(0.3, 0.2, -0.1, 0.4)
    assert g(q).isclose(f(q), 1e-12)


def test_evaluate_on_slice_matches_pointwise():
    f = unpaired(1) + unpaired(-2)
    rng = np.random.default_rng(0)
    J = ImaginaryUnit.random(rng)
    zs = np.array([0.3 + 0.2j, -1.0 + 2.0j, 0.5 - 0.7j])
    vals = f.evaluate_on_slice(J, zs)
    for z, v in zip(zs, vals):
        assert np.allclose(v, f(Quaternion(z.real) + J * z.imag).to_list(), atol=1e-12)


# --- certified truncation -----------------------------------------------------------


def _random_ball_points(rng, radius, n):
    d = rng.normal(size=(n, 4))
    d *= (radius * rng.uniform(size=n) ** 0.25 / np.linalg.norm(d, axis=1))[:, None]
    return [Quaternion(*row) for row in d]


@pytest.mark.parametrize("order", [0, 3, 10, 40])
def test_taylor_truncate_bound_is_honest(order):
    f = unpaired(3) + unpaired(-2) * 2
    radius = 1.5
    t = taylor_truncate(f, order, radius)
    rng = np.random.default_rng(order)
    for q in _random_ball_points(rng, radius, 30):
        assert abs(t(q) - f(q)) <= t.tail_bound
    assert t.poly(Quaternion(0.1)).isclose(f(Quaternion(0.1)), t.tail_bound + 1e-12)


def test_taylor_truncate_rejects_pole_in_ball():
    with pytest.raises(PoleError):
        taylor_truncate(unpaired(1), 4, 2.0)
    with pytest.raises(DegreeCapError):
        taylor_truncate(unpaired(5), 100, 1.0, degree_cap=50)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 20))
def test_minimal_truncation(n):
    f = unpaired(4)
    target = 2.0**-n
    t = minimal_truncation(f, 2.0, target, 256)
    assert t is not None and t.tail_bound < target
    if t.order > 0:
        assert taylor_truncate(f, t.order - 1, 2.0).tail_bound >= target * 0.5


def test_minimal_truncation_gives_up_under_cap():
    assert minimal_truncation(unpaired(3), 3.1, 1e-12, 64) is None


def test_truncated_series_json_round_trip():
    t = taylor_truncate(unpaired(3), 12, 2.0)
    back = TruncatedSeries.from_json(json.loads(json.dumps(t.to_json())))
    q = Quaternion(0.5, 0.1, 0.2, -0.3)
    assert back(q) == t(q) and back.tail_bound == t.tail_bound


def test_series_slice_and_pointwise_agree():
    t = taylor_truncate(unpaired(3), 20, 2.0)
    q = Quaternion(0.5, 0.3, 0.0, 0.4)
    v = t.evaluate_on_slice(ImaginaryUnit(0.3, 0, 0.4), np.array([0.5 + 0.5j]))[0]
    assert np.allclose(v, t(q).to_list(), atol=1e-13)


def test_exceptional_point_is_zero_of_top_pair():
    s = Sphere2(-1.0, 1.0)
    q0 = s.point(ImaginaryUnit(1, 0, 0))
    a = Quaternion(0, 1, -1, 0)
    pp = PrincipalPart(s, ((a, Quaternion(1)),), ImaginaryUnit(1, 0, 0))
    q = pp.exceptional_point()
    assert q is not None and s.contains(q, 1e-12)
    assert q.isclose(Quaternion(-1, 0, 1, 0), 1e-14)
    assert abs(a + (q - q0) * Quaternion(1)) < 1e-12
    # a zero off the sphere means no exceptional point
    assert PrincipalPart(s, ((Quaternion(5), Quaternion(1)),)).exceptional_point() is None
