import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sliceregular.cli import load_function
from sliceregular.errors import PoleError
from sliceregular.quaternion import ImaginaryUnit, Quaternion, Sphere2
from sliceregular.rational import Factor, PrincipalPart, SemiRational, principal_to_rational
from sliceregular.starpoly import StarPoly, recenter
from sliceregular.verify import (
    affine_fit,
    affinity_error,
    check_affine_on_sphere,
    check_sigma_expansion,
    dbar_residual,
    regularity_report,
)

CUBE = StarPoly([0, 0, 0, 1])
CONJ = load_function({"type": "conjugate"})
QIQ = load_function({"type": "qiq"})


def _rational(seed):
    rng = np.random.default_rng(seed)
    pp = PrincipalPart(
        Sphere2(1.0, 0.5), ((Quaternion(*rng.normal(size=4)), Quaternion(*rng.normal(size=4))),), ImaginaryUnit.random(rng)
    )
    return principal_to_rational(pp) + SemiRational(StarPoly(rng.normal(size=(4, 4))))


def test_dbar_examples():
    assert abs(dbar_residual(CUBE, Quaternion(1, 0, 2, 0), 1e-3)) < 1e-5
    assert abs(dbar_residual(StarPoly([Quaternion(1, 2, 3, 4)]), Quaternion(0.5, 1, 0, 0))) < 1e-15
    r = dbar_residual(CONJ, Quaternion(0.3, 0.4, 0.5, 0.6), 1e-4)
    assert abs(abs(r) - 1) < 1e-8


def test_dbar_residual_is_second_order():
    q = Quaternion(0.2, 0.3, -0.4, 0.9)
    f = _rational(1)
    r1, r2 = abs(dbar_residual(f, q, 1e-2)), abs(dbar_residual(f, q, 5e-3))
    assert 3.0 < r1 / r2 < 5.0


def test_dbar_stencil_on_pole():
    f = SemiRational.from_sphere_power(Sphere2(0, 1), 1)
    with pytest.raises(PoleError):
        dbar_residual(f, Quaternion(0.001, 0, 1, 0), 1e-3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_regular_functions_pass(seed):
    rng = np.random.default_rng(seed)
    f = _rational(seed % 7)
    q = Quaternion(*rng.uniform(-3, 3, size=4))
    if Sphere2(1.0, 0.5).distance(q) < 0.05:
        return
    rep = regularity_report(f, q)
    assert rep.regular, rep


@pytest.mark.parametrize("f", [CONJ, QIQ], ids=["conjugate", "qiq"])
def test_witnesses_fail_regularity(f):
    rng = np.random.default_rng(0)
    for _ in range(10):
        rep = regularity_report(f, Quaternion(*rng.normal(size=4)))
        assert not rep.regular
        assert rep.verdict == "not regular"


def test_report_serialises():
    rep = regularity_report(CUBE, Quaternion(1, 1, 0, 0))
    d = json.loads(json.dumps(rep.to_json()))
    assert d["verdict"] == "regular"
    assert d["order"] == "inf" or d["order"] >= 1.5


def test_affine_fit_of_identity():
    a, b = affine_fit(StarPoly([0, 1]), Sphere2(2, 3))
    assert a.isclose(Quaternion(2), 1e-14) and b.isclose(Quaternion(3), 1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_affine_passes_for_regular(seed):
    rng = np.random.default_rng(seed)
    real_poly = StarPoly(rng.integers(-4, 5, size=(6, 1)) * np.array([[1, 0, 0, 0]]))
    f = _rational(seed)
    for _ in range(10):
        s = Sphere2(float(rng.uniform(-3, 3)), float(rng.uniform(0.1, 3)))
        if s.distance(Sphere2(1.0, 0.5).point()) < 0.1:
            continue
        assert check_affine_on_sphere(real_poly, s)
        assert check_affine_on_sphere(f, s, rng=rng)


def test_qiq_fails_affinity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        s = Sphere2(float(rng.uniform(-2, 2)), float(rng.uniform(0.5, 2)))
        assert not check_affine_on_sphere(QIQ, s)


def test_conjugate_is_affine_on_spheres():
    # x - yJ is affine in J, so only the dbar check rejects the conjugate
    assert affinity_error(CONJ, Sphere2(1, 2)) < 1e-15


def test_sigma_expansion_of_polynomial_recentred():
    f = StarPoly([1, 2, 0, 3])
    q0 = Quaternion(0.5, 0.5, 0, 0)
    rep = check_sigma_expansion(f, q0, recenter(f, q0), 0.3)
    assert rep.passed and rep.max_error < 1e-12


def test_sigma_expansion_only_on_slice():
    """``1/(1 - q)`` expanded at ``3i/4``: the sigma ball of radius below ``3/4`` is a slice disc."""
    c = 0.75j
    coeffs = [(1 / (1 - c)) ** (n + 1) for n in range(60)]
    q0 = Quaternion(0, 0.75, 0, 0)
    series = StarPoly([Quaternion(z.real, z.imag, 0, 0) for z in coeffs], center=q0)
    f = SemiRational(StarPoly([-1.0]), {Factor(1.0): 1})
    rep = check_sigma_expansion(f, q0, series, 0.5, n_samples=40)
    assert rep.passed
    assert rep.samples >= 20 and rep.on_slice == rep.samples
    assert rep.on_slice_fraction == 1.0


def test_sigma_expansion_detects_wrong_coefficients():
    f = StarPoly([1, 2, 0, 3])
    q0 = Quaternion(0.5, 0.5, 0, 0)
    wrong = recenter(f, q0) + StarPoly([0, 1e-3], center=q0)
    assert not check_sigma_expansion(f, q0, wrong, 0.3).passed
