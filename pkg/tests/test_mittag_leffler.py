import json
import math

import numpy as np
import pytest

from oracles import paired_partial, zsum_partial, zsum_real_closed, zsum_real_mp
from sliceregular.errors import DegreeCapError, DiscretenessError, PoleError
from sliceregular.mittag_leffler import (
    MLFunction,
    MLPrescription,
    build,
    eval_certified,
    example_paired,
    example_zsum,
    random_prescription,
)
from sliceregular.quaternion import UNIT_I, ImaginaryUnit, Quaternion, Sphere2
from sliceregular.rational import PrincipalPart
from sliceregular.spherical import extract_principal_part
from sliceregular.verify import check_affine_on_sphere, regularity_report


def _pp(x0, y0, a=1.0, b=0.0):
    return PrincipalPart(Sphere2(x0, y0), ((Quaternion(a), Quaternion(b)),))


@pytest.fixture(scope="module")
def built():
    pres = random_prescription(np.random.default_rng(11), count=8, radius=6.0)
    return build(pres)


def _off_pole_points(f, rng, n, radius):
    out = []
    while len(out) < n:
        q = Quaternion(*rng.uniform(-radius, radius, size=4))
        if all(s.distance(q) > 0.1 for s in f.singularities(radius + 3)):
            out.append(q)
    return out


# --- prescriptions ----------------------------------------------------------------


def test_duplicate_sphere_rejected():
    with pytest.raises(DiscretenessError, match="twice"):
        MLPrescription([_pp(1, 1), _pp(1, 1, 2.0)])


def test_accumulating_set_rejected():
    with pytest.raises(DiscretenessError):
        MLPrescription([_pp(1 + 1 / n, 1) for n in range(1, 200)], min_separation=1e-3)
    with pytest.raises(DiscretenessError):
        MLPrescription([_pp(1 + 0.01 * n, 1) for n in range(80)])


def test_prescription_needs_exactly_one_source():
    with pytest.raises(ValueError):
        MLPrescription()
    with pytest.raises(ValueError):
        MLPrescription([_pp(1, 1)], generator="integer_lattice")
    with pytest.raises(ValueError):
        MLPrescription(generator="spiral")


def test_lattice_generator_enumerates_shells():
    pres = MLPrescription(generator="integer_lattice")
    assert [p.sphere.x0 for p in pres.between(0, 2.3)] == [0, -1, 1, -2, 2]
    assert pres.part_at(Sphere2(3, 1)).pairs[0][0] == Quaternion(1)
    assert pres.part_at(Sphere2(3, 2)) is None
    paired = MLPrescription(generator="integer_lattice", principal="paired")
    assert paired.part_at(Sphere2(-2, 1)).pairs[0] == (Quaternion(0), Quaternion(1))


@pytest.mark.parametrize(
    "pres",
    [
        MLPrescription([_pp(1, 1), _pp(-2, 0.5, 0.0, 3.0)]),
        MLPrescription(generator="integer_lattice", principal="paired"),
    ],
    ids=["finite", "generator"],
)
def test_prescription_json_round_trip(pres):
    back = MLPrescription.from_json(json.loads(json.dumps(pres.to_json())))
    assert back.to_json() == pres.to_json()


# --- building --------------------------------------------------------------------


def test_group_bounds_below_two_to_minus_n(built):
    for row in built.ledger():
        assert row["bound"] < 2.0 ** -row["n"]
    radii = built.radii
    assert all(a < b for a, b in zip(radii, radii[1:]))


def test_built_function_has_prescribed_principal_parts(built):
    for p in built.prescription.parts:
        got = extract_principal_part(built.local_oracle(p.sphere), p.sphere, unit=p.unit)
        assert got.k == p.k
        scale = max(abs(c) for pair in p.pairs for c in pair)
        err = max(abs(a - b) for x, y in zip(got.pairs, p.pairs) for a, b in zip(x, y))
        assert err <= 1e-8 * max(1.0, scale)


def test_built_function_regular_off_poles(built):
    rng = np.random.default_rng(0)
    for q in _off_pole_points(built, rng, 40, 7.0):
        assert regularity_report(built, q).regular


def test_built_function_affine_on_spheres(built):
    rng = np.random.default_rng(1)
    for _ in range(10):
        s = Sphere2(float(rng.uniform(-5, 5)), float(rng.uniform(0.1, 5)))
        if min(math.hypot(s.x0 - p.x0, s.y0 - p.y0) for p in built.singularities()) > 0.1:
            assert check_affine_on_sphere(built, s, rng=rng)


def test_pole_error_names_sphere(built):
    s = built.prescription.parts[0].sphere
    with pytest.raises(PoleError) as exc:
        built(s.point(ImaginaryUnit(0, 1, 1)))
    assert exc.value.sphere == s


def test_finite_prescription_merges_instead_of_overflowing():
    # poles every 1/4 in modulus: no degree-2 correction fits, so the groups merge
    pres = MLPrescription([_pp(0.0, 0.5 + 0.25 * m) for m in range(40)])
    f = build(pres, degree_cap=2)
    assert all(row["degree"] <= 2 for row in f.ledger())
    assert sum(row["size"] for row in f.ledger()) == 40


def test_degree_cap_overflow_is_reported():
    f = build(MLPrescription(generator="integer_lattice"), degree_cap=8)
    with pytest.raises(DegreeCapError, match="degree_cap"):
        f.eval_certified(Quaternion(20.5, 0.5, 0, 0), 1e-8)


def test_json_round_trip_preserves_values(built):
    back = MLFunction.from_json(json.loads(json.dumps(built.to_json())))
    q = Quaternion(0.3, -0.2, 0.7, 0.1)
    assert back(q).isclose(built(q), 1e-13)
    assert back.ledger() == built.ledger()


def test_certified_bound_covers_reference(built):
    rng = np.random.default_rng(2)
    for q in _off_pole_points(built, rng, 10, 6.0):
        value, bound = eval_certified(built, q, 1e-6)
        ref, _ = built.eval_certified(q, 1e-12)
        assert abs(value - ref) <= bound


def test_lattice_builder_matches_zsum_up_to_entire_function():
    f = build(MLPrescription(generator="integer_lattice"))
    z = example_zsum()
    s = Sphere2(1, 1)
    J = ImaginaryUnit(0, 1, 1)
    diffs = [f(s.point(J) + d, 1e-10) - z(s.point(J) + d) for d in (1e-3, 1e-4, 1e-5)]
    # the pole cancels in the difference, which converges as q approaches the sphere
    assert abs(diffs[1] - diffs[2]) < 10 * abs(diffs[0] - diffs[1]) + 1e-6
    assert abs(diffs[2]) < 10


# --- the two series examples --------------------------------------------------------


@pytest.mark.parametrize("x", [0.0, 0.5, -1.25, 3.3])
def test_zsum_real_axis_against_high_precision(x):
    z = example_zsum()
    closed = zsum_real_closed(x)
    assert z(Quaternion(x)).isclose(Quaternion(closed), 1e-12 * closed)
    s, tail = zsum_real_mp(x, 200)
    assert abs(closed - s) <= tail


@pytest.mark.parametrize("q", [Quaternion(0.5, 0.3, 0.2, 0.1), Quaternion(-2.2, 0, 0, 1.7)])
def test_zsum_partial_sums_within_tail_bound(q):
    z = example_zsum()
    value, bound = z.partial_sum(q, 60)
    assert value.isclose(zsum_partial(q, 60), 1e-12)
    assert abs(z(q) - value) <= bound


@pytest.mark.parametrize("q", [Quaternion(0.5, 0.3, 0.2, 0.1), Quaternion(1.5, 0, 0.5, 0.5)])
def test_paired_partial_sums_within_tail_bound(q):
    p = example_paired()
    value, bound = p.partial_sum(q, 50)
    assert value.isclose(paired_partial(q, 50), 1e-12)
    assert abs(p(q) - value) <= bound
    # tail bound is O(1/N)-sharp at worst, O(1/N^2) in practice
    assert abs(p(q) - p.partial_sum(q, 400)[0]) < abs(p(q) - value)


def test_paired_tail_bound_requires_large_n():
    assert math.isinf(example_paired().tail_bound(Quaternion(5.0), 3))
    assert math.isinf(example_zsum().tail_bound(Quaternion(5.0), 5))


@pytest.mark.parametrize("n", [-1, 0, 2])
def test_examples_principal_parts(n):
    s = Sphere2(n, 1)
    for f, pair in ((example_zsum(), (1, 0)), (example_paired(), (0, 1))):
        got = extract_principal_part(f, s, unit=UNIT_I)
        assert got.k == 1
        assert got.pairs[0][0].isclose(Quaternion(pair[0]), 1e-8)
        assert got.pairs[0][1].isclose(Quaternion(pair[1]), 1e-8)


def test_examples_evaluate_on_slice_consistent():
    rng = np.random.default_rng(4)
    J = ImaginaryUnit.random(rng)
    zs = np.array([0.3 + 0.4j, -1.7 + 2.2j])
    for f in (example_zsum(), example_paired()):
        vals = f.evaluate_on_slice(J, zs)
        for z, v in zip(zs, vals):
            assert np.allclose(v, f(Quaternion(z.real) + J * z.imag).to_list(), atol=1e-12)
