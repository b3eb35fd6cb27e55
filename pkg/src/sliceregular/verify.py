"""Numerical checks of slice regularity.

These checkers only evaluate functions, so they apply to any oracle and
are what the rest of the package is validated against.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, List

import numpy as np

from .errors import PoleError
from .quaternion import (
    UNIT_I,
    ImaginaryUnit,
    Quaternion,
    Sphere2,
    decompose,
    same_slice,
    sigma,
)
from .starpoly import StarPoly, evaluate

__all__ = [
    "dbar_residual",
    "RegularityReport",
    "regularity_report",
    "affine_fit",
    "affinity_error",
    "check_affine_on_sphere",
    "SigmaReport",
    "check_sigma_expansion",
]

_EPS = np.finfo(float).eps


def _unit_of(q: Quaternion, I=None) -> Quaternion:
    _, _, J = decompose(q)
    if J is not None:
        return J
    return UNIT_I if I is None else ImaginaryUnit(I)


def _values(f: Callable, q: Quaternion, I: Quaternion, offsets) -> List[Quaternion]:
    """``f(q + d)`` for complex offsets ``d`` read in the slice of ``I``."""
    offsets = np.asarray(offsets, dtype=complex)
    vec = getattr(f, "evaluate_on_slice", None)
    if vec is not None:
        x, y, J = decompose(q)
        if J is not None and abs(J - I) > 0.5:
            y = -y
        vals = np.asarray(vec(I, complex(x, y) + offsets), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise PoleError(f"difference stencil at {q} hits a pole")
        return [Quaternion(*(float(c) for c in row)) for row in vals]
    pts = [q + Quaternion(d.real) + I * d.imag for d in offsets]
    try:
        return [Quaternion.coerce(f(p)) for p in pts]
    except PoleError as exc:
        raise PoleError(f"difference stencil at {q} hits a pole: {exc}", exc.sphere) from exc


def _residual(vals, h: float, I: Quaternion) -> Quaternion:
    fxp, fxm, fyp, fym = vals
    dx = (fxp - fxm) * (0.5 / h)
    dy = (fyp - fym) * (0.5 / h)
    return (dx + I * dy) * 0.5


def dbar_residual(f: Callable, q, h: float = 1e-3, I=None) -> Quaternion:
    """Central-difference value of ``(1/2)(d/dx + I d/dy) f`` at ``q = x + yI``.

    For a real ``q`` the slice unit ``I`` may be given (default ``i``).
    """
    q = Quaternion.coerce(q).to_float()
    I = _unit_of(q, I)
    return _residual(_values(f, q, I, [h, -h, 1j * h, -1j * h]), h, I)


@dataclass
class RegularityReport:
    """Residuals of the discretised ``dbar_I`` at steps ``h, h/2, h/4``.

    ``extrapolated`` is the Richardson combination of the two smallest
    steps, relative to ``scale = max(1, |f(q)|)``. ``order`` is the observed
    convergence order; it is ``inf`` when all residuals are at rounding level.
    """

    point: list
    unit: list
    steps: list
    residuals: list
    extrapolated: float
    scale: float
    order: float
    tol: float
    regular: bool

    @property
    def verdict(self) -> str:
        return "regular" if self.regular else "not regular"

    def to_json(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        if math.isinf(d["order"]):
            d["order"] = "inf"
        return d


def regularity_report(
    f: Callable, q, h: float = 1e-3, I=None, tol: float = 1e-6, min_order: float = 1.5
) -> RegularityReport:
    """Judge slice regularity at ``q`` from ``dbar`` residuals at ``h, h/2, h/4``.

    Regular means the residuals decay with order at least ``min_order`` (or
    sit at the rounding floor) and the extrapolated relative residual is
    below ``tol``.
    """
    q = Quaternion.coerce(q).to_float()
    I = _unit_of(q, I)
    steps = [h, h / 2, h / 4]
    offsets = [0.0] + [d * s for s in steps for d in (1, -1, 1j, -1j)]
    vals = _values(f, q, I, offsets)
    value = vals[0]
    res = [_residual(vals[1 + 4 * i : 5 + 4 * i], s, I) for i, s in enumerate(steps)]
    mags = [abs(r) for r in res]
    scale = max(1.0, abs(value))
    # rounding floor of a central difference at the smallest step
    noise = 64 * _EPS * scale / steps[-1]
    extrap = abs((res[2] * 4 - res[1]) * (1 / 3)) / scale
    if max(mags) <= noise:
        order = math.inf
    else:
        ratios = [a / b for a, b in zip(mags, mags[1:]) if b > noise]
        order = math.log2(min(ratios)) if ratios else math.inf
    ok = order >= min_order and extrap < tol
    return RegularityReport(
        point=q.to_list(),
        unit=I.to_list(),
        steps=steps,
        residuals=[m / scale for m in mags],
        extrapolated=extrap,
        scale=scale,
        order=order,
        tol=tol,
        regular=bool(ok),
    )


# --- affinity on spheres ---------------------------------------------------------------


def affine_fit(f: Callable, sphere: Sphere2, I=UNIT_I):
    """``(a, b)`` with ``f(x + yI) = a + I b`` and ``f(x - yI) = a - I b``."""
    I = ImaginaryUnit(I)
    x, y = float(sphere.x0), float(sphere.y0)
    fp = Quaternion.coerce(f(Quaternion(x) + I * y))
    fm = Quaternion.coerce(f(Quaternion(x) - I * y))
    a = (fp + fm) * 0.5
    b = -I * ((fp - fm) * 0.5)
    return a, b


def affinity_error(f: Callable, sphere: Sphere2, n_units: int = 20, rng=None, I=UNIT_I) -> float:
    """Largest relative deviation of ``f(x + yJ)`` from the affine fit over random ``J``."""
    rng = np.random.default_rng(0) if rng is None else rng
    a, b = affine_fit(f, sphere, I)
    x, y = float(sphere.x0), float(sphere.y0)
    worst = 0.0
    for _ in range(n_units):
        J = ImaginaryUnit.random(rng)
        v = Quaternion.coerce(f(Quaternion(x) + J * y))
        worst = max(worst, abs(v - (a + J * b)) / max(1.0, abs(v)))
    return worst


def check_affine_on_sphere(f: Callable, sphere: Sphere2, tol: float = 1e-10, rng=None, n_units: int = 20) -> bool:
    """True when ``J -> f(x0 + y0 J)`` is affine within ``tol`` on ``n_units`` random units."""
    return affinity_error(f, sphere, n_units, rng) <= tol


# --- sigma-ball expansions -------------------------------------------------------------


@dataclass
class SigmaReport:
    passed: bool
    max_error: float
    samples: int
    on_slice: int
    tol: float

    @property
    def on_slice_fraction(self) -> float:
        return self.on_slice / self.samples if self.samples else 1.0

    def to_json(self) -> dict:
        return asdict(self)


def _sigma_ball_samples(q0: Quaternion, R: float, n: int, rng) -> List[Quaternion]:
    """Points of the sigma ball: half drawn from its slice disc, half from the Euclidean ball."""
    x0, y0, I = decompose(q0)
    I = UNIT_I if I is None else I
    out = []
    while len(out) < n // 2:
        z = complex(*rng.uniform(-R, R, size=2))
        if abs(z) < R:
            out.append(q0 + Quaternion(z.real) + I * z.imag)
    tries = 0
    while len(out) < n and tries < 200 * n:
        tries += 1
        d = rng.normal(size=4)
        d *= R * rng.uniform() ** 0.25 / np.linalg.norm(d)
        p = q0 + Quaternion(*d)
        if sigma(p, q0) < R:
            out.append(p)
    return out


def check_sigma_expansion(
    f: Callable, q0, coeffs: StarPoly, R: float, n_samples: int = 64, tol: float = 1e-10, rng=None
) -> SigmaReport:
    """Compare ``sum (q - q0)^{*n} a_n`` with ``f`` on sample points of the sigma ball ``Sigma(q0, R)``.

    ``coeffs`` is a :class:`StarPoly` centered at ``q0``. The report records
    how many accepted samples lie on the slice of ``q0``; for ``q0`` off
    the real axis and ``R < |Im q0|`` that is all of them.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    q0 = Quaternion.coerce(q0).to_float()
    pts = _sigma_ball_samples(q0, R, n_samples, rng)
    worst = 0.0
    on = 0
    for p in pts:
        on += same_slice(p, q0)
        v = Quaternion.coerce(f(p))
        worst = max(worst, abs(evaluate(coeffs, p) - v) / max(1.0, abs(v)))
    return SigmaReport(worst <= tol, worst, len(pts), on, tol)
