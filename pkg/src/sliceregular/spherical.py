"""Spherical Taylor and Laurent expansions around a 2-sphere.

Around ``x0 + y0 S`` a regular (or semiregular) function expands as

    f(q) = sum_{n >= -k} w(q)^n [A_{2(n+k)} + (q - q0) A_{2(n+k)+1}],
    w(q) = (q - x0)^2 + y0^2,

with ``q0`` a chosen point of the sphere. Everything here works from an
*evaluation oracle*: any callable ``f(q) -> Quaternion``. Oracles may
additionally provide

* ``evaluate_on_slice(I, zs)`` returning an ``(..., 4)`` array of values at
  ``Re z + Im z I`` (used for vectorised sampling), and
* ``singularities(bound)`` returning the pole spheres of modulus at most
  ``bound`` (used to size contours).

Coefficients are computed by trapezoidal quadrature on a circle in the
slice of ``q0``. On that slice a value splits as ``alpha + beta J`` with
``alpha, beta`` holomorphic, so the residue formulas

    A_{2m+1} = (1 / 2 pi i) oint w^{-(n+1)} f dz
    A_{2m}   = (1 / 2 pi i) oint (z - conj c0) w^{-(n+1)} f dz,   m = n + k,

apply componentwise. They hold for negative ``n`` as well, so principal
parts come out of the same computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotRegularError, OffSliceError, OrderBoundError
from .quaternion import (
    UNIT_I,
    UNIT_J,
    UNIT_K,
    ImaginaryUnit,
    Quaternion,
    Sphere2,
    decompose,
    join_on_slice,
    same_slice,
    slice_frame,
    split_on_slice,
)
from .rational import PrincipalPart
from .starpoly import LaurentCoeffs

__all__ = [
    "SphericalExpansion",
    "SliceSamples",
    "r_operator_on_slice",
    "spherical_coeffs",
    "spherical_laurent",
    "extract_principal_part",
    "probe_pole_order",
    "representation_extend",
    "slice_laurent_coeffs",
    "sample_on_slice",
    "default_contour_radius",
]

#: Steps used for difference-quotient limits.
RICHARDSON_STEPS = (1e-3, 5e-4, 2.5e-4)
DEFAULT_SAMPLES = 256


def sample_on_slice(f: Callable, I: Quaternion, zs) -> np.ndarray:
    """Values of ``f`` at ``Re z + Im z I`` as an array of shape ``zs.shape + (4,)``."""
    zs = np.asarray(zs, dtype=complex)
    vec = getattr(f, "evaluate_on_slice", None)
    if vec is not None:
        return np.asarray(vec(I, zs), dtype=float)
    out = np.empty(zs.shape + (4,))
    for idx, z in np.ndenumerate(zs):
        q = Quaternion(float(z.real)) + I * float(z.imag)
        out[idx] = Quaternion.coerce(f(q)).to_list()
    return out


def _slice_unit(q0: Quaternion, unit: Optional[Quaternion] = None) -> Quaternion:
    _, y, I = decompose(q0)
    if I is not None:
        return I
    return ImaginaryUnit(unit) if unit is not None else UNIT_I


# --- R operator --------------------------------------------------------------


def _richardson(values: Sequence[Quaternion]) -> Quaternion:
    """Extrapolate central differences at steps h, h/2, h/4 (error series in h^2)."""
    d1, d2, d3 = values
    e1 = (d2 * 4 - d1) * (1 / 3)
    e2 = (d3 * 4 - d2) * (1 / 3)
    return (e2 * 16 - e1) * (1 / 15)


def r_operator_on_slice(f: Callable, q0, q) -> Quaternion:
    """``R_{q0} f(q) = (q - q0)^{-1} (f(q) - f(q0))`` for ``q`` on the slice of ``q0``.

    At ``q == q0`` the slice derivative is returned, estimated by central
    differences along the real axis with Richardson extrapolation.

    Raises
    ------
    OffSliceError
        If ``q`` is not on the plane of ``q0``.
    """
    q0 = Quaternion.coerce(q0).to_float()
    q = Quaternion.coerce(q).to_float()
    if not same_slice(q, q0):
        raise OffSliceError(
            f"R operator at {q} is off the slice of {q0}; use representation_extend"
        )
    d = q - q0
    if abs(d) > 0:
        return d.inverse() * (Quaternion.coerce(f(q)) - Quaternion.coerce(f(q0)))
    diffs = [
        (Quaternion.coerce(f(q0 + h)) - Quaternion.coerce(f(q0 - h))) * (0.5 / h)
        for h in RICHARDSON_STEPS
    ]
    return _richardson(diffs)


def representation_extend(fI_plus, fI_minus, I, J) -> Quaternion:
    """``f(x + yJ)`` from ``f(x + yI)`` and ``f(x - yI)`` by the representation formula."""
    fp = Quaternion.coerce(fI_plus)
    fm = Quaternion.coerce(fI_minus)
    JI = Quaternion.coerce(J) * Quaternion.coerce(I)
    return (fp + fm) * 0.5 + JI * ((fm - fp) * 0.5)


# --- contour machinery --------------------------------------------------------


def _other_slice_points(f, sphere: Sphere2) -> Optional[list]:
    """Slice points ``x1 + i y1`` (upper half plane) of the other known poles, or None."""
    sing = getattr(f, "singularities", None)
    if sing is None:
        return None
    bound = sphere.modulus + 2 * float(sphere.y0) + 4.0
    return [complex(float(s.x0), float(s.y0)) for s in sing(bound) if s != sphere]


def default_contour_radius(f: Callable, sphere: Sphere2) -> float:
    """Radius ``r > y0`` of a circle centred at ``x0`` enclosing no other pole.

    Uses ``f.singularities`` when available, otherwise ``y0 + 1/4``. With
    the nearest other pole at distance ``d`` from ``x0`` the circle sits at
    ``sqrt(y0 d)``, balancing the geometric convergence of the quadrature
    against both. Returns ``nan`` when that convergence ratio
    ``sqrt(y0 / d)`` exceeds 0.7; two small circles are better then.
    """
    y0 = float(sphere.y0)
    pts = _other_slice_points(f, sphere)
    if pts is None:
        return y0 + 0.25
    d = min((abs(p - float(sphere.x0)) for p in pts), default=math.inf)
    if math.isinf(d):
        return y0 + 1.0
    if y0 == 0:
        return 0.5 * d
    if y0 / d > 0.49:
        return math.nan
    return min(math.sqrt(y0 * d), max(y0 + 1.0, y0 / 0.7))


def _contours(f, sphere: Sphere2, radius: Optional[float]):
    """Circles ``(center, r)`` whose residues sum to the sphere's, and the shell radius ``R``."""
    x0, y0 = float(sphere.x0), float(sphere.y0)
    if radius is None:
        radius = default_contour_radius(f, sphere)
    if not math.isnan(radius):
        if not radius > y0:
            raise ValueError("contour radius must exceed y0")
        return [(complex(x0), float(radius))], math.sqrt(radius * radius - y0 * y0)
    # separate small circles around c0 and its conjugate
    c0 = complex(x0, y0)
    pts = _other_slice_points(f, sphere)
    pts = pts + [p.conjugate() for p in pts]
    gap = min(abs(p - c0) for p in pts)
    w_min = min(abs((p - c0) * (p - c0.conjugate())) for p in pts)
    if y0 == 0:
        return [(c0, 0.5 * gap)], 0.99 * math.sqrt(w_min)
    rho = 0.5 * min(gap, y0)
    return [(c0, rho), (c0.conjugate(), rho)], 0.99 * math.sqrt(w_min)


def _contour_coeffs(f, sphere: Sphere2, I: Quaternion, ns: np.ndarray, circles, samples: int):
    """Coefficient pairs for powers ``w^n``, ``n in ns``, and a quadrature error estimate."""
    if samples < 8 or samples & (samples - 1):
        raise ValueError("sample count must be a power of two >= 8")
    x0, y0 = float(sphere.x0), float(sphere.y0)
    c0 = complex(x0, y0)
    frame = slice_frame(I)
    theta = 2 * np.pi * np.arange(samples) / samples
    e = np.exp(1j * theta)
    total_even = total_odd = 0
    total_err = np.zeros(len(ns))
    for center, radius in circles:
        zeta = center + radius * e
        vals = sample_on_slice(f, frame[0], zeta)
        if not np.all(np.isfinite(vals)):
            raise NotRegularError(f"non-finite samples on the contour around {sphere}")
        F = np.stack(split_on_slice(vals, frame))  # (2, M)
        w = (zeta - c0) * (zeta - c0.conjugate())

        def quad(step):
            W = w[None, ::step] ** (-(ns[:, None] + 1.0)) * (radius * e[None, ::step])
            odd = F[:, None, ::step] * W[None]
            even = odd * (zeta[::step] - c0.conjugate())[None, None]
            m = samples // step
            return even.sum(-1) / m, odd.sum(-1) / m

        even, odd = quad(1)
        even_h, odd_h = quad(2)
        err = np.maximum(np.abs(even - even_h).max(0), np.abs(odd - odd_h).max(0))
        # rounding floor of the sums
        big = np.abs(F).max() * radius * np.abs(w).min() ** (-(ns + 1.0)) * (radius + 2 * y0 + 1)
        total_err = total_err + np.maximum(err, 8 * np.finfo(float).eps * big)
        total_even = total_even + even
        total_odd = total_odd + odd
    A_even = join_on_slice(total_even[0], total_even[1], frame)
    A_odd = join_on_slice(total_odd[0], total_odd[1], frame)
    return A_even, A_odd, total_err


@dataclass(frozen=True)
class SphericalExpansion:
    """Truncated spherical Laurent series around ``sphere`` based at ``q0``.

    ``A[j]`` multiplies ``w^{n}`` (``j = 2(n + k)``) or ``w^n (q - q0)``
    (``j = 2(n + k) + 1``). ``radius`` is the certified shell radius ``R``:
    the series converges on ``{q : |w(q)| < R^2}`` minus the sphere.
    """

    sphere: Sphere2
    q0: Quaternion
    k: int
    A: tuple
    radius: float
    error: float = 0.0

    @property
    def J_max(self) -> int:
        return len(self.A) - 1

    def coefficient(self, j: int) -> Quaternion:
        return self.A[j] if 0 <= j < len(self.A) else Quaternion(0.0)

    def principal_part(self) -> PrincipalPart:
        _, _, I = decompose(self.q0)
        pairs = tuple(
            (self.coefficient(2 * (self.k - n)), self.coefficient(2 * (self.k - n) + 1))
            for n in range(1, self.k + 1)
        )
        return PrincipalPart(self.sphere, pairs, I if I is not None else UNIT_I)

    def __call__(self, q) -> Quaternion:
        q = Quaternion.coerce(q)
        w = self.sphere.characteristic(q)
        if self.k and abs(w) == 0:
            from .errors import PoleError

            raise PoleError(f"point {q} lies on the pole sphere {self.sphere}", self.sphere)
        d = q - self.q0
        acc = Quaternion(0.0)
        for j in range(0, len(self.A), 2):
            n = j // 2 - self.k
            term = self.A[j] + d * self.coefficient(j + 1)
            acc = acc + (w**n) * term
        return acc

    def to_json(self) -> dict:
        return {
            "sphere": self.sphere.to_json(),
            "q0": self.q0.to_list(),
            "k": self.k,
            "A": [a.to_list() for a in self.A],
            "radius": float(self.radius),
        }

    @classmethod
    def from_json(cls, data) -> "SphericalExpansion":
        x0, y0 = data["sphere"]
        return cls(
            Sphere2(float(x0), float(y0)),
            Quaternion.from_iter(map(float, data["q0"])),
            int(data["k"]),
            tuple(Quaternion.from_iter(map(float, a)) for a in data["A"]),
            float(data["radius"]),
        )


def _base_point(sphere: Sphere2, q0) -> Quaternion:
    if q0 is None:
        return sphere.point(UNIT_I)
    q0 = Quaternion.coerce(q0).to_float()
    if sphere.distance(q0) > 1e-12 * max(1.0, sphere.modulus):
        raise ValueError(f"base point {q0} is not on {sphere}")
    return q0


#: Number of blocks below ``w^{-k}`` checked to vanish.
_GUARD = 4


def _quat(row) -> Quaternion:
    return Quaternion(*(float(v) for v in row))


def _significant(c: Quaternion, err: float, scale: float) -> bool:
    return abs(c) > max(1e3 * err, 1e-9 * scale)


def spherical_laurent(
    f: Callable,
    sphere: Sphere2,
    q0=None,
    k: int = 0,
    J_max: int = 9,
    radius: Optional[float] = None,
    samples: int = DEFAULT_SAMPLES,
) -> SphericalExpansion:
    """Spherical Laurent coefficients ``A_0..A_{J_max}`` with pole order parameter ``k``.

    Raises
    ------
    NotRegularError
        If the ``w^{-k-1}`` block is nonzero, i.e. ``k`` is too small.
    """
    q0 = _base_point(sphere, q0)
    I = _slice_unit(q0)
    circles, R = _contours(f, sphere, radius)
    n_hi = (J_max // 2) - k
    ns = np.arange(-k - _GUARD, n_hi + 1, dtype=float)
    A_even, A_odd, err = _contour_coeffs(f, sphere, I, ns, circles, samples)
    coeffs = []
    for i in range(_GUARD, len(ns)):
        coeffs.append(_quat(A_even[i]))
        coeffs.append(_quat(A_odd[i]))
    scale = max([abs(c) for c in coeffs] + [1e-300])
    for i in range(_GUARD):
        below = (_quat(A_even[i]), _quat(A_odd[i]))
        if any(_significant(c, err[i], scale) for c in below):
            raise NotRegularError(
                f"k={k} too small at {sphere}: coefficient of w^{int(ns[i])} is {max(map(abs, below)):.3g}"
                if k
                else f"not regular here: {sphere} is a pole"
            )
    A = tuple(coeffs[: J_max + 1])
    return SphericalExpansion(sphere, q0, k, A, R, float(err[_GUARD:].max()))


def spherical_coeffs(f, sphere: Sphere2, q0=None, J_max: int = 9, radius=None, samples=DEFAULT_SAMPLES):
    """Spherical Taylor coefficients (the ``k = 0`` case of :func:`spherical_laurent`)."""
    return spherical_laurent(f, sphere, q0, 0, J_max, radius, samples)


# --- principal parts -----------------------------------------------------------

_PROBE_UNITS = (UNIT_I, UNIT_J, UNIT_K, ImaginaryUnit(1, 1, 1))


def _bounded(vals) -> bool:
    a, b = (abs(v) for v in vals)
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return b <= 2 * a or b < 1e-300


def probe_pole_order(f: Callable, sphere: Sphere2, k_max: int = 8, units=_PROBE_UNITS) -> int:
    """Smallest ``k <= k_max`` with ``w^k f`` bounded along probe paths onto the sphere.

    Eight approach paths, two per slice on four slices, sample
    ``|w(q)^k f(q)|`` at distances ``1e-3`` and ``1e-4``; a path counts as
    bounded when the value grows by at most a factor two over that decade.

    Raises
    ------
    OrderBoundError
        If no ``k <= k_max`` passes.
    """
    paths = []
    for J in units:
        p = sphere.point(J)
        for d in (J, Quaternion(1.0)):
            pts = [p + d * t for t in (1e-3, 1e-4)]
            vals = [Quaternion.coerce(f(q)) for q in pts]
            ws = [sphere.characteristic(q) for q in pts]
            paths.append((ws, vals))
    for k in range(k_max + 1):
        if all(_bounded([(w**k) * v for w, v in zip(ws, vals)]) for ws, vals in paths):
            return k
    raise OrderBoundError(f"pole order at {sphere} exceeds the bound k_max={k_max}")


def extract_principal_part(
    f: Callable,
    sphere: Sphere2,
    k_max: int = 8,
    unit=None,
    radius: Optional[float] = None,
    samples: int = DEFAULT_SAMPLES,
) -> PrincipalPart:
    """Principal part of ``f`` at ``sphere`` with base point ``x0 + y0 * unit``.

    The order comes from :func:`probe_pole_order`; the contour coefficients
    must confirm it (a significant coefficient beyond the probed order
    raises it).
    """
    k = probe_pole_order(f, sphere, k_max)
    unit = UNIT_I if unit is None else ImaginaryUnit(unit)
    circles, _ = _contours(f, sphere, radius)
    ns = np.arange(-k_max - 1, 0, dtype=float)
    A_even, A_odd, err = _contour_coeffs(f, sphere, unit, ns, circles, samples)
    pairs = {int(n): (_quat(A_even[i]), _quat(A_odd[i])) for i, n in enumerate(ns)}
    scale = max(max(abs(a), abs(b)) for a, b in pairs.values()) or 1.0
    sig = [
        -n
        for i, n in enumerate(pairs)
        if _significant(pairs[n][0], err[i], scale) or _significant(pairs[n][1], err[i], scale)
    ]
    k_contour = max(sig, default=0)
    if k_contour > k_max:
        raise OrderBoundError(f"pole order at {sphere} exceeds the bound k_max={k_max}")
    k = max(k, k_contour)
    return PrincipalPart(sphere, tuple(pairs[-n] for n in range(1, k + 1)), unit)


# --- slice Laurent series ------------------------------------------------------


@dataclass(frozen=True)
class SliceSamples:
    """``M`` equispaced values ``f(p + r e^{I theta_m})`` on a circle in ``L_I``."""

    I: Quaternion
    center: complex
    radius: float
    values: np.ndarray

    def __post_init__(self):
        M = len(self.values)
        if M < 2 or M & (M - 1):
            raise ValueError("sample count must be a power of two")

    @classmethod
    def from_oracle(cls, f, I, center, radius: float, M: int = DEFAULT_SAMPLES) -> "SliceSamples":
        I = ImaginaryUnit(I)
        if isinstance(center, Quaternion):
            x, y, J = decompose(center)
            if J is not None and not same_slice(center, I):
                raise OffSliceError("circle center is not on the slice L_I")
            if J is not None and (J - I).__abs__() > 1e-9:
                y = -y
            center = complex(x, y)
        center = complex(center)
        zs = center + radius * np.exp(2j * np.pi * np.arange(M) / M)
        return cls(I, center, float(radius), sample_on_slice(f, I, zs))

    @property
    def center_quaternion(self) -> Quaternion:
        return Quaternion(self.center.real) + self.I * self.center.imag


def slice_laurent_coeffs(samples: SliceSamples, n_range) -> LaurentCoeffs:
    """Laurent coefficients of ``f_I`` around the circle center by discrete Fourier sums."""
    ns = np.arange(n_range[0], n_range[-1] + 1) if not isinstance(n_range, range) else np.array(n_range)
    M = len(samples.values)
    frame = slice_frame(samples.I)
    alpha, beta = split_on_slice(samples.values, frame)
    theta = 2 * np.pi * np.arange(M) / M
    W = np.exp(-1j * np.outer(ns, theta)) / M * (samples.radius ** (-ns.astype(float)))[:, None]
    coeffs = join_on_slice(W @ alpha, W @ beta, frame)
    return LaurentCoeffs(
        tuple(_quat(c) for c in coeffs), int(ns[0]), samples.center_quaternion
    )
