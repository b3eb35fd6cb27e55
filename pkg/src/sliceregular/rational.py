"""Semiregular rational functions with real-coefficient denominators.

A :class:`SemiRational` is ``d(q)^{-1} N(q)`` where ``N`` is a
:class:`~sliceregular.starpoly.StarPoly` centered at 0 and ``d`` is a
real-coefficient polynomial kept in factored form,

    d(q) = prod ((q - x)^2 + y^2)^p  *  prod (q - r)^p.

Real-coefficient polynomials are central for the *-product, so sums and
products reduce to polynomial arithmetic on numerators. On the slice of
``q`` the value ``d(q)`` commutes with ``q`` and multiplies ``N(q)`` from
the left.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import DegreeCapError, FactorizationError, PoleError
from .quaternion import (
    ImaginaryUnit,
    Quaternion,
    Sphere2,
    UNIT_I,
    decompose,
    join_on_slice,
    slice_frame,
    split_on_slice,
)
from .starpoly import DEFAULT_DEGREE_CAP, StarPoly, evaluate_on_slice

__all__ = [
    "Factor",
    "SemiRational",
    "PrincipalPart",
    "TruncatedSeries",
    "principal_to_rational",
    "pole_extract",
    "taylor_truncate",
    "taylor_coefficients",
    "minimal_truncation",
]


@dataclass(frozen=True, order=True)
class Factor:
    """Irreducible real factor: ``(q - x0)^2 + y0^2`` if ``y0 > 0``, else ``q - x0``."""

    x0: object
    y0: object = 0

    @property
    def is_linear(self) -> bool:
        return self.y0 == 0

    @property
    def sphere(self) -> Sphere2:
        return Sphere2(self.x0, self.y0)

    @property
    def modulus(self) -> float:
        return math.hypot(float(self.x0), float(self.y0))

    def coefficients(self):
        """Ascending real coefficients."""
        if self.is_linear:
            return [-self.x0, 1]
        return [self.x0 * self.x0 + self.y0 * self.y0, -2 * self.x0, 1]

    def roots(self) -> list:
        if self.is_linear:
            return [complex(float(self.x0))]
        z = complex(float(self.x0), float(self.y0))
        return [z, z.conjugate()]

    def value(self, q: Quaternion) -> Quaternion:
        d = q - self.x0
        if self.is_linear:
            return d
        return d * d + self.y0 * self.y0

    def value_complex(self, z):
        d = z - float(self.x0)
        if self.is_linear:
            return d
        return d * d + float(self.y0) ** 2

    def to_json(self, power: int) -> dict:
        if self.is_linear:
            return {"type": "real_root", "r": float(self.x0), "power": power}
        return {"type": "sphere", "x0": float(self.x0), "y0": float(self.y0), "power": power}


# --- real polynomial helpers (ascending coefficient lists) -------------------


def _rmul(p, q):
    out = [0 * p[0]] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def _rpow(p, n: int):
    out = [1]
    for _ in range(n):
        out = _rmul(out, p)
    return out


def _mul_num_real(N: StarPoly, p) -> StarPoly:
    """Numerator times a real polynomial (central, so order is immaterial)."""
    a = N.coeffs
    exact = a.dtype == object or any(isinstance(v, Fraction) for v in p)
    if not exact:
        cols = [np.convolve(a[:, c].astype(float), np.asarray(p, dtype=float)) for c in range(4)]
        return StarPoly(np.stack(cols, axis=1))
    n = a.shape[0] + len(p) - 1
    out = np.empty((n, 4), dtype=object)
    out.fill(0)
    for i in range(a.shape[0]):
        for j, b in enumerate(p):
            if b == 0:
                continue
            out[i + j] = out[i + j] + a[i] * b
    return StarPoly(out, exact=True)


def _divide_num_real(N: StarPoly, p, rtol: float = 1e-11):
    """Exact division of ``N`` by the monic real polynomial ``p``, or ``None``."""
    a = [row.copy() for row in N.coeffs]
    dp = len(p) - 1
    if len(a) - 1 < dp:
        return None
    exact = N.exact
    quot = [None] * (len(a) - dp)
    for i in range(len(a) - 1 - dp, -1, -1):
        c = a[i + dp]
        quot[i] = c
        for j in range(dp + 1):
            a[i + j] = a[i + j] - c * p[j]
    rem = a[:dp]
    if exact:
        if any(any(v != 0 for v in row) for row in rem):
            return None
    else:
        scale = max(float(np.max(np.abs(N.coeffs.astype(float)))), 1e-300)
        if any(float(np.max(np.abs(np.asarray(row, dtype=float)))) > rtol * scale for row in rem):
            return None
    arr = np.array(quot, dtype=object if exact else float).reshape(len(quot), 4)
    return StarPoly(arr, exact=exact)




class SemiRational:
    """Exact or floating semiregular rational function ``d(q)^{-1} N(q)``.

    Parameters
    ----------
    numerator : StarPoly or sequence
        Numerator, centered at 0.
    denominator : dict, optional
        ``{Factor: power}``; empty means a polynomial.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator, denominator: Optional[Dict[Factor, int]] = None, canonical: bool = True):
        if not isinstance(numerator, StarPoly):
            numerator = StarPoly(numerator)
        if numerator.center != 0:
            from .starpoly import recenter

            numerator = recenter(numerator, Quaternion(0))
        den = {}
        for fac, p in (denominator or {}).items():
            if p < 0:
                raise FactorizationError("negative powers belong in the numerator")
            if p:
                if not fac.is_linear and fac.y0 < 0:
                    fac = Factor(fac.x0, -fac.y0)
                den[fac] = den.get(fac, 0) + p
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "denominator", den)
        if canonical:
            self._canonicalize()

    def __setattr__(self, name, value):
        raise AttributeError("SemiRational is immutable")

    def _canonicalize(self):
        N = self.numerator
        den = dict(self.denominator)
        if N.is_zero():
            den = {}
        for fac in sorted(den, key=_factor_key):
            p = den[fac]
            poly = fac.coefficients()
            while p > 0:
                q = _divide_num_real(N, poly)
                if q is None:
                    break
                N, p = q, p - 1
            den[fac] = p
        object.__setattr__(self, "numerator", N)
        object.__setattr__(self, "denominator", {f: p for f, p in den.items() if p > 0})

    # construction
    @classmethod
    def polynomial(cls, coeffs, exact=None) -> "SemiRational":
        return cls(StarPoly(coeffs, exact=exact))

    @classmethod
    def from_sphere_power(cls, sphere: Sphere2, k: int, numerator=None) -> "SemiRational":
        """``((q - x0)^2 + y0^2)^{-k} N(q)``; real points give ``(q - x0)^{-2k}``."""
        N = numerator if numerator is not None else StarPoly([1])
        return cls(N, _sphere_factor(sphere, k))

    @property
    def exact(self) -> bool:
        return self.numerator.exact

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def denominator_coefficients(self):
        """Expanded monic real denominator, ascending."""
        out = [1]
        for fac, p in sorted(self.denominator.items(), key=lambda kv: _factor_key(kv[0])):
            out = _rmul(out, _rpow(fac.coefficients(), p))
        return out

    @property
    def denominator_degree(self) -> int:
        return sum((1 if f.is_linear else 2) * p for f, p in self.denominator.items())

    def poles(self) -> list:
        """Pole spheres (real points as ``y0 == 0``)."""
        return sorted({f.sphere for f in self.denominator}, key=lambda s: (s.modulus, float(s.x0), float(s.y0)))

    def singularities(self, bound: float = math.inf) -> list:
        return [s for s in self.poles() if s.modulus <= bound]

    def min_pole_modulus(self) -> float:
        return min((f.modulus for f in self.denominator), default=math.inf)

    # arithmetic
    def _common(self, other: "SemiRational"):
        den = dict(self.denominator)
        for f, p in other.denominator.items():
            den[f] = max(den.get(f, 0), p)
        a = self.numerator
        for f, p in den.items():
            extra = p - self.denominator.get(f, 0)
            if extra:
                a = _mul_num_real(a, _rpow(f.coefficients(), extra))
        b = other.numerator
        for f, p in den.items():
            extra = p - other.denominator.get(f, 0)
            if extra:
                b = _mul_num_real(b, _rpow(f.coefficients(), extra))
        return a, b, den

    def __add__(self, other):
        other = _coerce_rational(other)
        a, b, den = self._common(other)
        return SemiRational(a + b, den)

    __radd__ = __add__

    def __neg__(self):
        return SemiRational(-self.numerator, self.denominator, canonical=False)

    def __sub__(self, other):
        return self + (-_coerce_rational(other))

    def __rsub__(self, other):
        return _coerce_rational(other) - self

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return SemiRational(self.numerator * other, self.denominator)
        other = _coerce_rational(other)
        den = dict(self.denominator)
        for f, p in other.denominator.items():
            den[f] = den.get(f, 0) + p
        return SemiRational(
            self.numerator * other.numerator if not other.numerator.is_zero() else other.numerator,
            den,
        )

    def __rmul__(self, other):
        if isinstance(other, Quaternion):
            return SemiRational(other * self.numerator, self.denominator)
        return _coerce_rational(other) * self

    def __eq__(self, other):
        if not isinstance(other, SemiRational):
            return NotImplemented
        return self.numerator == other.numerator and self.denominator == other.denominator

    __hash__ = None

    # evaluation
    def denominator_value(self, q: Quaternion) -> Quaternion:
        acc = Quaternion(1.0)
        for f, p in self.denominator.items():
            acc = acc * f.value(q) ** p
        return acc

    def _check_pole(self, q: Quaternion, tol: float):
        for f in self.denominator:
            if f.sphere.distance(q) <= tol * max(1.0, f.modulus):
                raise PoleError(f"point {q} lies on the pole sphere {f.sphere}", f.sphere)

    def __call__(self, q, pole_tol: float = 1e-13) -> Quaternion:
        q = Quaternion.coerce(q)
        self._check_pole(q, pole_tol)
        num = self.numerator(q)
        if not self.denominator:
            return num
        return self.denominator_value(q).inverse() * num

    def evaluate_on_slice(self, I, zs) -> np.ndarray:
        """Vectorised values at ``Re z + Im z I``; shape ``zs.shape + (4,)``."""
        zs = np.asarray(zs, dtype=complex)
        vals = evaluate_on_slice(self.numerator, I, zs)
        if not self.denominator:
            return vals
        d = np.ones_like(zs)
        for f, p in self.denominator.items():
            d = d * f.value_complex(zs) ** p
        frame = slice_frame(I)
        alpha, beta = split_on_slice(vals, frame)
        with np.errstate(divide="ignore", invalid="ignore"):
            return join_on_slice(alpha / d, beta / d, frame)

    def __repr__(self):
        den = " ".join(
            f"[{f.to_json(p)}]" for f, p in sorted(self.denominator.items(), key=lambda kv: _factor_key(kv[0]))
        )
        return f"SemiRational(num={self.numerator!r}, den={den or '1'})"

    # serialization
    def to_json(self) -> dict:
        return {
            "num": self.numerator.to_json(),
            "den": [
                f.to_json(p)
                for f, p in sorted(self.denominator.items(), key=lambda kv: _factor_key(kv[0]))
            ],
        }

    @classmethod
    def from_json(cls, data) -> "SemiRational":
        if isinstance(data, str):
            data = json.loads(data)
        num = StarPoly.from_json(data["num"])
        den: Dict[Factor, int] = {}
        for item in data.get("den", []):
            kind = item.get("type")
            power = int(item.get("power", 1))
            if kind == "sphere":
                y0 = float(item["y0"])
                if y0 == 0:
                    fac, power = Factor(float(item["x0"])), 2 * power
                else:
                    fac = Factor(float(item["x0"]), y0)
            elif kind == "real_root":
                fac = Factor(float(item["r"]))
            else:
                raise FactorizationError(
                    f"denominator entries must be factored ('sphere' or 'real_root'), got {item!r}"
                )
            den[fac] = den.get(fac, 0) + power
        return cls(num, den)


def _factor_key(f: Factor):
    return (float(f.x0), float(f.y0))


def _sphere_factor(sphere: Sphere2, k: int) -> Dict[Factor, int]:
    if k == 0:
        return {}
    if sphere.y0 == 0:
        return {Factor(sphere.x0): 2 * k}
    return {Factor(sphere.x0, sphere.y0): k}


def _coerce_rational(x) -> SemiRational:
    if isinstance(x, SemiRational):
        return x
    if isinstance(x, StarPoly):
        return SemiRational(x)
    return SemiRational(StarPoly([Quaternion.coerce(x)]))


# --- principal parts ----------------------------------------------------------


@dataclass(frozen=True)
class PrincipalPart:
    """``sum_{n=1}^k ((q - x0)^2 + y0^2)^{-n} [A_{2n} + (q - q0) A_{2n+1}]``.

    ``pairs[n - 1] == (A_{2n}, A_{2n+1})`` and ``q0 = x0 + y0 * unit``.
    Trailing zero pairs are dropped so ``k`` is the true order.
    """

    sphere: Sphere2
    pairs: Tuple[Tuple[Quaternion, Quaternion], ...] = ()
    unit: Quaternion = UNIT_I

    def __post_init__(self):
        pairs = [(Quaternion.coerce(a), Quaternion.coerce(b)) for a, b in self.pairs]
        while pairs and pairs[-1][0] == 0 and pairs[-1][1] == 0:
            pairs.pop()
        object.__setattr__(self, "pairs", tuple(pairs))
        if not isinstance(self.unit, Quaternion):
            object.__setattr__(self, "unit", ImaginaryUnit(*self.unit))

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def q0(self) -> Quaternion:
        return Quaternion(self.sphere.x0) + self.unit * self.sphere.y0

    def coefficient(self, j: int) -> Quaternion:
        """``A_j`` for ``2 <= j <= 2k + 1``."""
        n, odd = divmod(j, 2)
        return self.pairs[n - 1][odd]

    def __call__(self, q) -> Quaternion:
        q = Quaternion.coerce(q)
        w = self.sphere.characteristic(q)
        if abs(w) == 0:
            raise PoleError(f"point {q} lies on the pole sphere {self.sphere}", self.sphere)
        winv = w.inverse()
        acc = Quaternion(0.0)
        wp = Quaternion(1.0)
        for a, b in self.pairs:
            wp = wp * winv
            acc = acc + wp * (a + (q - self.q0) * b)
        return acc

    def exceptional_point(self, tol: float = 1e-9) -> Optional[Quaternion]:
        """Heuristic locus of lesser spherical order: the zero of the top pair on the sphere."""
        if not self.pairs:
            return None
        a, b = self.pairs[-1]
        if abs(b) == 0:
            return None
        q = self.q0 - a * b.inverse()
        return q if self.sphere.distance(q) <= tol * max(1.0, self.sphere.modulus) else None

    def to_json(self) -> dict:
        return {
            "x0": float(self.sphere.x0),
            "y0": float(self.sphere.y0),
            "k": self.k,
            "A": [c.to_list() for pair in self.pairs for c in pair],
            "q0_unit": self.unit.to_list()[1:],
        }

    @classmethod
    def from_json(cls, data) -> "PrincipalPart":
        A = [Quaternion.from_iter(float(v) for v in c) for c in data.get("A", [])]
        k = int(data.get("k", len(A) // 2))
        if len(A) != 2 * k:
            raise ValueError(f"principal part of order {k} needs {2 * k} coefficients, got {len(A)}")
        unit = data.get("q0_unit", [1.0, 0.0, 0.0])
        return cls(
            Sphere2(float(data["x0"]), float(data["y0"])),
            tuple((A[2 * n], A[2 * n + 1]) for n in range(k)),
            ImaginaryUnit(*map(float, unit)),
        )


def principal_to_rational(P: PrincipalPart) -> SemiRational:
    """Exact :class:`SemiRational` equal to ``P``, denominator ``((q-x0)^2+y0^2)^k``."""
    if P.k == 0:
        return SemiRational(StarPoly([0]))
    sphere = P.sphere
    exact = all(
        isinstance(v, (int, Fraction))
        for pair in P.pairs
        for c in pair
        for v in c.components
    ) and all(isinstance(v, (int, Fraction)) for v in (sphere.x0, sphere.y0))
    exact = exact and all(isinstance(v, (int, Fraction)) for v in P.unit.components)
    char = Factor(sphere.x0, sphere.y0).coefficients() if sphere.y0 else _rpow([-sphere.x0, 1], 2)
    q0 = P.q0
    N = StarPoly([0], exact=exact)
    for n, (a, b) in enumerate(P.pairs, start=1):
        lin = StarPoly([a - q0 * b, b], exact=exact)
        N = N + _mul_num_real(lin, _rpow(char, P.k - n))
    return SemiRational(N, _sphere_factor(sphere, P.k))


def pole_extract(f: SemiRational, sphere: Sphere2):
    """Write ``f = ((q - x0)^2 + y0^2)^{-k} g`` with ``g`` regular at the sphere.

    Returns ``(k, g)``; ``k == 0`` when the sphere is not a pole.
    """
    den = dict(f.denominator)
    if sphere.y0 == 0:
        fac = Factor(sphere.x0)
        p = den.pop(fac, 0)
        k = (p + 1) // 2
        N = f.numerator
        if 2 * k - p:
            N = _mul_num_real(N, [-fac.x0, 1])
        return k, SemiRational(N, den)
    fac = Factor(sphere.x0, sphere.y0)
    k = den.pop(fac, 0)
    return k, SemiRational(f.numerator, den)


# --- certified Taylor truncation ----------------------------------------------


def taylor_coefficients(f: SemiRational, count: int, radius: float) -> np.ndarray:
    """Scaled Taylor coefficients ``a_m * radius**m`` for ``m < count``.

    Computed in the scaled variable ``t = q / radius`` so that high orders
    neither overflow nor underflow.
    """
    rho = float(radius)
    num = f.numerator.coeffs.astype(float)
    scale = rho ** np.arange(num.shape[0])
    num = num * scale[:, None]
    series = np.zeros(count, dtype=complex)
    series[0] = 1.0
    m = np.arange(count)
    for fac, p in f.denominator.items():
        for z in fac.roots():
            w = rho / z
            # 1/(q - z) = -sum q^m z^{-m-1}
            geo = -(w**m) / z
            for _ in range(p):
                series = np.convolve(series, geo)[:count]
    inv = series.real
    out = np.zeros((count, 4))
    for c in range(4):
        out[:, c] = np.convolve(num[:, c], inv)[:count]
    return out


def _majorant_remainder(f: SemiRational, M: int, radius: float) -> float:
    """Bound on ``sum_{m > M} |a_m| radius^m`` from the Cauchy estimate of a majorant.

    With roots ``z_j`` of the denominator, ``sum |n_k| t^k * prod 1/(|z_j|/radius - t)``
    dominates the scaled Taylor series coefficientwise; its coefficients
    are at most ``C(s) / s^m`` for ``1 < s < min |z_j| / radius``.
    """
    rho = float(radius)
    mods = [abs(z) / rho for fac, p in f.denominator.items() for z in fac.roots() for _ in range(p)]
    num = np.abs(f.numerator.coeffs.astype(float))
    num_abs = np.sqrt((num**2).sum(axis=1)) * rho ** np.arange(num.shape[0])
    if not mods:
        return 0.0 if M >= num_abs.shape[0] - 1 else float(num_abs[M + 1 :].sum())
    smin = min(mods)
    best = math.inf
    for frac in np.linspace(0.02, 0.98, 49):
        s = 1.0 + frac * (smin - 1.0)
        log_c = math.log(max(np.polyval(num_abs[::-1], s), 1e-300))
        log_c -= sum(math.log(mu - s) for mu in mods)
        log_tail = log_c - (M + 1) * math.log(s) - math.log1p(-1.0 / s)
        best = min(best, log_tail)
    return math.exp(best) if best > -700 else 0.0


def _polyval_ascending(c: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """``sum_m c_m t^m``; a power table beats Horner's Python loop for few points."""
    flat = ts.reshape(-1)
    if flat.size * len(c) > 2_000_000 or len(c) < 2:
        return np.polyval(c[::-1], ts)
    powers = np.empty((flat.size, len(c)), dtype=complex)
    powers[:, 0] = 1.0
    powers[:, 1:] = flat[:, None]
    np.cumprod(powers[:, 1:], axis=1, out=powers[:, 1:])
    return (powers @ c).reshape(ts.shape)


@dataclass(frozen=True)
class TruncatedSeries:
    """Taylor polynomial of order ``order`` at 0, certified on ``|q| <= radius``.

    ``scaled`` holds ``a_m * radius**m``; ``tail_bound`` bounds the sup of
    ``|f - self|`` over the closed ball.
    """

    scaled: np.ndarray
    radius: float
    order: int
    tail_bound: float

    @property
    def poly(self) -> StarPoly:
        """Unscaled polynomial (tiny coefficients may underflow at very high order)."""
        m = np.arange(self.scaled.shape[0])
        return StarPoly(self.scaled * (self.radius ** (-m.astype(float)))[:, None])

    @property
    def degree(self) -> int:
        return self.order

    def __call__(self, q) -> Quaternion:
        q = Quaternion.coerce(q)
        if self.order > 8:
            x, y, I = decompose(q.to_float())
            v = self.evaluate_on_slice(I if I is not None else UNIT_I, np.array([complex(x, y)]))[0]
            return Quaternion(*(float(c) for c in v))
        t = q * (1.0 / self.radius)
        acc = Quaternion.from_iter(self.scaled[-1])
        for row in self.scaled[-2::-1]:
            acc = t * acc + Quaternion.from_iter(row)
        return acc

    def evaluate_on_slice(self, I, zs) -> np.ndarray:
        frame = slice_frame(I)
        alpha, beta = split_on_slice(self.scaled, frame)
        ts = np.asarray(zs, dtype=complex) / self.radius
        return join_on_slice(_polyval_ascending(alpha, ts), _polyval_ascending(beta, ts), frame)

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "order": self.order,
            "tail_bound": self.tail_bound,
            "scaled": [[float(v).hex() for v in row] for row in self.scaled],
        }

    @classmethod
    def from_json(cls, data) -> "TruncatedSeries":
        arr = np.array([[float.fromhex(v) for v in row] for row in data["scaled"]], dtype=float)
        return cls(arr.reshape(-1, 4), float(data["radius"]), int(data["order"]), float(data["tail_bound"]))


_EPS = np.finfo(float).eps


def taylor_truncate(
    f: SemiRational,
    order: int,
    radius: float,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> TruncatedSeries:
    """Taylor polynomial of ``f`` at 0 with a certified sup-norm error on the closed ball.

    The bound adds the exact moduli ``|a_m| radius^m`` for ``order < m <= M``
    to a majorant estimate of everything beyond ``M``, plus a rounding
    allowance.

    Raises
    ------
    PoleError
        A pole sphere meets the closed ball.
    DegreeCapError
        ``order`` exceeds ``degree_cap``.
    """
    if order > degree_cap:
        raise DegreeCapError(f"Taylor order {order} exceeds cap {degree_cap}")
    if order < 0:
        raise ValueError("order must be non-negative")
    radius = float(radius)
    for fac in f.denominator:
        if fac.modulus <= radius:
            raise PoleError(
                f"pole sphere {fac.sphere} meets the closed ball of radius {radius}", fac.sphere
            )
    if not f.denominator and f.numerator.degree <= order:
        coeffs = f.numerator.coeffs.astype(float) * (radius ** np.arange(len(f.numerator)))[:, None]
        return TruncatedSeries(coeffs, radius, order, 0.0)

    extra = max(order, 64)
    while True:
        M = order + extra
        b = taylor_coefficients(f, M + 1, radius)
        mods = np.sqrt((b**2).sum(axis=1))
        middle = float(mods[order + 1 :].sum())
        rest = _majorant_remainder(f, M, radius)
        if rest <= max(1e-3 * middle, 1e-300) or extra >= 8 * max(order, 64):
            break
        extra *= 2
    rounding = 8 * _EPS * (order + 1) * float(mods.sum())
    bound = (middle + rest) * (1 + 1e-12) + rounding
    return TruncatedSeries(b[: order + 1].copy(), radius, order, bound)


def minimal_truncation(
    f: SemiRational,
    radius: float,
    target: float,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> Optional[TruncatedSeries]:
    """Lowest-order Taylor polynomial of ``f`` with certified error below ``target``.

    The certificate has the same three parts as in :func:`taylor_truncate`.
    Returns ``None`` when no order up to ``degree_cap`` reaches the target.
    """
    radius = float(radius)
    for fac in f.denominator:
        if fac.modulus <= radius:
            raise PoleError(
                f"pole sphere {fac.sphere} meets the closed ball of radius {radius}", fac.sphere
            )
    if not f.denominator and f.numerator.degree <= degree_cap:
        return taylor_truncate(f, max(f.numerator.degree, 0), radius, degree_cap)
    cap = min(64, degree_cap)
    while True:
        found = _minimal_below(f, radius, target, cap)
        if found is not None or cap >= degree_cap:
            return found
        cap = min(2 * cap, degree_cap)


def _minimal_below(f: SemiRational, radius: float, target: float, cap: int):
    extra = max(cap, 64)
    while True:
        M = cap + extra
        b = taylor_coefficients(f, M + 1, radius)
        mods = np.sqrt((b**2).sum(axis=1))
        rest = _majorant_remainder(f, M, radius)
        if rest <= max(1e-3 * target, 1e-300) or extra >= 8 * max(cap, 64):
            break
        extra *= 2
    orders = np.arange(cap + 1)
    # tails[o] = sum_{o < m <= M} |b_m|
    tails = np.cumsum(mods[::-1])[::-1][1 : cap + 2]
    rounding = 8 * _EPS * (orders + 1) * float(mods.sum())
    bounds = (tails + rest) * (1 + 1e-12) + rounding
    ok = np.nonzero(bounds < target)[0]
    if not len(ok):
        return None
    order = int(ok[0])
    return TruncatedSeries(b[: order + 1].copy(), radius, order, float(bounds[order]))
