"""Polynomials with right quaternion coefficients under the *-product.

A :class:`StarPoly` stores ``f(q) = sum_n (q - c)^{*n} a_n`` as an
``(N + 1, 4)`` coefficient array. Float arrays give double precision;
``object`` arrays holding ``int``/``Fraction`` entries give exact
arithmetic through the same code paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np

from .errors import CenterMismatchError, DegreeCapError, OffSliceError
from .quaternion import (
    Quaternion,
    qmul_array,
    same_slice,
    slice_frame,
    split_on_slice,
    join_on_slice,
)

__all__ = [
    "StarPoly",
    "LaurentCoeffs",
    "star_mul",
    "star_pow",
    "star_divide_linear",
    "recenter",
    "evaluate",
    "DEFAULT_DEGREE_CAP",
]

DEFAULT_DEGREE_CAP = 512


def _as_coeff_array(coeffs, exact: bool) -> np.ndarray:
    rows = []
    for c in coeffs:
        if isinstance(c, Quaternion):
            rows.append(list(c.components))
        elif np.ndim(c) == 0:
            rows.append([c, 0, 0, 0])
        else:
            rows.append(list(c))
    if exact:
        arr = np.empty((len(rows), 4), dtype=object)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                arr[i, j] = v if isinstance(v, (int, Fraction)) else Fraction(v)
        return arr
    return np.array(rows, dtype=float).reshape(len(rows), 4)


def _contains_fraction(coeffs) -> bool:
    for c in coeffs:
        values = c.components if isinstance(c, Quaternion) else np.ravel(c).tolist()
        if any(isinstance(v, Fraction) for v in values):
            return True
    return False


def _trim(arr: np.ndarray) -> np.ndarray:
    n = arr.shape[0]
    while n > 1 and not any(arr[n - 1]):
        n -= 1
    return arr[:n]


def _zero_rows(n: int) -> np.ndarray:
    arr = np.empty((n, 4), dtype=object)
    arr.fill(0)
    return arr


class StarPoly:
    """Polynomial ``sum_n (q - center)^{*n} a_n`` with coefficients on the right.

    Parameters
    ----------
    coeffs : sequence
        ``a_0 .. a_N`` as quaternions, 4-sequences or real scalars.
    center : Quaternion, optional
        Expansion point, default 0.
    exact : bool, optional
        Store coefficients as ``Fraction`` objects.
    """

    __slots__ = ("coeffs", "center")

    def __init__(self, coeffs, center=None, exact: Optional[bool] = None):
        if isinstance(coeffs, np.ndarray) and coeffs.ndim == 2 and coeffs.shape[1] == 4:
            arr = coeffs.copy()
            if exact and arr.dtype != object:
                arr = _as_coeff_array(arr.tolist(), True)
        else:
            coeffs = list(coeffs) if not isinstance(coeffs, list) else coeffs
            if not coeffs:
                coeffs = [0]
            if exact is None:
                exact = _contains_fraction(coeffs)
            arr = _as_coeff_array(coeffs, bool(exact))
        object.__setattr__(self, "coeffs", _trim(arr))
        object.__setattr__(
            self, "center", Quaternion(0) if center is None else Quaternion.coerce(center)
        )

    def __setattr__(self, name, value):
        raise AttributeError("StarPoly is immutable")

    # construction helpers
    @classmethod
    def constant(cls, a, center=None, exact=None) -> "StarPoly":
        return cls([a], center=center, exact=exact)

    @classmethod
    def monomial(cls, n: int, a=1, center=None, exact=None) -> "StarPoly":
        return cls([0] * n + [a], center=center, exact=exact)

    @classmethod
    def linear(cls, q0, exact=None) -> "StarPoly":
        """``q - q0`` expanded at 0."""
        q0 = Quaternion.coerce(q0)
        return cls([-q0, 1], exact=exact)

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    @property
    def degree(self) -> int:
        if self.is_zero():
            return -1
        return self.coeffs.shape[0] - 1

    def is_zero(self) -> bool:
        return self.coeffs.shape[0] == 1 and not any(self.coeffs[0])

    def coefficient(self, n: int) -> Quaternion:
        if 0 <= n < self.coeffs.shape[0]:
            return Quaternion.from_iter(self.coeffs[n])
        return Quaternion(0)

    def __len__(self):
        return self.coeffs.shape[0]

    def __iter__(self):
        return (Quaternion.from_iter(r) for r in self.coeffs)

    def to_float(self) -> "StarPoly":
        return StarPoly(self.coeffs.astype(float), center=self.center.to_float())

    def to_exact(self) -> "StarPoly":
        return StarPoly(self.coeffs, center=self.center, exact=True)

    def has_real_coefficients(self) -> bool:
        return not any(v for v in self.coeffs[:, 1:].ravel())

    # linear structure
    def _check_center(self, other: "StarPoly"):
        if self.center != other.center:
            raise CenterMismatchError(
                f"centers differ ({self.center} vs {other.center}); recenter first"
            )

    def _binary(self, other, op):
        if not isinstance(other, StarPoly):
            other = StarPoly.constant(Quaternion.coerce(other), center=self.center)
        self._check_center(other)
        n = max(len(self), len(other))
        a, b = _pad(self.coeffs, n, other.exact), _pad(other.coeffs, n, self.exact)
        return StarPoly(op(a, b), center=self.center)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return StarPoly(-self.coeffs, center=self.center)

    def __mul__(self, other):
        if isinstance(other, StarPoly):
            return star_mul(self, other)
        if isinstance(other, Quaternion):
            c = np.array(other.components, dtype=self.coeffs.dtype)
            return StarPoly(qmul_array(self.coeffs, c[None, :]), center=self.center)
        return StarPoly(self.coeffs * other, center=self.center)

    def __rmul__(self, other):
        if isinstance(other, Quaternion):
            c = np.array(other.components, dtype=self.coeffs.dtype)
            return StarPoly(qmul_array(c[None, :], self.coeffs), center=self.center)
        return StarPoly(self.coeffs * other, center=self.center)

    def __eq__(self, other):
        if not isinstance(other, StarPoly):
            return NotImplemented
        return (
            self.center == other.center
            and self.coeffs.shape == other.coeffs.shape
            and bool(np.all(self.coeffs == other.coeffs))
        )

    __hash__ = None

    def allclose(self, other: "StarPoly", tol: float = 1e-12) -> bool:
        n = max(len(self), len(other))
        a = _pad(self.coeffs, n).astype(float)
        b = _pad(other.coeffs, n).astype(float)
        return bool(np.max(np.abs(a - b)) <= tol) and abs(self.center - other.center) <= tol

    def singularities(self, bound: float = math.inf) -> list:
        """Polynomials have no poles."""
        return []

    def evaluate_on_slice(self, I, zs) -> np.ndarray:
        return evaluate_on_slice(self, I, zs)

    def __call__(self, q):
        return evaluate(self, q)

    def __repr__(self):
        return f"StarPoly({[str(c) for c in self]}, center={self.center})"

    # serialization
    def to_json(self) -> dict:
        return {
            "center": self.center.to_list(),
            "coeffs": [[float(v) for v in row] for row in self.coeffs],
        }

    @classmethod
    def from_json(cls, data) -> "StarPoly":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            [list(map(float, row)) for row in data["coeffs"]],
            center=Quaternion.from_iter(float(v) for v in data.get("center", [0, 0, 0, 0])),
        )


def _pad(arr: np.ndarray, n: int, as_object: bool = False) -> np.ndarray:
    dtype = object if (arr.dtype == object or as_object) else arr.dtype
    out = _zero_rows(n) if dtype == object else np.zeros((n, 4), dtype=dtype)
    out[: arr.shape[0]] = arr
    return out


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na, nb = a.shape[0], b.shape[0]
    table = qmul_array(a[:, None, :], b[None, :, :])
    out = _zero_rows(na + nb - 1) if table.dtype == object else np.zeros((na + nb - 1, 4))
    for i in range(na):
        out[i : i + nb] += table[i]
    return out


def star_mul(f: StarPoly, g: StarPoly, degree_cap: int = DEFAULT_DEGREE_CAP) -> StarPoly:
    """*-product: coefficient convolution ``c_n = sum_k a_k b_{n-k}``."""
    f._check_center(g)
    if f.is_zero() or g.is_zero():
        return StarPoly([0], center=f.center, exact=f.exact and g.exact)
    if f.degree + g.degree > degree_cap:
        raise DegreeCapError(f"product degree {f.degree + g.degree} exceeds cap {degree_cap}")
    a, b = f.coeffs, g.coeffs
    if a.dtype != b.dtype:
        a, b = a.astype(object), b.astype(object)
    return StarPoly(_convolve(a, b), center=f.center)


def star_pow(q0, n: int, exact: Optional[bool] = None, degree_cap: int = DEFAULT_DEGREE_CAP) -> StarPoly:
    """``(q - q0)^{*n}`` expanded at 0, i.e. ``sum_j C(n, j) q^j (-q0)^{n-j}``."""
    if n < 0:
        raise ValueError("negative *-powers are not polynomials")
    if n > degree_cap:
        raise DegreeCapError(f"degree {n} exceeds cap {degree_cap}")
    q0 = Quaternion.coerce(q0)
    if exact is None:
        exact = all(isinstance(v, (int, Fraction)) for v in q0.components)
    neg = -q0
    powers = [Quaternion(1)]
    for _ in range(n):
        powers.append(powers[-1] * neg)
    coeffs = [powers[n - j] * comb(n, j) for j in range(n + 1)]
    return StarPoly(coeffs, exact=exact)


def _horner(coeffs: np.ndarray, q: Quaternion) -> Quaternion:
    acc = Quaternion.from_iter(coeffs[-1])
    for row in coeffs[-2::-1]:
        acc = q * acc + Quaternion.from_iter(row)
    return acc


def evaluate(f: StarPoly, q) -> Quaternion:
    """Value of ``f`` at ``q``: Horner on ``sum q^n a_n`` after recentering to 0.

    Points on the slice of the center skip the recentering.
    """
    q = Quaternion.coerce(q)
    if f.center != 0 and same_slice(q, f.center):
        # q and the center commute, so (q - c)^{*n} is the plain power
        return _horner(f.coeffs, q - f.center)
    g = f if f.center == 0 else recenter(f, Quaternion(0 * f.center.real))
    return _horner(g.coeffs, q)


def evaluate_on_slice(f: StarPoly, I, zs) -> np.ndarray:
    """Vectorised values of ``f`` at ``Re z + Im z I`` for complex ``zs``.

    Returns an array of shape ``zs.shape + (4,)``.
    """
    g = f if f.center == 0 else recenter(f, Quaternion(0.0))
    frame = slice_frame(I)
    alpha, beta = split_on_slice(g.coeffs.astype(float), frame)
    zs = np.asarray(zs, dtype=complex)
    return join_on_slice(np.polyval(alpha[::-1], zs), np.polyval(beta[::-1], zs), frame)


def star_divide_linear(f: StarPoly, q0):
    """Synthetic division ``f = r + (q - q0) * g``.

    Returns ``(g, r)`` with ``r = f(q0)``; ``f`` must be centered at 0.
    """
    if f.center != 0:
        raise CenterMismatchError("star_divide_linear expects a polynomial centered at 0")
    q0 = Quaternion.coerce(q0)
    rows = [Quaternion.from_iter(r) for r in f.coeffs]
    if len(rows) == 1:
        return StarPoly([0], exact=f.exact), rows[0]
    # f_n = b_{n-1} - q0 b_n
    b = [None] * (len(rows) - 1)
    b[-1] = rows[-1]
    for n in range(len(rows) - 2, 0, -1):
        b[n - 1] = rows[n] + q0 * b[n]
    remainder = rows[0] + q0 * b[0]
    return StarPoly(b, exact=f.exact), remainder


def recenter(f: StarPoly, new_center) -> StarPoly:
    """Re-expand ``f`` in *-powers of ``q - new_center``.

    The two centers must lie on a common slice (or one be real) so that
    their difference commutes with ``q - new_center`` and the binomial
    re-expansion applies.
    """
    new_center = Quaternion.coerce(new_center)
    if new_center == f.center:
        return f
    if not same_slice(new_center, f.center):
        raise OffSliceError(
            f"centers {f.center} and {new_center} lie on different slices"
        )
    d = new_center - f.center
    a = [Quaternion.from_iter(r) for r in f.coeffs]
    N = len(a) - 1
    dpow = [Quaternion(1)]
    for _ in range(N):
        dpow.append(dpow[-1] * d)
    out = []
    for m in range(N + 1):
        acc = Quaternion(0)
        for n in range(m, N + 1):
            acc = acc + dpow[n - m] * a[n] * comb(n, m)
        out.append(acc)
    exact = f.exact and all(isinstance(v, (int, Fraction)) for v in d.components)
    return StarPoly(out, center=new_center, exact=exact)


@dataclass(frozen=True)
class LaurentCoeffs:
    """Slice Laurent coefficients ``a_n``, ``n_min <= n <= n_max``, around ``center``.

    Values are only defined on the slice through ``center``, where the
    *-powers act pointwise.
    """

    coeffs: tuple
    n_min: int
    center: Quaternion

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Quaternion:
        i = n - self.n_min
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Quaternion(0.0)

    @property
    def pole_order(self) -> int:
        """Largest ``m`` with ``a_{-m}`` numerically nonzero (0 if none)."""
        scale = max((abs(c) for c in self.coeffs), default=0.0) or 1.0
        order = 0
        for n in range(self.n_min, 0):
            if abs(self[n]) > 1e-9 * scale:
                order = max(order, -n)
        return order

    def __call__(self, q) -> Quaternion:
        q = Quaternion.coerce(q)
        if not same_slice(q, self.center):
            raise OffSliceError("negative *-powers are only evaluated on the slice of the center")
        d = q - self.center
        acc = Quaternion(0.0)
        for n in range(self.n_min, self.n_max + 1):
            acc = acc + (d**n) * self[n]
        return acc
