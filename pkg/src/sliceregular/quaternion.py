"""Quaternion arithmetic, imaginary units, spheres and the sigma distance.

Components may be any real number type that supports the field
operations (``float``, ``int``, ``fractions.Fraction``, ``mpmath.mpf``);
the arithmetic never coerces, so exact inputs give exact results.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "Quaternion",
    "ImaginaryUnit",
    "Sphere2",
    "SigmaBall",
    "SymmetricShell",
    "quat_mul",
    "decompose",
    "same_slice",
    "sigma",
    "sigma_array",
    "omega",
    "in_sigma_ball",
    "in_shell",
    "slice_frame",
    "parse_quaternion",
    "format_quaternion",
    "PARALLEL_TOL",
    "REAL_TOL",
    "UNIT_I",
    "UNIT_J",
    "UNIT_K",
    "qmul_array",
    "split_on_slice",
    "join_on_slice",
    "slice_point",
]

#: Two imaginary directions count as parallel below this separation.
PARALLEL_TOL = 1e-12
#: Imaginary parts below this modulus count as real.
REAL_TOL = 1e-14


class Quaternion:
    """Immutable quaternion ``x0 + x1 i + x2 j + x3 k``."""

    __slots__ = ("_c",)

    def __init__(self, x0=0, x1=0, x2=0, x3=0):
        object.__setattr__(self, "_c", (x0, x1, x2, x3))

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    @classmethod
    def from_iter(cls, values: Iterable) -> "Quaternion":
        x0, x1, x2, x3 = values
        return cls(x0, x1, x2, x3)

    @classmethod
    def coerce(cls, value) -> "Quaternion":
        if isinstance(value, Quaternion):
            return value
        if isinstance(value, complex):
            return cls(value.real, value.imag)
        if isinstance(value, str):
            return parse_quaternion(value)
        if isinstance(value, (list, tuple, np.ndarray)):
            return cls.from_iter(value)
        return cls(value)

    # accessors
    x0 = property(lambda self: self._c[0])
    x1 = property(lambda self: self._c[1])
    x2 = property(lambda self: self._c[2])
    x3 = property(lambda self: self._c[3])

    @property
    def components(self) -> tuple:
        return self._c

    @property
    def real(self):
        return self._c[0]

    @property
    def imag(self) -> "Quaternion":
        return Quaternion(0 * self._c[0], *self._c[1:])

    def __iter__(self):
        return iter(self._c)

    def __getitem__(self, i):
        return self._c[i]

    def __array__(self, dtype=None, copy=None):
        return np.array(self._c, dtype=dtype if dtype is not None else float)

    # arithmetic
    def __add__(self, other):
        if isinstance(other, Quaternion):
            a, b = self._c, other._c
            return Quaternion(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])
        if _is_scalar(other):
            a = self._c
            return Quaternion(a[0] + other, a[1], a[2], a[3])
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        a = self._c
        return Quaternion(-a[0], -a[1], -a[2], -a[3])

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            a, b = self._c, other._c
            return Quaternion(a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3])
        if _is_scalar(other):
            a = self._c
            return Quaternion(a[0] - other, a[1], a[2], a[3])
        return NotImplemented

    def __rsub__(self, other):
        if _is_scalar(other):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        if _is_scalar(other):
            a = self._c
            return Quaternion(a[0] * other, a[1] * other, a[2] * other, a[3] * other)
        return NotImplemented

    def __rmul__(self, other):
        if _is_scalar(other):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Quaternion):
            return self * other.inverse()
        if _is_scalar(other):
            a = self._c
            return Quaternion(a[0] / other, a[1] / other, a[2] / other, a[3] / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_scalar(other):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            if isinstance(n, int):
                return self.inverse() ** (-n)
            return NotImplemented
        result = Quaternion(1 + 0 * self._c[0])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "Quaternion":
        a = self._c
        return Quaternion(a[0], -a[1], -a[2], -a[3])

    def norm2(self):
        a = self._c
        return a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]

    def __abs__(self) -> float:
        a = self._c
        return math.hypot(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def inverse(self) -> "Quaternion":
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("quaternion 0 has no inverse")
        return self.conjugate() / n

    # comparison
    def __eq__(self, other):
        if isinstance(other, Quaternion):
            return self._c == other._c
        if _is_scalar(other):
            return self._c == (other, 0, 0, 0)
        return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return abs(self - Quaternion.coerce(other)) <= tol

    def is_real(self, tol: float = REAL_TOL) -> bool:
        return abs(self.imag) <= tol

    def to_float(self) -> "Quaternion":
        return Quaternion(*(float(c) for c in self._c))

    def to_list(self) -> list:
        return [float(c) for c in self._c]

    def __repr__(self):
        return f"Quaternion({', '.join(repr(c) for c in self._c)})"

    def __str__(self):
        return format_quaternion(self)


def _is_scalar(x) -> bool:
    return isinstance(x, (int, float, Fraction, np.floating, np.integer)) or (
        type(x).__name__ in ("mpf",)
    )


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a b``."""
    a0, a1, a2, a3 = a._c
    b0, b1, b2, b3 = b._c
    return Quaternion(
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def qmul_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of broadcastable arrays with trailing axis of length 4."""
    a0, a1, a2, a3 = (a[..., i] for i in range(4))
    b0, b1, b2, b3 = (b[..., i] for i in range(4))
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


class ImaginaryUnit(Quaternion):
    """A point of the unit sphere of imaginary quaternions (``I**2 == -1``)."""

    __slots__ = ()

    def __init__(self, x1, x2=0.0, x3=0.0, normalize: bool = True):
        if isinstance(x1, Quaternion):
            x1, x2, x3 = x1.x1, x1.x2, x1.x3
        if normalize:
            n = math.sqrt(float(x1) ** 2 + float(x2) ** 2 + float(x3) ** 2)
            if n == 0:
                raise ValueError("zero vector has no direction")
            if n != 1:
                x1, x2, x3 = x1 / n, x2 / n, x3 / n
        super().__init__(0 * x1, x1, x2, x3)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "ImaginaryUnit":
        v = rng.normal(size=3)
        return cls(*v)

    def __neg__(self):
        return ImaginaryUnit(-self.x1, -self.x2, -self.x3, normalize=False)


UNIT_I = ImaginaryUnit(1, 0, 0, normalize=False)
UNIT_J = ImaginaryUnit(0, 1, 0, normalize=False)
UNIT_K = ImaginaryUnit(0, 0, 1, normalize=False)


def decompose(q: Quaternion):
    """Split ``q = x + y I`` with ``y = |Im q| >= 0``.

    Returns ``(x, y, I)``; ``I`` is ``None`` when ``q`` is real.
    """
    q = Quaternion.coerce(q)
    y = abs(q.imag)
    if y == 0:
        return q.real, 0.0, None
    return q.real, y, ImaginaryUnit(q.x1 / y, q.x2 / y, q.x3 / y, normalize=False)


def same_slice(q: Quaternion, p: Quaternion) -> bool:
    """Whether ``q`` and ``p`` lie on a common plane ``R + I R``.

    Real points lie on every plane. Imaginary parts shorter than
    ``REAL_TOL`` count as real; directions closer than ``PARALLEL_TOL``
    (up to sign) count as parallel.
    """
    vq = np.array(q.components[1:], dtype=float)
    vp = np.array(p.components[1:], dtype=float)
    nq, np_ = np.linalg.norm(vq), np.linalg.norm(vp)
    if nq < REAL_TOL or np_ < REAL_TOL:
        return True
    uq, up = vq / nq, vp / np_
    return bool(
        np.linalg.norm(uq - up) < PARALLEL_TOL or np.linalg.norm(uq + up) < PARALLEL_TOL
    )


def omega(q: Quaternion, p: Quaternion) -> float:
    return math.hypot(float(q.real) - float(p.real), abs(q.imag) + abs(p.imag))


def sigma(q: Quaternion, p: Quaternion) -> float:
    """Slice distance: Euclidean on a common slice, ``omega`` otherwise."""
    q, p = Quaternion.coerce(q), Quaternion.coerce(p)
    if same_slice(q, p):
        return abs(q - p)
    return omega(q, p)


def sigma_array(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """:func:`sigma` over rows of two ``(..., 4)`` arrays, with the same slice tolerances."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    vq, vp = q[..., 1:], p[..., 1:]
    nq = np.linalg.norm(vq, axis=-1)
    np_ = np.linalg.norm(vp, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        uq = vq / nq[..., None]
        up = vp / np_[..., None]
    parallel = np.minimum(np.linalg.norm(uq - up, axis=-1), np.linalg.norm(uq + up, axis=-1)) < PARALLEL_TOL
    same = (nq < REAL_TOL) | (np_ < REAL_TOL) | parallel
    euclid = np.linalg.norm(q - p, axis=-1)
    om = np.hypot(q[..., 0] - p[..., 0], nq + np_)
    return np.where(same, euclid, om)


def slice_frame(I: Quaternion):
    """Orthonormal ``(I, J, K)`` with ``J`` orthogonal to ``I`` and ``K = I J``."""
    v = np.array(I.components[1:], dtype=float)
    v = v / np.linalg.norm(v)
    trial = np.eye(3)[int(np.argmin(np.abs(v)))]
    w = trial - v * (v @ trial)
    w /= np.linalg.norm(w)
    I_ = ImaginaryUnit(*v, normalize=False)
    J = ImaginaryUnit(*w, normalize=False)
    K = I_ * J
    return I_, J, ImaginaryUnit(K.x1, K.x2, K.x3, normalize=False)


@dataclass(frozen=True)
class Sphere2:
    """The 2-sphere ``x0 + y0 S``; ``y0 == 0`` is the real point ``x0``."""

    x0: float
    y0: float = 0.0

    def __post_init__(self):
        if self.y0 < 0:
            object.__setattr__(self, "y0", -self.y0)

    @property
    def is_real(self) -> bool:
        return self.y0 == 0

    @property
    def modulus(self) -> float:
        """Common modulus ``|x0 + y0 I|`` of every point of the sphere."""
        return math.hypot(float(self.x0), float(self.y0))

    def point(self, I: Optional[Quaternion] = None) -> Quaternion:
        if I is None:
            I = UNIT_I
        return Quaternion(self.x0) + I * self.y0

    def distance(self, q: Quaternion) -> float:
        """Euclidean distance from ``q`` to the sphere."""
        q = Quaternion.coerce(q)
        return math.hypot(float(q.real) - float(self.x0), abs(q.imag) - float(self.y0))

    def contains(self, q: Quaternion, tol: float = 0.0) -> bool:
        return self.distance(q) <= tol

    def characteristic(self, q: Quaternion) -> Quaternion:
        """``(q - x0)**2 + y0**2``, the real-coefficient quadratic vanishing on the sphere."""
        d = q - self.x0
        return d * d + self.y0 * self.y0

    def to_json(self) -> list:
        return [float(self.x0), float(self.y0)]


@dataclass(frozen=True)
class SigmaBall:
    center: Quaternion
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sigma ball radius must be positive")

    def __contains__(self, q) -> bool:
        return in_sigma_ball(q, self)


@dataclass(frozen=True)
class SymmetricShell:
    """``U(x0 + y0 S, R) = {q : |(q - x0)**2 + y0**2| < R**2}``."""

    sphere: Sphere2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("shell radius must be positive")

    def __contains__(self, q) -> bool:
        return in_shell(q, self)


def in_sigma_ball(q: Quaternion, ball: SigmaBall) -> bool:
    return sigma(Quaternion.coerce(q), ball.center) < ball.radius


def in_shell(q: Quaternion, shell: SymmetricShell) -> bool:
    q = Quaternion.coerce(q)
    return abs(shell.sphere.characteristic(q)) < shell.radius**2


def parse_quaternion(text: str) -> Quaternion:
    """Parse ``"a+bi+cj+dk"`` with optional terms, or a JSON list of four numbers."""
    s = text.strip()
    if s.startswith("["):
        return Quaternion.from_iter(float(v) for v in json.loads(s))
    s = s.replace(" ", "").replace("*", "")
    if not s:
        raise ValueError("empty quaternion literal")
    comps = [0.0, 0.0, 0.0, 0.0]
    pos = 0
    index = {"": 0, "i": 1, "j": 2, "k": 3}
    pattern = re.compile(r"([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?([ijk]?)")
    while pos < len(s):
        m = pattern.match(s, pos)
        if m is None or m.end() == pos or (m.group(2) is None and not m.group(3)):
            raise ValueError(f"cannot parse quaternion literal {text!r}")
        if pos and not m.group(1):
            raise ValueError(f"missing sign between terms in {text!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        mag = float(m.group(2)) if m.group(2) is not None else 1.0
        comps[index[m.group(3)]] += sign * mag
        pos = m.end()
    return Quaternion(*comps)


def format_quaternion(q: Quaternion, digits: int = 17) -> str:
    parts = []
    for c, unit in zip(q.components, ("", "i", "j", "k")):
        c = float(c)
        if c == 0 and (unit or any(q.components[1:])):
            continue
        parts.append(f"{c:+.{digits}g}{unit}")
    text = "".join(parts)
    return text[1:] if text.startswith("+") else text


def split_on_slice(values: np.ndarray, frame) -> tuple[np.ndarray, np.ndarray]:
    """Write quaternion rows as ``alpha + beta J`` with ``alpha, beta`` in ``R + I R``.

    ``values`` has trailing axis 4; the complex arrays returned identify
    ``R + I R`` with ``C`` through ``I -> 1j``. Left multiplication by an
    element of the slice acts on ``alpha`` and ``beta`` as complex
    multiplication.
    """
    I, J, K = (np.array(u.components[1:], dtype=float) for u in frame)
    v = np.asarray(values, dtype=float)
    vec = v[..., 1:]
    alpha = v[..., 0] + 1j * (vec @ I)
    beta = (vec @ J) + 1j * (vec @ K)
    return alpha, beta


def join_on_slice(alpha, beta, frame) -> np.ndarray:
    """Inverse of :func:`split_on_slice`."""
    I, J, K = (np.array(u.components[1:], dtype=float) for u in frame)
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    out = np.empty(alpha.shape + (4,))
    out[..., 0] = alpha.real
    out[..., 1:] = (
        alpha.imag[..., None] * I + beta.real[..., None] * J + beta.imag[..., None] * K
    )
    return out


def slice_point(z, I: Quaternion) -> Quaternion:
    """The quaternion ``Re z + Im z I`` for a complex ``z``."""
    return Quaternion(float(z.real)) + I * float(z.imag)
