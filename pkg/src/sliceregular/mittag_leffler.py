"""Constructive Mittag-Leffler theorem on the whole space.

Given a closed discrete set of spheres with prescribed principal parts, the
builder exhausts the quaternions by closed balls ``|q| <= rho_n``, groups
the spheres by shell, sums each group into a rational ``Q_n`` and
subtracts a Taylor polynomial ``R_n`` of ``Q_n`` that is within ``2^-n`` of
it on the previous ball. The series

    f = Q_1 + sum_{n >= 2} (Q_n - R_n)

then converges locally uniformly away from the poles and has exactly the
prescribed principal parts.

Shell radii sit near the half integers, nudged to keep away from pole
moduli. When a group needs a correction of degree above the cap, its
inner boundary is dropped and the group merges with the previous one; the
larger gap to the ball lowers the degree.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import DegreeCapError, DiscretenessError, PoleError
from .quaternion import (
    UNIT_I,
    ImaginaryUnit,
    Quaternion,
    Sphere2,
    decompose,
    join_on_slice,
    slice_frame,
    split_on_slice,
)
from .rational import (
    PrincipalPart,
    SemiRational,
    TruncatedSeries,
    minimal_truncation,
    principal_to_rational,
)
from .starpoly import StarPoly

__all__ = [
    "MLPrescription",
    "MLFunction",
    "MLGroup",
    "build",
    "eval_certified",
    "example_zsum",
    "example_paired",
    "SeriesExample",
    "random_prescription",
    "CORRECTION_DEGREE_CAP",
    "GENERATOR_DEGREE_CAP",
]

#: Default cap on correction degrees for finite prescriptions.
CORRECTION_DEGREE_CAP = 512
#: Default cap for generators: unit shells around a lattice need degree
#: about 1.4 n^2 for group n, so 2^-40 accuracy needs about 2300.
GENERATOR_DEGREE_CAP = 4096
#: Radius perturbations tried around each half integer.
_OFFSETS = sorted((k / 64 for k in range(-16, 17)), key=abs)


# --- prescriptions ----------------------------------------------------------------


def _lattice_part(n: int, kind: str) -> PrincipalPart:
    sphere = Sphere2(n, 1)
    if kind == "unit":
        # ((q - n)^2 + 1)^{-1}
        return PrincipalPart(sphere, ((Quaternion(1), Quaternion(0)),), UNIT_I)
    # ((q - n)^2 + 1)^{-1} (q - n - i): A_2 = 0, A_3 = 1 at q0 = n + i
    return PrincipalPart(sphere, ((Quaternion(0), Quaternion(1)),), UNIT_I)


class MLPrescription:
    """Spheres with prescribed principal parts, as a finite list or a generator.

    Parameters
    ----------
    parts : iterable of PrincipalPart, optional
        Finite prescription; each part carries its sphere.
    generator : {"integer_lattice"}, optional
        Infinite rule; with ``principal`` ``"unit"`` the sphere ``n + S``
        gets ``((q-n)^2+1)^{-1}``, with ``"paired"`` it gets
        ``((q-n)^2+1)^{-1}(q-n-i)``.
    min_separation, max_per_ball : float, int
        Discreteness certificate for finite lists: distinct spheres must be
        at least ``min_separation`` apart in the ``(x0, y0)`` half plane,
        and no unit disc there may hold more than ``max_per_ball`` of them.
    """

    def __init__(
        self,
        parts: Optional[Iterable[PrincipalPart]] = None,
        generator: Optional[str] = None,
        principal: str = "unit",
        min_separation: float = 1e-6,
        max_per_ball: int = 64,
    ):
        if (parts is None) == (generator is None):
            raise ValueError("give either a finite list of parts or a generator")
        self.generator = generator
        self.principal = principal
        if generator is not None:
            if generator != "integer_lattice":
                raise ValueError(f"unknown generator {generator!r}")
            if principal not in ("unit", "paired"):
                raise ValueError(f"unknown principal kind {principal!r}")
            self.parts = None
            return
        parts = [p for p in parts if p.k > 0]
        parts.sort(key=lambda p: (p.sphere.modulus, float(p.sphere.x0), float(p.sphere.y0)))
        self.parts = tuple(parts)
        self._check_discrete(min_separation, max_per_ball)

    def _check_discrete(self, min_sep: float, max_per_ball: int):
        pts = np.array([[float(p.sphere.x0), float(p.sphere.y0)] for p in self.parts]).reshape(-1, 2)
        seen = set()
        for p in self.parts:
            if p.sphere in seen:
                raise DiscretenessError(f"sphere {p.sphere} is prescribed twice")
            seen.add(p.sphere)
        if len(pts) < 2:
            return
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] < min_sep:
            raise DiscretenessError(
                f"spheres {self.parts[i].sphere} and {self.parts[j].sphere} are closer than {min_sep:g}: "
                "the set looks like it accumulates"
            )
        crowd = (d <= 1.0).sum(1) + 1
        if crowd.max() > max_per_ball:
            c = self.parts[int(np.argmax(crowd))].sphere
            raise DiscretenessError(
                f"{int(crowd.max())} spheres within distance 1 of {c}: the set looks like it accumulates"
            )

    @property
    def is_finite(self) -> bool:
        return self.parts is not None

    @property
    def max_modulus(self) -> float:
        if not self.is_finite:
            return math.inf
        return max((p.sphere.modulus for p in self.parts), default=0.0)

    def between(self, lo: float, hi: float) -> List[PrincipalPart]:
        """Parts whose sphere modulus lies in ``(lo, hi]``."""
        if self.is_finite:
            return [p for p in self.parts if lo < p.sphere.modulus <= hi]
        if hi < 1:
            return []
        top = int(math.floor(math.sqrt(max(hi * hi - 1, 0.0)))) + 1
        out = []
        for n in sorted(range(-top, top + 1), key=lambda n: (abs(n), n)):
            if lo < math.hypot(n, 1) <= hi:
                out.append(_lattice_part(n, self.principal))
        return out

    def spheres(self, bound: float = math.inf) -> List[Sphere2]:
        return [p.sphere for p in self.between(-1.0, bound)]

    def part_at(self, sphere: Sphere2) -> Optional[PrincipalPart]:
        m = sphere.modulus
        for p in self.between(m - 1e-9, m + 1e-9):
            if p.sphere == sphere:
                return p
        return None

    def to_json(self) -> dict:
        if self.is_finite:
            return {"spheres": [p.to_json() for p in self.parts]}
        return {"generator": self.generator, "principal": self.principal}

    @classmethod
    def from_json(cls, data) -> "MLPrescription":
        if "generator" in data:
            return cls(generator=data["generator"], principal=data.get("principal", "unit"))
        return cls([PrincipalPart.from_json(p) for p in data.get("spheres", [])])

    def __repr__(self):
        if self.is_finite:
            return f"MLPrescription({len(self.parts)} spheres)"
        return f"MLPrescription(generator={self.generator!r}, principal={self.principal!r})"


# --- groups and the builder ----------------------------------------------------------


@dataclass(frozen=True)
class MLGroup:
    """Shell ``rho_{n-1} < |sphere| <= rho_n`` with its sum ``Q_n`` and correction ``R_n``."""

    n: int
    inner: float
    outer: float
    parts: tuple
    Q: SemiRational
    R: Optional[TruncatedSeries]

    @property
    def bound(self) -> float:
        return self.R.tail_bound if self.R is not None else 0.0

    @property
    def degree(self) -> int:
        return self.R.order if self.R is not None else -1

    def value(self, q: Quaternion) -> Quaternion:
        v = self.Q(q)
        return v - self.R(q) if self.R is not None else v

    def values_on_slice(self, I, zs) -> np.ndarray:
        v = self.Q.evaluate_on_slice(I, zs)
        if self.R is not None:
            v = v - self.R.evaluate_on_slice(I, zs)
        return v

    def ledger(self) -> dict:
        return {
            "n": self.n,
            "rho": self.outer,
            "size": len(self.parts),
            "degree": self.degree,
            "bound": self.bound,
        }


def _group_sum(parts) -> SemiRational:
    Q = SemiRational(StarPoly([0.0]))
    for p in parts:
        Q = Q + principal_to_rational(p)
    return Q


def _clearance(rho: float, moduli: Sequence[float]) -> float:
    return min((abs(rho - m) for m in moduli), default=math.inf)


class _Builder:
    """Sequential shell-by-shell construction of the groups."""

    def __init__(self, prescription: MLPrescription, degree_cap: int, merge: bool):
        self.prescription = prescription
        self.degree_cap = degree_cap
        self.merge = merge
        self.shell = 0
        self.groups: List[MLGroup] = []

    def _next_radius(self) -> float:
        self.shell += 1
        m = self.shell
        moduli = [s.modulus for s in self.prescription.spheres(m + 1.5) if s.modulus > m - 0.5]
        best = max(_OFFSETS, key=lambda d: (round(_clearance(m + 0.5 + d, moduli), 12), -abs(d)))
        rho = m + 0.5 + best
        if _clearance(rho, moduli) < 1e-3:
            raise DiscretenessError(f"no shell radius near {m + 0.5} avoids the pole spheres")
        return rho

    def _make(self, n: int, inner: float, outer: float):
        parts = tuple(self.prescription.between(inner, outer))
        Q = _group_sum(parts)
        if n == 1 or not parts:
            return MLGroup(n, inner, outer, parts, Q, None), parts
        R = minimal_truncation(Q, inner, 2.0**-n, self.degree_cap)
        if R is None:
            return None, parts
        return MLGroup(n, inner, outer, parts, Q, R), parts

    def step(self):
        outer = self._next_radius()
        n = len(self.groups) + 1
        inner = self.groups[-1].outer if self.groups else 0.0
        while True:
            g, parts = self._make(n, inner, outer)
            if g is not None:
                self.groups.append(g)
                return
            # Merging with the previous group moves the inner ball back by one
            # shell; it only helps when that widens the gap to the nearest pole.
            gap = min(p.sphere.modulus for p in parts) - inner
            prev_inner = self.groups[-2].outer if len(self.groups) >= 2 else 0.0
            merged = parts + self.groups[-1].parts
            new_gap = min(p.sphere.modulus for p in merged) - prev_inner
            if not self.merge or (n > 2 and new_gap <= gap):
                raise DegreeCapError(
                    f"group {n} (shell radius {inner:.4g}) needs a correction above degree "
                    f"{self.degree_cap}; raise degree_cap"
                )
            self.groups.pop()
            n -= 1
            inner = prev_inner

    def build_until(self, radius: float):
        while not self.groups or self.groups[-1].outer < radius:
            self.step()


class MLFunction:
    """The semiregular function ``Q_1 + sum_{n >= 2} (Q_n - R_n)``.

    Finite prescriptions are fully grouped at construction; further groups
    are empty. Generator prescriptions are grouped lazily, without merging,
    so the groups never depend on the order of evaluations.
    """

    def __init__(self, prescription: MLPrescription, degree_cap: Optional[int] = None, _groups=None):
        self.prescription = prescription
        if degree_cap is None:
            degree_cap = CORRECTION_DEGREE_CAP if prescription.is_finite else GENERATOR_DEGREE_CAP
        self.degree_cap = int(degree_cap)
        self._builder = _Builder(prescription, self.degree_cap, merge=False)
        self._lock = threading.Lock()
        if _groups:
            self._builder.groups = list(_groups)
            self._builder.shell = _shell_index(_groups[-1].outer)

    # construction
    def _ensure_groups(self, count: int):
        with self._lock:
            while len(self._builder.groups) < count:
                self._builder.step()

    def _ensure_radius(self, radius: float):
        """Build until some group reaches beyond ``radius``."""
        with self._lock:
            gs = self._builder.groups
            while not gs or gs[-1].outer <= radius:
                self._builder.step()

    def groups(self, count: Optional[int] = None) -> List[MLGroup]:
        """Groups built so far; ``count`` forces at least that many to exist."""
        if count is not None:
            self._ensure_groups(count)
        return list(self._builder.groups)

    @property
    def radii(self) -> List[float]:
        return [g.outer for g in self.groups()]

    def ledger(self) -> List[dict]:
        return [g.ledger() for g in self.groups()]

    def group_of(self, sphere: Sphere2) -> int:
        """Index of the group holding ``sphere``."""
        m = sphere.modulus
        self._ensure_radius(m)
        for g in self.groups():
            if g.inner < m <= g.outer:
                return g.n
        raise AssertionError("unreachable")

    # evaluation
    def singularities(self, bound: float = math.inf) -> List[Sphere2]:
        return self.prescription.spheres(bound)

    def _check_pole(self, q: Quaternion, tol: float = 1e-13):
        r = abs(q)
        for p in self.prescription.between(r - 2 * tol * max(1, r) - 1e-300, r + 2 * tol * max(1, r)):
            if p.sphere.distance(q) <= tol * max(1.0, p.sphere.modulus):
                raise PoleError(f"point {q} lies on the pole sphere {p.sphere}", p.sphere)

    def group_count(self, r: float, eps: float) -> int:
        """Number ``N'`` of groups summed at modulus ``r``: ``r < rho_{N'-1}`` and ``2^-N' <= eps``."""
        need = max(2, math.ceil(-math.log2(eps)) if eps > 0 else 1074)
        self._ensure_radius(r)
        N = next(g.n for g in self.groups() if r < g.outer) + 1
        return max(N, need)

    def eval_certified(self, q, eps: float = 1e-8):
        """Value at ``q`` and a bound on its distance to the full series.

        Raises
        ------
        PoleError
            If ``q`` is on a prescribed sphere (the error names it).
        """
        q = Quaternion.coerce(q).to_float()
        self._check_pole(q)
        N = self.group_count(abs(q), eps)
        acc = Quaternion(0.0)
        size = 0.0
        for g in self.groups(N)[:N]:
            v = g.value(q)
            acc = acc + v
            size += abs(v)
        bound = 2.0**-N + 8 * np.finfo(float).eps * N * size
        return acc, bound

    def __call__(self, q, eps: float = 1e-10) -> Quaternion:
        return self.eval_certified(q, eps)[0]

    def evaluate_on_slice(self, I, zs, eps: float = 1e-10) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        N = self.group_count(float(np.abs(zs).max(initial=0.0)), eps)
        out = np.zeros(zs.shape + (4,))
        for g in self.groups(N)[:N]:
            out = out + g.values_on_slice(I, zs)
        return out

    def local_oracle(self, sphere: Sphere2, reach: Optional[float] = None) -> "LocalizedML":
        """Oracle ``f + sum_{n <= m} R_n``: same poles, no large polynomials up to ``|q| = reach``.

        ``m`` is the group whose shell covers ``reach``; the default covers
        any contour of radius up to ``y0 + 1`` around the sphere.
        """
        if reach is None:
            reach = abs(float(sphere.x0)) + 2 * float(sphere.y0) + 2.0
        self._ensure_radius(reach)
        m = next(g.n for g in self.groups() if reach < g.outer)
        return LocalizedML(self, m)

    # serialization
    def to_json(self) -> dict:
        with self._lock:
            gs = list(self._builder.groups)
        return {
            "prescription": self.prescription.to_json(),
            "degree_cap": self.degree_cap,
            "groups": [
                {
                    "n": g.n,
                    "inner": float(g.inner).hex(),
                    "outer": float(g.outer).hex(),
                    "correction": g.R.to_json() if g.R is not None else None,
                }
                for g in gs
            ],
            "ledger": [g.ledger() for g in gs],
        }

    @classmethod
    def from_json(cls, data) -> "MLFunction":
        pres = MLPrescription.from_json(data["prescription"])
        groups = []
        for gd in data["groups"]:
            inner, outer = float.fromhex(gd["inner"]), float.fromhex(gd["outer"])
            parts = tuple(pres.between(inner, outer))
            R = TruncatedSeries.from_json(gd["correction"]) if gd["correction"] else None
            groups.append(MLGroup(int(gd["n"]), inner, outer, parts, _group_sum(parts), R))
        return cls(pres, data.get("degree_cap"), _groups=groups)

    def __repr__(self):
        return f"MLFunction({self.prescription!r}, groups built={len(self._builder.groups)})"


def _shell_index(rho: float) -> int:
    return int(round(rho - 0.5))


class LocalizedML:
    """Oracle differing from an :class:`MLFunction` by the polynomial ``sum_{n<=m} R_n``."""

    def __init__(self, f: MLFunction, m: int):
        self.f = f
        self.m = m

    def singularities(self, bound: float = math.inf):
        return self.f.singularities(bound)

    def _terms(self, r: float, eps: float = 1e-10):
        N = max(self.f.group_count(r, eps), self.m)
        return self.f.groups(N)[:N]

    def __call__(self, q) -> Quaternion:
        q = Quaternion.coerce(q).to_float()
        acc = Quaternion(0.0)
        for g in self._terms(abs(q)):
            acc = acc + (g.Q(q) if g.n <= self.m else g.value(q))
        return acc

    def evaluate_on_slice(self, I, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        out = np.zeros(zs.shape + (4,))
        for g in self._terms(float(np.abs(zs).max(initial=0.0))):
            out = out + (g.Q.evaluate_on_slice(I, zs) if g.n <= self.m else g.values_on_slice(I, zs))
        return out


def build(prescription, degree_cap: Optional[int] = None) -> MLFunction:
    """Build the Mittag-Leffler function of ``prescription``.

    For a finite list every sphere is placed in a group before returning;
    generators are expanded lazily as evaluation demands.

    Raises
    ------
    DiscretenessError
        The prescription repeats or crowds spheres.
    DegreeCapError
        A lazily built group cannot meet its bound within ``degree_cap``.
    """
    if not isinstance(prescription, MLPrescription):
        prescription = MLPrescription(prescription)
    f = MLFunction(prescription, degree_cap)
    if prescription.is_finite:
        with f._lock:
            f._builder.merge = True
            f._builder.build_until(prescription.max_modulus)
            f._builder.merge = False
    return f


def eval_certified(f: MLFunction, q, eps: float = 1e-8):
    return f.eval_certified(q, eps)


# --- the two closing examples -------------------------------------------------------------


class SeriesExample:
    """Closed-form evaluator of a lattice series, with direct partial sums for checking.

    On a slice ``x + yI`` the series reduces to meromorphic functions of
    ``z = x + iy`` with known closed forms in terms of ``cot``.
    """

    def __init__(self, kind: str):
        if kind not in ("unit", "paired"):
            raise ValueError(kind)
        self.kind = kind
        self.prescription = MLPrescription(generator="integer_lattice", principal=kind)

    def singularities(self, bound: float = math.inf):
        return self.prescription.spheres(bound)

    def _check_pole(self, q: Quaternion, tol: float = 1e-13):
        n = round(float(q.real))
        s = Sphere2(n, 1)
        if s.distance(q) <= tol * max(1.0, s.modulus):
            raise PoleError(f"point {q} lies on the pole sphere {s}", s)

    def _slice_values(self, zs: np.ndarray):
        """Complex ``(S0, S1)``: symmetric sums of ``1/((z-n)^2+1)`` and ``(z-n)/((z-n)^2+1)``."""
        with np.errstate(all="ignore"):
            cm = 1 / np.tan(np.pi * (zs - 1j))
            cp = 1 / np.tan(np.pi * (zs + 1j))
        s0 = np.pi / 2j * (cm - cp)
        s1 = np.pi / 2 * (cm + cp)
        return s0, s1

    def evaluate_on_slice(self, I, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        s0, s1 = self._slice_values(zs)
        frame = slice_frame(I)
        if self.kind == "unit":
            return join_on_slice(s0, np.zeros_like(s0), frame)
        # s1 - s0 * i, where the right factor i is written in the frame of I
        i_split = split_on_slice(np.array(UNIT_I.to_list(), dtype=float), frame)
        a, b = i_split
        # (s0)(a + b J) = s0 a + (s0 b) J for slice-valued s0
        return join_on_slice(s1 - s0 * a, -s0 * b, frame)

    def __call__(self, q) -> Quaternion:
        q = Quaternion.coerce(q).to_float()
        self._check_pole(q)
        x, y, I = decompose(q)
        if I is None:
            I = UNIT_I
        v = self.evaluate_on_slice(I, np.array([complex(x, y)]))[0]
        return Quaternion(*(float(c) for c in v))

    def term(self, q: Quaternion, n: int) -> Quaternion:
        w = (q - n) * (q - n) + 1
        if self.kind == "unit":
            return w.inverse()
        return w.inverse() * (q - n - UNIT_I)

    def tail_bound(self, q, N: int) -> float:
        """Bound on the modulus of everything beyond the partial sum of order ``N``."""
        r = abs(Quaternion.coerce(q))
        if self.kind == "unit":
            if N <= r + 1:
                return math.inf
            return 2.0 / (N - r - 1)
        if N < 2 * (r + 1):
            return math.inf
        c = r**3 + r**2 + 2 * r + 2
        return 32.0 * c / N

    def partial_sum(self, q, N: int):
        """Direct partial sum over ``|n| <= N`` (paired: ``n = 0`` plus pairs ``+-n``) and its tail bound."""
        q = Quaternion.coerce(q).to_float()
        self._check_pole(q)
        acc = self.term(q, 0)
        for n in range(1, N + 1):
            acc = acc + (self.term(q, n) + self.term(q, -n))
        return acc, self.tail_bound(q, N)

    def local_oracle(self, sphere: Sphere2):
        return self

    def __repr__(self):
        return f"SeriesExample({self.kind!r})"


def example_zsum() -> SeriesExample:
    """``sum_n ((q - n)^2 + 1)^{-1}``, a spherical pole of order one on every ``n + S``."""
    return SeriesExample("unit")


def example_paired() -> SeriesExample:
    """``sum_n ((q - n)^2 + 1)^{-1} (q - n - i)`` summed in symmetric pairs."""
    return SeriesExample("paired")


def random_prescription(
    rng: np.random.Generator,
    count: int = 12,
    radius: float = 10.0,
    k_max: int = 2,
    min_gap: float = 0.5,
) -> MLPrescription:
    """Random spheres inside ``|q| <= radius`` with random principal parts of order ``1..k_max``.

    Spheres keep ``min_gap`` from each other in the ``(x0, y0)`` half plane.
    """
    spheres: List[Sphere2] = []
    while len(spheres) < count:
        r = radius * math.sqrt(rng.uniform(0.01, 1.0))
        t = rng.uniform(0, math.pi)
        s = Sphere2(round(r * math.cos(t), 6), round(r * math.sin(t), 6))
        if all(math.hypot(s.x0 - o.x0, s.y0 - o.y0) >= min_gap for o in spheres):
            spheres.append(s)
    parts = []
    for s in spheres:
        k = int(rng.integers(1, k_max + 1))
        pairs = tuple(
            (Quaternion(*rng.normal(size=4)), Quaternion(*rng.normal(size=4))) for _ in range(k)
        )
        parts.append(PrincipalPart(s, pairs, ImaginaryUnit.random(rng)))
    return MLPrescription(parts)
