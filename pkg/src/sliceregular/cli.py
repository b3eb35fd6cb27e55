"""Command line front end.

Function specs are JSON objects with a ``"type"`` key:

``constant``       ``{"value": [x0, x1, x2, x3]}``
``polynomial``     a star-polynomial dump ``{"center": [...], "coeffs": [[...], ...]}``
``rational``       a semiregular rational dump ``{"num": ..., "den": [...]}``
``principal_part`` ``{"x0", "y0", "k", "A", "q0_unit"}``
``builtin``        ``{"name": "zsum" | "paired"}``
``ml``             ``{"prescription": {...}}`` (built on load) or a saved ML artifact
``conjugate``      ``q -> conj(q)``, a non-regular witness
``qiq``            ``q -> q i q``, a non-regular witness

Exit status is 0 on success, 1 for bad input, 2 when a point hits a pole,
3 for numerical failures and 4 when ``verify`` finds a failing check.
Errors print one line ``sliceregular: error: <Kind>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import PoleError, SliceRegularError
from .mittag_leffler import MLFunction, MLPrescription, build, example_paired, example_zsum
from .quaternion import (
    UNIT_I,
    ImaginaryUnit,
    Quaternion,
    Sphere2,
    format_quaternion,
    parse_quaternion,
)
from .rational import PrincipalPart, SemiRational, principal_to_rational
from .spherical import extract_principal_part, spherical_laurent
from .starpoly import StarPoly
from .verify import affinity_error, regularity_report

__all__ = ["main", "load_function", "cmd_eval", "cmd_expand", "cmd_principal_part",
           "cmd_ml_build", "cmd_grid", "cmd_verify"]

EXIT_INPUT, EXIT_POLE, EXIT_NUMERIC, EXIT_CHECK = 1, 2, 3, 4


class _Witness:
    """Non-regular test functions."""

    def __init__(self, kind: str):
        self.kind = kind

    def __call__(self, q):
        q = Quaternion.coerce(q)
        if self.kind == "conjugate":
            return q.conjugate()
        return q * UNIT_I * q

    def singularities(self, bound=math.inf):
        return []


def load_function(spec) -> Callable:
    """Evaluation oracle described by a spec dict (see module docstring)."""
    kind = spec.get("type")
    if kind == "constant":
        return StarPoly([Quaternion.from_iter(map(float, _as_list(spec["value"])))])
    if kind == "polynomial":
        return StarPoly.from_json(spec)
    if kind == "rational":
        return SemiRational.from_json(spec)
    if kind == "principal_part":
        return principal_to_rational(PrincipalPart.from_json(spec))
    if kind == "builtin":
        name = spec.get("name")
        if name == "zsum":
            return example_zsum()
        if name == "paired":
            return example_paired()
        raise ValueError(f"unknown builtin {name!r}")
    if kind == "ml":
        if "groups" in spec:
            return MLFunction.from_json(spec)
        return build(MLPrescription.from_json(spec["prescription"]), spec.get("degree_cap"))
    if kind in ("conjugate", "qiq"):
        return _Witness(kind)
    raise ValueError(f"unknown function type {kind!r}")


def _as_list(v):
    if isinstance(v, (int, float)):
        return [v, 0, 0, 0]
    v = list(v)
    return v + [0] * (4 - len(v))


def _read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _prescription_of(f) -> Optional[MLPrescription]:
    return getattr(f, "prescription", None)


def _to_float_list(q: Quaternion) -> list:
    return [float(c) for c in q.components]


# --- commands -----------------------------------------------------------------------------


def cmd_eval(spec, point: str, eps: float = 1e-8) -> dict:
    f = load_function(spec)
    q = parse_quaternion(point)
    bound = 0.0
    if isinstance(f, MLFunction):
        value, bound = f.eval_certified(q, eps)
    elif hasattr(f, "partial_sum"):
        value = f(q)
        bound = 8 * np.finfo(float).eps * max(1.0, abs(value)) * 64
    else:
        value = Quaternion.coerce(f(q))
    return {"value": _to_float_list(value), "text": format_quaternion(value), "bound": bound}


def _parse_sphere(text: str) -> Sphere2:
    x0, y0 = (float(v) for v in text.split(","))
    return Sphere2(x0, y0)


def _parse_unit(text: Optional[str]):
    if text is None:
        return UNIT_I
    return ImaginaryUnit(*(float(v) for v in text.split(",")))


def cmd_expand(spec, sphere: Sphere2, k: int = 0, J_max: int = 9, unit=UNIT_I) -> dict:
    f = load_function(spec)
    e = spherical_laurent(f, sphere, sphere.point(unit), k, J_max)
    return e.to_json()


def cmd_principal_part(spec, sphere: Sphere2, k_max: int = 8, unit=UNIT_I) -> dict:
    f = load_function(spec)
    oracle = f.local_oracle(sphere) if hasattr(f, "local_oracle") else f
    return extract_principal_part(oracle, sphere, k_max, unit).to_json()


def cmd_ml_build(prescription, out_path: Optional[str], degree_cap: Optional[int] = None) -> List[dict]:
    f = build(MLPrescription.from_json(prescription), degree_cap)
    data = f.to_json()
    data["type"] = "ml"
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(data, fh)
    return data["ledger"]


def _threads() -> int:
    try:
        n = int(os.environ.get("SLICE_REGULAR_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n if n > 0 else min(8, os.cpu_count() or 1))


def _fmt(v: float) -> str:
    if not math.isfinite(v):
        return "NaN"
    return format(v, ".17g")


def grid_values(f, I, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """``f`` on the rectangle ``xs x ys`` of the slice ``L_I``; rows follow ``ys`` outer, ``xs`` inner.

    Cells on a pole sphere hold NaN.
    """
    sing = f.singularities(float(np.hypot(np.abs(xs).max(), np.abs(ys).max())) + 1) if hasattr(f, "singularities") else []

    def row(y):
        zs = xs + 1j * y
        out = np.full((len(xs), 4), np.nan)
        pole = np.zeros(len(xs), dtype=bool)
        for s in sing:
            pole |= np.abs(zs - complex(float(s.x0), float(s.y0))) < 1e-12
            pole |= np.abs(zs - complex(float(s.x0), -float(s.y0))) < 1e-12
        ok = ~pole
        if ok.any():
            vec = getattr(f, "evaluate_on_slice", None)
            if vec is not None:
                with np.errstate(all="ignore"):
                    out[ok] = vec(I, zs[ok])
            else:
                for i in np.nonzero(ok)[0]:
                    q = Quaternion(float(xs[i])) + I * float(y)
                    try:
                        out[i] = _to_float_list(Quaternion.coerce(f(q)))
                    except PoleError:
                        pass
        out[~np.isfinite(out).all(axis=1)] = np.nan
        return out

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(row, ys))
    return np.stack(rows)


def cmd_grid(spec, I, x_range, y_range, resolution, out_path: str) -> int:
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError("grid resolution must be at least 2 in each direction")
    f = load_function(spec)
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    vals = grid_values(f, I, xs, ys)
    lines = ["x,y,f0,f1,f2,f3,abs"]
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            v = vals[j, i]
            mag = float(np.sqrt((v**2).sum()))
            lines.append(",".join(_fmt(float(c)) for c in (x, y, *v, mag)))
    with open(out_path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return len(lines) - 1


def _random_points(rng, n: int, radius: float, avoid: Sequence[Sphere2], clearance: float) -> List[Quaternion]:
    pts = []
    while len(pts) < n:
        q = Quaternion(*rng.uniform(-radius, radius, size=4))
        if abs(q) > radius or any(s.distance(q) < clearance for s in avoid):
            continue
        pts.append(q)
    return pts


def _random_spheres(rng, n: int, radius: float, avoid: Sequence[Sphere2], clearance: float) -> List[Sphere2]:
    out = []
    while len(out) < n:
        s = Sphere2(float(rng.uniform(-radius, radius)), float(rng.uniform(0.1, radius)))
        if s.modulus > radius or any(math.hypot(s.x0 - a.x0, s.y0 - a.y0) < clearance for a in avoid):
            continue
        out.append(s)
    return out


def cmd_verify(spec, points: int = 100, spheres: int = 10, radius: float = 5.0, seed: int = 0,
               tol: float = 1e-6, affine_tol: float = 1e-10, pp_tol: float = 1e-8) -> dict:
    """Run the regularity, affinity and principal-part checks; ``report["passed"]`` is the verdict."""
    f = load_function(spec)
    rng = np.random.default_rng(seed)
    poles = f.singularities(radius + 2) if hasattr(f, "singularities") else []
    report = {"points": [], "spheres": [], "principal_parts": []}
    for q in _random_points(rng, points, radius, poles, 0.25):
        r = regularity_report(f, q, tol=tol)
        report["points"].append(r.to_json())
    for s in _random_spheres(rng, spheres, radius, poles, 0.25):
        err = affinity_error(f, s, rng=rng)
        report["spheres"].append({"sphere": s.to_json(), "error": err, "passed": err <= affine_tol})
    pres = _prescription_of(f)
    if pres is not None:
        for s in pres.spheres(radius):
            want = pres.part_at(s)
            oracle = f.local_oracle(s) if hasattr(f, "local_oracle") else f
            got = extract_principal_part(oracle, s, unit=want.unit)
            err = math.inf
            if got.k == want.k:
                err = max((abs(a - b) for x, y in zip(got.pairs, want.pairs) for a, b in zip(x, y)), default=0.0)
            report["principal_parts"].append(
                {"sphere": s.to_json(), "k": got.k, "expected_k": want.k, "error": err, "passed": err <= pp_tol}
            )
    report["summary"] = {
        "regular_points": sum(p["regular"] for p in report["points"]),
        "points": len(report["points"]),
        "affine_spheres": sum(s["passed"] for s in report["spheres"]),
        "spheres": len(report["spheres"]),
        "principal_parts_ok": sum(p["passed"] for p in report["principal_parts"]),
        "principal_parts": len(report["principal_parts"]),
    }
    report["passed"] = bool(
        all(p["regular"] for p in report["points"])
        and all(s["passed"] for s in report["spheres"])
        and all(p["passed"] for p in report["principal_parts"])
    )
    return report


# --- entry point ----------------------------------------------------------------------------


def _pair(text: str, cast=float):
    a, b = text.split(",")
    return cast(a), cast(b)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as exceptions and reads ``-2+i`` or ``-3,3`` as values, not flags."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-(\d|\.\d)")

    def error(self, message):
        raise _UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sliceregular", description=__doc__.split("\n")[0])
    p.add_argument("--eps", type=float, default=1e-8, help="certificate tolerance (default 1e-8)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized verification (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a function at a point")
    e.add_argument("spec")
    e.add_argument("point", help='quaternion such as "1+2i-0.5k" or a JSON list')

    x = sub.add_parser("expand", help="spherical Taylor/Laurent coefficients")
    x.add_argument("spec")
    x.add_argument("--sphere", required=True, help="x0,y0")
    x.add_argument("--k", type=int, default=0)
    x.add_argument("--jmax", type=int, default=9)
    x.add_argument("--unit", help="imaginary unit of q0 as a,b,c (default i)")
    x.add_argument("--out")

    pp = sub.add_parser("principal-part", help="extract the principal part at a sphere")
    pp.add_argument("spec")
    pp.add_argument("--sphere", required=True, help="x0,y0")
    pp.add_argument("--k-max", type=int, default=8)
    pp.add_argument("--unit")
    pp.add_argument("--out")

    m = sub.add_parser("ml-build", help="build a Mittag-Leffler function from a prescription")
    m.add_argument("prescription")
    m.add_argument("out")
    m.add_argument("--degree-cap", type=int)

    g = sub.add_parser("grid", help="export values on a slice rectangle as CSV")
    g.add_argument("spec")
    g.add_argument("--unit", help="slice unit as a,b,c (default i)")
    g.add_argument("--x", required=True, help="xmin,xmax")
    g.add_argument("--y", required=True, help="ymin,ymax")
    g.add_argument("--res", required=True, help="nx,ny")
    g.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run regularity checks and print a JSON report")
    v.add_argument("spec")
    v.add_argument("--points", type=int, default=100)
    v.add_argument("--spheres", type=int, default=10)
    v.add_argument("--radius", type=float, default=5.0)
    v.add_argument("--tol", type=float, default=1e-6)
    return p


def _emit(obj, out: Optional[str] = None):
    text = json.dumps(obj)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _fail(kind: str, message: str, code: int) -> int:
    print(f"sliceregular: error: {kind}: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail("UsageError", exc, EXIT_INPUT)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    try:
        if args.command == "eval":
            _emit(cmd_eval(_read_json(args.spec), args.point, args.eps))
        elif args.command == "expand":
            _emit(cmd_expand(_read_json(args.spec), _parse_sphere(args.sphere), args.k, args.jmax,
                             _parse_unit(args.unit)), args.out)
        elif args.command == "principal-part":
            _emit(cmd_principal_part(_read_json(args.spec), _parse_sphere(args.sphere), args.k_max,
                                     _parse_unit(args.unit)), args.out)
        elif args.command == "ml-build":
            _emit({"ledger": cmd_ml_build(_read_json(args.prescription), args.out, args.degree_cap)})
        elif args.command == "grid":
            n = cmd_grid(_read_json(args.spec), _parse_unit(args.unit), _pair(args.x), _pair(args.y),
                         _pair(args.res, int), args.out)
            _emit({"rows": n, "out": args.out})
        elif args.command == "verify":
            report = cmd_verify(_read_json(args.spec), args.points, args.spheres, args.radius, args.seed, args.tol)
            _emit(report)
            return 0 if report["passed"] else EXIT_CHECK
    except PoleError as exc:
        return _fail("PoleError", exc, EXIT_POLE)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_INPUT)
    except SliceRegularError as exc:
        code = EXIT_INPUT if isinstance(exc, ValueError) else EXIT_NUMERIC
        return _fail(type(exc).__name__, exc, code)
    except ValueError as exc:
        return _fail("ValueError", exc, EXIT_INPUT)
    return 0


def console_main():  # pragma: no cover - thin wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    console_main()
