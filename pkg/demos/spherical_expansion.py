"""Spherical expansion of a polynomial at a sphere.

The coefficients at ``q0 = x0 + y0*J`` describe ``f`` near the whole sphere
``x0 + y0*S``, not only near ``q0``. The demo compares the truncated expansion
with ``f`` at points off the slice of ``q0``.
"""

import numpy as np

from sliceregular import ImaginaryUnit, Quaternion, Sphere2, StarPoly, spherical_coeffs


def main():
    rng = np.random.default_rng(5)
    f = StarPoly([Quaternion(1, 0, 2, 0), Quaternion(0, 1, 0, 0), 0, Quaternion(0.5, 0, 0, -1)])
    sphere = Sphere2(0.5, 1.0)
    e = spherical_coeffs(f, sphere, sphere.point(ImaginaryUnit(1, 1, 0)), J_max=4)
    for n, a in enumerate(e.A):
        print(f"A_{n} = {a}")
    print(f"convergence radius in the sphere distance: {e.radius:.3f}")
    for _ in range(4):
        K = ImaginaryUnit.random(rng)
        q = Quaternion(0.6) + K * 0.9
        print(f"|f(q) - expansion(q)| = {abs(f(q) - e(q)):.1e}  at q = {q}")


if __name__ == "__main__":
    main()
