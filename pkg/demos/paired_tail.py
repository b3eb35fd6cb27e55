"""Partial sums of the paired series and their tail certificates.

The paired series has a simple pole with coefficient pair ``(0, 1)`` on each
sphere ``x0 = n, y0 = 1``. Its terms decay like ``1/n**2``. The tail bound is
of order ``1/N``, so the bound shrinks as the cutoff ``N`` grows, while the
real error is usually much smaller than the bound.
"""

from sliceregular import Quaternion, example_paired


def main():
    p = example_paired()
    q = Quaternion(0.5, 0.3, 0.2, 0.1)
    reference = p(q)
    print(f"reference value at {q}: {reference}")
    print(f"{'N':>6}  {'actual error':>12}  {'tail bound':>10}")
    for N in (10, 40, 160, 640):
        value, bound = p.partial_sum(q, N)
        print(f"{N:6d}  {abs(value - reference):12.3e}  {bound:10.3e}")


if __name__ == "__main__":
    main()
