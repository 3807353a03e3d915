"""Exact coefficients of powers of the geometric polynomial."""

from __future__ import annotations

from ..errors import TooLarge

MAX_DEGREE = 10 ** 4


def a_coeffs(r: int, n: int) -> tuple[int, ...]:
    """Integer coefficients ``A_0 .. A_{r(n-1)}`` of ``(1 + t + ... + t^(n-1))^r``.

    Computed by repeated convolution with the all-ones row using a running
    window sum, in Python integers (no floating point).
    """
    if r < 1 or n < 2:
        raise ValueError("need r >= 1 and n >= 2")
    if r * (n - 1) > MAX_DEGREE:
        raise TooLarge(f"degree r(n-1) = {r * (n - 1)} exceeds {MAX_DEGREE}")
    row = [1] * n
    for _ in range(r - 1):
        out = []
        window = 0
        for k in range(len(row) + n - 1):
            if k < len(row):
                window += row[k]
            if k - n >= 0:
                window -= row[k - n]
            out.append(window)
        row = out
    return tuple(row)


def growth_profile(r: int, ns) -> dict[int, float]:
    """``max_nu A_nu / (nu + 1)^(r - 1)`` for each ``n``."""
    out = {}
    for n in ns:
        a = a_coeffs(r, n)
        out[int(n)] = max(v / (nu + 1) ** (r - 1) for nu, v in enumerate(a))
    return out
