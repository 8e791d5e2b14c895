"""Adaptive Simpson quadrature with Richardson correction."""
from __future__ import annotations

from typing import Callable, Sequence


class QuadratureError(RuntimeError):
    """Raised when the recursion depth is exhausted before reaching tolerance."""


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-8,
    max_depth: int = 60,
) -> tuple[float, float]:
    """Integrate ``f`` over [a, b]; returns ``(value, error_estimate)``.

    Each panel is split until the two-half Simpson estimate differs from the
    whole-panel estimate by at most ``15 * tol`` for the panel's share of
    ``abs_tol``.
    """
    if abs_tol <= 0.0:
        raise ValueError("abs_tol must be > 0")
    if b == a:
        return 0.0, 0.0
    if b < a:
        value, err = adaptive_simpson(f, b, a, abs_tol, max_depth)
        return -value, err

    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    stack = [(a, b, fa, fm, fb, _simpson(fa, fm, fb, b - a), abs_tol, 0)]
    total = 0.0
    err = 0.0
    while stack:
        lo, hi, flo, fmid, fhi, whole, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
            continue
        if depth + 1 >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson hit depth {max_depth} on [{lo}, {hi}] without reaching tolerance {tol:g}"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1))
    return total, err


def integrate_split(
    f: Callable[[float], float],
    points: Sequence[float],
    abs_tol: float = 1e-8,
    max_depth: int = 60,
) -> tuple[float, float]:
    """Integrate over consecutive panels ``points[i] .. points[i+1]``.

    The tolerance is shared between panels in proportion to their width.
    """
    pts = sorted(set(float(p) for p in points))
    if len(pts) < 2:
        return 0.0, 0.0
    width = pts[-1] - pts[0]
    value = 0.0
    err = 0.0
    for lo, hi in zip(pts, pts[1:]):
        v, e = adaptive_simpson(f, lo, hi, abs_tol * (hi - lo) / width, max_depth)
        value += v
        err += e
    return value, err
