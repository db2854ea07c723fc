"""Adaptive Simpson integration with an absolute accuracy target.

Interval error is estimated by Richardson extrapolation: |S(two halves) -
S(whole)| / 15. An interval is accepted when its estimate fits its share of
the accuracy budget, or when the recursion depth cap is reached (the residual
is then accounted against the total). Jump discontinuities therefore cost a
deep but narrow recursion chain instead of non-termination.
"""

from __future__ import annotations

from typing import Callable

__all__ = ["QuadratureNotConverged", "adaptive_simpson"]


class QuadratureNotConverged(ArithmeticError):
    """Raised when the accuracy target cannot be met within the budgets."""


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 60,
    max_evals: int = 500_000,
) -> tuple[float, int]:
    """Integrate ``f`` over [a, b] to absolute accuracy ``tol``.

    Returns ``(value, n_evals)``. Raises QuadratureNotConverged if the
    evaluation budget runs out or the accumulated residual from depth-capped
    intervals exceeds ``tol``.
    """
    if b <= a:
        return 0.0, 0

    evals = [0]

    def feval(x: float) -> float:
        evals[0] += 1
        if evals[0] > max_evals:
            raise QuadratureNotConverged(
                f"exceeded {max_evals} evaluations integrating over [{a}, {b}]"
            )
        return f(x)

    def simpson(fa: float, fm: float, fb: float, h: float) -> float:
        return h / 6.0 * (fa + 4.0 * fm + fb)

    residual = [0.0]

    def recurse(
        lo: float, hi: float, flo: float, fmid: float, fhi: float,
        whole: float, budget: float, depth: int,
    ) -> float:
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        fl = feval(lmid)
        fr = feval(rmid)
        left = simpson(flo, fl, fmid, mid - lo)
        right = simpson(fmid, fr, fhi, hi - mid)
        err = (left + right - whole) / 15.0
        if abs(err) <= budget or depth >= max_depth:
            if abs(err) > budget:
                residual[0] += abs(err)
            return left + right + err
        return recurse(lo, mid, flo, fl, fmid, left, budget / 2.0, depth + 1) + recurse(
            mid, hi, fmid, fr, fhi, right, budget / 2.0, depth + 1
        )

    fa_, fb_ = feval(a), feval(b)
    fm_ = feval(0.5 * (a + b))
    whole = simpson(fa_, fm_, fb_, b - a)
    value = recurse(a, b, fa_, fm_, fb_, whole, tol, 0)
    if residual[0] > tol:
        raise QuadratureNotConverged(
            f"residual {residual[0]:.3e} exceeds tolerance {tol:.3e} over [{a}, {b}]"
        )
    return value, evals[0]
