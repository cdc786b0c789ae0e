"""Uniform evaluation of bound families as functions of the deviation scale,
and inversion ``target probability -> epsilon``."""

from __future__ import annotations

import math
from collections.abc import Callable

from .bounds import (
    BoundValue,
    CorollaryQuery,
    MeanKnownQuery,
    Sign,
    baseline_rhs,
    chernoff_mult_eps_form,
    cor1_eval,
    cor2_eval,
    cor3_rhs,
    rs13_rhs,
)
from .errors import DomainError, UsageError

__all__ = ["FAMILIES", "evaluate", "invert_epsilon"]

# family -> required keyword parameters
FAMILIES: dict[str, tuple[str, ...]] = {
    "azuma": (),
    "hoeffding": (),
    "bernstein": ("n", "variance"),
    "bennett": ("n", "variance"),
    "cor1": ("n", "delta", "s"),
    "cor2": ("n", "delta", "s"),
    "cor3": ("n", "p", "s"),
    "rs13": ("means", "s"),
    "chernoff": ("n", "p", "s"),
}

EPS_ABS_TOL = 1e-12


def evaluate(ineq: str, epsilon: float, **params) -> BoundValue:
    """Evaluate bound family ``ineq`` at deviation scale ``epsilon``.

    Raises ``DomainError`` where the family is undefined for these inputs.
    """
    try:
        needed = FAMILIES[ineq]
    except KeyError:
        raise UsageError(f"unknown inequality {ineq!r}; choose from {sorted(FAMILIES)}") from None
    missing = [k for k in needed if params.get(k) is None]
    if missing:
        raise UsageError(f"{ineq} needs {', '.join(missing)}")
    if ineq in ("azuma", "hoeffding"):
        return baseline_rhs(ineq, params.get("n") or 1, epsilon)
    if ineq in ("bernstein", "bennett"):
        return baseline_rhs(ineq, params["n"], epsilon, params["variance"])
    if ineq == "cor1":
        q = CorollaryQuery(params["n"], epsilon, params["delta"], params["s"])
        return cor1_eval(q, max(-1.0, min(1.0, q.delta)))[1]
    if ineq == "cor2":
        q = CorollaryQuery(params["n"], epsilon, params["delta"], params["s"])
        return cor2_eval(q, max(-1.0, min(1.0, q.delta)))[1]
    if ineq == "cor3":
        return cor3_rhs(MeanKnownQuery(params["n"], params["p"], epsilon, params["s"]))
    if ineq == "rs13":
        return rs13_rhs(params["means"], epsilon, params["s"])
    return chernoff_mult_eps_form(params["n"], params["p"], epsilon, Sign.parse(params["s"]))


def invert_epsilon(ineq: str, target: float, **params) -> float:
    """Smallest-scale ``epsilon`` at which the bound equals ``target``.

    The bound must decrease in ``epsilon`` on its validity domain. Points where
    the family raises ``DomainError`` or turns vacuous again are treated as
    outside that domain. The bracket is grown by doubling and then bisected to
    ``1e-12`` absolute in ``epsilon``.
    """
    target = float(target)
    if not 0.0 < target <= 1.0:
        raise DomainError(f"target must lie in (0, 1], got {target}")
    log_target = math.log(target)

    def status(eps: float) -> float | None:
        try:
            bv = evaluate(ineq, eps, **params)
        except DomainError:
            return None
        if eps > 0 and bv.vacuous:
            return None
        return bv.log_rhs

    if target == 1.0:
        if status(0.0) is not None:
            return 0.0
        raise DomainError(f"{ineq}: epsilon = 0 is outside the validity domain")

    grid = [0.0] + [2.0**k for k in range(-20, 41)]
    above = None  # last valid point with rhs > target
    last_invalid = None
    below = None
    for eps in grid:
        st = status(eps)
        if st is None:
            if above is not None:
                below = eps  # right edge of the validity domain lies before eps
                break
            last_invalid = eps
            continue
        if st <= log_target:
            below = eps
            break
        above = eps
    if below is None:
        if above is None:
            raise DomainError(f"{ineq}: no epsilon in the validity domain for these parameters")
        raise DomainError(f"{ineq}: target {target} not reached for epsilon up to {grid[-1]:g}")

    if above is None:
        # the domain starts to the right of last_invalid; locate its left edge
        lo, hi = last_invalid, below
        lo, hi = _bisect(lambda e: status(e) is not None, lo, hi, want=False)
        edge = hi
        st = status(edge)
        if st is None or st <= log_target:
            sup = math.exp(st) if st is not None else float("nan")
            raise DomainError(f"{ineq}: target {target} above the attainable range (sup ~ {sup:.6g})")
        above = edge

    def is_above(e: float) -> bool:
        st = status(e)
        return st is not None and st > log_target

    lo, hi = _bisect(is_above, above, below, want=True)
    st_hi = status(hi)
    if st_hi is not None and st_hi <= log_target:
        return hi
    st_lo = status(lo)
    if st_lo is not None and abs(math.expm1(st_lo - log_target)) <= 1e-9:
        return lo
    inf = math.exp(st_lo) if st_lo is not None else float("nan")
    raise DomainError(f"{ineq}: target {target} below the attainable range (infimum ~ {inf:.6g})")


def _bisect(pred: Callable[[float], bool], lo: float, hi: float, want: bool) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` keeping ``pred(lo) == want`` and ``pred(hi) != want``."""
    for _ in range(400):
        if hi - lo <= EPS_ABS_TOL:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid) == want:
            lo = mid
        else:
            hi = mid
    return lo, hi
