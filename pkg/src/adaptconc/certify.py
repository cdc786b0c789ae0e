"""Grid certification of the analytic conditions behind the main inequality.

With ``x = b/sqrt(n)``, ``y = a/sqrt(n)`` and ``z = lambda * alpha`` the log-gap
between the claimed bound and the Chernoff estimate is ``n * G(x, y, z)``:

    G = -18 (x^2 - y^2)/(4y+3)^2 + 1 + (x-y) z/(2y+1)
        - z / ((1 - e^{-z})(2y+1)) - log((1 - e^{-z})(2y+1)/z)

and the inequality follows once some ``z >= 0`` makes ``G >= 0`` for every
``x > |y|``, ``y > -1/2``. This module evaluates ``G`` and its derivatives,
constructs the canonical root ``z0(y)`` and the piecewise choice ``z1(x, y)``,
and checks the supporting conditions on a finite grid with explicit slack.
A passing report means "certified on the grid", nothing more.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UsageError

__all__ = [
    "GPoint",
    "RegionTag",
    "CertGridSpec",
    "CheckResult",
    "CertReport",
    "g_value",
    "g_derivs",
    "z0_solve",
    "z0_closed_form",
    "z1_region",
    "grad_along_curve",
    "taylor_check",
    "chernoff_step_gap",
    "chernoff_step_lhs",
    "chernoff_step_scan",
    "certify_grid",
]

_SMALL_Z = 1e-4
_SMALL_W = 0.5


def _z_over_one_minus_exp(z):
    """``z / (1 - e^{-z})`` with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = z / -np.expm1(-z)
    series = 1.0 + z / 2 + z * z / 12 - z**4 / 720
    return np.where(np.abs(z) < _SMALL_Z, series, direct)


def g_value(x, y, z):
    """``G(x, y, z)``; vectorised, exact limit at ``z = 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    c = 4 * y + 3
    alpha = 2 * y + 1
    r = _z_over_one_minus_exp(z)
    out = -18 * (x - y) * (x + y) / (c * c) + 1 + (x - y) * z / alpha - r / alpha + np.log(r) - np.log(alpha)
    return out[()] if out.ndim == 0 else out


def g_derivs(x, y, z):
    """First and second partial derivatives of ``G`` in ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    c2 = (4 * y + 3) ** 2
    d1 = -36 * x / c2 + z / (2 * y + 1)
    d2 = np.broadcast_to(-36 / c2, d1.shape).copy()
    if d1.ndim == 0:
        return float(d1), float(d2)
    return d1, d2


@dataclass(frozen=True)
class GPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not self.y > -0.5:
            raise DomainError(f"y must exceed -1/2, got {self.y}")
        if self.z < 0:
            raise DomainError(f"z must be nonnegative, got {self.z}")

    @property
    def alpha(self) -> float:
        return 1 + 2 * self.y

    @property
    def beta_over_n(self) -> float:
        return self.x - self.y

    @property
    def lam(self) -> float:
        return self.z / self.alpha

    @property
    def w(self) -> float:
        return 18 * self.x * (2 * self.y + 1) / (4 * self.y + 3) ** 2

    def g(self) -> float:
        return float(g_value(self.x, self.y, self.z))


# -- the canonical root z0(y) -------------------------------------------------


def z0_closed_form(z: float, y_sign: int) -> float:
    """The ``y`` produced by ``z`` on the positive (``y_sign=1``) or negative branch.

    Positive branch: ``y = z/(2(1 - e^{-z})) - 1/2``; negative branch:
    ``y = -1/2 + z/(2(e^z - 1))``.
    """
    if z == 0:
        return 0.0
    if y_sign > 0:
        return z / (-2.0 * math.expm1(-z)) - 0.5
    return -0.5 + z / (2.0 * math.expm1(z))


def z0_solve(y: float) -> float:
    """Root ``z >= 0`` of ``G(|y|, y, z) = 0`` built from the closed-form branches.

    Both branch maps are monotone on ``z > 0`` so a doubling bracket followed by
    bisection down to adjacent floats is enough.
    """
    y = float(y)
    if not y > -0.5:
        raise DomainError(f"y must exceed -1/2, got {y}")
    if y == 0.0:
        return 0.0
    sgn = 1 if y > 0 else -1

    def past(z: float) -> bool:
        v = z0_closed_form(z, sgn)
        return v >= y if sgn > 0 else v <= y

    lo, hi = 0.0, 1.0
    while not past(hi):
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise DomainError(f"no root bracket for y={y}")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if past(mid):
            hi = mid
        else:
            lo = mid
    r_lo = abs(z0_closed_form(lo, sgn) - y)
    r_hi = abs(z0_closed_form(hi, sgn) - y)
    return hi if r_hi <= r_lo else lo


class RegionTag(enum.Enum):
    REGION_I = "regionI"
    REGION_II = "regionII"


def _boundary_x(y: float, z0: float) -> float:
    return (4 * y + 3) ** 2 * z0 / (36 * (2 * y + 1))


def z1_region(x: float, y: float) -> tuple[RegionTag, float]:
    if not y > -0.5 or not x > abs(y):
        raise DomainError(f"need x > |y| and y > -1/2, got x={x}, y={y}")
    z0 = z0_solve(y)
    if x <= _boundary_x(y, z0):
        return RegionTag.REGION_I, z0
    return RegionTag.REGION_II, 36 * x * (2 * y + 1) / (4 * y + 3) ** 2


# -- condition (10): gradient along the stationary curve ------------------------


def _series_f1(w, terms: int):
    # (3/w + w) sinh w - 3 cosh w = sum_{k>=2} 4k(k-1)/(2k+1)! w^{2k}
    w = np.asarray(w, dtype=float)
    total = np.zeros_like(w)
    for k in range(terms, 1, -1):
        total = total + 4 * k * (k - 1) / math.factorial(2 * k + 1) * w ** (2 * k)
    return total


def _series_f2(w, terms: int):
    # 4w + 2w cosh 2w - 3 sinh 2w = sum_{k>=2} 4^{k+1}(k-1)/(2k+1)! w^{2k+1}
    w = np.asarray(w, dtype=float)
    total = np.zeros_like(w)
    for k in range(terms, 1, -1):
        total = total + 4 ** (k + 1) * (k - 1) / math.factorial(2 * k + 1) * w ** (2 * k + 1)
    return total


def _f1_over_sinh(w):
    w = np.asarray(w, dtype=float)
    small = w < _SMALL_W
    ws = np.where(small, w, 1.0)
    wl = np.where(small, 1.0, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        series = np.where(ws > 0, _series_f1(ws, 20) / np.sinh(ws), 0.0)
    direct = 3 / wl + wl - 3 / np.tanh(wl)
    return np.where(small, series, direct)


def _f2_over_sinh2(w):
    w = np.asarray(w, dtype=float)
    small = w < _SMALL_W
    ws = np.where(small, w, 1.0)
    wl = np.where(small, 1.0, w)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        series = np.where(ws > 0, _series_f2(ws, 20) / np.sinh(ws) ** 2, 0.0)
        # cosh 2w = 1 + 2 sinh^2 w, sinh 2w = 2 sinh w cosh w
        direct = 6 * wl / np.sinh(wl) ** 2 + 4 * wl - 6 / np.tanh(wl)
    return np.where(small, series, direct)


def grad_along_curve(x, y):
    """``d/dx G(x, y, 36x(2y+1)/(4y+3)^2)`` as a sum of three nonnegative terms."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c2 = (4 * y + 3) ** 2
    w = 18 * x * (2 * y + 1) / c2
    out = (
        _f1_over_sinh(w) * 6 * (2 * y + 1) / c2
        + _f2_over_sinh2(w) * 3 / c2
        + 8 * w * y * y / ((2 * y + 1) * c2)
    )
    return out[()] if out.ndim == 0 else out


def taylor_check(w: float, terms: int = 40) -> tuple[float, float, float, float]:
    """Direct values of the two positive functions next to their Taylor sums."""
    if not w > 0:
        raise DomainError(f"w must be positive, got {w}")
    if terms < 2:
        raise UsageError("need at least two terms")
    f1 = (3 / w + w) * math.sinh(w) - 3 * math.cosh(w)
    f2 = 4 * w + 2 * w * math.cosh(2 * w) - 3 * math.sinh(2 * w)
    s1 = math.fsum(4 * k * (k - 1) / math.factorial(2 * k + 1) * w ** (2 * k) for k in range(2, terms + 1))
    s2 = math.fsum(4 ** (k + 1) * (k - 1) / math.factorial(2 * k + 1) * w ** (2 * k + 1) for k in range(2, terms + 1))
    return f1, f2, s1, s2


# -- the single Chernoff step ---------------------------------------------------


def _step_objective(p, lam, alpha):
    # p e^{lam(p - alpha)} + (1 - p) e^{lam p}
    return np.exp(lam * p) * (1 - p * -np.expm1(-lam * alpha))


def chernoff_step_lhs(lam: float, alpha: float) -> tuple[float, float]:
    """Maximum over ``p in [0, 1]`` of the one-step moment bound, and the maximiser."""
    k = -math.expm1(-lam * alpha)
    p_star = 1 / k - 1 / lam
    p = min(1.0, max(0.0, p_star))
    return float(_step_objective(p, lam, alpha)), p


def chernoff_step_scan(lam: float, alpha: float, resolution: float = 1e-4) -> float:
    """Brute-force maximum of the one-step objective over a uniform ``p`` grid."""
    m = int(round(1 / resolution))
    p = np.linspace(0.0, 1.0, m + 1)
    return float(np.max(_step_objective(p, lam, alpha)))


def chernoff_step_gap(lam: float, alpha: float) -> float:
    """Closed-form per-step factor minus the exact one-step maximum (should be >= 0)."""
    if not lam > 0 or not alpha > 0:
        raise DomainError(f"need lambda > 0 and alpha > 0, got {lam}, {alpha}")
    k = -math.expm1(-lam * alpha)
    log_rhs = math.log(k / lam) + lam / k - 1
    lhs, _ = chernoff_step_lhs(lam, alpha)
    if log_rhs > 700:  # rhs overflows; lhs <= e^lam stays finite
        return math.inf
    return math.exp(log_rhs) - lhs


# -- grid certification ---------------------------------------------------------


@dataclass(frozen=True)
class CertGridSpec:
    y_min: float = -0.499
    y_max: float = 3.0
    y_step: float = 0.01
    x_span: float = 4.0
    x_step: float = 0.01
    slack: float = 1e-9

    def __post_init__(self):
        if not self.y_min > -0.5:
            raise UsageError(f"y_min must exceed -1/2, got {self.y_min}")
        if self.y_step <= 0 or self.x_step <= 0:
            raise UsageError("grid steps must be positive")
        if self.y_max < self.y_min or self.x_span < self.x_step:
            raise UsageError("empty grid")
        if self.slack < 0:
            raise UsageError("slack must be nonnegative")

    def y_values(self) -> np.ndarray:
        count = int(math.floor((self.y_max - self.y_min) / self.y_step + 1e-9)) + 1
        return self.y_min + self.y_step * np.arange(count)

    def x_offsets(self) -> np.ndarray:
        count = int(math.floor(self.x_span / self.x_step + 1e-9))
        return self.x_step * np.arange(1, count + 1)


@dataclass
class CheckResult:
    condition: str
    grid_size: int
    min_margin: float
    worst_point: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "grid_size": self.grid_size,
            "min_margin": self.min_margin,
            "worst_point": list(self.worst_point),
        }


@dataclass
class CertReport:
    spec: CertGridSpec
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.min_margin >= -self.spec.slack for c in self.checks)

    def as_dict(self) -> dict:
        s = self.spec
        return {
            "schema": "adaptconc.certify/1",
            "grid": {
                "y_min": s.y_min,
                "y_max": s.y_max,
                "y_step": s.y_step,
                "x_span": s.x_span,
                "x_step": s.x_step,
                "slack": s.slack,
            },
            "status": "certified on grid" if self.passed else "failed on grid",
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }


CONDITIONS = ("root", "stationarity", "concavity", "curve_gradient", "master")


def _row_margins(y: float, xs: np.ndarray) -> dict[str, tuple[float, tuple[float, ...], int]]:
    z0 = z0_solve(y)
    out = {}
    out["root"] = (-abs(float(g_value(abs(y), y, z0))), (y,), 1)

    z_curve = 36 * xs * (2 * y + 1) / (4 * y + 3) ** 2
    d1, _ = g_derivs(xs, y, z_curve)
    out["stationarity"] = _argmin(-np.abs(d1), xs, y)

    _, d2 = g_derivs(xs, y, np.zeros_like(xs))
    out["concavity"] = _argmin(-d2, xs, y)

    out["curve_gradient"] = _argmin(np.asarray(grad_along_curve(xs, y)), xs, y)

    z1 = np.where(xs <= _boundary_x(y, z0), z0, z_curve)
    out["master"] = _argmin(np.asarray(g_value(xs, y, z1)), xs, y)
    return out


def _argmin(margins: np.ndarray, xs: np.ndarray, y: float):
    i = int(np.argmin(margins))  # first index on ties, i.e. smallest x
    return float(margins[i]), (float(xs[i]), y), int(margins.size)


def certify_grid(spec: CertGridSpec | None = None, threads: int = 1) -> CertReport:
    """Check the four supporting conditions and the master property on a grid.

    For each ``y`` the ``x`` grid runs from ``|y| + x_step`` to ``|y| + x_span``.
    Margins are signed so that a check passes when its minimum is ``>= -slack``:

    * root: ``-|G(|y|, y, z0(y))|``
    * stationarity: ``-|dG/dx|`` on ``z = 36x(2y+1)/(4y+3)^2``
    * concavity: ``-d^2G/dx^2``
    * curve_gradient: the derivative of ``G`` along that curve
    * master: ``G(x, y, z1(x, y))``

    Rows may be processed on several threads; the reduction is a minimum with
    ties broken by the lexicographically smallest point, so the report does not
    depend on ``threads``.
    """
    spec = spec or CertGridSpec()
    ys = spec.y_values()
    offsets = spec.x_offsets()
    if ys.size == 0 or offsets.size == 0:
        raise UsageError("empty grid")

    def work(y):
        return _row_margins(float(y), abs(float(y)) + offsets)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, ys))
    else:
        rows = [work(y) for y in ys]

    report = CertReport(spec)
    for cond in CONDITIONS:
        best = None
        total = 0
        for row in rows:
            margin, point, size = row[cond]
            total += size
            if best is None or (margin, point) < best:
                best = (margin, point)
        report.checks.append(CheckResult(cond, total, best[0], best[1]))
    return report
