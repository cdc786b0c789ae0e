"""Tail bounds with a data-dependent affine threshold, plus classical baselines.

The central inequality bounds the probability that the accumulated gap
``D = sum(E[X_m | past] - X_m)`` of [0, 1]-valued variables exceeds a threshold
that is affine in the observed sum ``S``:

    P(D >= (b + a(2S/n - 1)) sqrt(n)) <= exp(-2(b^2 - a^2) / (1 + 4a/(3 sqrt(n)))^2)

Writing ``Delta = 1 - 2S/n`` the threshold becomes ``(b - a*Delta) sqrt(n)``.
The ``(eps, delta, s)`` parameterisation below lets a guess ``delta`` of the
bias ``Delta`` tighten the realised threshold; the bound holds whether or not
the guess is right.

All exponents are computed in log space. ``BoundValue.rhs`` is derived from
``log_rhs`` and bounds that come out at or above one are returned unclamped
with ``vacuous`` set.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from numbers import Integral

import numpy as np

from .errors import DomainError, UnsupportedError, UsageError

__all__ = [
    "Sign",
    "BoundValue",
    "TheoremQuery",
    "CorollaryQuery",
    "MeanKnownQuery",
    "ThresholdSpec",
    "MartingaleView",
    "theorem1_rhs",
    "theorem1_threshold",
    "cor1_eval",
    "cor1_threshold",
    "cor1_to_theorem1",
    "cor2_eval",
    "cor2_threshold",
    "cor3_rhs",
    "c_of",
    "rs13_rhs",
    "chernoff_mult_rhs",
    "chernoff_mult_eps_form",
    "baseline_rhs",
    "normalize_range",
    "normalize_ranges",
]


class Sign(enum.Enum):
    """Direction of the deviation being bounded (``s = +1`` or ``s = -1``)."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, text: str | int | Sign) -> Sign:
        if isinstance(text, Sign):
            return text
        key = str(text).strip().lower()
        if key in {"+", "+1", "1", "plus", "p"}:
            return cls.PLUS
        if key in {"-", "-1", "minus", "m"}:
            return cls.MINUS
        raise UsageError(f"cannot parse sign from {text!r}")

    @property
    def flipped(self) -> Sign:
        return Sign.MINUS if self is Sign.PLUS else Sign.PLUS

    def __str__(self) -> str:
        return "+" if self is Sign.PLUS else "-"


def _check_n(n) -> int:
    if isinstance(n, bool) or not isinstance(n, Integral):
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        else:
            raise UsageError(f"n must be a positive integer, got {n!r}")
    if n < 1:
        raise UsageError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _finite(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise UsageError(f"{name} must be finite, got {x!r}")
    return x


@dataclass(frozen=True)
class BoundValue:
    """A probability upper bound carried in log space.

    ``event_impossible`` records that the bounded event provably has
    probability zero for the given parameters; the bound itself stays valid.
    """

    log_rhs: float
    event_impossible: bool = False
    warnings: tuple[str, ...] = ()

    @property
    def rhs(self) -> float:
        if self.log_rhs > 709.0:
            return math.inf
        return math.exp(self.log_rhs)

    @property
    def vacuous(self) -> bool:
        return self.log_rhs >= 0.0

    def as_dict(self) -> dict:
        return {
            "rhs": self.rhs,
            "log_rhs": self.log_rhs,
            "vacuous": self.vacuous,
            "event_impossible": self.event_impossible,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class TheoremQuery:
    n: int
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))
        object.__setattr__(self, "a", _finite("a", self.a))
        b = _finite("b", self.b)
        if b < 0:
            raise DomainError(f"b must be nonnegative, got {b}")
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class CorollaryQuery:
    """Inputs ``(n, eps, delta, s)``; ``delta`` is the a-priori bias guess."""

    n: int
    epsilon: float
    delta: float
    s: Sign = Sign.PLUS

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))
        eps = _finite("epsilon", self.epsilon)
        if eps < 0:
            raise DomainError(f"epsilon must be nonnegative, got {eps}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta", _finite("delta", self.delta))
        object.__setattr__(self, "s", Sign.parse(self.s))


@dataclass(frozen=True)
class MeanKnownQuery:
    n: int
    p: float
    epsilon: float
    s: Sign = Sign.PLUS

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))
        p = _finite("p", self.p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {p}")
        object.__setattr__(self, "p", p)
        eps = _finite("epsilon", self.epsilon)
        if eps < 0:
            raise DomainError(f"epsilon must be nonnegative, got {eps}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "s", Sign.parse(self.s))


@dataclass(frozen=True)
class ThresholdSpec:
    """Affine threshold ``(base + slope * Delta) * scale`` on the bias statistic.

    The bounded event is ``sign * D >= threshold``.
    """

    base: float
    slope: float
    scale: float
    sign: Sign = Sign.PLUS

    def at_delta(self, delta):
        return (self.base + self.slope * delta) * self.scale

    def at_sum(self, total, n: int):
        return self.at_delta(1.0 - 2.0 * total / n)

    def minimum(self) -> float:
        """Smallest threshold over ``Delta`` in [-1, 1]."""
        return min(self.at_delta(-1.0), self.at_delta(1.0))

    def as_dict(self) -> dict:
        return {
            "base": self.base,
            "slope": self.slope,
            "scale": self.scale,
            "sign": str(self.sign),
        }


@dataclass(frozen=True)
class MartingaleView:
    """Martingale increments with predictable biases.

    Each increment must satisfy ``(b - 1)/2 <= inc <= (b + 1)/2`` where ``b``
    is the bias for that step.
    """

    increments: tuple[float, ...]
    biases: tuple[float, ...]
    tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        inc = tuple(float(v) for v in self.increments)
        bias = tuple(float(v) for v in self.biases)
        if len(inc) != len(bias):
            raise UsageError("increments and biases must have equal length")
        if not inc:
            raise UsageError("empty martingale")
        for m, (d, b) in enumerate(zip(inc, bias)):
            if not -1.0 <= b <= 1.0:
                raise DomainError(f"bias {b} at step {m} outside [-1, 1]")
            if not (b - 1.0) / 2 - self.tol <= d <= (b + 1.0) / 2 + self.tol:
                raise DomainError(f"increment {d} at step {m} outside [(b-1)/2, (b+1)/2] for b={b}")
        object.__setattr__(self, "increments", inc)
        object.__setattr__(self, "biases", bias)

    @property
    def n(self) -> int:
        return len(self.increments)

    @property
    def delta_prime(self) -> float:
        return math.fsum(self.biases) / self.n

    @property
    def deviation(self) -> float:
        """``Y_0 - Y_n``."""
        return -math.fsum(self.increments)

    def to_unit(self) -> tuple[np.ndarray, np.ndarray]:
        """Map to [0, 1] samples ``x`` with conditional means ``mu``."""
        bias = np.asarray(self.biases)
        mu = 0.5 * (1.0 - bias)
        return np.asarray(self.increments) + mu, mu

    def violates(self, thr: ThresholdSpec) -> bool:
        return thr.sign.value * self.deviation >= thr.at_delta(self.delta_prime)


# -- the main inequality ------------------------------------------------------


def theorem1_rhs(q: TheoremQuery) -> BoundValue:
    root = math.sqrt(q.n)
    den = 1.0 + 4.0 * q.a / (3.0 * root)
    if den == 0.0:
        raise DomainError(f"singular parameterisation: 1 + 4a/(3 sqrt(n)) = 0 at a={q.a}, n={q.n}")
    log_rhs = -2.0 * (q.b - q.a) * (q.b + q.a) / (den * den)
    impossible = q.a <= -root / 2 and q.b > -q.a
    return BoundValue(log_rhs, event_impossible=impossible)


def theorem1_threshold(q: TheoremQuery) -> ThresholdSpec:
    return ThresholdSpec(base=q.b, slope=-q.a, scale=math.sqrt(q.n))


def _cor1_shift(q: CorollaryQuery) -> float:
    return q.delta - 4.0 * q.s.value * q.epsilon / (3.0 * math.sqrt(q.n))


def _gauss_log(eps: float, shift: float) -> float:
    """``-2 eps^2 / (1 - shift^2)``, unclamped, with the degenerate cases pinned."""
    if eps == 0.0:
        return 0.0
    d = (1.0 - shift) * (1.0 + shift)
    if d == 0.0:
        return math.inf
    return -2.0 * eps * eps / d


def _threshold_warnings(value: float) -> tuple[str, ...]:
    if value < 0:
        return (f"negative threshold {value:.6g}: the bound holds but says little",)
    return ()


def _check_bias(name: str, value: float) -> float:
    value = float(value)
    if not -1.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [-1, 1], got {value}")
    return value


def cor1_threshold(q: CorollaryQuery) -> ThresholdSpec:
    shift = _cor1_shift(q)
    k = 1.0 - q.delta * shift
    if not k > 0.0:
        raise DomainError(f"validity predicate 1 - delta*(delta - 4s eps/(3 sqrt n)) = {k} is not positive")
    return ThresholdSpec(base=q.epsilon / k, slope=-q.epsilon * shift / k, scale=math.sqrt(q.n), sign=q.s)


def cor1_eval(q: CorollaryQuery, Delta: float) -> tuple[float, BoundValue]:
    """Threshold at the observed bias ``Delta`` and the bound for the ``(eps, delta, s)`` form."""
    Delta = _check_bias("Delta", Delta)
    thr = cor1_threshold(q)
    value = thr.at_delta(Delta)
    bound = BoundValue(_gauss_log(q.epsilon, _cor1_shift(q)), warnings=_threshold_warnings(value))
    return value, bound


def cor1_to_theorem1(q: CorollaryQuery) -> TheoremQuery:
    """Map ``(n, eps, delta, s)`` to the ``(n, a, b)`` of the main inequality.

    For ``s = MINUS`` the returned query applies to the reflected variables
    ``1 - X_m`` (with ``Delta -> -Delta``), which is how the negative direction
    reduces to the positive one.
    """
    if q.s is Sign.MINUS:
        q = CorollaryQuery(q.n, q.epsilon, -q.delta, Sign.PLUS)
    shift = _cor1_shift(q)
    k = 1.0 - q.delta * shift
    if not k > 0.0:
        raise DomainError(f"validity predicate 1 - delta*(delta - 4 eps/(3 sqrt n)) = {k} is not positive")
    return TheoremQuery(q.n, q.epsilon * shift / k, q.epsilon / k)


def _cor2_shift(q: CorollaryQuery) -> float:
    return q.delta + 2.0 * q.s.value * q.epsilon / (3.0 * math.sqrt(q.n))


def cor2_threshold(q: CorollaryQuery) -> ThresholdSpec:
    """Threshold on the mean predictable bias for the martingale form.

    Raises when the validity predicate fails; ``cor2_eval`` handles the
    vacuous special case separately.
    """
    shift = _cor2_shift(q)
    k = 1.0 - q.delta * shift
    if not k > 0.0:
        raise DomainError(f"validity predicate 1 - delta'*(delta' + 2s eps/(3 sqrt n)) = {k} is not positive")
    return ThresholdSpec(base=q.epsilon / k, slope=-q.epsilon * shift / k, scale=math.sqrt(q.n), sign=q.s)


def cor2_eval(q: CorollaryQuery, DeltaPrime: float) -> tuple[float, BoundValue, bool]:
    """Martingale form. ``q.delta`` is the guess for the mean bias ``Delta'``.

    Returns ``(threshold, bound, event_impossible)``.
    """
    DeltaPrime = _check_bias("DeltaPrime", DeltaPrime)
    shift = _cor2_shift(q)
    k = 1.0 - q.delta * shift
    log_rhs = _gauss_log(q.epsilon, shift)
    scale = q.epsilon * math.sqrt(q.n)
    if shift * shift >= 1.0:
        # rhs >= 1, any threshold is fine
        value = scale * (1.0 - DeltaPrime * shift) / k if k != 0.0 else -math.inf
        return value, BoundValue(log_rhs, warnings=("bound is vacuous: (delta' + 2s eps/(3 sqrt n))^2 >= 1",)), False
    if not k > 0.0:
        raise DomainError(f"validity predicate 1 - delta'*(delta' + 2s eps/(3 sqrt n)) = {k} is not positive")
    value = scale * (1.0 - DeltaPrime * shift) / k
    # the extremes of Y_0 - Y_n over Delta' in [-1, 1] cannot reach the threshold
    impossible = q.epsilon > 0 and q.s.value * shift * 2.0 * q.epsilon / (math.sqrt(q.n) * k) >= 1.0
    bound = BoundValue(log_rhs, event_impossible=impossible, warnings=_threshold_warnings(value))
    return value, bound, impossible


def cor3_rhs(q: MeanKnownQuery) -> BoundValue:
    """Bound when the average ``p`` of the expected values is known (independent case)."""
    if q.epsilon == 0.0:
        return BoundValue(0.0)
    t = q.s.value * q.epsilon / (3.0 * math.sqrt(q.n))
    prod = (q.p - t) * (1.0 - q.p + t)
    if prod == 0.0:
        return BoundValue(math.inf)
    return BoundValue(-q.epsilon * q.epsilon / (2.0 * prod))


# -- comparison bounds --------------------------------------------------------


def c_of(p: float, s: Sign) -> float:
    """Per-variable variance proxy for a [0, 1] variable with mean ``p``."""
    p = float(p)
    s = Sign.parse(s)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    if p == 0.5:
        return 0.25
    if (p < 0.5 and s is Sign.PLUS) or (p > 0.5 and s is Sign.MINUS):
        return p * (1.0 - p)
    # (1 - 2p) / (2 log((1-p)/p)) written via atanh to stay accurate near p = 1/2
    u = 1.0 - 2.0 * p
    return u / (4.0 * math.atanh(u))


def rs13_rhs(means: Sequence[float], epsilon: float, s: Sign) -> BoundValue:
    if len(means) == 0:
        raise UsageError("means must be nonempty")
    epsilon = float(epsilon)
    if epsilon < 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    s = Sign.parse(s)
    cbar = math.fsum(c_of(m, s) for m in means) / len(means)
    if epsilon == 0.0:
        return BoundValue(0.0)
    if cbar == 0.0:
        # every variable is deterministic; the deviation cannot occur
        return BoundValue(-math.inf, event_impossible=True)
    return BoundValue(-epsilon * epsilon / (2.0 * cbar))


def chernoff_mult_rhs(np_: float, delta: float, s: Sign) -> BoundValue:
    """Multiplicative Chernoff bound ``(e^{-s d} / (1 - s d)^{1 - s d})^{np}``."""
    s = Sign.parse(s)
    if not np_ > 0:
        raise DomainError(f"np must be positive, got {np_}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    sd = s.value * delta
    if sd >= 1.0:
        raise DomainError("s*delta must be below 1")
    return BoundValue(np_ * (-sd - (1.0 - sd) * math.log1p(-sd)))


def chernoff_mult_eps_form(n: int, p: float, epsilon: float, s: Sign) -> BoundValue:
    """The same bound written for ``P(s(np - sum X) > eps sqrt(n))``."""
    n = _check_n(n)
    s = Sign.parse(s)
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    root = math.sqrt(n)
    delta = epsilon / (root * p)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"eps/(sqrt(n) p) = {delta} outside (0, 1)")
    se = s.value * epsilon
    return BoundValue(-se * root + (-n * p + se * root) * math.log1p(-se / (root * p)))


def _bennett_h(u: float) -> float:
    return (1.0 + u) * math.log1p(u) - u


def baseline_rhs(kind: str, n: int, epsilon: float, variance: float | None = None) -> BoundValue:
    """Classical one-sided bounds in the unit-range normalisation.

    ``variance`` is the per-step variance ``v`` and is required for
    ``bernstein`` (``v >= 0``) and ``bennett`` (``v > 0``).
    """
    n = _check_n(n)
    epsilon = float(epsilon)
    if epsilon < 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    kind = kind.lower()
    if kind in ("azuma", "hoeffding"):
        return BoundValue(-2.0 * epsilon * epsilon)
    if kind not in ("bernstein", "bennett"):
        raise UsageError(f"unknown baseline {kind!r}")
    if variance is None:
        raise UsageError(f"{kind} needs a variance")
    v = float(variance)
    if v < 0:
        raise DomainError(f"variance must be nonnegative, got {v}")
    if epsilon == 0.0:
        return BoundValue(0.0)
    if kind == "bernstein":
        return BoundValue(-epsilon * epsilon / (2.0 * (v + epsilon / (3.0 * math.sqrt(n)))))
    if v == 0.0:
        raise DomainError("bennett needs a positive variance")
    return BoundValue(-n * v * _bennett_h(epsilon / (math.sqrt(n) * v)))


# -- range handling -----------------------------------------------------------


def normalize_range(samples, lo: float, hi: float) -> np.ndarray:
    """Affinely map samples from ``[lo, hi]`` onto ``[0, 1]``."""
    if not hi > lo:
        raise UsageError(f"need hi > lo, got [{lo}, {hi}]")
    x = np.asarray(samples, dtype=float)
    if np.any((x < lo) | (x > hi)):
        raise DomainError(f"sample outside [{lo}, {hi}]")
    return (x - lo) / (hi - lo)


def normalize_ranges(samples, los, his, rtol: float = 1e-12) -> np.ndarray:
    """Per-index variant; all widths ``hi_m - lo_m`` must agree."""
    x = np.asarray(samples, dtype=float)
    lo = np.broadcast_to(np.asarray(los, dtype=float), x.shape)
    hi = np.broadcast_to(np.asarray(his, dtype=float), x.shape)
    width = hi - lo
    if np.any(width <= 0):
        raise UsageError("every range needs hi > lo")
    if width.size and np.ptp(width) > rtol * np.max(width):
        raise UnsupportedError("ranges of unequal width are not supported")
    if np.any((x < lo) | (x > hi)):
        raise DomainError("sample outside its range")
    return (x - lo) / width
