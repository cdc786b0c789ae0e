"""History-dependent [0, 1]-valued processes with exactly known conditional means.

Each process is described by a :class:`ProcessSpec`. Its conditional mean
``mu_m`` is a deterministic function of the strict past and the sampling kernel
has mean exactly ``mu_m``, so the gap ``D = sum(mu_m - x_m)`` is computed without
approximation. Violation probabilities are estimated by seeded Monte Carlo and,
for short horizons, computed exactly by enumerating every outcome sequence.

Text form of a spec: ``kind(name=value, ...)``, e.g. ``two_point(mu=0.9, c=0.05)``.
Process files hold one spec per line; ``#`` starts a comment.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from . import _pykernels, kernels
from ._rng import trial_seeds
from .bounds import (
    BoundValue,
    CorollaryQuery,
    Sign,
    ThresholdSpec,
    TheoremQuery,
    cor1_eval,
    cor1_threshold,
    theorem1_rhs,
    theorem1_threshold,
)
from .errors import UsageError

__all__ = [
    "KINDS",
    "ProcessSpec",
    "Trajectory",
    "TailEstimate",
    "EnumResult",
    "generate",
    "violation_check",
    "estimate_tail",
    "enumerate_exact",
    "ci_upper",
    "ci_lower",
    "load_processes",
    "default_battery",
    "default_bound_configs",
]

# kind -> (kernel id, parameter names)
KINDS: dict[str, tuple[int, tuple[str, ...]]] = {
    "iid_bernoulli": (_pykernels.IID_BERNOULLI, ("p",)),
    "point_mass": (_pykernels.POINT_MASS, ("mu",)),
    "two_point": (_pykernels.TWO_POINT, ("mu", "c")),
    "mean_reverting": (_pykernels.MEAN_REVERTING, ("p0", "kappa")),
    "polya_like": (_pykernels.POLYA_LIKE, ("a0", "b0")),
    "adversarial_flip": (_pykernels.ADVERSARIAL_FLIP, ("p_lo", "p_hi")),
}

MAX_ENUM_N = 20
_CHUNK = 8192


def _unit(name: str, v: float):
    if not 0.0 <= v <= 1.0:
        raise UsageError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown process kind {self.kind!r}; choose from {sorted(KINDS)}")
        names = KINDS[self.kind][1]
        params = tuple(float(v) for v in self.params)
        if len(params) != len(names):
            raise UsageError(f"{self.kind} takes parameters {names}, got {len(params)} values")
        if not all(math.isfinite(v) for v in params):
            raise UsageError("process parameters must be finite")
        object.__setattr__(self, "params", params)
        a = params[0]
        b = params[1] if len(params) > 1 else None
        if self.kind in ("iid_bernoulli", "point_mass"):
            _unit(names[0], a)
        elif self.kind == "two_point":
            _unit("mu", a)
            if not 0.0 <= b <= min(a, 1.0 - a):
                raise UsageError(f"two_point needs 0 <= c <= min(mu, 1 - mu), got c={b}")
        elif self.kind == "mean_reverting":
            _unit("p0", a)
        elif self.kind == "polya_like":
            if not (a > 0 and b > 0):
                raise UsageError("polya_like needs a0 > 0 and b0 > 0")
        else:
            _unit("p_lo", a)
            _unit("p_hi", b)

    @classmethod
    def make(cls, kind: str, **params: float) -> ProcessSpec:
        names = KINDS.get(kind, (None, ()))[1]
        extra = set(params) - set(names)
        if extra or len(params) != len(names):
            raise UsageError(f"{kind} takes parameters {names}, got {sorted(params)}")
        return cls(kind, tuple(params[k] for k in names))

    @classmethod
    def parse(cls, text: str) -> ProcessSpec:
        m = re.fullmatch(r"\s*([a-z_]+)\s*\((.*)\)\s*", text)
        if not m:
            raise UsageError(f"cannot parse process spec {text!r}")
        kind, body = m.group(1), m.group(2).strip()
        if kind not in KINDS:
            raise UsageError(f"unknown process kind {kind!r}")
        names = KINDS[kind][1]
        parts = [p.strip() for p in body.split(",")] if body else []
        values: dict[str, float] = {}
        for i, part in enumerate(parts):
            key, sep, val = part.partition("=")
            if not sep:
                if i >= len(names):
                    raise UsageError(f"too many parameters in {text!r}")
                key, val = names[i], part
            key = key.strip()
            try:
                values[key] = float(val)
            except ValueError:
                raise UsageError(f"bad number {val!r} in {text!r}") from None
        return cls.make(kind, **values)

    @property
    def kernel(self) -> tuple[int, float, float]:
        p1 = self.params[0]
        p2 = self.params[1] if len(self.params) > 1 else 0.0
        return KINDS[self.kind][0], p1, p2

    def __str__(self) -> str:
        names = KINDS[self.kind][1]
        return f"{self.kind}(" + ", ".join(f"{k}={v!r}" for k, v in zip(names, self.params)) + ")"


def load_processes(path: str | Path) -> list[ProcessSpec]:
    specs = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            specs.append(ProcessSpec.parse(line))
    if not specs:
        raise UsageError(f"no process specs in {path}")
    return specs


@dataclass(frozen=True)
class Trajectory:
    samples: np.ndarray
    cond_means: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def total(self) -> float:
        return math.fsum(self.samples)

    @property
    def bias(self) -> float:
        """``Delta = 1 - 2S/n``."""
        return 1.0 - 2.0 * self.total / self.n

    @property
    def gap(self) -> float:
        """``D = sum(mu_m - x_m)``."""
        return math.fsum(self.cond_means) - self.total

    def to_csv(self) -> str:
        lines = ["index,x,mu"]
        for i, (x, mu) in enumerate(zip(self.samples, self.cond_means), start=1):
            lines.append(f"{i},{format(float(x), '.17g')},{format(float(mu), '.17g')}")
        return "\n".join(lines) + "\n"


def generate(spec: ProcessSpec, n: int, seed: int) -> Trajectory:
    """One trajectory; ``seed`` is the initial SplitMix64 state."""
    if n < 1:
        raise UsageError("n must be positive")
    kind, p1, p2 = spec.kernel
    seeds = np.array([seed & ((1 << 64) - 1)], dtype=np.uint64)
    xs, mus = kernels.simulate_paths(kind, p1, p2, int(n), seeds)
    return Trajectory(xs[0].copy(), mus[0].copy(), int(seed))


def violation_check(t: Trajectory, thr: ThresholdSpec) -> bool:
    """Whether ``sign * D >= threshold(Delta)`` on this trajectory (ties count)."""
    if t.samples.shape != t.cond_means.shape:
        raise UsageError("samples and conditional means differ in length")
    if abs(thr.scale - math.sqrt(t.n)) > 1e-12 * max(1.0, thr.scale):
        raise UsageError(f"threshold scale {thr.scale} does not match sqrt(n) for n={t.n}")
    # same arithmetic as the kernels so Monte Carlo and replay agree exactly
    S = np.zeros(1)
    D = np.zeros(1)
    for x, mu in zip(t.samples, t.cond_means):
        D += mu - x
        S += x
    return bool(_pykernels.violated(S, D, t.n, thr.base, thr.slope, thr.scale, thr.sign.value)[0])


# -- exact binomial confidence limits --------------------------------------------


def _bisect_p(pred, iters: int = 200) -> tuple[float, float]:
    """``pred`` is False at 0 and True at 1; returns the bracketing pair."""
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def ci_upper(k: int, n: int, level: float) -> float:
    """Exact one-sided upper limit: smallest ``p`` with ``P(Bin(n, p) <= k) <= 1 - level``."""
    if not 0 <= k <= n or n < 1:
        raise UsageError(f"need 0 <= k <= n and n >= 1, got k={k}, n={n}")
    if not 0.0 < level < 1.0:
        raise UsageError(f"level must lie in (0, 1), got {level}")
    if k == n:
        return 1.0
    alpha = 1.0 - level
    return _bisect_p(lambda p: special.bdtr(k, n, p) <= alpha)[1]


def ci_lower(k: int, n: int, level: float) -> float:
    """Exact one-sided lower limit: largest ``p`` with ``P(Bin(n, p) >= k) <= 1 - level``."""
    if not 0 <= k <= n or n < 1:
        raise UsageError(f"need 0 <= k <= n and n >= 1, got k={k}, n={n}")
    if not 0.0 < level < 1.0:
        raise UsageError(f"level must lie in (0, 1), got {level}")
    if k == 0:
        return 0.0
    alpha = 1.0 - level
    return _bisect_p(lambda p: special.bdtrc(k - 1, n, p) > alpha)[0]


# -- Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True)
class TailEstimate:
    """Outcome of a Monte Carlo run.

    ``sound`` is False when even the lower confidence limit at ``sound_level``
    on the violation frequency exceeds the claimed bound.
    """

    trials: int
    violations: int
    freq: float
    ci_level: float
    ci_upper: float
    sound_level: float
    ci_lower: float
    bound_rhs: float
    sound: bool


def count_run(spec: ProcessSpec, n: int, trials: int, thr: ThresholdSpec, master_seed: int, threads: int = 1) -> int:
    """Number of violating trials. Trial ``i`` uses ``trial_seed(master_seed, i)``."""
    kind, p1, p2 = spec.kernel
    starts = list(range(0, trials, _CHUNK))

    def work(start: int) -> int:
        seeds = trial_seeds(master_seed, start, min(trials, start + _CHUNK))
        return kernels.count_violations(
            kind, p1, p2, int(n), seeds, thr.base, thr.slope, thr.scale, float(thr.sign.value)
        )

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return sum(pool.map(work, starts))
    return sum(work(s) for s in starts)


def estimate_tail(
    spec: ProcessSpec,
    n: int,
    trials: int,
    thr: ThresholdSpec,
    bound: BoundValue,
    master_seed: int,
    level: float = 0.99,
    sound_level: float = 0.999,
    threads: int = 1,
) -> TailEstimate:
    """Estimate ``P(sign * D >= threshold)`` and compare it with ``bound``.

    The threshold is applied as given; it is the caller's job to build it for
    the same ``n`` (a mismatched one is a useful negative control).
    """
    if trials < 1:
        raise UsageError("trials must be positive")
    if n < 1:
        raise UsageError("n must be positive")
    k = count_run(spec, n, trials, thr, master_seed, threads)
    lower = ci_lower(k, trials, sound_level)
    return TailEstimate(
        trials=trials,
        violations=k,
        freq=k / trials,
        ci_level=level,
        ci_upper=ci_upper(k, trials, level),
        sound_level=sound_level,
        ci_lower=lower,
        bound_rhs=bound.rhs,
        sound=lower <= bound.rhs,
    )


# -- exact enumeration -----------------------------------------------------------


@dataclass(frozen=True)
class EnumResult:
    exact_prob: float
    outcomes: int


def enumerate_exact(spec: ProcessSpec, n: int, thr: ThresholdSpec) -> EnumResult:
    """Exact ``P(sign * D >= threshold)`` by expanding every outcome sequence.

    Supports every kernel here (each has at most two support points) for
    ``n <= 20``. Zero-probability branches are pruned.
    """
    if not 1 <= n <= MAX_ENUM_N:
        raise UsageError(f"enumeration supports 1 <= n <= {MAX_ENUM_N}, got {n}")
    kind, p1, p2 = spec.kernel
    S = np.zeros(1)
    D = np.zeros(1)
    prob = np.ones(1)
    for k in range(n):
        mu = _pykernels.cond_mean(kind, p1, p2, S, D, k)
        if kind == _pykernels.POINT_MASS:
            branches = [(mu, np.ones_like(mu))]
        elif kind == _pykernels.TWO_POINT:
            branches = [(mu + p2, np.full_like(mu, 0.5)), (mu - p2, np.full_like(mu, 0.5))]
        else:
            branches = [(np.ones_like(mu), mu), (np.zeros_like(mu), 1.0 - mu)]
        S = np.concatenate([S + x for x, _ in branches])
        D = np.concatenate([D + (mu - x) for x, _ in branches])
        prob = np.concatenate([prob * w for _, w in branches])
        keep = prob > 0
        S, D, prob = S[keep], D[keep], prob[keep]
    hit = _pykernels.violated(S, D, n, thr.base, thr.slope, thr.scale, thr.sign.value)
    return EnumResult(math.fsum(prob[hit]), int(prob.size))


# -- default campaign ------------------------------------------------------------


def default_battery() -> list[ProcessSpec]:
    return [
        ProcessSpec.make("iid_bernoulli", p=0.5),
        ProcessSpec.make("iid_bernoulli", p=0.95),
        ProcessSpec.make("two_point", mu=0.9, c=0.05),
        ProcessSpec.make("mean_reverting", p0=0.8, kappa=0.5),
        ProcessSpec.make("polya_like", a0=1.0, b0=1.0),
        ProcessSpec.make("adversarial_flip", p_lo=0.4, p_hi=0.6),
    ]


def default_bound_configs(n: int) -> list[tuple[str, ThresholdSpec, BoundValue]]:
    """Eight (label, threshold, bound) triples covering both parameterisations."""
    out = []
    for a, b in [(0.0, 1.0), (0.5, 1.0), (-0.5, 1.0), (1.0, 1.5)]:
        q = TheoremQuery(n, a, b)
        out.append((f"theorem1(a={a!r}, b={b!r})", theorem1_threshold(q), theorem1_rhs(q)))
    for eps, delta, s in [(1.0, 0.0, Sign.PLUS), (0.5, -0.9, Sign.PLUS), (1.0, 0.5, Sign.MINUS), (0.75, -0.8, Sign.MINUS)]:
        q = CorollaryQuery(n, eps, delta, s)
        out.append((f"cor1(epsilon={eps!r}, delta={delta!r}, s={s})", cor1_threshold(q), cor1_eval(q, delta)[1]))
    return out
