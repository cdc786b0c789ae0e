import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from adaptconc import _pykernels, kernels
from adaptconc._rng import trial_seed, trial_seeds
from adaptconc.bounds import BoundValue, Sign, TheoremQuery, ThresholdSpec, theorem1_rhs, theorem1_threshold
from adaptconc.errors import UsageError
from adaptconc.simulate import (
    ProcessSpec,
    Trajectory,
    ci_lower,
    ci_upper,
    default_battery,
    default_bound_configs,
    enumerate_exact,
    estimate_tail,
    generate,
    load_processes,
    violation_check,
)

BERN = ProcessSpec.make("iid_bernoulli", p=0.5)


def thr_ab(n, a, b):
    return theorem1_threshold(TheoremQuery(n, a, b))


# -- specs ---------------------------------------------------------------------


def test_spec_parse_roundtrip():
    for spec in default_battery():
        assert ProcessSpec.parse(str(spec)) == spec
    assert ProcessSpec.parse("two_point(0.9, 0.05)") == ProcessSpec.make("two_point", mu=0.9, c=0.05)
    assert ProcessSpec.parse(" iid_bernoulli( p = 0.3 ) ") == ProcessSpec.make("iid_bernoulli", p=0.3)


@pytest.mark.parametrize(
    "text",
    ["iid_bernoulli(p=1.5)", "two_point(mu=0.9, c=0.2)", "polya_like(a0=0, b0=1)", "nope(p=1)", "iid_bernoulli(q=0.5)",
     "iid_bernoulli(p=0.5, 0.3)", "iid_bernoulli(p=abc)", "iid_bernoulli", "adversarial_flip(p_lo=0.1, p_hi=2)"],
)
def test_spec_usage_errors(text):
    with pytest.raises(UsageError):
        ProcessSpec.parse(text)


def test_load_processes(tmp_path):
    f = tmp_path / "procs.txt"
    f.write_text("# battery\niid_bernoulli(p=0.5)\n\npolya_like(a0=1, b0=2)  # urn\n")
    assert load_processes(f) == [BERN, ProcessSpec.make("polya_like", a0=1, b0=2)]
    f.write_text("# nothing\n")
    with pytest.raises(UsageError):
        load_processes(f)


# -- generate ----------------------------------------------------------------------


def test_generate_examples():
    t = generate(ProcessSpec.make("iid_bernoulli", p=1.0), 5, 7)
    assert list(t.samples) == [1.0] * 5 and list(t.cond_means) == [1.0] * 5
    t = generate(ProcessSpec.make("point_mass", mu=0.5), 3, 7)
    assert list(t.samples) == [0.5] * 3 and list(t.cond_means) == [0.5] * 3
    assert t.gap == 0.0 and t.bias == 0.0


@pytest.mark.parametrize("spec", default_battery(), ids=str)
def test_generate_deterministic_and_in_range(spec):
    a = generate(spec, 50, 12345)
    b = generate(spec, 50, 12345)
    np.testing.assert_array_equal(a.samples, b.samples)
    np.testing.assert_array_equal(a.cond_means, b.cond_means)
    assert np.all((a.samples >= 0) & (a.samples <= 1))
    assert np.all((a.cond_means >= 0) & (a.cond_means <= 1))
    assert -1 <= a.bias <= 1


@pytest.mark.parametrize("spec", default_battery() + [ProcessSpec.make("mean_reverting", p0=0.3, kappa=3.0)], ids=str)
def test_cond_means_are_predictable(spec):
    # mu_m recomputed from the strict past must equal the recorded value
    t = generate(spec, 40, 99)
    kind, p1, p2 = spec.kernel
    S = D = 0.0
    for k in range(t.n):
        mu = float(_pykernels.cond_mean(kind, p1, p2, np.array([S]), np.array([D]), k)[0])
        assert mu == t.cond_means[k]
        D += mu - t.samples[k]
        S += t.samples[k]


@pytest.mark.parametrize("spec", default_battery() + [ProcessSpec.make("mean_reverting", p0=0.3, kappa=3.0)], ids=str)
def test_kernel_mean_exact(spec):
    # E[x_m - mu_m | past] = 0 at a random history depth: the average over 10^6
    # independent paths lies within 4 standard errors of zero
    kind, p1, p2 = spec.kernel
    xs, mus = kernels.simulate_paths(kind, p1, p2, 7, trial_seeds(2024, 0, 10**6))
    d = xs[:, 6] - mus[:, 6]
    se = math.sqrt(float(np.mean(mus[:, 6] * (1 - mus[:, 6]))) / d.size)
    assert abs(float(d.mean())) <= 4 * se + 1e-15


def test_trajectory_csv():
    t = generate(ProcessSpec.make("two_point", mu=0.9, c=0.05), 3, 1)
    lines = t.to_csv().splitlines()
    assert lines[0] == "index,x,mu"
    assert len(lines) == 4 and lines[1].startswith("1,")
    assert float(lines[1].split(",")[2]) == 0.9


def test_generate_usage():
    with pytest.raises(UsageError):
        generate(BERN, 0, 1)


# -- violation check ------------------------------------------------------------------


def test_violation_examples():
    t = generate(ProcessSpec.make("point_mass", mu=0.5), 4, 0)
    assert not violation_check(t, thr_ab(4, 0, 1))
    neg = ThresholdSpec(base=-1.0, slope=0.0, scale=2.0, sign=Sign.PLUS)
    assert violation_check(t, neg)
    for seed in range(64):
        t = generate(BERN, 4, seed)
        assert violation_check(t, thr_ab(4, 0, 1)) == (t.total == 0)


def test_violation_tie_counts():
    # D exactly on the threshold is a violation
    t = Trajectory(np.zeros(4), np.full(4, 0.5), 0)  # D = 2, threshold (a=0, b=1) = 2
    assert violation_check(t, thr_ab(4, 0, 1))
    t = Trajectory(np.zeros(4), np.full(4, 0.5 - 1e-6), 0)
    assert not violation_check(t, thr_ab(4, 0, 1))


def test_violation_scale_mismatch():
    t = generate(BERN, 4, 0)
    with pytest.raises(UsageError):
        violation_check(t, thr_ab(9, 0, 1))
    bad = Trajectory(np.zeros(3), np.zeros(4), 0)
    with pytest.raises(UsageError):
        violation_check(bad, thr_ab(4, 0, 1))


# -- confidence limits -----------------------------------------------------------------


def test_ci_examples():
    assert ci_upper(0, 1000, 0.99) == pytest.approx(1 - 0.01 ** (1 / 1000), abs=1e-12)
    assert ci_upper(0, 1000, 0.99) == pytest.approx(0.0045946, abs=1e-7)
    assert ci_upper(10, 10, 0.99) == 1.0
    assert ci_upper(1, 10, 0.99) == pytest.approx(0.50435, abs=1e-5)
    assert ci_lower(0, 10, 0.99) == 0.0


@settings(max_examples=100)
@given(st.integers(1, 5000), st.data(), st.sampled_from([0.9, 0.99, 0.999]))
def test_ci_match_beta_quantiles(n, data, level):
    k = data.draw(st.integers(0, n))
    up = ci_upper(k, n, level)
    lo = ci_lower(k, n, level)
    if k < n:
        assert up == pytest.approx(stats.beta.ppf(level, k + 1, n - k), rel=1e-7, abs=1e-12)
    if k > 0:
        assert lo == pytest.approx(stats.beta.ppf(1 - level, k, n - k + 1), rel=1e-7, abs=1e-12)
    assert lo <= k / n <= up


# -- estimate_tail -----------------------------------------------------------------------


def test_estimate_tail_bernoulli_matches_enumeration():
    thr = thr_ab(4, 0, 1)
    est = estimate_tail(BERN, 4, 10**5, thr, theorem1_rhs(TheoremQuery(4, 0, 1)), master_seed=11)
    lo, hi = stats.binom.interval(0.999, 10**5, 0.0625)
    assert lo <= est.violations <= hi
    assert est.sound and est.ci_lower <= 0.0625 <= est.ci_upper


def test_estimate_tail_point_mass():
    est = estimate_tail(ProcessSpec.make("point_mass", mu=0.3), 10, 5000, thr_ab(10, 0, 1), BoundValue(-2.0), 1)
    assert est.violations == 0 and est.freq == 0 and est.sound


def test_estimate_tail_threads_independent():
    thr = thr_ab(30, 0.2, 0.5)
    bv = theorem1_rhs(TheoremQuery(30, 0.2, 0.5))
    spec = ProcessSpec.make("adversarial_flip", p_lo=0.4, p_hi=0.6)
    a = estimate_tail(spec, 30, 40000, thr, bv, 5, threads=1)
    b = estimate_tail(spec, 30, 40000, thr, bv, 5, threads=6)
    assert a == b


def test_replay_matches_count():
    spec = ProcessSpec.make("mean_reverting", p0=0.8, kappa=0.5)
    thr = thr_ab(12, 0, 0.5)
    est = estimate_tail(spec, 12, 3000, thr, theorem1_rhs(TheoremQuery(12, 0, 0.5)), 77)
    replay = sum(violation_check(generate(spec, 12, trial_seed(77, i)), thr) for i in range(3000))
    assert replay == est.violations > 0


def test_trial_seeds_match_scalar():
    arr = trial_seeds(2**64 - 1, 5, 9)
    assert [int(v) for v in arr] == [trial_seed(2**64 - 1, i) for i in range(5, 9)]


def test_estimate_tail_usage():
    with pytest.raises(UsageError):
        estimate_tail(BERN, 4, 0, thr_ab(4, 0, 1), BoundValue(-1.0), 0)


def test_negative_control_is_unsound():
    # bound evaluated at n=4 but applied to n=100 paths: P ~ 0.38 > 0.135
    n = 100
    thr = thr_ab(4, 0, 1)
    est = estimate_tail(BERN, n, 20000, thr, theorem1_rhs(TheoremQuery(4, 0, 1)), 3)
    assert not est.sound


# -- enumeration ---------------------------------------------------------------------------


def test_enumerate_examples():
    assert enumerate_exact(BERN, 4, thr_ab(4, 0, 1)).exact_prob == 0.0625
    assert enumerate_exact(BERN, 4, thr_ab(4, 0.5, 1)).exact_prob == 0.0625
    assert theorem1_rhs(TheoremQuery(4, 0.5, 1)).rhs == pytest.approx(math.exp(-27 / 32), rel=1e-14)
    assert enumerate_exact(BERN, 1, thr_ab(1, 0, 1.5)).exact_prob == 0.0


def test_enumerate_brute_force():
    # compare against an independent itertools enumeration for an iid kernel
    import itertools

    p, n, a, b = 0.3, 6, 0.25, 0.6
    thr = thr_ab(n, a, b)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        S = sum(bits)
        D = n * p - S
        if D >= (b - a * (1 - 2 * S / n)) * math.sqrt(n) - 1e-9:
            total += p**S * (1 - p) ** (n - S)
    got = enumerate_exact(ProcessSpec.make("iid_bernoulli", p=p), n, thr).exact_prob
    assert got == pytest.approx(total, rel=1e-13)


def test_enumerate_limits():
    with pytest.raises(UsageError):
        enumerate_exact(BERN, 21, thr_ab(21, 0, 1))
    r = enumerate_exact(ProcessSpec.make("point_mass", mu=0.4), 20, thr_ab(20, 0, 1))
    assert r.exact_prob == 0.0 and r.outcomes == 1


@pytest.mark.parametrize("spec", default_battery(), ids=str)
def test_mc_inside_exact_band(spec):
    for n in (4, 8, 12):
        thr = thr_ab(n, 0, 0.5)
        p = enumerate_exact(spec, n, thr).exact_prob
        est = estimate_tail(spec, n, 20000, thr, theorem1_rhs(TheoremQuery(n, 0, 0.5)), master_seed=n)
        lo, hi = stats.binom.interval(0.999, 20000, p)
        assert lo <= est.violations <= hi


def test_default_bound_configs_valid():
    cfgs = default_bound_configs(100)
    assert len(cfgs) == 8
    for label, thr, bv in cfgs:
        assert not bv.vacuous, label
        assert thr.scale == 10.0
