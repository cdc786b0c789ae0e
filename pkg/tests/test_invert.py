import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptconc.bounds import Sign
from adaptconc.errors import DomainError, UsageError
from adaptconc.invert import FAMILIES, evaluate, invert_epsilon


def test_azuma_examples():
    eps = invert_epsilon("azuma", 0.05)
    assert eps == pytest.approx(math.sqrt(math.log(20) / 2), abs=1e-11)
    assert eps == pytest.approx(1.2238734, abs=1e-7)
    assert invert_epsilon("azuma", 1.0) == 0.0


def test_cor1_example():
    eps = invert_epsilon("cor1", 0.0992, n=100, delta=0.5, s=Sign.PLUS)
    assert eps == pytest.approx(1.0, abs=1e-4)
    rhs = evaluate("cor1", eps, n=100, delta=0.5, s=Sign.PLUS).rhs
    assert rhs == pytest.approx(0.0992, rel=1e-9)


CASES = [
    ("azuma", {}),
    ("bernstein", dict(n=10**4, variance=0.0475)),
    ("bennett", dict(n=100, variance=0.1)),
    ("cor1", dict(n=100, delta=0.5, s=Sign.PLUS)),
    ("cor1", dict(n=50, delta=-0.3, s=Sign.MINUS)),
    ("cor2", dict(n=400, delta=0.2, s=Sign.PLUS)),
    ("cor3", dict(n=10**4, p=0.95, s=Sign.MINUS)),
    ("rs13", dict(means=[0.75] * 10, s=Sign.PLUS)),
    ("chernoff", dict(n=10**4, p=0.3, s=Sign.PLUS)),
]


@pytest.mark.parametrize("ineq,params", CASES)
@settings(max_examples=40, deadline=None)
@given(st.floats(1e-6, 0.9))
def test_right_inverse(ineq, params, target):
    try:
        eps = invert_epsilon(ineq, target, **params)
    except DomainError as exc:
        assert "attainable" in str(exc) or "validity" in str(exc)
        return
    rhs = evaluate(ineq, eps, **params).rhs
    assert rhs == pytest.approx(target, rel=1e-9)


def test_unreachable_below():
    # multiplicative Chernoff needs delta < 1, which caps eps
    with pytest.raises(DomainError, match="infimum"):
        invert_epsilon("chernoff", 1e-3, n=100, p=0.05, s=Sign.PLUS)


def test_no_valid_epsilon():
    # 1 - delta*(delta - 4eps/(3 sqrt n)) <= 0 for every eps >= 0 when delta > 1 and s = minus
    with pytest.raises(DomainError, match="validity domain"):
        invert_epsilon("cor1", 0.1, n=100, delta=1.5, s=Sign.MINUS)


def test_bad_targets():
    for t in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            invert_epsilon("azuma", t)


def test_usage():
    with pytest.raises(UsageError):
        invert_epsilon("nope", 0.5)
    with pytest.raises(UsageError):
        invert_epsilon("cor3", 0.5, n=10)
    assert set(FAMILIES) >= {"azuma", "hoeffding", "bernstein", "bennett", "cor1", "cor2", "cor3", "rs13", "chernoff"}
