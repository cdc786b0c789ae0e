"""Independent high-precision reference evaluations (mpmath, 50 digits).

Written directly from the closed forms; nothing here imports the package.
"""

from mpmath import cosh, exp, expm1, log, mp, mpf, sinh, sqrt

mp.dps = 50


def theorem1_log(n, a, b):
    n, a, b = mpf(n), mpf(a), mpf(b)
    return -2 * (b * b - a * a) / (1 + 4 * a / (3 * sqrt(n))) ** 2


def cor1_log(n, eps, delta, s):
    n, eps, delta = mpf(n), mpf(eps), mpf(delta)
    q = delta - 4 * s * eps / (3 * sqrt(n))
    return -2 * eps**2 / (1 - q * q)


def cor1_threshold(n, eps, delta, s, Delta):
    n, eps, delta, Delta = mpf(n), mpf(eps), mpf(delta), mpf(Delta)
    q = delta - 4 * s * eps / (3 * sqrt(n))
    return (1 - Delta * q) / (1 - delta * q) * eps * sqrt(n)


def cor2_log(n, eps, delta, s):
    n, eps, delta = mpf(n), mpf(eps), mpf(delta)
    q = delta + 2 * s * eps / (3 * sqrt(n))
    return -2 * eps**2 / (1 - q * q)


def cor3_log(n, p, eps, s):
    n, p, eps = mpf(n), mpf(p), mpf(eps)
    t = s * eps / (3 * sqrt(n))
    return -(eps**2) / (2 * (p - t) * (1 - p + t))


def c_of(p, s):
    p = mpf(p)
    if p == 0 or p == 1:
        return mpf(0)
    if p == mpf(1) / 2:
        return mpf(1) / 4
    if (p < 0.5 and s == 1) or (p >= 0.5 and s == -1):
        return p * (1 - p)
    return (1 - 2 * p) / (2 * log((1 - p) / p))


def chernoff_log(np_, delta, s):
    np_, delta = mpf(np_), mpf(delta)
    sd = s * delta
    return np_ * (-sd - (1 - sd) * log(1 - sd))


def G(x, y, z):
    x, y, z = mpf(x), mpf(y), mpf(z)
    if z == 0:
        return -18 * (x * x - y * y) / (4 * y + 3) ** 2 + 1 - 1 / (2 * y + 1) - log(2 * y + 1)
    return (
        -18 * (x * x - y * y) / (4 * y + 3) ** 2
        + 1
        + (x - y) * z / (2 * y + 1)
        - z / (-expm1(-z) * (2 * y + 1))
        - log(-expm1(-z) * (2 * y + 1) / z)
    )


def H(x, y):
    """G along the stationary curve z = 36x(2y+1)/(4y+3)^2."""
    x, y = mpf(x), mpf(y)
    return G(x, y, 36 * x * (2 * y + 1) / (4 * y + 3) ** 2)


def f1(w):
    w = mpf(w)
    return (3 / w + w) * sinh(w) - 3 * cosh(w)


def f2(w):
    w = mpf(w)
    return 4 * w + 2 * w * cosh(2 * w) - 3 * sinh(2 * w)
