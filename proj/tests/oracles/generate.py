"""Reference values for the unit tests, computed at 30 digits with mpmath.

The formulas here are written out directly (literal nested sums, closed forms) and
share no code with the C++ library. Run once; the printed values are pasted into
tests/*.cpp and kept fixed there.
"""
import itertools
from mpmath import mp, mpf, cos, sin, exp, log

mp.dps = 30


def corners(n):
    return list(itertools.product((0, 1), repeat=n))


def delta(f, t):
    return sum((-1) ** sum(i) * f(tuple(a - b for a, b in zip(t, i))) for i in corners(len(t)))


def g_literal(y, theta, t):
    """Nested sums with the bounds exactly as stated for the explicit construction."""
    n = len(t)
    w = lambda k: exp(-sum(a * b for a, b in zip(k, theta))) * delta(y, k)

    def pos(level, ks):
        if level == n:
            return w(ks)
        lo = 1 - sum(ks) - sum(t[level + 1:])
        return sum((pos(level + 1, ks + (k,)) for k in range(lo, t[level] + 1)), mpf(0))

    def neg(level, ks):
        if level == n:
            return w(ks)
        hi = -sum(ks) - sum(t[level + 1:]) - n + level + 1
        return sum((neg(level + 1, ks + (k,)) for k in range(t[level] + 1, hi + 1)), mpf(0))

    if sum(t) >= 1:
        return pos(0, ())
    return (-1) ** n * neg(0, ())


def y2(t):
    return cos(mpf("0.7") * t[0] + mpf("0.3")) + mpf("0.5") * sin(mpf("1.1") * t[1] - mpf("0.2")) + mpf("0.1") * t[0] * t[1]


def y3(t):
    return cos(mpf("0.4") * t[0] - mpf("0.9") * t[1] + mpf("0.25") * t[2]) + mpf("0.2") * t[2]


def series(g, theta, t, m):
    n = len(t)
    total = mpf(0)
    for j in itertools.product(range(m + 1), repeat=n):
        total += exp(-sum(a * b for a, b in zip(j, theta))) * delta(g, tuple(a - b for a, b in zip(t, j)))
    return total


def g_series(t):
    return sin(t[0]) * cos(mpf("0.5") * t[1]) + mpf("0.1") * t[0] * t[1]


def fgn(h, k):
    h2 = 2 * mpf(h)
    return (abs(k + 1) ** h2 - 2 * abs(k) ** h2 + abs(k - 1) ** h2) / 2


def main():
    th2 = (mpf("0.6"), mpf("1.3"))
    for t in [(1, 0), (2, 1), (3, 3), (0, 2), (-2, -1), (-3, 0), (-1, -4), (1, -1), (4, -2)]:
        print("G2", t, mp.nstr(g_literal(y2, th2, t), 20))
    th3 = (mpf("0.5"), mpf("0.9"), mpf("1.7"))
    for t in [(1, 0, 0), (2, 1, -1), (1, 1, 1), (-2, -1, 0), (-1, -1, -2), (0, 0, -1)]:
        print("G3", t, mp.nstr(g_literal(y3, th3, t), 20))
    ths = (mpf("0.9"), mpf("0.4"))
    for t in [(0, 0), (3, -2), (5, 5)]:
        print("X2", t, mp.nstr(series(g_series, ths, t, 12), 20))
    for h in ("0.3", "0.7"):
        print("fgn", h, [mp.nstr(fgn(h, k), 20) for k in (0, 1, 2, 5)])
    h, th = mpf("0.7"), mpf("0.8")
    c = (exp(h * th) + exp(-h * th) - exp(-h * th) * (exp(th) - 1) ** (2 * h)) / 2
    print("second_kind_lag1", mp.nstr(c, 20))
    print("fbs_scaled", mp.nstr(mpf("0.5") * (mpf(2) ** mpf("1.4") + mpf(3) ** mpf("1.4") - 1), 20))


main()
