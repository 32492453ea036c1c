#!/usr/bin/env python3
"""Mint golden values for the fracpoisson test suite.

Every value is an extended-precision series sum in mpmath with the working
precision sized to the largest term, so cancellation never reaches the
printed digits. Output is the CSV fixture read by `tests/golden.rs`.

    python3 tools/mint_golden.py > crates/core/tests/fixtures/golden.csv
"""

import csv
import sys

import mpmath as mp

GUARD_DIGITS = 40


def _series(term, z_abs_log10_peak):
    """Sum `term(k)` until terms are negligible, at a precision covering the peak."""
    with mp.workdps(int(max(z_abs_log10_peak, 0)) + GUARD_DIGITS):
        total = mp.mpf(0)
        k = 0
        small = 0
        while True:
            t = term(k)
            total += t
            if t == 0 or abs(t) < mp.mpf(10) ** (-(mp.mp.dps + 5)) * max(abs(total), 1):
                small += 1
                if small > 3:
                    return +total
            else:
                small = 0
            k += 1


def _peak_log10(alpha, z):
    # the largest term of Σ |z|^k / Γ(αk+1) is about exp(|z|^{1/α})
    return float(abs(z)) ** (1.0 / alpha) / 2.302585 + 5


def ml(alpha, z, n=0):
    alpha, z = mp.mpf(alpha), mp.mpf(z)

    def term(k):
        j = k + n
        # d^n/dz^n z^j = j!/(j-n)! z^{j-n}
        return mp.rf(k + 1, n) * z**k * mp.rgamma(alpha * j + 1)

    return _series(term, _peak_log10(float(alpha), float(z)) + 3 * n)


def wright(lam, mu, z):
    lam, mu, z = mp.mpf(lam), mp.mpf(mu), mp.mpf(z)
    peak = float(abs(z)) ** (1.0 / (1.0 + float(lam))) / 2.302585 + 5

    def term(k):
        return z**k / mp.factorial(k) * mp.rgamma(lam * k + mu)

    return _series(term, peak)


def m_wright(nu, x):
    return wright(-mp.mpf(nu), 1 - mp.mpf(nu), -mp.mpf(x))


def stable_density(beta, t):
    beta, t = mp.mpf(beta), mp.mpf(t)
    return beta * t ** (-beta - 1) * m_wright(beta, t ** (-beta))


def pmf(beta, t, n):
    x = mp.mpf(t) ** mp.mpf(beta)
    return x**n / mp.factorial(n) * ml(beta, -x, n)


def renewal(beta, t):
    beta = mp.mpf(beta)
    return mp.mpf(t) ** beta / mp.gamma(1 + beta)


ROWS = []


def emit(function, p1, p2, n, x, value, provenance):
    ROWS.append((function, p1, p2, n, x, mp.nstr(value, 20, strip_zeros=False), provenance))


def main():
    mp.mp.dps = 50
    for alpha in ["0.3", "0.5", "0.7", "0.9", "1"]:
        for z in ["-0.5", "-1", "-3", "-6", "-12", "0.5", "2"]:
            emit("ml", alpha, "", 0, z, ml(alpha, z), "mpmath-series")
    for alpha in ["0.5", "0.8"]:
        for z in ["-1", "-4"]:
            for n in [1, 2, 5]:
                emit("ml-deriv", alpha, "", n, z, ml(alpha, z, n), "mpmath-series")
    for lam, mu in [("0.5", "1.5"), ("-0.25", "0.75"), ("-0.5", "0.5"), ("1", "1")]:
        for z in ["-2", "-0.5", "1", "3"]:
            emit("wright", lam, mu, 0, z, wright(lam, mu, z), "mpmath-series")
    for nu in ["0.25", "0.5", "0.75"]:
        for x in ["0", "0.5", "1", "2", "4"]:
            emit("m-wright", nu, "", 0, x, m_wright(nu, x), "mpmath-series")
    for beta in ["0.3", "0.5", "0.8"]:
        for t in ["0.5", "1", "3"]:
            emit("stable-density", beta, "", 0, t, stable_density(beta, t), "mpmath-series")
    for beta in ["0.3", "0.5", "0.8", "0.95"]:
        for t in ["0.1", "1", "2.5"]:
            for n in [0, 1, 3, 8]:
                emit("pmf", beta, "", n, t, pmf(beta, t, n), "mpmath-series")
    for beta in ["0.5", "0.75"]:
        for t in ["1", "4"]:
            emit("renewal", beta, "", 0, t, renewal(beta, t), "closed-form")
    # half order has the closed form exp(z^2) erfc(-z); keep one witness of it
    z = mp.mpf(-5)
    emit("ml", "0.5", "", 0, "-5", mp.exp(z * z) * mp.erfc(-z), "erfc-closed-form")

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["function", "p1", "p2", "n", "x", "expected", "provenance"])
    w.writerows(ROWS)


if __name__ == "__main__":
    main()
