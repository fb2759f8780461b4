"""Independent high-precision reference values frozen into the C++ tests.

Run: python3 tests/oracle/frozen_values.py
Everything here is recomputed from first principles with mpmath at 50 digits;
no code from the library is used.
"""
import math

import mpmath as mp

mp.mp.dps = 50

ZETA, D, EPS = mp.mpf("0.05"), 10, mp.mpf("0.05")
DELTA = 4 * mp.sqrt(mp.log(1 / ZETA)) / D
N_MAX = int(mp.ceil(12 / DELTA))
S = DELTA / (2 * EPS)
G = mp.npdf
PHI = mp.ncdf


def a_pieces():
    return [(n * DELTA - EPS, n * DELTA + EPS, mp.mpf(0)) for n in range(-N_MAX, N_MAX + 1)]


def b_pieces():
    out = []
    for n in range(-N_MAX, N_MAX + 1):
        if abs(n) <= D:
            out.append((n * DELTA - 5 * EPS, n * DELTA - 3 * EPS, 4 * EPS))
        else:
            out.append((n * DELTA - EPS, n * DELTA + EPS, mp.mpf(0)))
    return out


Z = sum(S * (PHI(hi) - PHI(lo)) for lo, hi, _ in a_pieces())


def moment(pieces, t):
    return sum(mp.quad(lambda x: x**t * S * G(x + h), [lo, hi]) for lo, hi, h in pieces) / Z


def chi2(pieces):
    return sum(mp.quad(lambda x: (S * G(x + h)) ** 2 / G(x), [lo, hi]) for lo, hi, h in pieces) / Z**2 - 1


def off_j_mass():
    return sum(S * (PHI(hi) - PHI(lo)) for lo, hi, _ in a_pieces() if abs(round(float((lo + hi) / 2 / DELTA))) > D) / Z


def schedule(log_m, eta, c_tau=64, c_m=64, c_d=8):
    log_m = mp.mpf(log_m)
    zeta = mp.exp(-mp.sqrt(log_m))
    liz = -mp.log(zeta)
    llm = mp.log(log_m)
    lit = log_m**2 / (c_tau * llm**3 * liz)
    m = mp.ceil(c_m * lit * liz**4)
    d = mp.ceil(c_d * mp.sqrt(liz * lit * mp.log(lit)))
    k = mp.ceil(4 * lit / mp.log(liz))
    mp_log = mp.loggamma(m + 8 * d + 1) - mp.loggamma(m + 1) - mp.loggamma(8 * d + 1)
    return dict(log_tau=-lit, m=m, d=d, k=k, delta=4 * mp.sqrt(liz) / d,
                log_epsilon=-lit - k * mp.log(12 * mp.sqrt(liz)), M_prime_log=mp_log)


def show(name, value):
    print(f"{name} = {mp.nstr(value, 20)}")


if __name__ == "__main__":
    show("delta", DELTA)
    show("n_max", N_MAX)
    show("Z", Z)
    show("bound_AB_2", 4 * EPS * (2 + 8 * mp.sqrt(mp.log(1 / ZETA))) ** 2)
    show("log_binomial_100_50", mp.log(math.comb(100, 50)))
    show("fourier_t0_delta05", 2 * mp.nsum(lambda n: mp.exp(-(mp.pi * n / mp.mpf("0.5")) ** 2 / 2), [1, mp.inf]))
    show("trunc_M4_half", mp.quad(lambda x: x**4 * G(x), [-0.5, 0.5]))
    show("chi2_A", chi2(a_pieces()))
    show("chi2_A_closed", S / Z - 1)
    show("chi2_B", chi2(b_pieces()))
    for t in (2, 4, 6):
        show(f"EA{t}", moment(a_pieces(), t))
    for t in (1, 3, 4):
        show(f"EB{t}", moment(b_pieces(), t))
    show("off_j_mass", off_j_mass())
    show("opt_eta03", mp.mpf("0.3") * off_j_mass())
    for lm in (1e3, 1e4, 1e5):
        for key, val in schedule(lm, 0.49).items():
            show(f"plan_{int(lm)}_{key}", val)
