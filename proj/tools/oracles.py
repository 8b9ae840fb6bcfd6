#!/usr/bin/env python3
"""Regenerate the closed-form oracle constants frozen into the C++ tests.

Everything here is computed independently of the C++ library, from
well-known closed forms, so the tests compare two genuinely separate
derivations.  Run:  python3 tools/oracles.py
"""

import mpmath as mp

mp.mp.dps = 30


def a00_d3_srw(t):
    """Return probability a_t(0,0) for the rate-1 SRW on Z^3.

    Coordinates factorize: each axis is a continuous-time walk that holds an
    exponential(1/3) clock and steps +-1, whose return probability is
    e^{-t/3} I_0(t/3).
    """
    x = mp.mpf(t) / 3
    return (mp.e ** (-x) * mp.besseli(0, x)) ** 3


def watson_green():
    """Green function g = int_0^inf a_t(0,0) dt for the d=3 SRW.

    Closed form (Watson's integral, rescaled to the rate-1 walk):
    G = (sqrt(6)/(32 pi^3)) Gamma(1/24) Gamma(5/24) Gamma(7/24) Gamma(11/24)
    gives the expected number of visits for the discrete walk; the rate-1
    continuous-time walk has the same Green value.
    """
    g = (mp.sqrt(6) / (32 * mp.pi ** 3)) * mp.gamma(mp.mpf(1) / 24) * \
        mp.gamma(mp.mpf(5) / 24) * mp.gamma(mp.mpf(7) / 24) * \
        mp.gamma(mp.mpf(11) / 24)
    return g


def cumulative_a00(t):
    """U(t) = int_0^t a_s(0,0) ds, by direct high-precision quadrature."""
    return mp.quad(a00_d3_srw, [0, t])


def main():
    print("d=3 SRW closed forms (theta = 1, rho = 1):")
    print(f"  a_1(0,0)                = {a00_d3_srw(1)}")
    g = watson_green()
    print(f"  Green g                 = {g}")

    # Poisson-start covariance at the origin, Lemma-form with constant
    # E sigma = rho * theta:  Cov(xi_1, xi_2) = a_1 + (1/2)(U(3) - U(1)).
    cov12 = a00_d3_srw(1) + (cumulative_a00(3) - cumulative_a00(1)) / 2
    print(f"  Cov(xi_1(0), xi_2(0))   = {cov12}")

    # Equilibrium variance: theta + (sigma_eq / 2) g = 1 + g/2.
    print(f"  equilibrium Var(xi(0))  = {1 + g / 2}")

    # Limit coefficients for det Q = 1/27 (SRW: Q = I/3), sigma_eq = 1.
    det_q = mp.mpf(1) / 27
    k_eq = mp.sqrt(2) / (3 * mp.pi ** mp.mpf(1.5)) / mp.sqrt(det_q)
    print(f"  fBM(3/4) Var(X_1) = 2K  = {2 * k_eq}")
    print(f"  sub-fBM Var(X_1)        = {2 * k_eq * (2 - mp.sqrt(2))}")

    # Local-CLT ratios a_t(0,0) / ((2 pi t)^{-3/2} det(Q)^{-1/2}).
    for t in (100, 400):
        gauss = (2 * mp.pi * t) ** mp.mpf(-1.5) / mp.sqrt(det_q)
        print(f"  CLT ratio at t = {t:<4}   = {a00_d3_srw(t) / gauss}")


if __name__ == "__main__":
    main()
