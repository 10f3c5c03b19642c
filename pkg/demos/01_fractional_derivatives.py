"""Fractional derivatives of the basis functions.

The spatial trial functions are combinations of Legendre polynomials and the
temporal ones are poly-fractonomials (1 + eta)^tau P^{-tau,tau}. Both have
Riemann-Liouville derivatives in closed form. This script compares the
closed forms with a direct evaluation of the defining integral.

Run with ``python3 demos/01_fractional_derivatives.py``.
"""

import numpy as np
from scipy import integrate
from scipy.special import eval_legendre, gamma

from dopg.basis import frac_deriv_legendre, frac_deriv_temporal, temporal_basis_eval


def rl_left_by_quadrature(f, df, sigma, x):
    # D^s f(x) = f(-1) (x+1)^-s / Gamma(1-s) + 1/Gamma(1-s) int_{-1}^x f'(y) (x-y)^-s dy
    tail, _ = integrate.quad(df, -1.0, x, weight="alg", wvar=(0.0, -sigma), epsabs=1e-14, epsrel=1e-13)
    return (f(-1.0) * (x + 1.0) ** (-sigma) + tail) / gamma(1.0 - sigma)


sigma = 0.35
print(f"left derivative of order {sigma} of P_n at x = 0.4")
print("  n   closed form         quadrature")
for n in (1, 3, 6):
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    dcoef = np.polynomial.legendre.legder(coef)
    quad = rl_left_by_quadrature(
        lambda y: eval_legendre(n, y), lambda y: np.polynomial.legendre.legval(y, dcoef), sigma, 0.4
    )
    print(f"  {n}   {frac_deriv_legendre('left', n, sigma, 0.4): .12e}  {quad: .12e}")

# When the order equals the basis exponent the derivative becomes a polynomial.
tau = 0.3
eta = np.linspace(-0.9, 0.9, 5)
print(f"\npsi_3 with tau = {tau}, derivative of order tau:")
print("  eta     psi_3(eta)     D^tau psi_3(eta)")
for e, p, d in zip(eta, temporal_basis_eval(3, tau, eta), frac_deriv_temporal("left", 3, tau, tau, eta)):
    print(f"  {e:+.2f}  {p: .6f}     {d: .6f}")
