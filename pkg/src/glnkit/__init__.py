"""Numerics and exact arithmetic for GL(n) Eisenstein series, Whittaker
functions, Rankin–Selberg L-functions and sieve test functions.

Modules
-------
matrix_core
    Iwasawa coordinates, exact minors, wedge norms and the height function.
cosets
    Minor-signature coset keys and lattice enumeration of coset representatives.
special, quadrature, whittaker
    Gamma and Bessel helpers, line quadrature, Whittaker functions.
theta
    Completed maximal parabolic Eisenstein series through theta integrals.
lfun
    Rankin–Selberg coefficients, gamma factors, the approximate functional
    equation, the ratio of completed L-values and the Maass–Selberg evaluator.
sieve, psi
    Prime-density scans and the Mellin test function.
cli
    The ``glnkit`` command.
"""

__version__ = "0.1.0"
