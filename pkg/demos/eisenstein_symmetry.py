"""
Eisenstein series on GL(4): symmetry and the coset sum
======================================================

"""

import numpy as np

from glnkit.matrix_core import IwasawaCoords, iwasawa_decompose, y_from_wedges
from glnkit.theta import eisenstein_completed, eisenstein_coset_sum, functional_equation_check

rng = np.random.default_rng(0)

# a random point of GL(4) in Iwasawa form, and the same y read off from wedge norms
g = rng.normal(size=(4, 4))
z = iwasawa_decompose(g)
print("y from QR:         ", z.y)
print("y from wedge norms:", y_from_wedges(g))

# the completed series is symmetric under z -> transpose inverse, s -> 1 - s
point = IwasawaCoords.from_y([1.3, 1.1, 1.7])
for s in (0.6 + 0.3j, 0.3 + 1.1j, 0.5 + 5j):
    row = functional_equation_check(point, s)
    print(f"s = {s}:  E*(z, s) = {row.value:.10f}   E*(z', 1-s) = {row.reflected:.10f}   residual {row.residual:.1e}")

# at s = 3 the theta integral equals twice the truncated coset sum
theta_value = eisenstein_completed(point, 3.0)
coset_value = eisenstein_coset_sum(point, 3.0, 4)
print("theta value / coset sum at s = 3:", theta_value / coset_value)
