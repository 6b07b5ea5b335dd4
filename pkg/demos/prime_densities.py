"""
Prime densities for the sieve lemmas
====================================

"""

import numpy as np

from glnkit.lfun import sato_tate_form
from glnkit.sieve import PrimeWindow, eta, eta_failures, eta_lower_density, good_prime_density, overlap_density

print("eta_0(12) =", eta(0, 12), "(number of divisors)")
print("eta_{0.5i}(7) =", eta(0.5j, 7))

N = 10**5
window = PrimeWindow.build(N)
print("primes in [N, 2N]:", window.count)

form = sato_tate_form(2, seed=1)
for rep, label in ((eta_lower_density(10, 2, N, window), "eta large"),
                   (good_prime_density(form, N, window), "lambda(p) nonzero"),
                   (overlap_density(form, 10, 2, N, window), "both")):
    print(f"{label:18s} fraction {rep.fraction:.4f}  threshold {rep.threshold:.4f}  pass {rep.passed}")

# with a generous bound the failures appear, always next to zeros of cos(n t log p)
bad, dist = eta_failures(10, 2, N, 0.05)
print(f"{bad.size} failures, max distance to a zero in log p: {dist.max():.2e}")
print("first few:", np.asarray(bad[:8]))
