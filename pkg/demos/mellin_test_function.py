"""
The Mellin test function and its inverse
========================================

"""

import numpy as np

from glnkit.psi import (PsiSpec, dilation_expansion, mellin_cutoff, mellin_cutoff_exact, psi_exact,
                        psi_inverse_mellin, psi_tilde, zero_checks)

spec = PsiSpec(R=2.0, n=2, alpha=(1.0, -1.0), order=4)
print("value at 0:", psi_tilde(spec, 0))
for z in zero_checks(spec):
    print(f"zero at {z.d:+.1f}i: measured order {z.measured_order:.3f}, expected {z.expected_order}")

# the inverse transform is a positive combination of dilates of y^R exp(-y^(1/2n))
print("dilation weights:", [(round(lam, 4), round(c, 6)) for lam, c in dilation_expansion(spec)][:5], "...")
ys = np.logspace(-2, 2, 9)
print("inverse Mellin:", psi_inverse_mellin(spec, ys))
print("max |numeric - exact|:", np.max(np.abs(psi_inverse_mellin(spec, ys) - psi_exact(spec, ys))))

# the step function max(0, 1 - 1/x) as a contour integral
for x in (0.5, 1.0, 2.0, 10.0):
    print(f"x = {x:5.1f}: contour {mellin_cutoff(x):.10f}  closed form {mellin_cutoff_exact(x):.10f}")
