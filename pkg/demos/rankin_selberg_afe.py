"""
Rankin-Selberg L-values by the approximate functional equation
==============================================================

"""

from glnkit.lfun import afe_value, c_ratio, exact_rs_L, growth_constant, isobaric_form, maass_selberg_convergence

# an isobaric GL(2) form: L(s, f x f~) is a product of four shifted zeta values
form = isobaric_form([0.7, -0.7])

for t in (10, 20, 40):
    one, two = afe_value(form, t, 1.0), afe_value(form, t, 2.0)
    exact = exact_rs_L(form, one.s)
    print(f"t = {t:3d}  L = {one.value:.12f}  |X=1 - X=2| = {abs(one.value - two.value):.1e}"
          f"  vs zeta product {abs(one.value - exact):.1e}  residue part {abs(one.residue_term):.1e}")

# the ratio of completed L-values is unimodular on the critical line
for t in (2.5, 4.0):
    print(f"|c(1/2 + {t}i)| = {abs(c_ratio(form, 0.5 + 1j * t)):.14f}")

# first-order convergence of the truncated inner product to its diagonal limit
for r in maass_selberg_convergence(form, 2.5, [1.0, 100.0], method="exact"):
    print(f"A = {r.A:6.0f}  limit {r.limit:.8f}  errors {r.errors[0]:.2e} {r.errors[1]:.2e}  slope {r.slope:.4f}")

fit = growth_constant(form, ts=(10, 20, 40))
print("growth constant C with |L| <= C log t:", round(fit.C, 4), "ratios", [round(x, 4) for x in fit.ratios])
