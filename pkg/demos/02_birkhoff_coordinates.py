r"""
Birkhoff coordinates
--------------------
``zeta_n = <1|f_n> / sqrt(kappa_n)`` turns the spectral data into a sequence
whose moduli squared are the gaps.
"""
import numpy as np

from botorus import (
    RealPotential,
    birkhoff_coordinates,
    generating_function_product,
    generating_function_resolvent,
    one_gap_potential,
    poisson_bracket,
    smooth_random_potential,
    spectrum,
    trace_formula_check,
)

u = one_gap_potential(0.5, 60)
z = birkhoff_coordinates(u, n_coords=4)
print(z.zeta)
print("actions:", z.actions, "(gamma_1 = 1/3)")

#%%
# Small potentials: to first order ``zeta_n = -u_hat(n) / sqrt(n)``.
eps = 1e-3
print(birkhoff_coordinates(RealPotential.cosine(2 * eps), n_coords=2).zeta)

#%%
# The L2 norm is recovered from the actions.
w = smooth_random_potential(np.random.default_rng(1), 6, norm=1.2)
lhs, rhs, rel = trace_formula_check(w)
print(f"|u|^2 = {lhs:.15f}\n2 sum n a_n = {rhs:.15f}\nrel. error {rel:.1e}")

#%%
# Two routes to the generating function H_lambda, one through the resolvent
# and one through the product over gaps.
S = spectrum(w, n_required=16)
for lam in (1j, 1 + 1j, 3.0):
    a, b = generating_function_resolvent(w, lam), generating_function_product(S, lam)
    print(lam, a, abs(a - b) / abs(a))

#%%
# Canonical brackets by finite differences. This takes a few seconds.
small = smooth_random_potential(np.random.default_rng(2), 4, norm=0.1)
zeta = lambda v: birkhoff_coordinates(v, 64, n_coords=2, check_convergence=False).zeta
print(np.round(poisson_bracket(zeta, lambda v: np.conj(zeta(v)), small, n_modes=16), 4))
