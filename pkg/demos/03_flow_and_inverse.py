r"""
Solving by quadrature
---------------------
In Birkhoff coordinates every mode rotates at its own frequency. To get a
potential back we invert the map with Newton's method.
"""
import numpy as np

from botorus import (
    BirkhoffSeq,
    GridSpec,
    birkhoff_coordinates,
    evolve,
    flow_B,
    frequencies,
    hamiltonian_B,
    invert,
    one_gap_potential,
    smooth_random_potential,
    sobolev_norm,
    solve,
)

z0 = BirkhoffSeq.from_actions([0.5, 0.25])
print("omega:", frequencies(z0), " H_B:", hamiltonian_B(z0))
print("after t=1:", flow_B(z0, 1.0).zeta)

#%%
# Newton inverse. The unknowns are the coefficients u_hat(1..M).
target = BirkhoffSeq.from_actions([0.2, 0.1], [0.0, np.pi / 2])
u, info = invert(target, grid=GridSpec.for_modes(24), return_info=True)
print(info)
print(birkhoff_coordinates(u, n_coords=3).zeta)

#%%
# ``solve`` strings the pieces together. Compare with the direct PDE solver
# on a random datum with nonzero mean.
v0 = smooth_random_potential(np.random.default_rng(3), 4, norm=0.6, mean=0.5)
t = 0.8
via_birkhoff = solve(v0, t, GridSpec.for_modes(32))
direct = evolve(v0, t, dt=1e-4, M_pde=64).states[-1].potential()
print("L2 difference:", sobolev_norm(via_birkhoff - direct, 0))

#%%
q = 0.5
print("one-gap: |solve - u(x + t/3)| =",
      sobolev_norm(solve(one_gap_potential(q, 48), 1.0, GridSpec.for_modes(32)) - one_gap_potential(q, 48).translate(1 / 3), 0))
