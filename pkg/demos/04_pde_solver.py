r"""
Direct PDE solver
-----------------
Integrating-factor RK4 for ``v_t = H v_xx - (v^2)_x``. The dispersive part is
solved exactly, so the step size is set by the nonlinearity alone.
"""
import numpy as np

from botorus import evolve, one_gap_frequency, one_gap_potential, sobolev_norm

u0 = one_gap_potential(0.5, 64)
traj = evolve(u0, 1.0, dt=1e-4, sample_times=np.linspace(0, 1, 5), M_pde=64)
for t, s in zip(traj.times, traj.states):
    print(f"t={t:.2f}  error {sobolev_norm(s.potential() - u0.translate(one_gap_frequency(0.5) * t), 0):.2e}")
print({k: v for k, v in traj.metadata.items() if k.startswith("drift")})

#%%
# fourth order in time
exact = u0.translate(one_gap_frequency(0.5) * 0.5)
errs = [sobolev_norm(evolve(u0, 0.5, dt=dt, M_pde=64).states[-1].potential() - exact, 0) for dt in (4e-3, 2e-3, 1e-3)]
print("errors", errs, "ratios", np.array(errs[:-1]) / np.array(errs[1:]))
