r"""
Lax spectrum
------------
The Lax operator of a real potential acts on the Hardy space as
``L f = -i f' - Pi(u f)``. In Fourier coefficients it is the matrix
``L[j, k] = j delta_jk - u_hat(j - k)``, so a finite section is an ordinary
dense Hermitian matrix.
"""
import numpy as np

from botorus import build_matrix, eigen_decompose, one_gap_potential, smooth_random_potential, spectrum

#%%
# A one-gap potential has ``u_hat(+-n) = q^n``. Only the first gap opens.
u = one_gap_potential(0.5, 60)
S = eigen_decompose(build_matrix(u, 128))
print("lambda_0..4:", S.eigenvalues[:5])
print("gaps 1..4:  ", S.gaps[:4])

#%%
# The finite section is only trustworthy away from its edge. ``spectrum``
# compares two sizes and reports how far the eigenvalues agree.
rng = np.random.default_rng(0)
v = smooth_random_potential(rng, 8, norm=1.5)
Sv = spectrum(v, n_required=20)
print("converged range:", Sv.converged_range, "at N =", Sv.N)

#%%
# Gaps are nonnegative and their sum is -lambda_0.
print("min gap", Sv.gaps.min(), " sum - (-lambda_0) =", Sv.gaps.sum() + Sv.eigenvalues[0])

#%%
# lambda_n <= n for every converged index
k = Sv.converged_range
print("max(lambda_n - n) =", np.max(Sv.eigenvalues[:k + 1] - np.arange(k + 1)))
