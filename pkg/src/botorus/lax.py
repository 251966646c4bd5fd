"""Finite sections of the Lax operator ``L_u = -i d/dx - T_u`` on the Hardy space."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import (
    DegeneratePhaseError,
    DimensionError,
    EigensolverError,
    NearSingularError,
    TruncationError,
)
from .fourier import GridSpec, HardyVector, RealPotential

log = logging.getLogger(__name__)

__all__ = [
    "LaxMatrix",
    "SpectralData",
    "build_matrix",
    "eigen_decompose",
    "normalize_phases",
    "spectrum",
    "converged_range",
    "resolvent_solve",
    "generating_function_resolvent",
    "write_spectrum_csv",
    "CONVERGENCE_TOL",
    "MAX_HARDY_DIM",
]

CONVERGENCE_TOL = 1e-8
MAX_HARDY_DIM = 4096
# below this modulus a normalizing inner product is treated as zero
_PHASE_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class LaxMatrix:
    """``L[j, k] = j delta_jk - u_hat(j - k)`` for ``0 <= j, k < N``."""

    entries: np.ndarray
    potential: RealPotential
    grid: GridSpec | None = None

    @property
    def N(self):
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues (ascending) and eigenvectors of a Lax matrix.

    ``eigenvectors[:, n]`` holds the Hardy coefficients of ``f_n``.
    ``converged_range`` is the largest index whose eigenvalue is trusted,
    or ``None`` when no convergence study was made.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    converged_range: int | None = None
    degenerate_phases: tuple = ()

    @property
    def N(self):
        return self.eigenvalues.size

    @property
    def trusted(self):
        """Number of trusted eigenvalue indices (``converged_range + 1``)."""
        return self.N if self.converged_range is None else self.converged_range + 1

    @cached_property
    def inner_products(self):
        """``<1 | f_n> = conj(f_n_hat(0))`` for every ``n``."""
        return np.conj(self.eigenvectors[0, :])

    @cached_property
    def gaps(self):
        """``gamma_n`` for ``n = 1..trusted-1``; entry ``k`` is ``gamma_{k+1}``."""
        from .birkhoff import gaps_from_spectrum

        return gaps_from_spectrum(self)

    @cached_property
    def kappas(self):
        from .birkhoff import kappas

        return kappas(self)

    def eigenfunction(self, n):
        return HardyVector(self.eigenvectors[:, n])


def _hardy_dim(grid):
    if isinstance(grid, GridSpec):
        return grid.N, grid
    return int(grid), None


def build_matrix(u, grid):
    """Assemble the truncated Lax matrix of ``u``.

    The mean of ``u`` is kept: a constant ``c`` shifts every eigenvalue by
    ``-c``. Only the nonnegative coefficients are read after the reality
    check, and the upper triangle is the exact conjugate of the lower one,
    so the result is Hermitian bit for bit.
    """
    N, spec = _hardy_dim(grid)
    u.check()
    if u.M >= N:
        raise DimensionError(f"Hardy truncation N={N} must exceed the potential cutoff M={u.M}")
    col = np.zeros(N, dtype=complex)
    col[:u.M + 1] = u.nonnegative
    col[0] = col[0].real
    T = scipy.linalg.toeplitz(col, np.conj(col))
    L = np.diag(np.arange(N, dtype=complex)) - T
    return LaxMatrix(L, u, spec)


def normalize_phases(S, strict=False):
    """Fix eigenvector phases deterministically.

    ``<1|f_0> >= 0`` and, for ``n >= 1``, ``<f_n | e^{ix} f_{n-1}> >= 0``.
    When the shift product vanishes the rule falls back to ``<1|f_n> >= 0``;
    when that vanishes too the phase is left alone (the Birkhoff coordinate
    is zero anyway) and the index is recorded, or reported as an error if
    ``strict``.
    """
    V = np.array(S.eigenvectors, dtype=complex, copy=True)
    N = V.shape[1]
    degenerate = []

    a = V[0, 0]
    if abs(a) <= _PHASE_FLOOR:
        if strict:
            raise DegeneratePhaseError(0)
        degenerate.append(0)
    else:
        # <1|f> = conj(a); make it real positive
        V[:, 0] *= np.conj(a) / abs(a)

    for n in range(1, N):
        f = V[:, n]
        shift = np.sum(f[1:] * np.conj(V[:-1, n - 1]))
        if abs(shift) > _PHASE_FLOOR:
            V[:, n] = f * np.conj(shift) / abs(shift)
            continue
        a = f[0]
        if abs(a) > _PHASE_FLOOR:
            V[:, n] = f * np.conj(a) / abs(a)
            continue
        if strict:
            raise DegeneratePhaseError(n)
        degenerate.append(n)
    return replace(S, eigenvectors=V, degenerate_phases=tuple(degenerate))


def eigen_decompose(L, normalize=True):
    """Ascending eigenvalues and orthonormal, phase-normalized eigenvectors."""
    A = L.entries if isinstance(L, LaxMatrix) else np.asarray(L)
    try:
        lam, V = scipy.linalg.eigh(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(A) if np.all(np.isfinite(A)) else float("inf")
        raise EigensolverError(f"Hermitian eigensolver failed (condition number {cond:.3e}): {exc}") from exc
    S = SpectralData(lam, V)
    return normalize_phases(S) if normalize else S


def converged_range(lam_small, lam_large, tol=CONVERGENCE_TOL):
    """Largest ``k`` such that the two spectra agree to ``tol`` for all ``n <= k``.

    Returns ``-1`` when even the ground state disagrees.
    """
    m = min(lam_small.size, lam_large.size)
    bad = np.nonzero(np.abs(lam_small[:m] - lam_large[:m]) >= tol)[0]
    return (m - 1) if bad.size == 0 else int(bad[0]) - 1


def _default_dim(u):
    return max(64, 4 * (u.M + 1))


def spectrum(u, grid=None, n_required=None, tol=CONVERGENCE_TOL, max_dim=MAX_HARDY_DIM):
    """Spectral data of ``L_u`` with a verified converged range.

    The finite section is compared against one of twice the size; the
    Hardy dimension doubles until indices ``0..n_required`` are converged.
    The larger decomposition is returned.

    Raises
    ------
    TruncationError
        If the requested range is not reached before ``max_dim``.
    """
    N = _default_dim(u) if grid is None else _hardy_dim(grid)[0]
    need = 1 if n_required is None else int(n_required)
    small = eigen_decompose(build_matrix(u, N), normalize=False)
    while True:
        if 2 * N > max_dim:
            raise TruncationError(
                f"spectrum of potential (M={u.M}) not converged to {tol:g} on indices 0..{need} "
                f"with Hardy dimension up to {N}; the data may be too rough for this cap"
            )
        large = eigen_decompose(build_matrix(u, 2 * N))
        k = converged_range(small.eigenvalues, large.eigenvalues, tol)
        if k >= need:
            log.debug("spectrum converged on 0..%d at N=%d", k, 2 * N)
            return replace(large, converged_range=k)
        log.debug("converged range %d < %d at N=%d; doubling", k, need, N)
        N *= 2
        small = SpectralData(large.eigenvalues, large.eigenvectors)


def resolvent_solve(L, lam, rhs, spectrum_data=None):
    """Solve ``(L + lam) w = rhs``.

    Raises
    ------
    NearSingularError
        If ``-lam`` is within ``1e-10`` of an eigenvalue or the solve leaves a
        residual above ``1e-10 |rhs|``.
    """
    A = L.entries if isinstance(L, LaxMatrix) else np.asarray(L)
    b = rhs.coeffs if isinstance(rhs, HardyVector) else np.asarray(rhs, dtype=complex)
    if b.size != A.shape[0]:
        raise DimensionError(f"right-hand side has {b.size} coefficients, matrix is {A.shape[0]}x{A.shape[0]}")
    tol = 1e-10 * max(1.0, abs(lam))
    if spectrum_data is not None:
        dist = np.min(np.abs(spectrum_data.eigenvalues + lam))
        if dist < tol:
            raise NearSingularError(f"-lambda={-lam} lies within {dist:.2e} of the spectrum")
    K = A + lam * np.eye(A.shape[0])
    try:
        w = np.linalg.solve(K, b)
    except np.linalg.LinAlgError as exc:
        raise NearSingularError(f"L + lambda is singular at lambda={lam}") from exc
    bnorm = np.linalg.norm(b)
    res = np.linalg.norm(K @ w - b)
    if res > 1e-10 * bnorm:
        w = w + np.linalg.solve(K, b - K @ w)
        res = np.linalg.norm(K @ w - b)
        if res > 1e-10 * bnorm:
            raise NearSingularError(f"resolvent solve residual {res:.2e} at lambda={lam}")
    return HardyVector(w)


def generating_function_resolvent(u, lam, grid=None):
    """``H_lambda(u) = <(L_u + lambda)^{-1} 1 | 1>``."""
    N = _default_dim(u) if grid is None else _hardy_dim(grid)[0]
    L = build_matrix(u, N)
    w = resolvent_solve(L, lam, HardyVector.constant(1.0, N))
    return complex(w.coeffs[0])


def write_spectrum_csv(path, S, n_max=None):
    """Columns ``n, lambda, gamma, kappa, re_inner, im_inner``.

    Gap and kappa are blank for ``n = 0``.
    """
    n_max = S.trusted - 1 if n_max is None else min(int(n_max), S.trusted - 1)
    gam, kap, ip = S.gaps, S.kappas, S.inner_products
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "lambda", "gamma", "kappa", "re_inner", "im_inner"])
        for n in range(n_max + 1):
            g = "" if n == 0 else repr(float(gam[n - 1]))
            k = "" if n == 0 else repr(float(kap[n - 1]))
            w.writerow([n, repr(float(S.eigenvalues[n])), g, k, repr(float(ip[n].real)), repr(float(ip[n].imag))])
    return path
