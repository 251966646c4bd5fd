"""Birkhoff coordinates, gap data and related diagnostics."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._parallel import map_ordered
from .errors import DimensionError, NearSingularError, TruncationError
from .fourier import GridSpec, RealPotential, japanese_bracket, sobolev_norm
from .lax import SpectralData, _default_dim, _hardy_dim, build_matrix, eigen_decompose, spectrum

__all__ = [
    "BirkhoffSeq",
    "gaps_from_spectrum",
    "kappa",
    "kappas",
    "birkhoff_coordinates",
    "generating_function_product",
    "weighted_norm",
    "trace_formula_check",
    "torus_distance",
    "functional_gradient",
    "poisson_bracket",
    "write_birkhoff_csv",
    "read_birkhoff_csv",
]

GAP_CLAMP = 1e-10
KAPPA_SKIP = 1e-12
TAIL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BirkhoffSeq:
    """Complex Birkhoff coordinates ``zeta_1..zeta_K``; ``zeta[k]`` is ``zeta_{k+1}``.

    ``gaps`` and ``kappas`` are filled in when the sequence was extracted from
    a potential; sequences built by hand or by a flow leave them ``None``.
    """

    zeta: np.ndarray
    grid: GridSpec | None = None
    gaps: np.ndarray | None = None
    kappas: np.ndarray | None = None

    def __post_init__(self):
        z = np.array(self.zeta, dtype=complex).reshape(-1)
        z.setflags(write=False)
        object.__setattr__(self, "zeta", z)

    @classmethod
    def from_actions(cls, actions, phases=None):
        a = np.asarray(actions, dtype=float)
        ph = np.zeros_like(a) if phases is None else np.asarray(phases, dtype=float)
        return cls(np.sqrt(a) * np.exp(1j * ph))

    @property
    def K(self):
        return self.zeta.size

    @property
    def indices(self):
        return np.arange(1, self.K + 1)

    @property
    def actions(self):
        return np.abs(self.zeta) ** 2

    @property
    def moduli(self):
        return np.abs(self.zeta)

    def padded(self, K):
        """Zero-extend or truncate to ``K`` coordinates."""
        out = np.zeros(K, dtype=complex)
        k = min(K, self.K)
        out[:k] = self.zeta[:k]
        return BirkhoffSeq(out, self.grid)

    def __len__(self):
        return self.K

    def __repr__(self):
        return f"BirkhoffSeq(K={self.K}, h^1/2 norm={weighted_norm(self, 0.5):.6g})"


def _as_zeta(z):
    return z.zeta if isinstance(z, BirkhoffSeq) else np.asarray(z, dtype=complex).reshape(-1)


def gaps_from_spectrum(S, n_max=None, tol=GAP_CLAMP):
    """``gamma_n = lambda_n - lambda_{n-1} - 1`` for ``n = 1..n_max``.

    Values in ``(-tol, 0)`` are eigensolver roundoff and clamp to zero; a
    more negative gap means the truncation is not converged.
    """
    lam = S.eigenvalues if isinstance(S, SpectralData) else np.asarray(S, dtype=float)
    n_max = _default_range(S) if n_max is None else int(n_max)
    if n_max >= lam.size:
        raise DimensionError(f"asked for {n_max} gaps from {lam.size} eigenvalues")
    gam = np.diff(lam[:n_max + 1]) - 1.0
    bad = np.nonzero(gam < -tol)[0]
    if bad.size:
        n = int(bad[0]) + 1
        raise TruncationError(f"gap gamma_{n} = {gam[bad[0]]:.3e} is negative; spectrum not converged")
    return np.maximum(gam, 0.0)


def _kappa_factors(lam, gam, n_idx, K):
    """Products over ``p <= K, p != n`` of ``1 - gamma_p / (lambda_p - lambda_n)``."""
    p = np.arange(1, K + 1)
    active = p[gam[:K] >= KAPPA_SKIP]
    out = np.ones(n_idx.size)
    if active.size == 0:
        return out
    lp = lam[active][None, :]
    ln = lam[n_idx][:, None]
    same = active[None, :] == n_idx[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = 1.0 - gam[active - 1][None, :] / (lp - ln)
    fac = np.where(same, 1.0, fac)
    if np.any(fac <= 0) or not np.all(np.isfinite(fac)):
        raise TruncationError("nonpositive factor in the kappa product; spectrum not converged")
    return np.prod(fac, axis=1)


def kappas(S, n_max=None, K=None):
    """``kappa_n`` for ``n = 1..n_max`` using gaps ``gamma_p``, ``p <= K``.

    ``kappa_n = (lambda_n - lambda_0)^{-1} prod_{p != n} (1 - gamma_p / (lambda_p - lambda_n))``;
    factors whose gap is below ``1e-12`` are skipped.
    """
    K = _default_range(S, 1 if n_max is None else n_max) if K is None else int(K)
    n_max = K if n_max is None else int(n_max)
    lam = S.eigenvalues
    gam = gaps_from_spectrum(S, max(K, n_max))
    n_idx = np.arange(1, n_max + 1)
    return _kappa_factors(lam, gam, n_idx, K) / (lam[n_idx] - lam[0])


def kappa(S, n, K=None):
    if n < 1:
        raise DimensionError("kappa_n is defined for n >= 1")
    return float(kappas(S, n, K)[n - 1])


def _default_range(S, n_min=1):
    """Converged range if one was measured, else the edge-free part of the finite section."""
    if isinstance(S, SpectralData) and S.converged_range is not None:
        return S.converged_range
    lam = S.eigenvalues if isinstance(S, SpectralData) else np.asarray(S, dtype=float)
    return _edge_free_range(lam, n_min)


def _tail_gap_sum(S, K):
    """Sum of gaps beyond ``K`` from ``-lambda_0 = sum gamma_n`` (zero-mean potentials)."""
    return max(0.0, -S.eigenvalues[0] - float(np.sum(gaps_from_spectrum(S, K))))


def _edge_free_range(lam, n_min):
    """Last gap index below the finite-section edge, found without a second decomposition.

    Gaps of a smooth potential decay into roundoff noise, while the top few
    eigenvalues of a finite section carry spurious gaps. The highest gap at
    noise level marks the start of that edge layer. Without a noise plateau
    (rough data) half the section is used.
    """
    N = lam.size
    gam = np.diff(lam) - 1.0
    floor = max(KAPPA_SKIP, 64 * np.finfo(float).eps * N)
    quiet = np.nonzero(np.abs(gam) <= floor)[0]
    K = int(quiet[-1]) + 1 if quiet.size else N // 2
    return min(N - 1, max(K, n_min))


def birkhoff_coordinates(u, grid=None, n_coords=None, check_convergence=True):
    """Birkhoff coordinates ``zeta_n = <1|f_n> / sqrt(kappa_n)`` of a zero-mean potential.

    Parameters
    ----------
    u : RealPotential
        A nonzero mean is removed with a warning.
    grid : GridSpec or int, optional
        Starting Hardy truncation.
    n_coords : int, optional
        Number of coordinates wanted. Defaults to the whole converged range.
    check_convergence : bool
        When true the truncation is verified against a doubled one and
        escalated as needed, and the kappa products are checked against the
        tail of the gap sum. When false a single decomposition at ``grid`` is
        used; this is the fast path for finite-difference sweeps.
    """
    if u.mean != 0.0:
        warnings.warn("birkhoff_coordinates: removing nonzero mean %.3g" % u.mean, stacklevel=2)
        u = u.zero_mean()
    N = _default_dim(u) if grid is None else _hardy_dim(grid)[0]
    gspec = grid if isinstance(grid, GridSpec) else None

    if check_convergence:
        need = 1 if n_coords is None else int(n_coords)
        while True:
            S = spectrum(u, N, n_required=need)
            K = S.converged_range
            tail = _tail_gap_sum(S, K)
            n_top = K if n_coords is None else int(n_coords)
            if tail <= TAIL_TOL * max(1, K + 1 - n_top):
                break
            need, N = K + 1, S.N
    else:
        S = eigen_decompose(build_matrix(u, N))
        K = _edge_free_range(S.eigenvalues, 1 if n_coords is None else int(n_coords))
    n = K if n_coords is None else int(n_coords)
    gam = gaps_from_spectrum(S, max(K, n))
    kap = _kappa_factors(S.eigenvalues, gam, np.arange(1, n + 1), K)
    kap = kap / (S.eigenvalues[1:n + 1] - S.eigenvalues[0])
    zeta = S.inner_products[1:n + 1] / np.sqrt(kap)
    return BirkhoffSeq(zeta, gspec, gam[:n], kap)


def generating_function_product(S, lam, K=None):
    """``(lambda_0 + lam)^{-1} prod_{n <= K} (1 - gamma_n / (lambda_n + lam))``."""
    K = _default_range(S) if K is None else int(K)
    ev = S.eigenvalues[:K + 1]
    tol = 1e-10 * max(1.0, abs(lam))
    if np.min(np.abs(ev + lam)) < tol:
        raise NearSingularError(f"lambda={lam} is within {tol:.1e} of a pole")
    gam = gaps_from_spectrum(S, K)
    fac = 1.0 - gam / (ev[1:] + lam)
    return complex(np.prod(fac) / (ev[0] + lam))


def weighted_norm(z, s):
    """``h^s`` norm ``(sum_n <n>^{2s} |z_n|^2)^{1/2}`` with ``n`` starting at 1."""
    zeta = _as_zeta(z)
    n = np.arange(1, zeta.size + 1)
    return float(np.sqrt(np.sum(n ** (2.0 * s) * np.abs(zeta) ** 2)))


def trace_formula_check(u, grid=None):
    """Compare ``|u|^2`` with ``2 sum_n n |zeta_n|^2``.

    Returns
    -------
    (lhs, rhs, relative_error)
    """
    if u.mean != 0.0:
        warnings.warn("trace_formula_check: removing nonzero mean", stacklevel=2)
        u = u.zero_mean()
    lhs = sobolev_norm(u, 0) ** 2
    if lhs == 0.0:
        return 0.0, 0.0, 0.0
    z = birkhoff_coordinates(u, grid)
    rhs = 2.0 * math.fsum(z.indices * z.actions)
    return lhs, rhs, abs(lhs - rhs) / lhs


def torus_distance(z, target_moduli, s):
    """Distance in ``h^{1/2 - s}`` from ``z`` to the torus of sequences with the given moduli.

    The nearest point of the torus shares the phases of ``z``, so only the
    radial differences ``|z_n| - t_n`` contribute.
    """
    zeta = _as_zeta(z)
    t = np.abs(_as_zeta(target_moduli)) if isinstance(target_moduli, BirkhoffSeq) else np.asarray(target_moduli, dtype=float)
    if t.size != zeta.size:
        raise DimensionError(f"sequence lengths differ: {zeta.size} vs {t.size}")
    n = np.arange(1, zeta.size + 1)
    return float(np.sqrt(np.sum(japanese_bracket(n) ** (1.0 - 2.0 * s) * (np.abs(zeta) - t) ** 2)))


def functional_gradient(F, u, n_modes=None, h=1e-5):
    """L2 gradient of ``F`` at a real potential by central differences.

    The real coordinates ``Re u_hat(n), Im u_hat(n)`` for ``1 <= n <= n_modes``
    are perturbed. For a functional with partials ``dF/da_n, dF/db_n`` the
    gradient ``g`` with ``dF(du) = <g | du>`` has coefficients
    ``g_hat(+-n) = (dF/da_n +- i dF/db_n) / 2``. Vector-valued ``F`` is
    differentiated componentwise.

    Returns
    -------
    ndarray, shape ``(n_outputs, 2 n_modes + 1)``
        Gradient coefficients on modes ``-n_modes..n_modes`` (mode 0 is zero).
    """
    m = u.M + 12 if n_modes is None else int(n_modes)
    base = u.resized(m)
    c0 = base.coeffs

    def perturbed(args):
        n, part, sign = args
        c = c0.copy()
        d = sign * h * (1.0 if part == 0 else 1j)
        c[m + n] += d
        c[m - n] += np.conj(d)
        return np.atleast_1d(np.asarray(F(RealPotential(c)), dtype=complex))

    jobs = [(n, part, sign) for n in range(1, m + 1) for part in (0, 1) for sign in (1, -1)]
    vals = map_ordered(perturbed, jobs)
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("functional returned non-finite values during differentiation")
    vals = np.array(vals).reshape(m, 2, 2, -1)
    deriv = (vals[:, :, 0, :] - vals[:, :, 1, :]) / (2 * h)  # (m, part, out)
    da, db = deriv[:, 0, :].T, deriv[:, 1, :].T
    g = np.zeros((da.shape[0], 2 * m + 1), dtype=complex)
    g[:, m + 1:] = (da + 1j * db) / 2
    g[:, :m][:, ::-1] = (da - 1j * db) / 2
    return g


def _bracket_from_gradients(gF, gG):
    m = (gF.shape[1] - 1) // 2
    n = np.arange(-m, m + 1)
    out = np.empty((gF.shape[0], gG.shape[0]), dtype=complex)
    for i in range(gF.shape[0]):
        for j in range(gG.shape[0]):
            terms = 1j * n * gF[i] * gG[j][::-1]
            out[i, j] = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return out


def poisson_bracket(F, G, u, h_fd=1e-5, n_modes=None, richardson=True):
    """Gardner bracket ``{F, G} = (1/2pi) int (d/dx grad F) grad G dx``.

    The pairing is bilinear (no conjugation), so complex-valued functionals
    such as ``zeta_n`` and ``conj(zeta_k)`` can be bracketed directly.
    Gradients come from :func:`functional_gradient`; when the estimates at
    ``h_fd`` and ``h_fd / 2`` disagree by more than 10 %, the Richardson
    combination of the two is returned.

    Returns a scalar when both functionals are scalar, otherwise the matrix
    ``{F_i, G_j}``.
    """
    def both(h):
        gF = functional_gradient(F, u, n_modes, h)
        gG = gF if G is F else functional_gradient(G, u, n_modes, h)
        return _bracket_from_gradients(gF, gG)

    b1 = both(h_fd)
    if richardson:
        b2 = both(h_fd / 2)
        scale = np.maximum(np.maximum(np.abs(b1), np.abs(b2)), 1e-6)
        if np.any(np.abs(b1 - b2) > 0.1 * scale):
            b1 = (4 * b2 - b1) / 3
    return complex(b1[0, 0]) if b1.size == 1 else b1


def write_birkhoff_csv(path, z):
    """Columns ``n, re_zeta, im_zeta, action, gamma, kappa`` (blank when unknown)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re_zeta", "im_zeta", "action", "gamma", "kappa"])
        for k in range(z.K):
            g = "" if z.gaps is None else repr(float(z.gaps[k]))
            kp = "" if z.kappas is None else repr(float(z.kappas[k]))
            v = z.zeta[k]
            w.writerow([k + 1, repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v) ** 2)), g, kp])
    return path


def read_birkhoff_csv(path):
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return BirkhoffSeq(np.zeros(0))
    K = max(int(r["n"]) for r in rows)
    z = np.zeros(K, dtype=complex)
    gam, kap = np.full(K, np.nan), np.full(K, np.nan)
    for r in rows:
        k = int(r["n"]) - 1
        z[k] = float(r["re_zeta"]) + 1j * float(r["im_zeta"])
        if r.get("gamma"):
            gam[k] = float(r["gamma"])
        if r.get("kappa"):
            kap[k] = float(r["kappa"])
    return BirkhoffSeq(
        z,
        gaps=None if np.all(np.isnan(gam)) else gam,
        kappas=None if np.all(np.isnan(kap)) else kap,
    )
