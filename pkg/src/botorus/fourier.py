"""Fourier-side primitives on the torus T = R / 2piZ.

Functions are represented by their Fourier coefficients with the convention
``f = sum_n f_hat(n) exp(i n x)`` and ``f_hat(n) = (1/2pi) int f exp(-i n x) dx``,
so that the normalized L2 inner product is the plain coefficient sum.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AliasingError, DimensionError, InvariantError

__all__ = [
    "GridSpec",
    "RealPotential",
    "HardyVector",
    "inner",
    "sobolev_norm",
    "hilbert_transform",
    "hardy_project",
    "toeplitz_apply",
    "synthesize",
    "analyze",
    "japanese_bracket",
    "smooth_random_potential",
    "power_law_potential",
    "write_coefficients_csv",
    "read_coefficients_csv",
]


def _next_pow2(n):
    return 1 << max(0, int(n - 1).bit_length())


def japanese_bracket(n):
    """<n> = max(1, |n|), elementwise."""
    return np.maximum(1, np.abs(np.asarray(n)))


@dataclass(frozen=True)
class GridSpec:
    """Truncation and collocation sizes used by every discrete computation.

    Parameters
    ----------
    M : int
        Potential modes kept, ``|n| <= M``.
    N : int
        Hardy-space truncation, indices ``0..N-1``. Must exceed ``M``.
    P : int, optional
        Number of collocation points. Defaults to the smallest power of two
        with ``P >= 2 (N + M)``, which makes products of truncated factors
        alias-free.
    """

    M: int
    N: int
    P: int = None

    def __post_init__(self):
        M, N = int(self.M), int(self.N)
        if M < 0 or N < 1:
            raise DimensionError(f"grid sizes must be positive, got M={M}, N={N}")
        if N <= M:
            raise DimensionError(f"Hardy truncation N={N} must exceed the mode cutoff M={M}")
        P = _next_pow2(2 * (N + M)) if self.P is None else int(self.P)
        if P < 2 * (N + M):
            raise AliasingError(f"P={P} collocation points cannot resolve products; need P >= {2 * (N + M)}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "P", P)

    @classmethod
    def for_modes(cls, M, factor=4, minimum=32):
        """A grid whose Hardy truncation comfortably contains ``M`` potential modes."""
        return cls(M, max(minimum, factor * max(M, 1)))

    def doubled(self):
        return GridSpec(self.M, 2 * self.N)


@dataclass(frozen=True, eq=False)
class RealPotential:
    """A real-valued function on the torus with modes ``-M..M``.

    ``coeffs[M + n]`` holds the coefficient of ``exp(i n x)``. Reality means
    ``coeffs[M - n] == conj(coeffs[M + n])``; this is checked by :meth:`check`
    rather than on construction so that corrupted data can be reported where
    it is consumed.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise DimensionError("coefficient array must be 1-d with odd length 2M+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_nonnegative(cls, c):
        """Build from coefficients of modes ``0..M``; negative modes are conjugates."""
        c = np.asarray(c, dtype=complex).copy()
        c[0] = c[0].real
        return cls(np.concatenate([np.conj(c[:0:-1]), c]))

    @classmethod
    def zero(cls, M=0):
        return cls(np.zeros(2 * M + 1))

    @classmethod
    def constant(cls, value, M=0):
        c = np.zeros(2 * M + 1, dtype=complex)
        c[M] = value
        return cls(c)

    @classmethod
    def cosine(cls, amplitude=1.0, k=1, M=None):
        """``amplitude * cos(k x)``."""
        M = k if M is None else M
        c = np.zeros(M + 1, dtype=complex)
        c[k] = amplitude / 2
        return cls.from_nonnegative(c)

    @classmethod
    def sine(cls, amplitude=1.0, k=1, M=None):
        M = k if M is None else M
        c = np.zeros(M + 1, dtype=complex)
        c[k] = -0.5j * amplitude
        return cls.from_nonnegative(c)

    @property
    def M(self):
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self):
        return np.arange(-self.M, self.M + 1)

    @property
    def nonnegative(self):
        """Coefficients of modes ``0..M``."""
        return self.coeffs[self.M:]

    @property
    def mean(self):
        return float(self.coeffs[self.M].real)

    def coeff(self, n):
        n = int(n)
        return self.coeffs[self.M + n] if abs(n) <= self.M else 0j

    def is_real(self, tol=1e-12):
        c = self.coeffs
        scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
        return bool(np.max(np.abs(c - np.conj(c[::-1])), initial=0.0) <= tol * scale)

    def check(self, tol=1e-12):
        if not self.is_real(tol):
            raise InvariantError("potential coefficients are not conjugate-symmetric (u is not real)")
        return self

    def resized(self, M):
        """Zero-pad or hard-truncate to ``|n| <= M``."""
        M = int(M)
        out = np.zeros(2 * M + 1, dtype=complex)
        k = min(M, self.M)
        out[M - k:M + k + 1] = self.coeffs[self.M - k:self.M + k + 1]
        return RealPotential(out)

    def zero_mean(self):
        c = self.coeffs.copy()
        c[self.M] = 0
        return RealPotential(c)

    def with_mean(self, value):
        c = self.coeffs.copy()
        c[self.M] = value
        return RealPotential(c)

    def translate(self, tau):
        """The potential ``x -> u(x + tau)``."""
        return RealPotential(self.coeffs * np.exp(1j * self.modes * tau))

    def _binary(self, other, op):
        if isinstance(other, RealPotential):
            M = max(self.M, other.M)
            return RealPotential(op(self.resized(M).coeffs, other.resized(M).coeffs))
        if np.isscalar(other) and np.isreal(other):
            c = self.coeffs.copy()
            c[self.M] = op(c[self.M], float(np.real(other)))
            return RealPotential(c)
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return RealPotential(-self.coeffs)

    def __mul__(self, scalar):
        if not (np.isscalar(scalar) and np.isreal(scalar)):
            return NotImplemented
        return RealPotential(self.coeffs * float(np.real(scalar)))

    __rmul__ = __mul__

    def __repr__(self):
        return f"RealPotential(M={self.M}, mean={self.mean:.6g}, L2={sobolev_norm(self, 0):.6g})"


@dataclass(frozen=True, eq=False)
class HardyVector:
    """Element of the truncated Hardy space: ``f = sum_{j<N} a_j exp(i j x)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise DimensionError("Hardy vector needs a non-empty 1-d coefficient array")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value, N):
        c = np.zeros(N, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def basis(cls, k, N):
        c = np.zeros(N, dtype=complex)
        c[k] = 1
        return cls(c)

    @property
    def N(self):
        return self.coeffs.size

    @property
    def modes(self):
        return np.arange(self.N)

    def __repr__(self):
        return f"HardyVector(N={self.N})"


def _mode_view(f):
    if isinstance(f, (RealPotential, HardyVector)):
        return f.modes, f.coeffs
    raise TypeError(f"expected RealPotential or HardyVector, got {type(f).__name__}")


def inner(f, g):
    """Normalized L2 inner product ``(1/2pi) int f conj(g) dx``.

    Two objects of the same type must share their truncation. A Hardy vector
    may be paired with a potential; the sum then runs over common modes.
    """
    if type(f) is type(g) and f.coeffs.size != g.coeffs.size:
        raise DimensionError(f"mismatched truncations {f.coeffs.size} and {g.coeffs.size}")
    nf, cf = _mode_view(f)
    ng, cg = _mode_view(g)
    lo, hi = max(nf[0], ng[0]), min(nf[-1], ng[-1])
    if hi < lo:
        return 0j
    a = cf[lo - nf[0]:hi - nf[0] + 1]
    b = cg[lo - ng[0]:hi - ng[0] + 1]
    return complex(np.sum(a * np.conj(b)))


def sobolev_norm(f, s):
    """``(sum_n <n>^{2s} |f_hat(n)|^2)^{1/2}``."""
    n, c = _mode_view(f)
    return float(np.sqrt(np.sum(japanese_bracket(n) ** (2.0 * s) * np.abs(c) ** 2)))


def hilbert_transform(f):
    """Fourier multiplier ``-i sign(n)`` with ``sign(0) = 0``."""
    return RealPotential(-1j * np.sign(f.modes) * f.coeffs)


def hardy_project(f, N=None):
    """Orthogonal projection onto nonnegative modes.

    The result has ``N`` coefficients (default ``M + 1``); modes above ``M``
    are zero and modes at or above ``N`` are dropped.
    """
    N = f.M + 1 if N is None else int(N)
    out = np.zeros(N, dtype=complex)
    k = min(N, f.M + 1)
    out[:k] = f.nonnegative[:k]
    return HardyVector(out)


def toeplitz_apply(u, f):
    """``T_u f = Pi(u f)``, truncated back to the indices of ``f``.

    ``(T_u f)_j = sum_k u_hat(j - k) a_k`` for ``0 <= j < N``. The
    convolution is evaluated exactly, so no collocation grid is needed.
    """
    N, M = f.N, u.M
    full = np.convolve(u.coeffs, f.coeffs)  # index i <-> mode i - M
    out = np.zeros(N, dtype=complex)
    hi = min(N, full.size - M)
    out[:hi] = full[M:M + hi]
    return HardyVector(out)


def synthesize(f, P):
    """Samples ``f(2 pi j / P)``, ``j = 0..P-1``, of a real potential."""
    P = int(P)
    if P < 2 * f.M + 1:
        raise AliasingError(f"P={P} points cannot represent {f.M} modes; need P >= {2 * f.M + 1}")
    spec = np.zeros(P // 2 + 1, dtype=complex)
    spec[:f.M + 1] = f.nonnegative
    return np.fft.irfft(spec * P, n=P)


def analyze(samples, M=None):
    """Fourier coefficients of real samples on the uniform grid.

    ``M`` defaults to ``(P - 1) // 2``, the largest cutoff free of the
    ambiguous Nyquist mode.
    """
    samples = np.asarray(samples, dtype=float)
    P = samples.size
    Mmax = (P - 1) // 2
    M = Mmax if M is None else int(M)
    if M > Mmax:
        raise AliasingError(f"{P} samples determine at most {Mmax} modes, asked for {M}")
    spec = np.fft.rfft(samples) / P
    return RealPotential.from_nonnegative(spec[:M + 1])


def smooth_random_potential(rng, M=8, norm=None, decay=0.35, mean=0.0):
    """Random real trigonometric polynomial with exponentially decaying modes.

    ``norm`` (the L2 norm of the zero-mean part) is drawn from ``[0.2, 2]``
    when not given.
    """
    n = np.arange(1, M + 1)
    c = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) * np.exp(-decay * n)
    c = np.concatenate([[0.0], c])
    u = RealPotential.from_nonnegative(c)
    target = rng.uniform(0.2, 2.0) if norm is None else norm
    u = u * (target / sobolev_norm(u, 0))
    return u.with_mean(mean)


def power_law_potential(M, exponent, phases=None, amplitude=1.0):
    """Potential with ``|u_hat(n)| = amplitude * <n>^exponent`` for ``1 <= |n| <= M``.

    Used to stand in for rough data: ``exponent = s - 1/2 - eps`` gives a
    family that stays bounded in ``H^{-s}`` as ``M`` grows.
    """
    n = np.arange(1, M + 1)
    ph = np.zeros(M) if phases is None else np.asarray(phases, dtype=float)[:M]
    c = amplitude * n ** float(exponent) * np.exp(1j * ph)
    return RealPotential.from_nonnegative(np.concatenate([[0.0], c]))


def write_coefficients_csv(path, f):
    """Write one row per mode under the header ``# mode,re,im``."""
    path = Path(path)
    n, c = _mode_view(f)
    with path.open("w", newline="") as fh:
        fh.write("# mode,re,im\n")
        w = csv.writer(fh)
        for k, v in zip(n, c):
            w.writerow([int(k), repr(float(v.real)), repr(float(v.imag))])
    return path


def read_coefficients_csv(path):
    """Inverse of :func:`write_coefficients_csv` for real potentials.

    Missing modes are zero; a file with only nonnegative modes is completed by
    conjugate symmetry.
    """
    rows = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            n, re, im = line.split(",")
            rows.append((int(n), float(re) + 1j * float(im)))
    if not rows:
        return RealPotential.zero()
    M = max(abs(n) for n, _ in rows)
    c = np.zeros(2 * M + 1, dtype=complex)
    seen = np.zeros(2 * M + 1, dtype=bool)
    for n, v in rows:
        c[M + n] = v
        seen[M + n] = True
    missing = ~seen & seen[::-1]
    c[missing] = np.conj(c[::-1][missing])
    return RealPotential(c)
