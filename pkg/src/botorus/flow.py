"""Frequencies, the Hamiltonian in Birkhoff coordinates, and the flow by quadrature."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .birkhoff import BirkhoffSeq, birkhoff_coordinates
from .fourier import GridSpec, RealPotential, synthesize
from .inverse import InverseSettings, invert

__all__ = [
    "FlowParams",
    "frequencies",
    "frequencies_c",
    "hamiltonian_B",
    "flow_B",
    "solve",
    "write_trajectory_csv",
    "write_samples_csv",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FlowParams:
    t: float
    c: float = 0.0


def _actions(z):
    if isinstance(z, BirkhoffSeq):
        return z.actions
    a = np.asarray(z)
    return np.abs(a) ** 2 if np.iscomplexobj(a) else a.astype(float)


def frequencies(actions, n_max=None):
    """``omega_n = n^2 - 2 sum_k min(n, k) a_k`` for ``n = 1..n_max``.

    ``actions`` may be a :class:`BirkhoffSeq` or the actions ``a_k = |zeta_k|^2``
    themselves. The whole action vector enters the sum even if ``n_max`` is
    smaller.
    """
    a = _actions(actions)
    K = a.size
    n_max = K if n_max is None else int(n_max)
    n = np.arange(1, n_max + 1)
    if K == 0:
        return (n * n).astype(float)
    k = np.arange(1, K + 1)
    head = np.concatenate([[0.0], np.cumsum(k * a)])       # sum_{k<=n} k a_k
    tail = np.concatenate([np.cumsum(a[::-1])[::-1], [0.0]])  # sum_{k>n} a_k at index n
    m = np.minimum(n, K)
    return n * n - 2.0 * (head[m] + n * tail[m])


def frequencies_c(actions, c, n_max=None):
    """Frequencies of the zero-mean part of a solution with mean ``c``: ``omega_n - 2 c n``.

    A solution ``v = u(t, x - 2ct) + c`` carries an extra phase ``-2cnt`` on
    mode ``n`` relative to the mean-zero solution ``u``.
    """
    om = frequencies(actions, n_max)
    return om - 2.0 * c * np.arange(1, om.size + 1)


def hamiltonian_B(z):
    """``sum_k k^2 a_k - sum_k (sum_{p>=k} a_p)^2``."""
    a = _actions(z)
    if a.size == 0:
        return 0.0
    k = np.arange(1, a.size + 1)
    tails = np.cumsum(a[::-1])[::-1]
    return float(math.fsum(k * k * a) - math.fsum(tails * tails))


def _phases(om, t):
    return np.fmod(om * t, TWO_PI)


def flow_B(z0, t, c=0.0):
    """``zeta_n(t) = zeta_n(0) exp(i omega_{c,n}(zeta(0)) t)``.

    Phases are reduced modulo 2pi before exponentiation, which keeps large
    ``omega_n t`` accurate. Moduli change by at most one rounding.
    """
    z0 = z0 if isinstance(z0, BirkhoffSeq) else BirkhoffSeq(z0)
    if t == 0:
        return z0
    om = frequencies_c(z0.actions, c)
    return BirkhoffSeq(z0.zeta * np.exp(1j * _phases(om, t)), z0.grid)


def solve(v0, t, grid=None, settings=None, return_coordinates=False):
    """BO solution at time ``t`` through Birkhoff coordinates.

    The mean ``c = <v0|1>`` is split off, the zero-mean part is mapped to
    Birkhoff coordinates, rotated with ``omega_{c,n}``, inverted, and ``c`` is
    added back.

    Parameters
    ----------
    grid : GridSpec, optional
        Grid for the Newton inverse; its ``M`` is the number of matched
        coordinates and modes in the returned potential.
    return_coordinates : bool
        Also return the rotated :class:`BirkhoffSeq`.
    """
    c = v0.mean
    u0 = v0.zero_mean()
    z0 = birkhoff_coordinates(u0) if u0.M > 0 and np.any(u0.coeffs) else BirkhoffSeq(np.zeros(1))
    zt = flow_B(z0, t, c)
    grid = grid or GridSpec.for_modes(max(32, v0.M))
    if not np.any(zt.zeta):
        out = RealPotential.zero(grid.M).with_mean(c)
    else:
        out = invert(zt.padded(grid.M), settings or InverseSettings(), grid).with_mean(c)
    return (out, zt) if return_coordinates else out


def write_trajectory_csv(path, times, coords):
    """Columns ``t, n, re_zeta, im_zeta``; one row per time and coordinate."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "n", "re_zeta", "im_zeta"])
        for t, z in zip(times, coords):
            for k, v in enumerate(z.zeta, start=1):
                w.writerow([repr(float(t)), k, repr(float(v.real)), repr(float(v.imag))])
    return path


def write_samples_csv(path, u, P=None):
    """Potential samples at ``x_j = 2 pi j / P`` with columns ``x, u``."""
    P = P or max(64, 4 * u.M + 4)
    x = TWO_PI * np.arange(P) / P
    vals = synthesize(u, P)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u"])
        for xi, vi in zip(x, vals):
            w.writerow([repr(float(xi)), repr(float(vi))])
    return path
