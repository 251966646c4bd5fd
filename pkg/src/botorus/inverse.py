"""One-gap potentials and a Newton inverse of the truncated Birkhoff map."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ._parallel import map_ordered
from .birkhoff import BirkhoffSeq, birkhoff_coordinates
from .errors import DomainError, InverseError
from .fourier import GridSpec, RealPotential
from .lax import MAX_HARDY_DIM

log = logging.getLogger(__name__)

__all__ = [
    "InverseSettings",
    "one_gap_potential",
    "one_gap_gap",
    "one_gap_frequency",
    "one_gap_solution",
    "linear_initializer",
    "invert",
    "default_inverse_grid",
]


@dataclass(frozen=True)
class InverseSettings:
    """Newton controls.

    ``tol`` bounds the residual ``|Phi(u) - z|`` in ``h^{1/2}`` over the
    matched coordinates; ``damping`` is the initial step fraction, halved
    whenever a step fails to decrease the residual. The converged potential
    is re-measured with a verified truncation and must match to
    ``verify_tol`` (``None`` skips the check).
    """

    max_iter: int = 40
    tol: float = 1e-11
    damping: float = 1.0
    fd_step: float = 1e-6
    continuation: bool = True
    verify_tol: float | None = 1e-9

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.verify_tol is not None and not self.verify_tol > 0:
            raise ValueError("verify_tol must be positive or None")


def _mode_cutoff(grid):
    return grid.M if isinstance(grid, GridSpec) else int(grid)


def one_gap_potential(q, grid):
    """``u_{0,q}(x) = 2 Re(q e^{ix} / (1 - q e^{ix}))``, i.e. ``u_hat(+-n) = q^n``."""
    if not 0 <= q < 1:
        raise DomainError(f"one-gap parameter must satisfy 0 <= q < 1, got {q}")
    M = _mode_cutoff(grid)
    if q > 0 and q ** (M + 1) >= 1e-14:
        warnings.warn(f"one_gap_potential: tail q^(M+1) = {q ** (M + 1):.1e} is not negligible at M={M}", stacklevel=2)
    c = q ** np.arange(M + 1, dtype=float)
    c[0] = 0.0
    return RealPotential.from_nonnegative(c)


def one_gap_gap(q):
    """``gamma_1(u_{0,q}) = q^2 / (1 - q^2)``."""
    return q * q / (1.0 - q * q)


def one_gap_frequency(q):
    """``omega_{1,q} = (1 - 3q^2) / (1 - q^2)``."""
    return (1.0 - 3.0 * q * q) / (1.0 - q * q)


def one_gap_solution(q, t, grid, c=0.0):
    """Exact BO solution from ``u_{0,q} + c``: ``u_{0,q}(x + (omega_{1,q} - 2c) t) + c``."""
    u0 = one_gap_potential(q, grid)
    return u0.translate((one_gap_frequency(q) - 2.0 * c) * t).with_mean(c)


def linear_initializer(z, grid):
    """First-order inverse: ``u_hat(n) = -sqrt(n) zeta_n`` for ``1 <= n <= min(K, M)``."""
    M = _mode_cutoff(grid)
    zeta = z.zeta if isinstance(z, BirkhoffSeq) else np.asarray(z, dtype=complex)
    k = min(M, zeta.size)
    c = np.zeros(M + 1, dtype=complex)
    c[1:k + 1] = -np.sqrt(np.arange(1, k + 1)) * zeta[:k]
    return RealPotential.from_nonnegative(c)


def default_inverse_grid(z, M_min=32):
    """Grid for inverting ``z``: at least ``M_min`` modes and room for every target coordinate."""
    K = z.K if isinstance(z, BirkhoffSeq) else len(z)
    return GridSpec.for_modes(max(M_min, K))


def _pack(u, M):
    c = u.nonnegative[1:M + 1]
    return np.concatenate([c.real, c.imag])


def _unpack(x, M):
    return RealPotential.from_nonnegative(np.concatenate([[0.0], x[:M] + 1j * x[M:]]))


class _Problem:
    def __init__(self, target, grid):
        self.M = grid.M
        self.N = grid.N
        self.target = target
        self.weights = np.sqrt(np.arange(1, self.M + 1))

    def coords(self, x):
        return birkhoff_coordinates(_unpack(x, self.M), self.N, self.M, check_convergence=False).zeta

    def residual(self, x):
        d = self.coords(x) - self.target
        return np.concatenate([d.real, d.imag])

    def norm(self, r):
        w = np.concatenate([self.weights, self.weights])
        return float(np.linalg.norm(w * r))

    def jacobian(self, x, h):
        n = x.size

        def column(j):
            e = np.zeros(n)
            e[j] = h
            return (self.residual(x + e) - self.residual(x - e)) / (2 * h)

        return np.column_stack(map_ordered(column, range(n)))


def _verified_residual(u, target, M):
    z = birkhoff_coordinates(u, n_coords=M).zeta
    w = np.sqrt(np.arange(1, M + 1))
    return float(np.linalg.norm(w * (z - target)))


def _newton(problem, x0, settings):
    x = x0.copy()
    r = problem.residual(x)
    res = problem.norm(r)
    best = (res, x.copy())
    alpha = settings.damping
    for it in range(settings.max_iter):
        if res < settings.tol:
            return x, res, it
        J = problem.jacobian(x, settings.fd_step)
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            dx = None
        if dx is None or not np.all(np.isfinite(dx)) or np.linalg.cond(J) > 1e12:
            log.debug("Jacobian near singular at iteration %d; using regularized step", it)
            mu = 1e-8 * np.linalg.norm(J, 2)
            dx = np.linalg.solve(J.T @ J + mu * np.eye(J.shape[1]), -J.T @ r)
        step = alpha
        while step > 1e-6:
            x_new = x + step * dx
            r_new = problem.residual(x_new)
            res_new = problem.norm(r_new)
            if res_new < res:
                break
            step /= 2
        else:
            return best[1], best[0], it + 1
        x, r, res = x_new, r_new, res_new
        if res < best[0]:
            best = (res, x.copy())
        alpha = min(1.0, 2 * step)
        log.debug("newton iteration %d: residual %.3e (step %.3g)", it, res, step)
    if res < settings.tol:
        return x, res, settings.max_iter
    return best[1], best[0], settings.max_iter


def invert(z_target, settings=None, grid=None, initial=None, return_info=False):
    """Zero-mean potential ``u`` with ``Phi(u) = z_target`` on coordinates ``1..M``.

    The unknowns are ``Re u_hat(n), Im u_hat(n)`` for ``n = 1..M`` (``M`` from
    ``grid``), matched against ``zeta_1..zeta_M`` of the target, zero-padded.
    Newton steps use a central-difference Jacobian and are halved until the
    residual decreases. If the direct iteration fails, the target is reached
    by continuation along ``theta * z_target``.

    Raises
    ------
    InverseError
        If the residual stays above ``settings.tol``.
    """
    settings = settings or InverseSettings()
    z = z_target if isinstance(z_target, BirkhoffSeq) else BirkhoffSeq(z_target)
    grid = grid or default_inverse_grid(z)
    M = grid.M
    target = z.padded(M).zeta
    if z.K > M and np.max(np.abs(z.zeta[M:])) > settings.tol:
        warnings.warn(f"invert: target coordinates beyond {M} are ignored", stacklevel=2)
    if not np.any(target):
        u = RealPotential.zero(M)
        return (u, {"residual": 0.0, "iterations": 0, "stages": 0}) if return_info else u

    def solve_for(tgt, x0):
        problem = _Problem(tgt, grid)
        return _newton(problem, x0, settings)

    x0 = _pack(initial.resized(M), M) if initial is not None else _pack(linear_initializer(target, grid), M)
    x, res, its = solve_for(target, x0)
    stages = 1
    if res >= settings.tol and settings.continuation:
        for n_stages in (4, 16):
            log.debug("direct Newton stalled at %.3e; continuation with %d stages", res, n_stages)
            xc = np.zeros(2 * M)
            for theta in np.linspace(1.0 / n_stages, 1.0, n_stages):
                xc = _pack(linear_initializer(theta * target, grid), M) if not xc.any() else xc
                xc, res, its = solve_for(theta * target, xc)
            stages = n_stages
            x = xc
            if res < settings.tol:
                break
    u = _unpack(x, M)
    if res >= settings.tol:
        raise InverseError(f"Newton inversion did not reach tol={settings.tol:g}", res, u)
    verified = _verified_residual(u, target, M) if settings.verify_tol is not None else res
    while verified > settings.verify_tol and 2 * grid.N <= MAX_HARDY_DIM:
        # the finite section used inside Newton was too small for this potential
        grid = GridSpec(M, 2 * grid.N)
        log.debug("verified residual %.3e; re-solving with Hardy dimension %d", verified, grid.N)
        x, res, its = solve_for(target, x)
        u = _unpack(x, M)
        verified = _verified_residual(u, target, M)
    if settings.verify_tol is not None and verified > settings.verify_tol:
        raise InverseError(f"inverse not confirmed by a converged truncation (residual {verified:.2e})", verified, u)
    info = {"residual": res, "verified_residual": verified, "iterations": its, "stages": stages, "hardy_dim": grid.N}
    return (u, info) if return_info else u
