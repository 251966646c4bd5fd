"""Acceptance criteria, one test per criterion at the stated tolerance."""
import numpy as np
import pytest

from botorus import (
    BirkhoffSeq,
    GridSpec,
    InverseSettings,
    birkhoff_coordinates,
    build_matrix,
    eigen_decompose,
    evolve,
    frequencies,
    gaps_from_spectrum,
    generating_function_product,
    generating_function_resolvent,
    hamiltonian_B,
    invert,
    kappa,
    one_gap_frequency,
    one_gap_potential,
    one_gap_solution,
    poisson_bracket,
    smooth_random_potential,
    sobolev_norm,
    solve,
    spectrum,
    trace_formula_check,
    weighted_norm,
)
from botorus.experiments import ExperimentConfig, run_illposedness, run_phase_validation
from conftest import random_family


@pytest.mark.criterion(1, "zero potential")
def test_zero_potential():
    u = one_gap_potential(0.0, 8)
    S = spectrum(u, n_required=20)
    n = np.arange(S.converged_range + 1)
    assert np.max(np.abs(S.eigenvalues[n] - n)) <= 1e-12
    z = birkhoff_coordinates(u, n_coords=20)
    assert np.all(z.zeta == 0)
    assert np.array_equal(frequencies(z.actions), np.arange(1, 21) ** 2.0)
    assert abs(generating_function_resolvent(u, 2.0) - 0.5) <= 1e-12
    assert abs(generating_function_product(S, 2.0) - 0.5) <= 1e-12


@pytest.mark.criterion(2, "one-gap closed forms at q = 0.5, N = 128")
def test_one_gap_closed_forms():
    u = one_gap_potential(0.5, 60)
    S = eigen_decompose(build_matrix(u, 128))
    z = birkhoff_coordinates(u, 128, check_convergence=False)
    got = {
        "gamma_1": S.gaps[0],
        "lambda_0": S.eigenvalues[0],
        "kappa_1": kappa(S, 1),
        "inner_sq": abs(S.inner_products[1]) ** 2,
        "omega_1": frequencies(z.actions)[0],
        "H_B": hamiltonian_B(z),
    }
    want = {"gamma_1": 1 / 3, "lambda_0": -1 / 3, "kappa_1": 3 / 4, "inner_sq": 1 / 4, "omega_1": 1 / 3, "H_B": 2 / 9}
    for key, value in want.items():
        assert abs(got[key] - value) <= 1e-7 * abs(value), key


@pytest.mark.criterion(3, "trace formula on 20 random potentials")
def test_trace_formula_family():
    for u in random_family(20, seed=3):
        assert sobolev_norm(u, 0) <= 2 + 1e-12
        lhs, rhs, rel = trace_formula_check(u)
        assert rel < 1e-7, (lhs, rhs)


@pytest.mark.criterion(4, "generating function: resolvent vs product")
def test_generating_function_family():
    for u in random_family(20, seed=3):
        S = spectrum(u, n_required=16)
        for lam in (1j, 1 + 1j, 3.0):
            a = generating_function_resolvent(u, lam)
            b = generating_function_product(S, lam)
            assert abs(a - b) <= 1e-8 * abs(a), (lam, a, b)


@pytest.mark.criterion(5, "isospectrality under the PDE flow")
@pytest.mark.parametrize("datum", ["one_gap", "random"])
def test_isospectral_pde(datum):
    if datum == "one_gap":
        v0 = one_gap_potential(0.5, 60)
    else:
        v0 = smooth_random_potential(np.random.default_rng(5), 5, norm=1.0)
    traj = evolve(v0, 1.0, dt=1e-4, sample_times=[0.25, 0.5, 0.75, 1.0], M_pde=64)
    g0 = None
    for st in traj.states:
        g = gaps_from_spectrum(spectrum(st.potential(), n_required=10), 10)
        g0 = g if g0 is None else g0
        assert np.max(np.abs(g - g0)) < 1e-6
    for key in ("drift_mean", "drift_half_l2", "drift_energy"):
        assert traj.metadata[key] < 1e-8, key


@pytest.mark.criterion(6, "phase law from PDE trajectories")
@pytest.mark.parametrize("params", [
    {"datum": "one_gap", "q": 0.5},
    {"datum": "random", "M": 5, "norm": 0.5, "seed": 1},
])
def test_phase_law(params):
    rep = run_phase_validation(ExperimentConfig("phase_validation", dict(params, n_max=5, t_max=1.0)))
    rows = rep.tables["phase_slopes"]
    assert rows
    if params["datum"] == "random":
        assert [r["n"] for r in rows] == [1, 2, 3, 4, 5]
    for r in rows:
        assert r["abs_dev"] < 1e-4, r


@pytest.mark.criterion(7, "traveling wave")
def test_traveling_wave():
    u0 = one_gap_potential(0.5, 64)
    traj = evolve(u0, 1.0, dt=1e-4, M_pde=64)
    err = sobolev_norm(traj.states[-1].potential() - u0.translate(one_gap_frequency(0.5)), 0)
    assert err < 1e-6


@pytest.mark.criterion(8, "inverse round trips")
def test_inverse_round_trips():
    grid = GridSpec.for_modes(24)
    rng = np.random.default_rng(8)
    for norm in (0.3, 0.7, 1.0):
        u = smooth_random_potential(rng, 6, norm=norm, decay=0.5)
        z = birkhoff_coordinates(u, n_coords=grid.M)
        back = invert(z, InverseSettings(), grid)
        assert sobolev_norm(back - u, 0) < 1e-7
    for actions, phases in [((0.2, 0.1), (0.0, np.pi / 2)), ((0.3, 0.0, 0.05), (1.0, 0.0, -2.0))]:
        target = BirkhoffSeq.from_actions(actions, phases)
        u = invert(target, InverseSettings(), grid)
        assert sobolev_norm(u, 0) <= 1.0
        z = birkhoff_coordinates(u, n_coords=grid.M)
        assert weighted_norm(z.zeta - target.padded(grid.M).zeta, 0.5) < 1e-7


@pytest.mark.criterion(9, "Poisson brackets of Birkhoff coordinates")
def test_canonical_brackets():
    u = smooth_random_potential(np.random.default_rng(9), 4, norm=0.1)

    def zeta(v):
        return birkhoff_coordinates(v, 64, n_coords=3, check_convergence=False).zeta

    def zeta_bar(v):
        return np.conj(zeta(v))

    mixed = poisson_bracket(zeta, zeta_bar, u, n_modes=16)
    plain = poisson_bracket(zeta, zeta, u, n_modes=16)
    assert np.max(np.abs(mixed - (-1j) * np.eye(3))) < 5e-3
    assert np.max(np.abs(plain)) < 5e-3


@pytest.mark.criterion(10, "frequencies are action gradients of H_B")
def test_frequency_gradient():
    rng = np.random.default_rng(10)
    for _ in range(5):
        a = rng.uniform(0, 0.5, 6)
        om = frequencies(a)
        h = 1e-6
        for n in range(4):
            e = np.zeros_like(a)
            e[n] = h
            fd = (hamiltonian_B(a + e) - hamiltonian_B(a - e)) / (2 * h)
            assert abs(fd - om[n]) <= 1e-6 * abs(om[n])


@pytest.mark.criterion(11, "spectral inequality sweep")
def test_spectral_inequality_sweep():
    for u in random_family(50, seed=11):
        S = spectrum(u, n_required=10)
        k = S.converged_range
        lam = S.eigenvalues[:k + 1]
        assert np.all(lam <= np.arange(k + 1) + 1e-9)
        assert np.all(np.diff(lam) - 1 >= -1e-10)


@pytest.mark.criterion(12, "ill-posedness trend")
def test_illposedness():
    rep = run_illposedness(ExperimentConfig("illposedness", {"s": 0.6, "t": 0.3, "k_max": 8}))
    rows = rep.tables["one_gap_family"]
    init = [r["dist_initial"] for r in rows]
    assert all(b < a for a, b in zip(init, init[1:]))
    for r in rows:
        q = r["q"]
        assert abs(r["omega_formula"] - (1 - 3 * q * q) / (1 - q * q)) < 1e-9
        assert r["dist_evolved"] > 0.1
    assert rows[-1]["omega_formula"] < -100
    assert rep.passed


@pytest.mark.criterion(13, "mean-c composition")
def test_mean_composition():
    q, c, t = 0.5, 1.0, 0.5
    v0 = one_gap_potential(q, 64).with_mean(c)
    pde = evolve(v0, t, dt=1e-4, M_pde=64).states[-1].potential()
    composed = one_gap_solution(q, t, 64, c=c)
    assert sobolev_norm(pde - composed, 0) < 1e-6
    via_birkhoff = solve(v0, t, GridSpec.for_modes(48))
    assert sobolev_norm(pde - via_birkhoff, 0) < 1e-6
