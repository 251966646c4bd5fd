import json

import numpy as np
import pytest

from botorus import one_gap_frequency
from botorus.cli import main
from botorus.experiments import (
    ExperimentConfig,
    orbit_distance,
    parse_config,
    run,
    run_illposedness,
    run_orbital_stability,
    run_phase_validation,
    run_recurrence,
    run_traveling_wave,
)
from botorus import one_gap_potential


def cfg(name, **params):
    return ExperimentConfig(name, params)


class TestConfig:
    def test_parse(self):
        text = """
        # comment
        q = 0.5
        s: 0.25
        actions = 0.5, 1.0
        datum = one_gap   # trailing comment
        monotonicity = false
        """
        p = parse_config(text)
        assert p == {"q": 0.5, "s": 0.25, "actions": (0.5, 1.0), "datum": "one_gap", "monotonicity": False}

    def test_malformed_line(self):
        with pytest.raises(ValueError):
            parse_config("q 0.5")

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            ExperimentConfig("nope")

    @pytest.mark.parametrize("name", ["orbital_stability", "recurrence", "apriori_bound"])
    def test_flow_experiments_need_small_s(self, name):
        with pytest.raises(ValueError):
            ExperimentConfig(name, {"s": 0.5})

    def test_large_s_only_for_illposedness(self):
        ExperimentConfig("illposedness", {"s": 0.6})
        with pytest.raises(ValueError):
            ExperimentConfig("isospectrality", {"s": 0.6})


class TestPhaseValidation:
    def test_one_gap_slope(self):
        rows = run_phase_validation(cfg("phase_validation", q=0.5)).tables["phase_slopes"]
        assert rows[0]["n"] == 1
        assert rows[0]["omega_measured"] == pytest.approx(1 / 3, abs=1e-4)

    def test_cosine(self):
        rep = run_phase_validation(cfg("phase_validation", datum="cosine", amplitude=0.2, n_max=1))
        assert rep.tables["phase_slopes"][0]["abs_dev"] < 1e-4

    def test_nonzero_mean_shifts_frequencies(self):
        # slopes follow omega_n - 2 c n
        rep = run_phase_validation(cfg("phase_validation", datum="random", c=0.5, n_max=3))
        assert len(rep.tables["phase_slopes"]) == 3
        assert rep.summary["max_abs_dev"] < 1e-4

    def test_zero_datum(self):
        rep = run_phase_validation(cfg("phase_validation", datum="zero"))
        assert rep.tables["phase_slopes"] == []


class TestTravelingWave:
    def test_zero(self):
        rep = run_traveling_wave(cfg("traveling_wave", q=0.0, t_max=0.5, n_samples=2))
        assert rep.summary["max_l2_error"] == 0

    @pytest.mark.slow
    def test_stiff_profile(self):
        rep = run_traveling_wave(cfg("traveling_wave", q=0.8, t_max=0.5, n_samples=3))
        assert rep.summary["max_l2_error"] < 1e-5
        assert rep.metadata["pde"]["M_pde"] > 64


class TestOrbital:
    def test_orbit_distance_recovers_shift(self):
        u = one_gap_potential(0.5, 50)
        d, tau = orbit_distance(u.translate(1.234), u)
        assert d < 1e-12
        assert tau == pytest.approx(1.234, abs=1e-10)

    def test_unperturbed_orbit(self):
        rep = run_orbital_stability(cfg("orbital_stability", delta=0.0, t_max=1.0, n_samples=21))
        assert rep.summary["sup_distance"] < 1e-8

    @pytest.mark.slow
    def test_bound_and_monotonicity(self):
        rep = run_orbital_stability(cfg("orbital_stability", q=0.5, delta=1e-3, perturb_mode=2, s=0.0, t_max=5.0))
        assert rep.summary["sup_distance"] <= 5e-3
        assert rep.checks["monotone_in_delta"]


class TestIllposedness:
    def test_omega_column(self):
        rows = run_illposedness(cfg("illposedness", k_spectral=0)).tables["one_gap_family"]
        assert rows[3]["q"] == 0.9375
        assert rows[3]["omega_closed"] == pytest.approx(-13.516, abs=1e-3)

    def test_spectral_cross_check(self):
        rows = run_illposedness(cfg("illposedness", k_max=2, k_spectral=2)).tables["one_gap_family"]
        for r in rows:
            q = r["q"]
            assert r["gamma_spectral"] == pytest.approx(q * q / (1 - q * q), rel=1e-9)

    def test_zero_time_control(self):
        rep = run_illposedness(cfg("illposedness", t=0.0, k_spectral=0))
        assert all(r["dist_evolved"] == r["dist_initial"] for r in rep.tables["one_gap_family"])

    def test_needs_large_s(self):
        with pytest.raises(ValueError):
            run_illposedness(cfg("illposedness", s=0.4))


class TestRecurrence:
    def test_one_gap_period(self):
        rep = run_recurrence(cfg("recurrence", q=0.5, t_max=40.0, invert_returns=False))
        period = 2 * np.pi / abs(one_gap_frequency(0.5))
        hits = [r for r in rep.tables["returns"] if r["birkhoff_distance"] < 1e-8]
        assert [round(r["t"] / period, 9) for r in hits] == [1.0, 2.0]

    def test_commensurate_pair(self):
        # actions (0.5, 1) give frequencies (-2, -1)
        rep = run_recurrence(cfg("recurrence", datum="actions", actions=(0.5, 1.0), phases=(0.3, 1.1), t_max=14.0,
                                 invert_returns=False))
        assert rep.summary["period_estimate"] == pytest.approx(2 * np.pi)
        hits = [r["t"] for r in rep.tables["returns"] if r["birkhoff_distance"] < 1e-8]
        assert hits == pytest.approx([2 * np.pi, 4 * np.pi])

    def test_zero_sequence(self):
        rep = run_recurrence(cfg("recurrence", datum="zero", t_max=1.0))
        assert rep.summary["n_returns"] == 5
        assert rep.passed

    @pytest.mark.slow
    def test_returns_in_potential_space(self):
        rep = run_recurrence(cfg("recurrence", q=0.5, t_max=20.0, M_inverse=24))
        assert rep.checks["potential_returns"]


def test_reports_are_deterministic(tmp_path):
    a = run(ExperimentConfig("apriori_bound", {"n_potentials": 6, "seed": 4}, tmp_path / "a"))
    run(ExperimentConfig("apriori_bound", {"n_potentials": 6, "seed": 4}, tmp_path / "b"))
    assert a.passed
    assert (tmp_path / "a" / "spectral_bound.csv").read_bytes() == (tmp_path / "b" / "spectral_bound.csv").read_bytes()
    meta = json.loads((tmp_path / "a" / "summary.json").read_text())["metadata"]["params"]
    assert meta["seed"] == 4 and meta["M"] == 8


def test_cli(tmp_path, capsys):
    conf = tmp_path / "ill.cfg"
    conf.write_text("s = 0.6\nt = 0.3\nk_spectral = 0\n")
    code = main(["illposedness", "--config", str(conf), "--out", str(tmp_path / "out"), "--set", "k_max=8"])
    assert code == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["passed"] and all(summary["checks"].values())
    header = (tmp_path / "out" / "one_gap_family.csv").read_text().splitlines()[0]
    assert header.startswith("k,q,dist_initial,dist_evolved")
    assert "PASS" in capsys.readouterr().out


def test_cli_isospectrality_writes_drift_table(tmp_path):
    code = main(["isospectrality", "--out", str(tmp_path), "--set", "t_max=0.5", "--set", "n_samples=3"])
    assert code == 0
    rows = (tmp_path / "gap_drift.csv").read_text().splitlines()
    assert len(rows) == 1 + 3 * 10
