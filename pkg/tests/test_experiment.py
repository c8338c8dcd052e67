"""Detector statistics and the end-to-end scenario pipeline."""

import json
import math

import numpy as np
import pytest

from popperlab import (
    DetectorGeometry,
    GridSpec,
    JointStateRecipe,
    MeasurementSpec,
    PhysicalParams,
    ScenarioConfig,
    ScenarioFailure,
    UserParameterError,
    auto_grid,
    build_joint_state,
    build_pointer_state,
    chi_square_against_density,
    histogram,
    ks_against_density,
    position_correlation,
    run_scenario,
    sample_joint,
    sample_positions,
)
from popperlab.experiment import cumulative_distribution
from popperlab.wavefunction import grid_points


def reduced_state(sigma=1.0, omega0=2.0, eps=0.5):
    from popperlab import conditional_reduce
    p = PhysicalParams(sigma=sigma, omega0=omega0)
    g = auto_grid(p, MeasurementSpec(epsilon=eps))
    psi = build_joint_state(JointStateRecipe(p, g, g))
    phi1 = build_pointer_state(MeasurementSpec(epsilon=eps), g)
    return psi, conditional_reduce(psi, phi1, p, eps).phi2


class TestSampling:
    def test_deterministic_per_seed(self):
        _, phi2 = reduced_state()
        a = sample_positions(phi2, 1000, seed=11)
        b = sample_positions(phi2, 1000, seed=11)
        c = sample_positions(phi2, 1000, seed=12)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_std_tracks_grid_density(self):
        from popperlab import position_stats
        _, phi2 = reduced_state()
        s = sample_positions(phi2, 100_000, seed=2026)
        grid_std = position_stats(phi2).std
        assert abs(float(np.std(s)) - grid_std) / grid_std < 0.01

    def test_samples_stay_on_grid_support(self):
        _, phi2 = reduced_state()
        s = sample_positions(phi2, 5000, seed=1)
        assert np.all(s >= phi2.grid.y_min) and np.all(s <= phi2.grid.y_max)

    def test_zero_samples(self):
        _, phi2 = reduced_state()
        assert sample_positions(phi2, 0, seed=1).size == 0

    def test_chi_square_accepts_true_density(self):
        _, phi2 = reduced_state()
        s = sample_positions(phi2, 100_000, seed=4)
        geom = DetectorGeometry(n_bins=64, y_range=(-3.0, 3.0))
        hist = histogram(s, geom)
        stat, dof, p = chi_square_against_density(
            hist, phi2.grid, np.abs(phi2.amps) ** 2)
        assert dof > 10
        assert p >= 0.001

    def test_chi_square_rejects_wrong_density(self):
        _, phi2 = reduced_state()
        s = sample_positions(phi2, 100_000, seed=5)
        geom = DetectorGeometry(n_bins=64, y_range=(-3.0, 3.0))
        hist = histogram(s, geom)
        y = grid_points(phi2.grid)
        wrong = np.exp(-y ** 2 / (2 * 4.0))  # twice the true width
        _, _, p = chi_square_against_density(hist, phi2.grid, wrong)
        assert p < 1e-10

    def test_ks_sane(self):
        _, phi2 = reduced_state()
        s = sample_positions(phi2, 20_000, seed=6)
        stat, p = ks_against_density(s, phi2.grid, np.abs(phi2.amps) ** 2)
        assert 0.0 <= stat < 0.02
        assert p > 1e-4

    def test_cdf_rejects_null_density(self):
        g = GridSpec(n_points=64, y_min=-1.0, y_max=1.0)
        with pytest.raises(ValueError):
            cumulative_distribution(g, np.zeros(64))


class TestJointSampling:
    def test_correlation_matches_closed_form(self):
        p = PhysicalParams(sigma=1.0, omega0=2.0)
        g = auto_grid(p)
        psi = build_joint_state(JointStateRecipe(p, g, g))
        pairs = sample_joint(psi, 100_000, seed=7)
        corr = float(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1])
        assert abs(corr - position_correlation(p)) < 0.01

    def test_marginals_recover_single_particle_spreads(self):
        from popperlab import initial_spreads
        p = PhysicalParams(sigma=1.0, omega0=2.0)
        g = auto_grid(p)
        psi = build_joint_state(JointStateRecipe(p, g, g))
        pairs = sample_joint(psi, 100_000, seed=8)
        ref = initial_spreads(p).dy2
        assert float(np.std(pairs[:, 0])) == pytest.approx(ref, rel=0.01)
        assert float(np.std(pairs[:, 1])) == pytest.approx(ref, rel=0.01)

    def test_deterministic(self):
        p = PhysicalParams(sigma=1.0, omega0=2.0)
        g = auto_grid(p)
        psi = build_joint_state(JointStateRecipe(p, g, g))
        assert np.array_equal(sample_joint(psi, 500, seed=9),
                              sample_joint(psi, 500, seed=9))

    def test_anticorrelated_source(self):
        # omega0 below the product line flips the correlation sign
        p = PhysicalParams(sigma=1.0, omega0=0.1)
        g = auto_grid(p)
        psi = build_joint_state(JointStateRecipe(p, g, g))
        pairs = sample_joint(psi, 50_000, seed=10)
        corr = float(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1])
        assert corr < -0.5
        assert abs(corr - position_correlation(p)) < 0.02


class TestHistogram:
    def test_counts_and_flows(self):
        geom = DetectorGeometry(n_bins=10, y_range=(0.0, 1.0))
        samples = np.array([-0.5, 0.05, 0.15, 0.15, 0.999, 1.0, 2.0])
        h = histogram(samples, geom)
        assert h.total == 7
        assert h.underflow == 1 and h.overflow == 1
        assert h.counts[0] == 1 and h.counts[1] == 2
        # exact upper edge lands in the last bin, not overflow
        assert h.counts[-1] == 2
        assert h.counts.sum() == 5

    def test_edges(self):
        geom = DetectorGeometry(n_bins=4, y_range=(-1.0, 1.0))
        h = histogram(np.array([0.0]), geom)
        assert np.allclose(h.edges, [-1.0, -0.5, 0.0, 0.5, 1.0])


class TestRunScenario:
    def base_config(self, **kw):
        p = PhysicalParams(sigma=1.0, omega0=2.0)
        ms = MeasurementSpec(epsilon=0.5)
        defaults = dict(
            params=p,
            grid=auto_grid(p, ms),
            detector=DetectorGeometry(n_bins=48, y_range=(-5.0, 5.0), side="B"),
            measurement=ms,
            evolution_time=0.0,
            n_samples=20_000,
            seed=123,
        )
        defaults.update(kw)
        return ScenarioConfig(**defaults)

    def test_narrow_slit_never_widens_remote_momentum(self):
        report = run_scenario(self.base_config())
        ratios = report.numeric["ratios"]
        assert ratios["dp2_post_over_initial_closed"] <= 1.0 + 1e-12
        assert ratios["dp2_post_over_initial_numeric"] <= 1.0 + 1e-8

    def test_disentangled_source_unaffected(self):
        p = PhysicalParams(sigma=1.0, omega0=0.25)
        ms = MeasurementSpec(epsilon=0.3)
        cfg = self.base_config(params=p, measurement=ms, grid=auto_grid(p, ms))
        report = run_scenario(cfg)
        assert report.analytic["disentangled"] is True
        ratios = report.numeric["ratios"]
        assert ratios["dp2_post_over_initial_numeric"] == pytest.approx(1.0, abs=1e-6)
        assert report.numeric["schmidt_entropy"] < 1e-6

    def test_tight_correlation_regime_monotone_in_eps(self):
        # narrowing the slit in the tightly correlated regime kicks the
        # remote particle harder; epsilon = 0.05 needs an 8192-point grid
        # to keep 1.5 samples across the pointer
        p = PhysicalParams(sigma=10.0, omega0=10.0)
        grids = {
            0.2: auto_grid(p, MeasurementSpec(epsilon=0.2), max_points=4096),
            0.1: auto_grid(p, MeasurementSpec(epsilon=0.1), max_points=4096),
            0.05: GridSpec(n_points=8192, y_min=-75.0, y_max=75.0),
        }
        closed, numeric = [], []
        for eps in (0.2, 0.1, 0.05):
            ms = MeasurementSpec(epsilon=eps)
            cfg = self.base_config(params=p, measurement=ms,
                                   grid=grids[eps], n_samples=0)
            report = run_scenario(cfg)
            closed.append(report.analytic["reduced"]["dp2y"])
            numeric.append(report.numeric["reduced"]["dp2y"])
            assert report.analytic["reduced"]["strong_correlation"]["regime_ok"]
        assert closed[0] < closed[1] < closed[2]
        assert numeric[0] < numeric[1] < numeric[2]

    def test_report_layout_and_sampling_block(self):
        report = run_scenario(self.base_config(evolution_time=1.0))
        doc = report.to_json_dict()
        json.dumps(doc)  # must be serializable
        assert doc["sampled"]["n"] == 20_000
        assert doc["sampled"]["side"] == "B"
        assert doc["sampled"]["ks"]["pvalue"] > 1e-6
        hist = doc["sampled"]["histogram"]
        assert hist["total"] == 20_000
        assert sum(hist["counts"]) + hist["underflow"] + hist["overflow"] == 20_000
        predicted = doc["sampled"]["predicted_detector_width"]
        assert doc["sampled"]["std"] == pytest.approx(predicted, rel=0.02)
        assert set(report.states) == {"joint", "pointer", "reduced", "detector"}

    def test_reports_identical_up_to_timings(self):
        a = run_scenario(self.base_config()).to_json_dict(include_timings=False)
        b = run_scenario(self.base_config()).to_json_dict(include_timings=False)
        assert a == b

    def test_seed_changes_samples_not_numerics(self):
        a = run_scenario(self.base_config(seed=1)).to_json_dict(include_timings=False)
        b = run_scenario(self.base_config(seed=2)).to_json_dict(include_timings=False)
        assert a["numeric"] == b["numeric"]
        assert a["analytic"] == b["analytic"]
        assert a["sampled"]["histogram"]["counts"] != b["sampled"]["histogram"]["counts"]

    def test_coincidence_mode_without_measurement(self):
        cfg = self.base_config(measurement=None, n_samples=30_000)
        report = run_scenario(cfg)
        assert report.analytic["reduced"] is None
        assert report.numeric["reduced"] is None
        corr = report.sampled["correlation"]
        assert abs(corr - position_correlation(cfg.params)) < 0.02
        assert report.sampled["predicted_detector_width"] is None

    def test_detector_side_a_samples_pointer_plane(self):
        cfg = self.base_config(
            detector=DetectorGeometry(n_bins=48, y_range=(-3.0, 3.0), side="A"))
        report = run_scenario(cfg)
        # station A sees the pointer width, far narrower than side B
        assert report.sampled["std"] == pytest.approx(0.5, rel=0.02)

    def test_invalid_config_raises_user_error(self):
        cfg = self.base_config(measurement=MeasurementSpec(epsilon=0.0))
        with pytest.raises(UserParameterError, match="epsilon must be > 0"):
            run_scenario(cfg)

    def test_stage_failures_are_labelled(self):
        # grid passes static validation but breaks the tail contract when
        # momentum is measured, so the failure carries the stage name
        p = PhysicalParams(sigma=1.0, omega0=1.0)
        cfg = self.base_config(
            params=p, measurement=None, n_samples=0,
            grid=GridSpec(n_points=1024, y_min=-6.5, y_max=6.5))
        with pytest.raises(ScenarioFailure) as err:
            run_scenario(cfg)
        assert err.value.stage == "numeric_initial"
        from popperlab import TailLeakError
        assert isinstance(err.value.cause, TailLeakError)

    def test_schmidt_skipped_on_large_grids(self):
        p = PhysicalParams(sigma=1.0, omega0=2.0)
        ms = MeasurementSpec(epsilon=0.5)
        g = auto_grid(p, ms)
        big = GridSpec(n_points=4096, y_min=g.y_min, y_max=g.y_max)
        report = run_scenario(self.base_config(grid=big, n_samples=0))
        assert report.numeric["schmidt_entropy"] is None

    def test_timings_cover_stages(self):
        report = run_scenario(self.base_config(evolution_time=0.5))
        for stage in ("build", "numeric_initial", "reduce", "propagate", "sample"):
            assert stage in report.timings
            assert report.timings[stage] >= 0.0
