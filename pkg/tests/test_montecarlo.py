"""Monte Carlo harness: grids, presets, tallies, schedule independence."""
from __future__ import annotations

from dataclasses import replace

import pytest

from bubbledate import (
    CellKey,
    ConfigError,
    DgpConfig,
    ExperimentConfig,
    IidGaussian,
    Target,
    TrimmingPolicy,
    VolatilityScaled,
    preset,
    run_experiment,
)
from bubbledate.montecarlo import PRESET_NAMES, _BASE_DGP


def small_config(**overrides):
    base = dict(
        dgp=DgpConfig(0.4, 0.6, 0.7, phi_a=1.08, phi_b=0.90, T=120, y0=0.0),
        errors=IidGaussian(1.0),
        T_grid=(120,),
        phi_a_grid=(1.08,),
        reps=40,
        base_seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestExperimentConfig:
    def test_cells_cross_grids_against_anchors(self):
        cfg = small_config(T_grid=(100, 120), phi_a_grid=(1.05, 1.1), phi_b_grid=(0.85,))
        assert cfg.cells() == [
            CellKey(100, 1.05, 0.90),
            CellKey(100, 1.10, 0.90),
            CellKey(100, 1.08, 0.85),
            CellKey(120, 1.05, 0.90),
            CellKey(120, 1.10, 0.90),
            CellKey(120, 1.08, 0.85),
        ]

    def test_cell_dgp_overrides_only_swept_fields(self):
        cfg = small_config()
        cell = CellKey(T=200, phi_a=1.2, phi_b=0.8)
        dgp = cfg.cell_dgp(cell)
        assert (dgp.T, dgp.phi_a, dgp.phi_b) == (200, 1.2, 0.8)
        assert (dgp.tau_e, dgp.tau_c, dgp.tau_r) == (0.4, 0.6, 0.7)
        assert dgp.y0 == 0.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            small_config(T_grid=())
        with pytest.raises(ConfigError):
            small_config(phi_a_grid=(), phi_b_grid=())
        with pytest.raises(ConfigError):
            small_config(reps=0)
        with pytest.raises(ConfigError):
            small_config(targets=(Target.COLLAPSE, Target.COLLAPSE))
        with pytest.raises(ConfigError):
            small_config(targets=(), bic=False)


class TestPresets:
    def test_baseline_design(self):
        cfg = preset("baseline")
        assert cfg.T_grid == (400, 800)
        assert cfg.phi_a_grid == (1.01, 1.05, 1.09)
        assert cfg.phi_b_grid == (0.98, 0.96, 0.94)
        assert (cfg.dgp.tau_e, cfg.dgp.tau_c, cfg.dgp.tau_r) == (0.4, 0.6, 0.7)
        assert cfg.dgp.drift_pre == cfg.dgp.drift_post == 1.0 / 800.0
        assert isinstance(cfg.errors, IidGaussian)
        assert cfg.trimming.rho == 0.05
        assert cfg.reps == 2000
        assert cfg.base_seed == 0
        assert len(cfg.cells()) == 12
        # the anchor pair appears in both sweep arms
        assert cfg.cells().count(CellKey(800, 1.05, 0.96)) == 2

    def test_variant_presets_differ_only_as_documented(self):
        base = preset("baseline")
        short = preset("short-bubble")
        assert (short.dgp.tau_e, short.dgp.tau_c, short.dgp.tau_r) == (0.5, 0.55, 0.6)
        assert short.trimming == base.trimming

        trim = preset("trim1pct")
        assert trim.trimming.rho == 0.01
        assert trim.dgp == base.dgp

        down = preset("volshift-down")
        assert isinstance(down.errors, VolatilityScaled)
        assert down.errors.profile.sigma1 == pytest.approx(1.0 / 3.0)
        up = preset("volshift-up")
        assert up.errors.profile.sigma1 == 3.0
        assert up.errors.profile.tau_sigma == 0.5

        no4 = preset("no-fourth-regime")
        assert no4.dgp.tau_r == 1.0
        assert no4.targets == (Target.COLLAPSE,)

    def test_preset_names_round_trip(self):
        for name in PRESET_NAMES:
            assert preset(name).name == name
        with pytest.raises(ConfigError):
            preset("nope")


class TestRunExperiment:
    def test_counts_are_conserved(self):
        cfg = small_config(phi_b_grid=(0.85,))
        result = run_experiment(cfg)
        assert len(result.histograms) == 2 * 3  # cells x targets
        for hist in result.histograms:
            assert sum(hist.bins.values()) + hist.unavailable == cfg.reps
            assert hist.reps == cfg.reps

    def test_true_dates_follow_cell_sample_size(self):
        cfg = small_config(T_grid=(120, 200))
        result = run_experiment(cfg)
        for hist in result.histograms:
            dgp = cfg.cell_dgp(hist.cell)
            k_e, k_c, k_r = dgp.break_indices
            want = {Target.EMERGENCE: k_e, Target.COLLAPSE: k_c, Target.RECOVERY: k_r}
            assert hist.true_date == want[hist.target]

    def test_parallel_equals_serial(self):
        cfg = small_config(reps=30)
        serial = run_experiment(cfg, workers=1)
        for workers in (2, 3):
            parallel = run_experiment(cfg, workers=workers)
            assert len(parallel.histograms) == len(serial.histograms)
            for hs, hp in zip(serial.histograms, parallel.histograms):
                assert hs.cell == hp.cell
                assert hs.target == hp.target
                assert hs.bins == hp.bins
                assert hs.unavailable == hp.unavailable

    def test_rerun_is_deterministic(self):
        cfg = small_config(reps=25)
        a = run_experiment(cfg)
        b = run_experiment(cfg)
        for ha, hb in zip(a.histograms, b.histograms):
            assert ha.bins == hb.bins

    def test_recovery_easier_when_collapse_is_slow(self):
        cfg = ExperimentConfig(
            dgp=_BASE_DGP,
            errors=IidGaussian(1.0),
            T_grid=(400,),
            phi_a_grid=(1.01,),
            phi_b_grid=(0.98,),
            reps=200,
            base_seed=0,
            targets=(Target.RECOVERY,),
        )
        hits = {
            (h.cell.phi_a, h.cell.phi_b): h.hit_frequency
            for h in run_experiment(cfg).histograms
        }
        assert hits[(1.05, 0.98)] >= hits[(1.01, 0.96)] + 0.3

    def test_collapse_accuracy_improves_with_sample_size(self):
        cfg = ExperimentConfig(
            dgp=_BASE_DGP,
            errors=IidGaussian(1.0),
            T_grid=(400, 800),
            phi_a_grid=(1.01,),
            reps=400,
            base_seed=0,
            targets=(Target.COLLAPSE,),
        )
        hits = {h.cell.T: h.hit_frequency for h in run_experiment(cfg).histograms}
        assert hits[800] >= hits[400] + 0.1

    def test_recovery_hit_rate_in_expected_band(self):
        cfg = ExperimentConfig(
            dgp=_BASE_DGP,
            errors=IidGaussian(1.0),
            T_grid=(400,),
            phi_b_grid=(0.98,),
            reps=1000,
            base_seed=0,
            targets=(Target.RECOVERY,),
        )
        hit = run_experiment(cfg).histograms[0].hit_frequency
        assert 0.65 <= hit <= 0.85

    def test_bic_tally_conservation_and_modal_choice(self):
        from bubbledate import ModelChoice

        cfg = ExperimentConfig(
            dgp=replace(_BASE_DGP, phi_a=1.09, phi_b=0.94),
            errors=IidGaussian(1.0),
            T_grid=(400,),
            phi_a_grid=(1.09,),
            reps=50,
            base_seed=0,
            targets=(Target.COLLAPSE,),
            bic=True,
        )
        result = run_experiment(cfg)
        assert len(result.bic_tallies) == 1
        tally = result.bic_tallies[0]
        assert set(tally.counts) == set(ModelChoice)
        assert sum(tally.counts.values()) + tally.failed == cfg.reps
        assert max(tally.counts, key=tally.counts.get) is ModelChoice.FOUR_REGIME

    def test_no_fourth_regime_preset_runs(self):
        cfg = replace(preset("no-fourth-regime"), T_grid=(400,), reps=10)
        result = run_experiment(cfg)
        assert {h.target for h in result.histograms} == {Target.COLLAPSE}
        for hist in result.histograms:
            assert sum(hist.bins.values()) + hist.unavailable == 10

    def test_trimming_policy_is_honored(self):
        cfg = small_config(trimming=TrimmingPolicy(0.10), reps=20)
        result = run_experiment(cfg)
        for hist in result.histograms:
            margin = cfg.trimming.margin(hist.cell.T)
            k_hi = cfg.trimming.k_hi(hist.cell.T)
            for k in hist.bins:
                assert margin <= k <= k_hi
