import dataclasses
import math

import numpy as np
import pytest
from qisim.analytics import (
    CSV_COLUMNS,
    analytic_g2,
    bootstrap_snr_err,
    click_pattern_probabilities,
    click_probabilities,
    expected_snr_classical,
    expected_snr_quantum,
    qef,
    run_sweep,
    snr_from_counts,
    sweep_to_csv,
)
from qisim.channel import simulate_counts
from qisim.model import ChannelParams, ExperimentConfig, SourceParams, validate_config
from qisim.rng import substream

from .conftest import assert_within_sigma


def params(mu=0.01, eta_h=0.075, eta_sig_parts=(0.9, 0.05, 0.6), beta=0.0, dark=0.0, noise_h=0.0):
    source = SourceParams(mu=mu, eta_herald=eta_h, noise_herald_per_bin=noise_h)
    channel = ChannelParams(
        eta_transmit=eta_sig_parts[0],
        collection_fraction=eta_sig_parts[1],
        eta_signal_detector=eta_sig_parts[2],
        background_per_bin=beta,
        dark_signal_per_bin=dark,
    )
    return source, channel


class TestClickProbabilities:
    def test_perfect_correlation_limit(self):
        source, channel = params(mu=0.01, eta_h=1.0, eta_sig_parts=(1.0, 1.0, 1.0))
        bp = click_probabilities(source, channel, True)
        expected = -math.expm1(-0.01)
        assert bp.p_signal == pytest.approx(expected, rel=1e-12)
        assert bp.p_herald == pytest.approx(expected, rel=1e-12)
        assert bp.p_coincidence == pytest.approx(expected, rel=1e-12)

    def test_no_pairs_means_independence(self):
        source, channel = params(mu=0.0, beta=2e-4, dark=1e-6, noise_h=1e-6)
        bp = click_probabilities(source, channel, True)
        assert bp.p_signal == pytest.approx(-math.expm1(-(2e-4 + 1e-6)), rel=1e-12)
        assert bp.p_coincidence == pytest.approx(bp.p_signal * bp.p_herald, rel=1e-12)

    def test_target_out_forces_factorization(self):
        source, channel = params(mu=0.02, beta=5e-4, dark=1e-6, noise_h=1e-5)
        bp = click_probabilities(source, channel, False)
        assert bp.p_coincidence == pytest.approx(bp.p_signal * bp.p_herald, rel=1e-12)
        assert bp.p_signal == pytest.approx(bp.p_background, rel=1e-12)

    def test_patterns_sum_to_one(self):
        source, channel = params(mu=0.03, beta=1e-3, dark=1e-5, noise_h=1e-4)
        patterns = click_pattern_probabilities(source, channel, True)
        assert math.fsum(patterns) == pytest.approx(1.0, abs=1e-15)
        assert all(p >= 0 for p in patterns)


class TestSnrFromCounts:
    def test_double_counts(self):
        assert snr_from_counts(200, 100).value == pytest.approx(1.0)

    def test_equal_counts(self):
        assert snr_from_counts(100, 100).value == pytest.approx(0.0)

    def test_delta_method_uncertainty(self):
        result = snr_from_counts(300, 100)
        assert result.value == pytest.approx(2.0)
        # independent-Poisson delta method: var = n_in/n_out^2 + n_in^2 n_out/n_out^4
        expected_err = math.sqrt(300 / 100**2 + 300**2 * 100 / 100**4)
        assert result.std_err == pytest.approx(expected_err, rel=1e-12)
        # cross-check against a Poisson resampling bootstrap
        boot = bootstrap_snr_err(300, 100, 10_000, substream(31, 0))
        assert abs(boot - expected_err) <= 0.05

    def test_zero_background_undefined(self):
        with pytest.raises(ValueError, match="SNR undefined"):
            snr_from_counts(10, 0)


class TestExpectedSnr:
    def test_classical_substitution(self):
        assert expected_snr_classical(0.5, 1e-3, 1e-2) == pytest.approx(0.05, rel=1e-12)

    def test_classical_linearity(self):
        base = expected_snr_classical(0.4, 2e-4, 1e-3)
        assert expected_snr_classical(0.4, 4e-4, 1e-3) == pytest.approx(2 * base, rel=1e-12)

    def test_classical_symmetry(self):
        assert expected_snr_classical(1.0, 0.37, 0.37) == pytest.approx(1.0, rel=1e-12)

    def test_quantum_substitution(self):
        assert expected_snr_quantum(0.5, 1e-4, 1e-3, 1e-2) == pytest.approx(5.0, rel=1e-12)

    def test_quantum_reduces_to_classical_when_uncorrelated(self):
        p_s, p_h, p_b, eta = 3e-4, 5e-4, 1e-3, 0.7
        assert expected_snr_quantum(eta, p_s * p_h, p_h, p_b) == pytest.approx(
            expected_snr_classical(eta, p_s, p_b), rel=1e-12
        )

    def test_quantum_symmetry(self):
        p, q = 0.012, 0.034
        assert expected_snr_quantum(1.0, p * q, q, p) == pytest.approx(1.0, rel=1e-12)

    def test_zero_denominators(self):
        with pytest.raises(ValueError):
            expected_snr_classical(1.0, 0.1, 0.0)
        with pytest.raises(ValueError):
            expected_snr_quantum(1.0, 0.1, 0.0, 0.1)


class TestQef:
    def test_equal_snrs(self):
        assert qef(0.7, 0.7) == pytest.approx(1.0)

    def test_scattered_scale(self):
        assert qef(54.0, 0.9) == pytest.approx(60.0, rel=1e-12)

    def test_zero_classical_snr(self):
        with pytest.raises(ValueError, match="QEF undefined"):
            qef(1.0, 0.0)

    def test_algebraic_identity_from_probabilities(self):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            source, channel = params(
                mu=rng.uniform(1e-4, 0.05),
                eta_h=rng.uniform(0.01, 1.0),
                eta_sig_parts=(rng.uniform(0.1, 1.0), rng.uniform(0.001, 1.0), rng.uniform(0.1, 1.0)),
                beta=rng.uniform(1e-6, 1e-2),
                dark=rng.uniform(0, 1e-5),
                noise_h=rng.uniform(0, 1e-4),
            )
            bp = click_probabilities(source, channel, True)
            eta = rng.uniform(0.01, 1.0)
            ratio = qef(
                expected_snr_quantum(eta, bp.p_coincidence, bp.p_herald, bp.p_background),
                expected_snr_classical(eta, bp.p_signal, bp.p_background),
            )
            expected = bp.p_coincidence / (bp.p_signal * bp.p_herald)
            assert ratio == pytest.approx(expected, rel=1e-12)

    def test_invariant_under_eta_and_background_rescaling(self):
        source, channel = params(mu=0.005, beta=1e-4, dark=1e-6, noise_h=1e-6)
        bp = click_probabilities(source, channel, True)

        def enhancement(eta, p_b):
            return qef(
                expected_snr_quantum(eta, bp.p_coincidence, bp.p_herald, p_b),
                expected_snr_classical(eta, bp.p_signal, p_b),
            )

        reference = enhancement(0.5, bp.p_background)
        for eta_scale, pb_scale in [(10.0, 1.0), (1.0, 37.0), (0.01, 400.0)]:
            scaled = enhancement(0.5 * eta_scale, bp.p_background * pb_scale)
            assert scaled == pytest.approx(reference, rel=1e-12)

    def test_small_mu_limit(self):
        # ideal detectors, no noise: g2 * (1 - e^-mu) -> 1
        source, channel = params(mu=1e-4, eta_h=1.0, eta_sig_parts=(1.0, 1.0, 1.0))
        g2 = analytic_g2(source, channel, True)
        assert g2 * -math.expm1(-1e-4) == pytest.approx(1.0, abs=1e-6)


class TestOracleConsistency:
    def test_aggregate_mode_matches_closed_form(self):
        rng = np.random.default_rng(99)
        n = 10**7
        for trial in range(5):
            source, channel = params(
                mu=rng.uniform(5e-3, 0.03),
                eta_h=rng.uniform(0.1, 0.4),
                eta_sig_parts=(1.0, rng.uniform(0.02, 0.2), 0.6),
                beta=rng.uniform(1e-5, 1e-3),
                dark=rng.uniform(0, 1e-6),
                noise_h=rng.uniform(0, 1e-5),
            )
            cfg = validate_config(ExperimentConfig(source=source, channel=channel))
            counts = simulate_counts(cfg, True, n, substream(41, trial))
            p11, p10, p01, p00 = click_pattern_probabilities(source, channel, True)
            observed = {
                "p11": counts.n_coincidences,
                "p10": counts.n_signal_clicks - counts.n_coincidences,
                "p01": counts.n_herald_clicks - counts.n_coincidences,
            }
            observed["p00"] = n - sum(observed.values())
            for name, p in zip(("p11", "p10", "p01", "p00"), (p11, p10, p01, p00)):
                std = math.sqrt(n * p * (1 - p))
                assert_within_sigma(observed[name], n * p, std, f"{name} trial {trial}")


class TestMonteCarloConvergence:
    def test_mc_qef_converges_to_degraded_g2(self):
        # enhancement factor estimated from 1e9 toggled pulses against the
        # closed-form correlation of the jammer-blocked degraded channel
        source, channel = params(
            mu=1e-2, eta_h=0.075, beta=2e5 / 80e6, dark=0.0, noise_h=1e-5
        )
        cfg = validate_config(
            ExperimentConfig(source=source, channel=channel, seed=17, toggle_period_pulses=10**7)
        )
        table = run_sweep(cfg, "mu", [1e-2], dwell_pulses=10**9)
        row = table.rows[0]
        assert row.error is None
        blocked = dataclasses.replace(channel, background_per_bin=0.0)
        expected = analytic_g2(source, blocked, True)
        assert abs(row.qef - expected) / expected <= 0.10


class TestRunSweep:
    def small_config(self):
        # herald efficiency and jamming high enough that even the target-out
        # coincidence tally is populated at a 2e7-pulse dwell
        source, channel = params(mu=5e-3, eta_h=0.3, beta=1e-3, dark=0.0, noise_h=0.0)
        return validate_config(
            ExperimentConfig(source=source, channel=channel, seed=5, toggle_period_pulses=100_000)
        )

    def test_validations(self):
        cfg = self.small_config()
        with pytest.raises(ValueError, match="empty sweep values"):
            run_sweep(cfg, "mu", [], 10**6)
        with pytest.raises(ValueError, match="toggle"):
            run_sweep(cfg, "mu", [1e-3], 100)
        with pytest.raises(ValueError, match="unknown sweep variable"):
            run_sweep(cfg, "reflectivity", [0.5], 10**6)

    def test_rows_sorted_and_complete(self):
        cfg = self.small_config()
        table = run_sweep(cfg, "mu", [0.02, 0.005, 0.01], dwell_pulses=20_000_000)
        values = [row.value for row in table.rows]
        assert values == sorted(values)
        for row in table.rows:
            assert row.error is None
            assert row.counts_in.n_pulses == row.counts_out.n_pulses
            assert row.g2.value > 1.0
            assert row.qef > 0

    def test_background_sweep_moves_background(self):
        cfg = self.small_config()
        table = run_sweep(cfg, "background", [5e-4, 2e-3], dwell_pulses=20_000_000)
        # stronger jamming means more target-out singles
        assert table.rows[1].counts_out.n_signal_clicks > table.rows[0].counts_out.n_signal_clicks

    def test_background_sweep_structure(self):
        # growing jamming: the coincidence in/out gap persists while the
        # singles in/out curves merge into each other
        cfg = self.small_config()
        table = run_sweep(cfg, "background", [5e-4, 2e-3, 2e-2], dwell_pulses=80_000_000)
        singles_gap = []
        for row in table.rows:
            assert row.counts_in is not None
            # coincidences keep a resolvable target signature at every level
            assert row.snr_quantum is not None
            assert row.snr_quantum.value > 4.0 * row.snr_quantum.std_err
            singles_gap.append(
                (row.counts_in.n_signal_clicks - row.counts_out.n_signal_clicks)
                / row.counts_out.n_signal_clicks
            )
        # relative singles separation collapses as the background grows
        assert singles_gap[-1] < 0.05 * singles_gap[0]

    def test_row_failure_is_isolated(self):
        # zero background and zero dark: target-out singles are zero, the
        # SNR is undefined for that row, and the row records the failure
        source, channel = params(mu=5e-3, beta=0.0, dark=0.0)
        cfg = validate_config(
            ExperimentConfig(source=source, channel=channel, seed=6, toggle_period_pulses=50_000)
        )
        table = run_sweep(cfg, "background", [0.0, 1e-3], dwell_pulses=20_000_000)
        failed = {row.value: row for row in table.rows}
        assert failed[0.0].error is not None
        assert failed[1e-3].error is None

    def test_csv_columns_and_reproducibility(self, tmp_path):
        cfg = self.small_config()
        table = run_sweep(cfg, "mu", [0.005, 0.01], dwell_pulses=20_000_000)
        path_a = tmp_path / "a.csv"
        path_b = tmp_path / "b.csv"
        sweep_to_csv(table, str(path_a))
        sweep_to_csv(run_sweep(cfg, "mu", [0.005, 0.01], dwell_pulses=20_000_000), str(path_b))
        header = path_a.read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)
        assert path_a.read_bytes() == path_b.read_bytes()

    def test_worker_pool_matches_serial(self):
        cfg = self.small_config()
        serial = run_sweep(cfg, "mu", [0.005, 0.01], dwell_pulses=20_000_000, max_workers=1)
        pooled = run_sweep(cfg, "mu", [0.005, 0.01], dwell_pulses=20_000_000, max_workers=2)
        assert serial == pooled
