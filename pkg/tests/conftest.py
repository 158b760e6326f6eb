"""Shared test helpers.

Statistical tolerance convention: automated checks on Monte Carlo output
use a 4 sigma band (about 6e-5 false-fail probability per check). All
random draws are seeded, so a passing suite is deterministic.
"""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from qisim.model import ChannelParams, ExperimentConfig, SourceParams

SIGMA = 4.0


def assert_within_sigma(observed: float, expected: float, std: float, label: str = "") -> None:
    band = SIGMA * std
    assert abs(observed - expected) <= band, (
        f"{label or 'value'}: |{observed} - {expected}| > {SIGMA} sigma ({band})"
    )


def binomial_std(n: int, p: float) -> float:
    return float(np.sqrt(n * p * (1.0 - p)))


# --- hypothesis strategies -------------------------------------------------

finite = dict(allow_nan=False, allow_infinity=False)


def source_params() -> st.SearchStrategy[SourceParams]:
    def build(pump, ratio, mu, eta_h, noise_h):
        # signal > pump/2 keeps an energy-conserving idler
        return SourceParams(
            mu=mu,
            pump_nm=pump,
            signal_nm=pump * ratio,
            herald_nm=None,
            eta_herald=eta_h,
            noise_herald_per_bin=noise_h,
        )

    return st.builds(
        build,
        st.floats(400.0, 1200.0, **finite),
        st.floats(0.55, 0.95, **finite),
        st.floats(0.0, 0.05, **finite),
        st.floats(0.0, 1.0, **finite),
        st.floats(0.0, 1e-3, **finite),
    )


def channel_params() -> st.SearchStrategy[ChannelParams]:
    return st.builds(
        ChannelParams,
        d_m=st.floats(0.0, 1.0, **finite),
        dist_m=st.floats(0.01, 100.0, **finite),
        collection_fraction=st.floats(0.0, 1.0, **finite),
        eta_signal_detector=st.floats(0.0, 1.0, **finite),
        eta_transmit=st.floats(0.0, 1.0, **finite),
        background_per_bin=st.floats(0.0, 0.01, **finite),
        dark_signal_per_bin=st.floats(0.0, 1e-4, **finite),
        stray_light_per_bin=st.floats(0.0, 1e-4, **finite),
        bin_width_ps=st.integers(1, 12500),
        target_reflectivity=st.floats(0.0, 1.0, **finite),
        jitter_signal_ps=st.floats(0.0, 500.0, **finite),
        jitter_herald_ps=st.floats(0.0, 500.0, **finite),
        dead_time_ps=st.integers(0, 100_000),
    )


def experiment_configs() -> st.SearchStrategy[ExperimentConfig]:
    return st.builds(
        ExperimentConfig,
        source=source_params(),
        channel=channel_params(),
        n_pulses=st.integers(1, 10**9),
        seed=st.integers(0, 2**64 - 1),
        toggle_period_pulses=st.integers(1, 10**9),
    )
