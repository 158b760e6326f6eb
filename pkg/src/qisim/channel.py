"""One acquisition: pulses, pair generation, loss, noise, detector clicks.

Two modes produce the same per-bin statistics:

* `simulate_counts` draws the four per-pulse click patterns (both, signal
  only, herald only, neither) from one multinomial over the closed-form
  pattern probabilities. It is exact for Poisson pair statistics and costs
  O(1) per acquisition segment regardless of the pulse count.
* `simulate_tags` realizes the event stream explicitly: per-pulse pair
  numbers, per-photon survival, pulse-locked jamming, uniform dark counts
  and Gaussian detector jitter, reduced to click tags with at most one tag
  per channel per bin. It exists to exercise the correlator and the timing
  model, and it accepts an injectable pair-number sampler.

Timing is integer picoseconds. Jamming light is pulse-locked (it is
engineered to be indistinguishable from the signal photons); dark and
stray counts are uniform over the run, at a rate chosen so their mean
inside the bin windows matches the per-bin intensities of the aggregate
model.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import ClickCounts, ExperimentConfig
from .source import PairSampler, poisson_pair_counts


class Channel(enum.IntEnum):
    SIGNAL = 0
    HERALD = 1


@dataclass(frozen=True)
class TimeTag:
    channel: Channel
    time_ps: int


@dataclass
class TimeTagStream:
    """Time-ordered detection record for both channels.

    Stored as parallel arrays for throughput; `tags()` iterates TimeTag
    values for small-scale work. Sorted by time, ties broken Signal before
    Herald. Arrays are treated as read-only after construction.
    """

    channels: np.ndarray  # uint8, values from Channel
    times_ps: np.ndarray  # int64, within [0, duration_ps)
    duration_ps: int

    def __len__(self) -> int:
        return int(self.times_ps.shape[0])

    def tags(self) -> Iterator[TimeTag]:
        for ch, t in zip(self.channels, self.times_ps):
            yield TimeTag(Channel(int(ch)), int(t))

    def is_sorted(self) -> bool:
        if len(self) < 2:
            return True
        t, c = self.times_ps, self.channels
        dt = np.diff(t)
        if np.any(dt < 0):
            return False
        ties = dt == 0
        return not np.any(ties & (np.diff(c.astype(np.int8)) < 0))

    @staticmethod
    def from_tags(tags: list, duration_ps: int) -> "TimeTagStream":
        channels = np.array([int(t.channel) for t in tags], dtype=np.uint8)
        times = np.array([t.time_ps for t in tags], dtype=np.int64)
        return TimeTagStream(channels, times, int(duration_ps))

    @staticmethod
    def from_arrays(
        channels: np.ndarray, times_ps: np.ndarray, duration_ps: int, sort: bool = True
    ) -> "TimeTagStream":
        channels = np.asarray(channels, dtype=np.uint8)
        times_ps = np.asarray(times_ps, dtype=np.int64)
        if sort and times_ps.shape[0] > 1:
            order = np.lexsort((channels, times_ps))
            channels, times_ps = channels[order], times_ps[order]
        return TimeTagStream(channels, times_ps, int(duration_ps))


def collection_fraction_max(d_m: float, dist_m: float) -> float:
    """Upper bound on the collected fraction of diffusely scattered light.

    Ratio of the collectable-mode solid angle to the scattering hemisphere:
    pi (d/2)^2 / (2 pi D^2) = d^2 / (8 D^2).
    """
    if dist_m <= 0:
        raise ValueError("dist_m must be positive")
    if d_m < 0:
        raise ValueError("d_m must be non-negative")
    return d_m * d_m / (8.0 * dist_m * dist_m)


def simulate_counts(
    config: ExperimentConfig, target_in: bool, n_pulses: int, rng: np.random.Generator
) -> ClickCounts:
    """Aggregate acquisition: one multinomial over the click patterns."""
    # Imported here: analytics owns the closed forms but sits above this
    # module for sweep orchestration.
    from .analytics import click_pattern_probabilities

    if n_pulses < 0:
        raise ValueError("n_pulses must be non-negative")
    patterns = click_pattern_probabilities(config.source, config.channel, target_in)
    n11, n10, n01, _ = rng.multinomial(n_pulses, patterns)
    return ClickCounts(
        n_pulses=n_pulses,
        n_signal_clicks=int(n11 + n10),
        n_herald_clicks=int(n11 + n01),
        n_coincidences=int(n11),
        target_in=target_in,
    )


_TAG_CHUNK = 1 << 20


def simulate_tags(
    config: ExperimentConfig,
    target_in: bool,
    n_pulses: int,
    rng: np.random.Generator,
    pair_sampler: PairSampler = poisson_pair_counts,
) -> TimeTagStream:
    """Explicit time-tag acquisition.

    Per pulse k at time k*T: the pair sampler gives the pair number, each
    pair's signal and herald photons survive their arms independently, and
    pulse-locked noise (jamming on the signal channel, pair-less herald
    detections on the herald channel) may add clicks. Detected pulse-locked
    clicks are stamped k*T plus per-detector Gaussian jitter. Dark and
    stray counts arrive uniformly over the run. At most one tag survives
    per channel per bin (click-detector semantics); tags jittered outside
    [0, duration) are lost.
    """
    src, ch = config.source, config.channel
    period = config.pulse_period_ps
    duration = n_pulses * period
    eta_sig = ch.signal_arm_efficiency(target_in)
    eta_h = src.eta_herald

    p_jam = -np.expm1(-ch.background_per_bin)
    p_hnoise = -np.expm1(-src.noise_herald_per_bin)

    sig_times: list[np.ndarray] = []
    her_times: list[np.ndarray] = []
    for start in range(0, n_pulses, _TAG_CHUNK):
        m = min(_TAG_CHUNK, n_pulses - start)
        pairs = pair_sampler(src.mu, rng, m)
        nz = np.flatnonzero(pairs)
        s_click = np.zeros(m, dtype=bool)
        h_click = np.zeros(m, dtype=bool)
        if nz.size:
            npairs = pairs[nz]
            if eta_sig > 0:
                s_click[nz] = rng.binomial(npairs, eta_sig) > 0
            if eta_h > 0:
                h_click[nz] = rng.binomial(npairs, eta_h) > 0
        if p_jam > 0:
            s_click |= rng.random(m) < p_jam
        if p_hnoise > 0:
            h_click |= rng.random(m) < p_hnoise

        base = (np.int64(start) + np.arange(m, dtype=np.int64)) * period
        for mask, jitter, bucket in (
            (s_click, ch.jitter_signal_ps, sig_times),
            (h_click, ch.jitter_herald_ps, her_times),
        ):
            idx = np.flatnonzero(mask)
            if idx.size == 0:
                continue
            t = base[idx].astype(np.float64)
            if jitter > 0:
                t = t + rng.normal(0.0, jitter, idx.size)
            bucket.append(np.rint(t).astype(np.int64))

    # Uniform processes: per-bin intensity delta spread over the period means
    # a time density of delta / bin_width per picosecond.
    uniform_rate = (ch.dark_signal_per_bin + ch.stray_light_per_bin) / ch.bin_width_ps
    if uniform_rate > 0 and duration > 0:
        n_dark = rng.poisson(uniform_rate * duration)
        if n_dark:
            sig_times.append(rng.integers(0, duration, n_dark, dtype=np.int64))

    streams = []
    for chan, bucket in ((Channel.SIGNAL, sig_times), (Channel.HERALD, her_times)):
        times = np.concatenate(bucket) if bucket else np.empty(0, dtype=np.int64)
        times = times[(times >= 0) & (times < duration)]
        times.sort(kind="stable")
        times = _dedupe_bins(times, ch.bin_width_ps, period, n_pulses)
        if ch.dead_time_ps > 0:
            times = _apply_dead_time(times, ch.dead_time_ps)
        streams.append((chan, times))

    channels = np.concatenate(
        [np.full(t.shape[0], int(c), dtype=np.uint8) for c, t in streams]
    )
    times_all = np.concatenate([t for _, t in streams])
    return TimeTagStream.from_arrays(channels, times_all, duration, sort=True)


def _dedupe_bins(times: np.ndarray, bin_width: int, period: int, n_pulses: int) -> np.ndarray:
    """Keep the first tag in each occupied bin; tags between bins pass through."""
    if times.size == 0:
        return times
    k = (times + period // 2) // period
    offset = times - k * period
    in_bin = (2 * offset >= -bin_width) & (2 * offset < bin_width) & (k >= 0) & (k < n_pulses)
    keep = np.ones(times.size, dtype=bool)
    idx = np.flatnonzero(in_bin)
    if idx.size > 1:
        dup = np.zeros(idx.size, dtype=bool)
        dup[1:] = k[idx[1:]] == k[idx[:-1]]
        keep[idx[dup]] = False
    return times[keep]


def _apply_dead_time(times: np.ndarray, dead_time_ps: int) -> np.ndarray:
    """Drop tags within the dead time of the last kept tag on this channel."""
    if times.size < 2:
        return times
    keep = np.ones(times.size, dtype=bool)
    last = times[0]
    for i in range(1, times.size):
        if times[i] - last < dead_time_ps:
            keep[i] = False
        else:
            last = times[i]
    return times[keep]


# ---------------------------------------------------------------------------
# Stream export formats
# ---------------------------------------------------------------------------

QITT_MAGIC = b"QITT"
QITT_VERSION = 1
_HEADER = struct.Struct("<4sHHQ")  # magic, version, reserved, duration_ps
_RECORD_DTYPE = np.dtype([("channel", "u1"), ("time_ps", "<u8")])


def write_qitt(stream: TimeTagStream, path: str) -> None:
    """Binary little-endian tag records behind a 16-byte header."""
    records = np.empty(len(stream), dtype=_RECORD_DTYPE)
    records["channel"] = stream.channels
    records["time_ps"] = stream.times_ps.astype(np.uint64)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(QITT_MAGIC, QITT_VERSION, 0, stream.duration_ps))
        fh.write(records.tobytes())


def read_qitt(path: str) -> TimeTagStream:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated QITT header")
        magic, version, _, duration = _HEADER.unpack(header)
        if magic != QITT_MAGIC:
            raise ValueError("not a QITT file")
        if version != QITT_VERSION:
            raise ValueError(f"unsupported QITT version {version}")
        body = fh.read()
    if len(body) % _RECORD_DTYPE.itemsize:
        raise ValueError("truncated QITT record")
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    return TimeTagStream.from_arrays(
        records["channel"].copy(), records["time_ps"].astype(np.int64), int(duration), sort=False
    )


_CSV_NAMES = {Channel.SIGNAL: "signal", Channel.HERALD: "herald"}
_CSV_CODES = {"signal": Channel.SIGNAL, "herald": Channel.HERALD}


def write_tags_csv(stream: TimeTagStream, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# duration_ps={stream.duration_ps}\n")
        fh.write("channel,time_ps\n")
        for ch, t in zip(stream.channels, stream.times_ps):
            fh.write(f"{_CSV_NAMES[Channel(int(ch))]},{int(t)}\n")


def read_tags_csv(path: str) -> TimeTagStream:
    duration = 0
    channels: list[int] = []
    times: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "duration_ps=" in line:
                    duration = int(line.split("duration_ps=", 1)[1])
                continue
            if line == "channel,time_ps":
                continue
            name, _, value = line.partition(",")
            try:
                channels.append(int(_CSV_CODES[name]))
                times.append(int(value))
            except (KeyError, ValueError) as exc:
                raise ValueError(f"bad tag record: {line!r}") from exc
    return TimeTagStream.from_arrays(
        np.array(channels, dtype=np.uint8), np.array(times, dtype=np.int64), duration, sort=False
    )
