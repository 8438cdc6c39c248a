"""Seeded synthetic traffic generators.

Two models: a P2P-TV-like foreground (constant-size video packets at a target
bit rate plus a stream of small signalling packets making up ~60% of packets)
and a background stream with the classic tri-modal 40/576/1500-byte internet
mix.  Arrivals are Poisson per class; rates are chosen so the configured bit
rates and packet-count fractions come out right.  Everything is driven by
SplitMix64, so a given (params, seed) always yields the bit-identical trace
on any platform.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from .trace import PacketClass, PacketRecord, Trace

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

FOREGROUND_STREAM_ID = 0
BACKGROUND_STREAM_ID = 1

DEFAULT_VIDEO_RATE_BPS = 348_000
DEFAULT_VIDEO_SIZE = 1320
DEFAULT_CONTROL_FRACTION = 0.6
DEFAULT_BACKGROUND_MIX = ((40, 0.5), (576, 0.1), (1500, 0.4))


class SplitMix64:
    """SplitMix64 generator; bit-exact across platforms.

    Step: state += 0x9E3779B97F4A7C15; z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
    out = z ^ (z >> 31); all arithmetic mod 2**64.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = s = (self.state + _GOLDEN) & _MASK64
        z = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform in [0, 1): top 53 bits of the next output / 2**53."""
        return (self.next_u64() >> 11) * 2.0**-53


def mix_seed(master: int, *parts: int) -> int:
    """Derive a sub-stream seed from a master seed and integer tags.

    Each tag perturbs the state by (tag+1) golden-ratio increments and passes
    it through one SplitMix64 output; deterministic and order-sensitive.
    """
    x = master & _MASK64
    for p in parts:
        x = SplitMix64((x + (p + 1) * _GOLDEN) & _MASK64).next_u64()
    return x


def exp_interarrival(u: float, rate_per_s: float) -> float:
    """Exponential inter-arrival time via inverse CDF: -ln(1-u)/rate."""
    if rate_per_s <= 0:
        raise ValueError(f"rate_per_s must be > 0, got {rate_per_s}")
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must be in [0, 1), got {u}")
    return -math.log(1.0 - u) / rate_per_s


@dataclass(frozen=True)
class SopcastModelParams:
    """Foreground model: video at a fixed bit rate + small control packets.

    control_fraction is the fraction of *packets* that are control; the
    control arrival rate is derived from it.  Control sizes are drawn from
    control_size_weights (normalized; uniform over the five signalling sizes
    by default).
    """

    video_rate_bps: float = DEFAULT_VIDEO_RATE_BPS
    video_size_bytes: int = DEFAULT_VIDEO_SIZE
    control_fraction: float = DEFAULT_CONTROL_FRACTION
    control_size_weights: dict[int, float] = field(
        default_factory=lambda: {28: 1.0, 42: 1.0, 46: 1.0, 52: 1.0, 80: 1.0}
    )
    duration_s: float = 600.0
    seed: int = 0

    def __post_init__(self):
        if self.video_rate_bps <= 0:
            raise ValueError("video_rate_bps must be > 0")
        if not 1 <= self.video_size_bytes <= 65535:
            raise ValueError("video_size_bytes out of range")
        if not 0.0 < self.control_fraction < 1.0:
            raise ValueError("control_fraction must be in (0, 1)")
        if not self.control_size_weights:
            raise ValueError("control_size_weights must be non-empty")
        for size, w in self.control_size_weights.items():
            if size < 1 or w < 0:
                raise ValueError(f"bad control size weight {size}: {w}")
        if sum(self.control_size_weights.values()) <= 0:
            raise ValueError("control_size_weights must have positive total")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")

    @property
    def video_rate_pps(self) -> float:
        return self.video_rate_bps / (8.0 * self.video_size_bytes)

    @property
    def control_rate_pps(self) -> float:
        return self.video_rate_pps * self.control_fraction / (1.0 - self.control_fraction)

    def nominal_bps(self) -> float:
        """Expected total foreground bit rate (video + control overhead)."""
        weights = self.control_size_weights
        wsum = sum(weights.values())
        mean_control = sum(s * w for s, w in weights.items()) / wsum
        return self.video_rate_bps + self.control_rate_pps * mean_control * 8.0


@dataclass(frozen=True)
class BackgroundModelParams:
    """Background model: one Poisson stream with an i.i.d. discrete size mix."""

    offered_load_bps: float
    size_mix: tuple[tuple[int, float], ...] = DEFAULT_BACKGROUND_MIX
    duration_s: float = 600.0
    seed: int = 0

    def __post_init__(self):
        if self.offered_load_bps < 0:
            raise ValueError("offered_load_bps must be >= 0")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")
        object.__setattr__(self, "size_mix", tuple((int(s), float(p)) for s, p in self.size_mix))
        if not self.size_mix:
            raise ValueError("size_mix must be non-empty")
        for size, p in self.size_mix:
            if not 1 <= size <= 65535:
                raise ValueError(f"size {size} out of range")
            if p < 0:
                raise ValueError(f"negative probability {p}")
        if abs(sum(p for _, p in self.size_mix) - 1.0) > 1e-12:
            raise ValueError("size_mix probabilities must sum to 1")

    @property
    def mean_size_bytes(self) -> float:
        return sum(s * p for s, p in self.size_mix)

    @property
    def rate_pps(self) -> float:
        return self.offered_load_bps / (8.0 * self.mean_size_bytes)


def _poisson_times(rng: SplitMix64, rate_pps: float, duration_s: float) -> list[float]:
    """Arrival times of one Poisson stream, truncated at duration_s."""
    times = []
    t = 0.0
    while True:
        t += exp_interarrival(rng.next_float(), rate_pps)
        if t > duration_s:
            return times
        times.append(t)


def gen_sopcast_trace(params: SopcastModelParams) -> Trace:
    """Generate the foreground trace (stream 0): video + control sub-streams.

    Sub-stream seeds are the first and second outputs of SplitMix64 seeded
    with params.seed (video then control), so runs are reconstructible.  For
    each control packet the inter-arrival uniform is drawn before the size
    uniform.
    """
    master = SplitMix64(params.seed)
    video_rng = SplitMix64(master.next_u64())
    control_rng = SplitMix64(master.next_u64())

    video_times = _poisson_times(video_rng, params.video_rate_pps, params.duration_s)

    weights = sorted(params.control_size_weights.items())
    wsum = sum(w for _, w in weights)
    cum = []
    acc = 0.0
    for _, w in weights:
        acc += w / wsum
        cum.append(acc)
    cum[-1] = 1.0
    sizes = [s for s, _ in weights]

    control = []
    t = 0.0
    rate_c = params.control_rate_pps
    while True:
        t += exp_interarrival(control_rng.next_float(), rate_c)
        u = control_rng.next_float()
        if t > params.duration_s:
            break
        control.append((t, sizes[bisect_right(cum, u)]))

    # Merge the two sub-streams by time (video first on exact ties), then
    # number the merged sequence; both sub-streams share stream id 0.
    records = []
    vi = ci = 0
    vsize = params.video_size_bytes
    nv, nc = len(video_times), len(control)
    while vi < nv or ci < nc:
        if ci >= nc or (vi < nv and video_times[vi] <= control[ci][0]):
            records.append(
                PacketRecord(video_times[vi], vsize, PacketClass.VIDEO,
                             FOREGROUND_STREAM_ID, len(records))
            )
            vi += 1
        else:
            tc, size = control[ci]
            records.append(
                PacketRecord(tc, size, PacketClass.CONTROL,
                             FOREGROUND_STREAM_ID, len(records))
            )
            ci += 1
    return Trace(records=records, source="synthetic:sopcast", duration_s=params.duration_s)


def gen_background_trace(params: BackgroundModelParams) -> Trace:
    """Generate the background trace (stream 1) from its own seed.

    Zero offered load yields an empty trace.  Per packet, the inter-arrival
    uniform is drawn before the size uniform.
    """
    if params.offered_load_bps == 0:
        return Trace(records=[], source="synthetic:background", duration_s=params.duration_s)

    rng = SplitMix64(params.seed)
    cum = []
    acc = 0.0
    for _, p in params.size_mix:
        acc += p
        cum.append(acc)
    cum[-1] = 1.0
    sizes = [s for s, _ in params.size_mix]

    records = []
    t = 0.0
    rate = params.rate_pps
    while True:
        t += exp_interarrival(rng.next_float(), rate)
        u = rng.next_float()
        if t > params.duration_s:
            break
        records.append(
            PacketRecord(t, sizes[bisect_right(cum, u)], PacketClass.BACKGROUND,
                         BACKGROUND_STREAM_ID, len(records))
        )
    return Trace(records=records, source="synthetic:background", duration_s=params.duration_s)


def merge_traces(a: Trace, b: Trace) -> Trace:
    """Stable merge of two traces by (arrival_time, stream_id, seq).

    Inputs must individually satisfy the trace invariants; records from `a`
    win exact key ties.  Callers should give the two traces distinct stream
    ids, otherwise per-stream seq monotonicity may not survive the merge.
    """
    if not a.records:
        merged = list(b.records)
    elif not b.records:
        merged = list(a.records)
    else:
        merged = []
        ra, rb = a.records, b.records
        ia = ib = 0
        na, nb = len(ra), len(rb)
        while ia < na and ib < nb:
            if ra[ia].sort_key() <= rb[ib].sort_key():
                merged.append(ra[ia])
                ia += 1
            else:
                merged.append(rb[ib])
                ib += 1
        merged.extend(ra[ia:])
        merged.extend(rb[ib:])
    return Trace(
        records=merged,
        source=f"merge({a.source},{b.source})",
        duration_s=max(a.duration_s, b.duration_s),
    )
