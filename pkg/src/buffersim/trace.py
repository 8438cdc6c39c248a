"""Packet and trace data model: CSV parsing, size-based classification, histograms.

A trace is a time-ordered list of packets, each carrying an arrival time in
seconds, a size in bytes, a traffic class, a stream id (0 = foreground,
1 = background by convention) and a per-stream sequence number.  Traces come
either from the synthetic generators (see synth.py) or from CSV files in the
format described by parse_trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import ContractError, TraceParseError

MAX_PACKET_BYTES = 65535

# Sizes observed for the P2P-TV application's signalling packets (HELLO,
# HELLO-ack, ACK, keep-alive, video request) and for video payloads
# (maximum-size packets plus fragment sizes).
CONTROL_SIZES = frozenset({28, 42, 46, 52, 80})
VIDEO_SIZES = frozenset({377, 497, 617, 1081, 1201, 1320})

# Unlisted sizes fall back to a simple threshold: the size distribution is
# bimodal with a valley between ~100 and ~377 bytes, so 200 separates the
# small-packet mode from the video mode.
CLASSIFY_FALLBACK_THRESHOLD = 200


class PacketClass(Enum):
    VIDEO = "video"
    CONTROL = "control"
    BACKGROUND = "background"
    OTHER = "other"

    def __str__(self):
        return self.value


_CLASS_BY_NAME = {c.value: c for c in PacketClass}


class PacketRecord(NamedTuple):
    """One packet: (arrival_time s, size bytes, class, stream_id, seq)."""

    arrival_time: float
    size_bytes: int
    traffic_class: PacketClass
    stream_id: int
    seq: int

    def sort_key(self):
        return (self.arrival_time, self.stream_id, self.seq)


@dataclass(frozen=True)
class Trace:
    """Time-ordered packet sequence with provenance.

    Invariants (enforced by the constructors in this package, checkable via
    validate): records sorted by (arrival_time, stream_id, seq), seq strictly
    increasing within each stream, and every arrival_time <= duration_s.
    """

    records: list[PacketRecord]
    source: str
    duration_s: float

    def __len__(self):
        return len(self.records)

    def validate(self):
        """Raise ContractError if any trace invariant is violated."""
        last_key = None
        last_seq: dict[int, int] = {}
        for i, rec in enumerate(self.records):
            if rec.size_bytes < 1 or rec.size_bytes > MAX_PACKET_BYTES:
                raise ContractError(f"record {i}: size {rec.size_bytes} out of range")
            if not math.isfinite(rec.arrival_time) or rec.arrival_time < 0:
                raise ContractError(f"record {i}: bad arrival time {rec.arrival_time}")
            if rec.arrival_time > self.duration_s:
                raise ContractError(
                    f"record {i}: arrival {rec.arrival_time} past duration {self.duration_s}"
                )
            key = rec.sort_key()
            if last_key is not None and key < last_key:
                raise ContractError(f"record {i}: trace not sorted at {key}")
            last_key = key
            prev = last_seq.get(rec.stream_id)
            if prev is not None and rec.seq <= prev:
                raise ContractError(
                    f"record {i}: seq {rec.seq} not increasing in stream {rec.stream_id}"
                )
            last_seq[rec.stream_id] = rec.seq
        return self


@dataclass(frozen=True)
class Histogram:
    """Packet-size histogram with fixed-width bins (bin = size // bin_width)."""

    bin_width_bytes: int
    counts: dict[int, int] = field(default_factory=dict)
    total: int = 0

    def fraction_below(self, size_bytes: int) -> float:
        """Fraction of packets in bins entirely below size_bytes."""
        if self.total == 0:
            return 0.0
        limit = size_bytes // self.bin_width_bytes
        n = sum(c for b, c in self.counts.items() if b < limit)
        return n / self.total


def classify_packet(size_bytes: int) -> PacketClass:
    """Map a packet size to a traffic class.

    Known signalling sizes -> CONTROL, known video sizes -> VIDEO; anything
    else is split at the 200-byte threshold between the two size modes.
    """
    if size_bytes < 1:
        raise ValueError(f"size_bytes must be >= 1, got {size_bytes}")
    if size_bytes in CONTROL_SIZES:
        return PacketClass.CONTROL
    if size_bytes in VIDEO_SIZES:
        return PacketClass.VIDEO
    if size_bytes < CLASSIFY_FALLBACK_THRESHOLD:
        return PacketClass.CONTROL
    return PacketClass.VIDEO


def format_time(t: float) -> str:
    """Seconds as a decimal string, at most 9 fractional digits, no exponent."""
    s = f"{t:.9f}".rstrip("0")
    if s.endswith("."):
        s += "0"
    return s


_HEADER_FIELDS = ("time_s", "size_bytes", "class", "stream_id", "seq")


def parse_trace(text: str, source: str = "<string>") -> Trace:
    """Parse trace CSV into a normalized Trace.

    Format: header ``time_s,size_bytes,class`` with optional 4th/5th columns
    ``stream_id,seq``; one packet per row.  ``class`` is one of
    video/control/background/other, or empty to classify by size.
    ``stream_id`` defaults to 0 and ``seq`` to the data-row index.  Rows need
    not be pre-sorted; the result is sorted by (time, stream_id, seq).
    """
    lines = text.splitlines()
    if not lines:
        raise TraceParseError("empty trace", line=0)
    header = [h.strip() for h in lines[0].split(",")]
    if tuple(header) != _HEADER_FIELDS[: len(header)] or not 3 <= len(header) <= 5:
        raise TraceParseError(
            f"bad header {lines[0]!r}, expected time_s,size_bytes,class[,stream_id,seq]",
            line=1,
        )

    records = []
    row_index = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if not 3 <= len(fields) <= 5:
            raise TraceParseError(f"expected 3-5 columns, got {len(fields)}", line=lineno)
        try:
            t = float(fields[0])
        except ValueError:
            raise TraceParseError(f"bad time {fields[0]!r}", line=lineno) from None
        if not math.isfinite(t) or t < 0:
            raise TraceParseError(f"bad time {fields[0]!r}", line=lineno)
        try:
            size = int(fields[1])
        except ValueError:
            raise TraceParseError(f"bad size {fields[1]!r}", line=lineno) from None
        if size < 1 or size > MAX_PACKET_BYTES:
            raise TraceParseError(f"size {size} out of range 1..{MAX_PACKET_BYTES}", line=lineno)
        cls_token = fields[2].strip()
        if cls_token:
            try:
                pclass = _CLASS_BY_NAME[cls_token]
            except KeyError:
                raise TraceParseError(f"unknown class {cls_token!r}", line=lineno) from None
        else:
            pclass = classify_packet(size)
        try:
            stream_id = int(fields[3]) if len(fields) > 3 and fields[3].strip() else 0
            seq = int(fields[4]) if len(fields) > 4 and fields[4].strip() else row_index
        except ValueError:
            raise TraceParseError(f"bad stream_id/seq in {line!r}", line=lineno) from None
        if stream_id < 0:
            raise TraceParseError(f"negative stream_id {stream_id}", line=lineno)
        records.append(PacketRecord(t, size, pclass, stream_id, seq))
        row_index += 1

    if not records:
        raise TraceParseError("empty trace", line=len(lines))
    records.sort(key=PacketRecord.sort_key)
    duration = records[-1].arrival_time
    trace = Trace(records=records, source=source, duration_s=duration)
    trace.validate()
    return trace


def parse_trace_file(path) -> Trace:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return parse_trace(f.read(), source=str(path))


def serialize_trace(trace: Trace) -> str:
    """Trace as CSV text (full 5-column form, LF line endings)."""
    out = ["time_s,size_bytes,class,stream_id,seq"]
    for rec in trace.records:
        out.append(
            f"{format_time(rec.arrival_time)},{rec.size_bytes},"
            f"{rec.traffic_class.value},{rec.stream_id},{rec.seq}"
        )
    out.append("")
    return "\n".join(out)


def write_trace(trace: Trace, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(serialize_trace(trace))


def compute_histogram(trace_or_records, bin_width_bytes: int) -> Histogram:
    """Histogram of packet sizes with the given bin width in bytes."""
    if bin_width_bytes < 1:
        raise ValueError(f"bin_width_bytes must be >= 1, got {bin_width_bytes}")
    records: Iterable[PacketRecord] = getattr(trace_or_records, "records", trace_or_records)
    counts: dict[int, int] = {}
    total = 0
    for rec in records:
        b = rec.size_bytes // bin_width_bytes
        counts[b] = counts.get(b, 0) + 1
        total += 1
    return Histogram(bin_width_bytes=bin_width_bytes, counts=counts, total=total)
