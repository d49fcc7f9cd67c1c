"""Persistence: the MVPO binary stream format, raw YUV 4:2:0 input, reports.

The stream format is fixed-layout little-endian: a 25-byte header (magic,
version, geometry, coding parameters, counts) followed by one 16-byte record
per PU.  Readers reject rather than guess: bad magic, unknown version,
truncation, count mismatches, and out-of-range fields each raise a distinct
`MalformedStreamError`.
"""

from __future__ import annotations

import io
import json
import os
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .analyzer import FeatureReport
from .core import Mvd
from .errors import InputError, MalformedStreamError
from .stream import Plane, PuRecord, SequenceStream, StreamHeader

MAGIC = b"MVPO"
VERSION = 1

_HEADER = struct.Struct("<4sHHHBBBIQ")  # magic, version, width, height, pu, qp, gop, frames, records
_RECORD = struct.Struct("<IHHBBhhH")  # frame, bx, by, idx, pad, dx, dy, reserved; one hex-dump row each

HEADER_SIZE = _HEADER.size
RECORD_SIZE = _RECORD.size


def write_stream(stream: SequenceStream) -> bytes:
    """Serialize a stream to bytes; identical streams serialize identically."""
    h = stream.header
    out = io.BytesIO()
    out.write(
        _HEADER.pack(MAGIC, VERSION, h.width, h.height, h.pu_size, h.qp, h.gop, h.frame_count, stream.n_records)
    )
    for r in stream.records:
        out.write(_RECORD.pack(r.frame_index, r.block_x, r.block_y, r.idx, 0, r.mvd.dx, r.mvd.dy, 0))
    return out.getvalue()


def read_stream(data: bytes) -> SequenceStream:
    """Parse and validate stream bytes."""
    if len(data) < HEADER_SIZE:
        raise MalformedStreamError(f"truncated stream: {len(data)} bytes, header needs {HEADER_SIZE}")
    magic, version, width, height, pu_size, qp, gop, frame_count, n_records = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedStreamError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MalformedStreamError(f"unsupported version {version}")
    try:
        header = StreamHeader(width, height, pu_size, qp, gop, frame_count)
    except ValueError as exc:
        raise MalformedStreamError(f"invalid header field: {exc}") from exc
    expected = HEADER_SIZE + RECORD_SIZE * n_records
    if len(data) < expected:
        raise MalformedStreamError(f"truncated stream: {len(data)} bytes, {n_records} records need {expected}")
    if len(data) > expected:
        raise MalformedStreamError(f"record count mismatch: {len(data) - expected} trailing bytes")

    records = []
    for fields in _RECORD.iter_unpack(data[HEADER_SIZE:]):
        frame_index, block_x, block_y, idx, pad, dx, dy, reserved = fields
        if pad != 0:
            raise MalformedStreamError(f"nonzero pad byte {pad} in record {len(records)}")
        if reserved != 0:
            raise MalformedStreamError(f"nonzero reserved field {reserved} in record {len(records)}")
        if frame_index >= frame_count:
            raise MalformedStreamError(f"record {len(records)} frame {frame_index} >= frame_count {frame_count}")
        if block_x + pu_size > width or block_y + pu_size > height or block_x % pu_size or block_y % pu_size:
            raise MalformedStreamError(
                f"record {len(records)} block ({block_x}, {block_y}) off the {width}x{height} grid"
            )
        try:
            records.append(PuRecord(frame_index, block_x, block_y, idx, Mvd(dx, dy)))
        except ValueError as exc:
            raise MalformedStreamError(f"invalid record {len(records)}: {exc}") from exc
    return SequenceStream(header, records)


def save_stream(stream: SequenceStream, path: str | os.PathLike) -> None:
    data = write_stream(stream)
    with open(path, "wb") as f:
        f.write(data)


def load_stream(path: str | os.PathLike) -> SequenceStream:
    with open(path, "rb") as f:
        return read_stream(f.read())


@dataclass(frozen=True)
class YuvSpec:
    """Geometry of a raw planar YUV 4:2:0 file."""

    width: int
    height: int
    frame_count: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InputError(f"bad dimensions {self.width}x{self.height}")
        if self.width % 2 or self.height % 2:
            raise InputError(f"4:2:0 needs even dimensions, got {self.width}x{self.height}")
        if self.frame_count < 1:
            raise InputError(f"frame_count {self.frame_count} must be >= 1")

    @property
    def luma_bytes(self) -> int:
        return self.width * self.height

    @property
    def frame_bytes(self) -> int:
        return self.width * self.height * 3 // 2


def iter_yuv_lumas(path: str | os.PathLike, spec: YuvSpec) -> Iterator[Plane]:
    """Stream luma planes from a 4:2:0 file, skipping chroma, one frame at a time."""
    actual = os.stat(path).st_size
    expected = spec.frame_bytes * spec.frame_count
    if actual != expected:
        raise InputError(
            f"{path}: size {actual} does not match {spec.frame_count} frames of "
            f"{spec.width}x{spec.height} 4:2:0 ({expected} bytes)"
        )
    chroma = spec.frame_bytes - spec.luma_bytes
    with open(path, "rb") as f:
        for _ in range(spec.frame_count):
            raw = f.read(spec.luma_bytes)
            if len(raw) != spec.luma_bytes:
                raise InputError(f"{path}: short read, file changed underneath")
            yield Plane(np.frombuffer(raw, dtype=np.uint8).reshape(spec.height, spec.width))
            f.seek(chroma, os.SEEK_CUR)


def read_yuv(path: str | os.PathLike, spec: YuvSpec) -> list[Plane]:
    """Read every luma plane of a 4:2:0 file."""
    return list(iter_yuv_lumas(path, spec))


def _report_dict(report: FeatureReport) -> dict:
    pct = report.optimal_rate_pct
    return {
        "n_pus": report.n_pus,
        "n_optimal": report.n_optimal,
        "optimal_rate_pct": pct,
        "verdict": report.verdict.value,
        "per_frame": {
            str(f): {"n_pus": t.n_pus, "n_optimal": t.n_optimal} for f, t in report.per_frame.items()
        },
        "violations": [list(v) for v in report.violations],
    }


def report_to_json(report: FeatureReport, invocation: dict | None = None) -> str:
    doc = _report_dict(report)
    if invocation is not None:
        doc["invocation"] = invocation
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report_to_csv(report: FeatureReport) -> str:
    pct = report.optimal_rate_pct
    pct_text = "" if pct is None else f"{pct:.6f}"
    return (
        "n_pus,n_optimal,optimal_rate_pct,verdict\n"
        f"{report.n_pus},{report.n_optimal},{pct_text},{report.verdict.value}\n"
    )
