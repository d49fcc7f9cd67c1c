"""Three motion-vector embedders operating on coded streams.

All three are decode-side transforms: they replay candidate derivation
exactly as a decoder would and rewrite records in place.

* `embed_mvd_parity` hides bits in the parity of one difference component,
  nudging it by one quarter-pel when needed.  The index is never touched.
* `embed_index_threshold` hides bits in the candidate index of PUs whose two
  candidates are close under an absolute-component distance, keeping every
  reconstructed vector intact by recomputing the difference.
* `embed_index_adaptive` hides a requested payload density in the PUs where
  an index flip is cheapest (smallest rate gap), a greedy stand-in for a
  trellis-coded assignment, again preserving every reconstructed vector.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .codec import decode_walk
from .core import CandidatePair, MotionVector, Mvd, MVD_MAX, MVD_MIN, rate_of
from .errors import CapacityError
from .stream import SequenceStream

log = logging.getLogger(__name__)


class EmbedMethod(enum.Enum):
    MVD_PARITY = "mvd-parity"
    INDEX_THRESHOLD = "index-threshold"
    INDEX_ADAPTIVE = "index-adaptive"


@dataclass(frozen=True)
class EmbedConfig:
    method: EmbedMethod
    strength_e: float | None = None
    threshold_T: int | None = None
    capacity_bpap: float | None = None
    rng_seed: int = 0
    payload: Sequence[int] | None = None

    def __post_init__(self):
        if self.method is EmbedMethod.MVD_PARITY:
            if self.strength_e is None or not 0.0 <= self.strength_e <= 1.0:
                raise ValueError(f"strength_e {self.strength_e} must be in [0, 1]")
        elif self.method is EmbedMethod.INDEX_THRESHOLD:
            if self.threshold_T is None or self.threshold_T < 0:
                raise ValueError(f"threshold_T {self.threshold_T} must be >= 0")
        elif self.method is EmbedMethod.INDEX_ADAPTIVE:
            if self.capacity_bpap is None or not 0.0 <= self.capacity_bpap <= 1.0:
                raise ValueError(f"capacity_bpap {self.capacity_bpap} must be in [0, 1]")
        if self.payload is not None:
            bits = tuple(self.payload)
            if not bits or any(b not in (0, 1) for b in bits):
                raise ValueError("payload must be a non-empty sequence of 0/1 bits")
            object.__setattr__(self, "payload", bits)


@dataclass
class EmbedReport:
    """What an embedding run did to a stream."""

    method: EmbedMethod
    pus_visited: int = 0
    pus_modified: int = 0
    bits_embedded: int = 0
    pus_skipped: int = 0
    flips_rate_asymmetric: int = 0
    per_frame_modified: dict[int, int] = field(default_factory=dict)

    def _count_modified(self, frame_index: int) -> None:
        self.pus_modified += 1
        self.per_frame_modified[frame_index] = self.per_frame_modified.get(frame_index, 0) + 1

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "pus_visited": self.pus_visited,
            "pus_modified": self.pus_modified,
            "bits_embedded": self.bits_embedded,
            "pus_skipped": self.pus_skipped,
            "flips_rate_asymmetric": self.flips_rate_asymmetric,
            "per_frame_modified": {str(f): n for f, n in sorted(self.per_frame_modified.items())},
        }


class PayloadBits:
    """Random-access bit source: an explicit sequence (cycled) or a seeded PRNG."""

    def __init__(self, bits: Sequence[int] | None, seed: int):
        self._explicit = tuple(bits) if bits is not None else None
        self._rng = random.Random(seed)
        self._cache: list[int] = []

    def bit_at(self, i: int) -> int:
        if self._explicit is not None:
            return self._explicit[i % len(self._explicit)]
        while len(self._cache) <= i:
            self._cache.append(self._rng.getrandbits(1))
        return self._cache[i]


def t_value(cands: CandidatePair) -> int:
    """Absolute-component distance between the two candidates."""
    return abs(abs(cands.mvp1.x) - abs(cands.mvp0.x)) + abs(abs(cands.mvp1.y) - abs(cands.mvp0.y))


def _parity_adjust(mvd: Mvd, use_x: bool, bit: int) -> Mvd:
    """Force the parity of one component to `bit`, moving one quarter-pel at most.

    A component already carrying the right parity stays put.  Otherwise the
    direction that codes cheaper wins; an exact rate tie steps down.
    """
    value = mvd.dx if use_x else mvd.dy
    if value & 1 == bit:
        return mvd

    def rebuilt(v: int) -> Mvd:
        return Mvd(v, mvd.dy) if use_x else Mvd(mvd.dx, v)

    options = [rebuilt(value + step) for step in (-1, +1) if MVD_MIN <= value + step <= MVD_MAX]
    return min(options, key=rate_of)  # min() keeps the first of a tie: the -1 step


def embed_mvd_parity(stream: SequenceStream, cfg: EmbedConfig) -> tuple[SequenceStream, EmbedReport]:
    """Select each PU with probability `strength_e` and host one parity bit there.

    All randomness is drawn per record, keyed to decode order, so the PUs
    selected at a lower strength are a subset of those at a higher one under
    the same seed, and each keeps the same component and payload bit.
    """
    if cfg.method is not EmbedMethod.MVD_PARITY:
        raise ValueError(f"config method {cfg.method} does not match embed_mvd_parity")
    master = random.Random(cfg.rng_seed)
    select = random.Random(master.getrandbits(64))
    coin = random.Random(master.getrandbits(64))
    payload = PayloadBits(cfg.payload, master.getrandbits(64))

    report = EmbedReport(EmbedMethod.MVD_PARITY)
    out = []
    for k, record in enumerate(stream.records):
        u = select.random()
        use_x = coin.getrandbits(1) == 1
        report.pus_visited += 1
        if u >= cfg.strength_e:
            out.append(record)
            continue
        report.bits_embedded += 1
        new_mvd = _parity_adjust(record.mvd, use_x, payload.bit_at(k))
        if new_mvd == record.mvd:
            out.append(record)
            continue
        report._count_modified(record.frame_index)
        out.append(dataclasses.replace(record, mvd=new_mvd))
    return SequenceStream(stream.header, out), report


def _recompute_mvd(mv: MotionVector, mvp: MotionVector) -> Mvd | None:
    # None when the difference is not representable under narrowed bounds
    try:
        return Mvd(mv.x - mvp.x, mv.y - mvp.y)
    except ValueError:
        return None


def embed_index_threshold(
    stream: SequenceStream, cfg: EmbedConfig, mv_field_context=None
) -> tuple[SequenceStream, EmbedReport]:
    """Write payload bits into the candidate index of close-candidate PUs.

    A PU is eligible when its candidate distance is at most `threshold_T`; a
    threshold of zero additionally demands componentwise-identical candidates,
    the population a zero distance is meant to capture.  The difference is
    recomputed so every reconstructed vector survives unchanged.
    """
    if cfg.method is not EmbedMethod.INDEX_THRESHOLD:
        raise ValueError(f"config method {cfg.method} does not match embed_index_threshold")
    del mv_field_context  # index flips never move vectors; the walk rebuilds all context
    payload = PayloadBits(cfg.payload, random.Random(cfg.rng_seed).getrandbits(64))

    report = EmbedReport(EmbedMethod.INDEX_THRESHOLD)
    out = []
    next_bit = 0
    for record, cands, mv in decode_walk(stream):
        report.pus_visited += 1
        tv = t_value(cands)
        if cfg.threshold_T == 0:
            eligible = cands.identical
        else:
            eligible = tv <= cfg.threshold_T
        if not eligible:
            out.append(record)
            continue
        bit = payload.bit_at(next_bit)
        new_mvd = _recompute_mvd(mv, cands[bit])
        if new_mvd is None:
            log.debug("skip PU %s: flipped difference not representable", record)
            report.pus_skipped += 1
            out.append(record)
            continue
        next_bit += 1
        report.bits_embedded += 1
        if bit == record.idx:
            out.append(record)
            continue
        report._count_modified(record.frame_index)
        r0 = rate_of(Mvd(mv.x - cands.mvp0.x, mv.y - cands.mvp0.y))
        r1 = rate_of(Mvd(mv.x - cands.mvp1.x, mv.y - cands.mvp1.y))
        if r0 != r1:
            report.flips_rate_asymmetric += 1
        out.append(dataclasses.replace(record, idx=bit, mvd=new_mvd))
    return SequenceStream(stream.header, out), report


def embed_index_adaptive(
    stream: SequenceStream, cfg: EmbedConfig, mv_field_context=None
) -> tuple[SequenceStream, EmbedReport]:
    """Host `capacity_bpap` bits per PU in the cheapest index flips.

    Every PU's flip cost is the gap between its two candidate rates.  The
    requested bit count lands in the PUs with the smallest gaps (decode order
    breaks ties), assigned greedily.  Raises `CapacityError` when the stream
    cannot host the request.
    """
    if cfg.method is not EmbedMethod.INDEX_ADAPTIVE:
        raise ValueError(f"config method {cfg.method} does not match embed_index_adaptive")
    del mv_field_context
    payload = PayloadBits(cfg.payload, random.Random(cfg.rng_seed).getrandbits(64))

    walked = list(decode_walk(stream))
    n = len(walked)
    # the shortest decimal repr keeps 0.1 * 30 at exactly 3 bits, where the
    # raw binary fraction of 0.1 would tip the ceiling to 4
    target = math.ceil(Fraction(repr(cfg.capacity_bpap)) * n) if n else 0

    eligible = []
    for k, (record, cands, mv) in enumerate(walked):
        flipped = _recompute_mvd(mv, cands.other(record.idx))
        if flipped is None:
            continue
        r0 = rate_of(Mvd(mv.x - cands.mvp0.x, mv.y - cands.mvp0.y))
        r1 = rate_of(Mvd(mv.x - cands.mvp1.x, mv.y - cands.mvp1.y))
        eligible.append((abs(r0 - r1), k))
    if target > len(eligible):
        raise CapacityError(
            f"requested {target} bits but only {len(eligible)} of {n} PUs can host one",
            requested_bits=target,
            achievable_bits=len(eligible),
        )

    eligible.sort()
    chosen = {k: j for j, (_, k) in enumerate(eligible[:target])}

    report = EmbedReport(EmbedMethod.INDEX_ADAPTIVE, pus_visited=n, bits_embedded=target)
    out = []
    for k, (record, cands, mv) in enumerate(walked):
        j = chosen.get(k)
        if j is None:
            out.append(record)
            continue
        bit = payload.bit_at(j)
        if bit == record.idx:
            out.append(record)
            continue
        report._count_modified(record.frame_index)
        r0 = rate_of(Mvd(mv.x - cands.mvp0.x, mv.y - cands.mvp0.y))
        r1 = rate_of(Mvd(mv.x - cands.mvp1.x, mv.y - cands.mvp1.y))
        if r0 != r1:
            report.flips_rate_asymmetric += 1
        out.append(dataclasses.replace(record, idx=bit, mvd=_recompute_mvd(mv, cands[bit])))
    return SequenceStream(stream.header, out), report


def embed(stream: SequenceStream, cfg: EmbedConfig) -> tuple[SequenceStream, EmbedReport]:
    """Dispatch to the embedder matching `cfg.method`."""
    if cfg.method is EmbedMethod.MVD_PARITY:
        return embed_mvd_parity(stream, cfg)
    if cfg.method is EmbedMethod.INDEX_THRESHOLD:
        return embed_index_threshold(stream, cfg)
    return embed_index_adaptive(stream, cfg)
