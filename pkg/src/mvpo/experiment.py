"""Grid experiments: encode, embed, analyze over (sequence, qp, method, parameter) cells.

A plan is a plain key=value text file.  Each cell aggregates every sequence
into the two table statistics: the mean optimality percentage and the
proportion of sequences still at exactly 100 percent.  Failures are recorded
per cell and the run continues.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .analyzer import FeatureReport, optimal_rate
from .codec import encode_sequence
from .core import RdParams
from .errors import InputError, MvpoError
from .formats import YuvSpec, read_yuv
from .stego import EmbedConfig, EmbedMethod, embed
from .stream import Plane, SequenceStream
from .synth import SynthPattern, SynthSpec, synthesize

METHOD_TAGS = {
    "tar1": EmbedMethod.MVD_PARITY,
    "tar2": EmbedMethod.INDEX_THRESHOLD,
    "tar3": EmbedMethod.INDEX_ADAPTIVE,
}

DEFAULT_E_GRID = (0.1, 0.2, 0.3, 0.4, 0.5)
DEFAULT_T_GRID = (0, 1, 5, 20, 1000)
DEFAULT_BPAP_GRID = (0.1, 0.2, 0.3, 0.4, 0.5)


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise InputError(f"bad size {text!r}, expected WxH") from exc


def _parse_kv(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise InputError(f"bad spec field {part!r}, expected key=value")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_synth_spec(text: str) -> SynthSpec:
    """Parse e.g. "pattern=shift,size=64x64,frames=31,seed=5,amp=1x0"."""
    kv = _parse_kv(text)
    try:
        pattern = SynthPattern(kv.pop("pattern"))
    except (KeyError, ValueError) as exc:
        raise InputError(f"synth spec needs pattern= one of "
                         f"{[p.value for p in SynthPattern]}: {text!r}") from exc
    if "size" not in kv or "frames" not in kv:
        raise InputError(f"synth spec needs size= and frames=: {text!r}")
    width, height = _parse_size(kv.pop("size"))
    frames = int(kv.pop("frames"))
    seed = int(kv.pop("seed", "0"))
    ax, ay = _parse_size(kv.pop("amp", "1x0"))
    if kv:
        raise InputError(f"unknown synth spec fields {sorted(kv)}")
    return SynthSpec(pattern, width, height, frames, seed=seed, amplitude=(ax, ay))


@dataclass(frozen=True)
class SequenceSource:
    """One input sequence: either a synthetic spec or a raw YUV file."""

    name: str
    synth: SynthSpec | None = None
    yuv_path: str | None = None
    yuv_spec: YuvSpec | None = None

    def load(self) -> list[Plane]:
        if self.synth is not None:
            return synthesize(self.synth)
        return read_yuv(self.yuv_path, self.yuv_spec)


def parse_sequence_source(text: str) -> SequenceSource:
    """A synth spec as above, or "yuv=path,size=WxH,frames=N"."""
    kv = _parse_kv(text)
    if "yuv" in kv:
        if "size" not in kv or "frames" not in kv:
            raise InputError(f"yuv source needs size= and frames=: {text!r}")
        width, height = _parse_size(kv["size"])
        spec = YuvSpec(width, height, int(kv["frames"]))
        path = kv["yuv"]
        return SequenceSource(name=os.path.basename(path), yuv_path=path, yuv_spec=spec)
    spec = parse_synth_spec(text)
    name = f"{spec.pattern.value}-{spec.width}x{spec.height}x{spec.frame_count}-s{spec.seed}"
    return SequenceSource(name=name, synth=spec)


@dataclass
class ExperimentPlan:
    sequences: list[SequenceSource]
    qps: list[int]
    methods: list[str]
    e_grid: list[float]
    t_grid: list[int]
    bpap_grid: list[float]
    pu_size: int = 16
    search_range: int = 8
    seed: int = 0
    out: str = "results.csv"


def parse_plan(text: str) -> ExperimentPlan:
    """Parse the key=value plan format; see the README for the field list."""
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"plan line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        fields[key.strip().lower()] = value.strip()

    if "sequences" not in fields:
        raise InputError("plan needs a sequences= line")
    sequences = [parse_sequence_source(s) for s in fields["sequences"].split("|") if s.strip()]
    if not sequences:
        raise InputError("plan lists no sequences")

    def _list(key: str, default: Iterable, conv) -> list:
        if key not in fields:
            return list(default)
        return [conv(v) for v in fields[key].split(",") if v.strip()]

    methods = _list("methods", ["cover"], lambda s: s.strip().lower())
    for m in methods:
        if m != "cover" and m not in METHOD_TAGS:
            raise InputError(f"unknown method {m!r}, expected cover/{'/'.join(METHOD_TAGS)}")
    return ExperimentPlan(
        sequences=sequences,
        qps=_list("qp", [25], int),
        methods=methods,
        e_grid=_list("tar1_e", DEFAULT_E_GRID, float),
        t_grid=_list("tar2_t", DEFAULT_T_GRID, int),
        bpap_grid=_list("tar3_bpap", DEFAULT_BPAP_GRID, float),
        pu_size=int(fields.get("pu_size", "16")),
        search_range=int(fields.get("search_range", "8")),
        seed=int(fields.get("seed", "0")),
        out=fields.get("out", "results.csv"),
    )


@dataclass(frozen=True)
class CellRow:
    method: str
    qp: int
    param: str
    value: str
    n_sequences: int
    n_errors: int
    mean_optimal_rate_pct: float | None
    prop_at_100_pct: float | None


def summarize(reports: Iterable[FeatureReport]) -> tuple[float | None, float | None]:
    """The two table statistics over a cell's sequence reports."""
    pcts = [r.optimal_rate_pct for r in reports if r.optimal_rate_pct is not None]
    if not pcts:
        return None, None
    at_100 = sum(1 for p in pcts if p == 100.0)
    return sum(pcts) / len(pcts), 100.0 * at_100 / len(pcts)


def _cells(plan: ExperimentPlan) -> list[tuple[str, int, str, str]]:
    grids = {"tar1": ("e", plan.e_grid), "tar2": ("T", plan.t_grid), "tar3": ("bpap", plan.bpap_grid)}
    cells = []
    for method in plan.methods:
        for qp in plan.qps:
            if method == "cover":
                cells.append((method, qp, "", ""))
            else:
                name, grid = grids[method]
                cells.extend((method, qp, name, str(v)) for v in grid)
    return cells


def _embed_config(plan: ExperimentPlan, method: str, value: str) -> EmbedConfig:
    kind = METHOD_TAGS[method]
    if kind is EmbedMethod.MVD_PARITY:
        return EmbedConfig(kind, strength_e=float(value), rng_seed=plan.seed)
    if kind is EmbedMethod.INDEX_THRESHOLD:
        return EmbedConfig(kind, threshold_T=int(value), rng_seed=plan.seed)
    return EmbedConfig(kind, capacity_bpap=float(value), rng_seed=plan.seed)


def run_experiment(plan: ExperimentPlan, jobs: int = 1) -> tuple[list[CellRow], list[str]]:
    """Run the whole grid; returns the sorted cell rows and any per-item errors."""
    params = {qp: RdParams(qp=qp, search_range=plan.search_range, pu_size=plan.pu_size) for qp in plan.qps}
    errors: list[str] = []

    def _encode(source: SequenceSource, qp: int) -> SequenceStream:
        return encode_sequence(source.load(), params[qp])[0]

    covers: dict[tuple[int, int], SequenceStream | None] = {}
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        futures = {
            (si, qp): pool.submit(_encode, source, qp)
            for si, source in enumerate(plan.sequences)
            for qp in plan.qps
        }
        for (si, qp), future in futures.items():
            try:
                covers[(si, qp)] = future.result()
            except MvpoError as exc:
                covers[(si, qp)] = None
                errors.append(f"encode {plan.sequences[si].name} qp={qp}: {exc}")

    rows = []
    for method, qp, param, value in _cells(plan):
        reports = []
        n_errors = 0
        for si in range(len(plan.sequences)):
            cover = covers[(si, qp)]
            if cover is None:
                n_errors += 1
                continue
            try:
                target = cover if method == "cover" else embed(cover, _embed_config(plan, method, value))[0]
                reports.append(optimal_rate(target))
            except MvpoError as exc:
                n_errors += 1
                errors.append(f"{method} {param}={value} qp={qp} {plan.sequences[si].name}: {exc}")
        mean_pct, prop_100 = summarize(reports)
        rows.append(CellRow(method, qp, param, value, len(reports), n_errors, mean_pct, prop_100))
    rows.sort(key=lambda r: (r.method, r.qp, r.param, _numeric(r.value)))
    return rows, errors


def _numeric(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        return -1.0


def rows_to_csv(rows: list[CellRow]) -> str:
    def fmt(x: float | None) -> str:
        return "" if x is None else f"{x:.4f}"

    lines = ["method,qp,param,value,n_sequences,n_errors,mean_optimal_rate_pct,prop_at_100_pct"]
    for r in rows:
        lines.append(
            f"{r.method},{r.qp},{r.param},{r.value},{r.n_sequences},{r.n_errors},"
            f"{fmt(r.mean_optimal_rate_pct)},{fmt(r.prop_at_100_pct)}"
        )
    return "\n".join(lines) + "\n"
