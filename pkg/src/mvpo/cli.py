"""Command-line harness: encode, embed, analyze, experiment.

Exit codes: 0 success (including an indeterminate verdict, which warns on
stderr), 1 usage error, 2 I/O or input-data error, 3 malformed stream,
4 capacity error.  Outputs are written only after a command has fully
succeeded, and every artifact gets a sidecar or inline record of the
invocation that produced it, so reruns are auditable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .analyzer import optimal_rate
from .codec import encode_sequence
from .core import RdParams, rate_of
from .errors import CapacityError, InputError, MalformedStreamError
from .experiment import (
    METHOD_TAGS,
    parse_plan,
    parse_synth_spec,
    rows_to_csv,
    run_experiment,
)
from .formats import (
    YuvSpec,
    load_stream,
    read_yuv,
    report_to_csv,
    report_to_json,
    save_stream,
)
from .stego import EmbedConfig, EmbedMethod, embed
from .synth import synthesize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_MALFORMED = 3
EXIT_CAPACITY = 4


class _Parser(argparse.ArgumentParser):
    # the exit-code contract reserves 2 for I/O, so usage errors exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_meta(path: str, command: str, args: dict) -> None:
    meta = {"tool": "mvpo", "version": __version__, "command": command, "args": args}
    with open(path + ".meta.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def _invocation(command: str, args: dict) -> dict:
    return {"tool": "mvpo", "version": __version__, "command": command, "args": args}


def _load_frames(args):
    if args.synth:
        return synthesize(parse_synth_spec(args.synth))
    if not args.yuv:
        raise ValueError("encode needs either --synth or --yuv")
    if not args.size:
        raise ValueError("--yuv needs --size WxH")
    w, h = _parse_size(args.size)
    frames = args.frames
    if frames is None:
        frame_bytes = w * h * 3 // 2
        total = os.stat(args.yuv).st_size
        if total == 0 or total % frame_bytes:
            raise InputError(f"{args.yuv}: size {total} is not a whole number of {w}x{h} 4:2:0 frames")
        frames = total // frame_bytes
    return read_yuv(args.yuv, YuvSpec(w, h, frames))


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise ValueError(f"bad size {text!r}, expected WxH") from exc


def cmd_encode(args) -> int:
    frames = _load_frames(args)
    params = RdParams(qp=args.qp, search_range=args.search_range, pu_size=args.pu_size)
    stream, _ = encode_sequence(frames, params)
    save_stream(stream, args.out)
    _write_meta(
        args.out,
        "encode",
        {
            "synth": args.synth,
            "yuv": args.yuv,
            "size": args.size,
            "frames": args.frames,
            "qp": args.qp,
            "pu_size": args.pu_size,
            "search_range": args.search_range,
            "gop": args.gop,
        },
    )
    total_bits = sum(rate_of(r.mvd) for r in stream.records)
    print(f"pus={stream.n_records} total_rate_bits={total_bits} out={args.out}")
    return EXIT_OK


def _embed_config(args) -> EmbedConfig:
    method = METHOD_TAGS[args.method]
    if method is EmbedMethod.MVD_PARITY:
        if args.e is None:
            raise ValueError("--method tar1 needs --e")
        return EmbedConfig(method, strength_e=args.e, rng_seed=args.seed)
    if method is EmbedMethod.INDEX_THRESHOLD:
        if args.T is None:
            raise ValueError("--method tar2 needs --T")
        return EmbedConfig(method, threshold_T=args.T, rng_seed=args.seed)
    if args.bpap is None:
        raise ValueError("--method tar3 needs --bpap")
    return EmbedConfig(method, capacity_bpap=args.bpap, rng_seed=args.seed)


def cmd_embed(args) -> int:
    stream = load_stream(args.input)
    cfg = _embed_config(args)
    stego, report = embed(stream, cfg)
    save_stream(stego, args.out)
    doc = report.to_dict()
    doc["invocation"] = _invocation(
        "embed",
        {"in": args.input, "method": args.method, "e": args.e, "T": args.T, "bpap": args.bpap, "seed": args.seed},
    )
    with open(args.out + ".report.json", "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    print(
        f"method={args.method} pus={report.pus_visited} bits={report.bits_embedded} "
        f"modified={report.pus_modified} out={args.out}"
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    stream = load_stream(args.input)
    report = optimal_rate(stream)
    invocation = _invocation("analyze", {"in": args.input, "format": args.format})
    if args.format == "json":
        rendered = report_to_json(report, invocation=invocation)
    else:
        rendered = report_to_csv(report)
    if report.n_pus == 0:
        print("warning: stream carries no inter PUs, verdict is indeterminate", file=sys.stderr)
    if args.out == "-":
        sys.stdout.write(rendered)
    else:
        pct = report.optimal_rate_pct
        pct_text = "n/a" if pct is None else f"{pct:.4f}"
        print(
            f"n_pus={report.n_pus} n_optimal={report.n_optimal} "
            f"optimal_rate_pct={pct_text} verdict={report.verdict.value}"
        )
        if args.out:
            with open(args.out, "w") as f:
                f.write(rendered)
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.plan) as f:
        plan = parse_plan(f.read())
    rows, errors = run_experiment(plan, jobs=args.jobs)
    out = args.out or plan.out
    with open(out, "w") as f:
        f.write(rows_to_csv(rows))
    _write_meta(out, "experiment", {"plan": args.plan, "jobs": args.jobs, "seed": plan.seed})
    for line in errors:
        print(f"warning: {line}", file=sys.stderr)
    print(f"cells={len(rows)} errors={len(errors)} out={out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvpo", description="AMVP codec model, MV embedders, predictor-optimality analyzer")
    parser.add_argument("-v", "--verbose", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode a sequence to an MVPO stream")
    enc.add_argument("--synth", help="synthetic source, e.g. pattern=shift,size=64x64,frames=9,seed=1,amp=1x0")
    enc.add_argument("--yuv", help="raw YUV 4:2:0 input file")
    enc.add_argument("--size", help="YUV frame size WxH")
    enc.add_argument("--frames", type=int, help="YUV frame count (default: derived from file size)")
    enc.add_argument("--qp", type=int, default=25)
    enc.add_argument("--pu-size", type=int, default=16, dest="pu_size")
    enc.add_argument("--search-range", type=int, default=8, dest="search_range")
    enc.add_argument("--gop", choices=["ippp"], default="ippp")
    enc.add_argument("--out", required=True)
    enc.set_defaults(func=cmd_encode)

    emb = sub.add_parser("embed", help="embed a payload into an MVPO stream")
    emb.add_argument("--in", required=True, dest="input")
    emb.add_argument("--method", choices=sorted(METHOD_TAGS), required=True)
    emb.add_argument("--e", type=float, help="selection probability for tar1")
    emb.add_argument("--T", type=int, help="candidate-distance threshold for tar2")
    emb.add_argument("--bpap", type=float, help="bits per PU for tar3")
    emb.add_argument("--seed", type=int, default=0)
    emb.add_argument("--out", required=True)
    emb.set_defaults(func=cmd_embed)

    ana = sub.add_parser("analyze", help="report the predictor-optimality rate of a stream")
    ana.add_argument("--in", required=True, dest="input")
    ana.add_argument("--format", choices=["json", "csv"], default="json")
    ana.add_argument("--out", help="report file path, or - for stdout")
    ana.set_defaults(func=cmd_analyze)

    exp = sub.add_parser("experiment", help="run a (sequence, qp, method, parameter) grid")
    exp.add_argument("--plan", required=True)
    exp.add_argument("--out", help="results CSV path (default: from the plan)")
    exp.add_argument("--jobs", type=int, default=1)
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"mvpo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"mvpo: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MalformedStreamError as exc:
        print(f"mvpo: malformed stream: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except CapacityError as exc:
        print(f"mvpo: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
