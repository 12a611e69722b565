"""CLI: ``embexport export --corpus FILE --model ID --out FILE``."""

from __future__ import annotations

import argparse
import sys

from .exporter import ExporterConfig, ModelLoadError, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embexport", description="Export document embeddings to an EMB1 file"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="embed a JSONL corpus with a pretrained encoder")
    p.add_argument("--corpus", required=True, help="corpus JSONL path")
    p.add_argument("--model", required=True, help="model identifier or local path")
    p.add_argument("--out", required=True, help="EMB1 output path")
    p.add_argument("--pooling", choices=["mean", "cls"], default="mean")
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--max-len", type=int, default=128)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ExporterConfig(
        model=args.model,
        out_path=args.out,
        pooling=args.pooling,
        batch_size=args.batch,
        max_seq_len=args.max_len,
    )
    try:
        export(args.corpus, config)
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} (+ {args.out}.meta.json)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
