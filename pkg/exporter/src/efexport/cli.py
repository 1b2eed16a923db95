"""Command line for the exporter: containers, IDF tables, LM penalties."""

from __future__ import annotations

import argparse
import logging
import sys

from .encoders import TIERS, EncoderUnavailableError, TokenizationError
from .exporter import (
    SIDES,
    ExportJob,
    export_embeddings,
    export_identity_remap,
    export_idf,
    export_lm_penalties,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="efexport", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="encode one side of a segments file into a container")
    p.add_argument("--segments", required=True, help="6-column segments TSV")
    p.add_argument("--side", required=True, choices=SIDES, help="which text column to encode")
    p.add_argument("--encoder", default="small", choices=sorted(TIERS), help="encoder tier")
    p.add_argument("--out", required=True, help="output container path")
    p.add_argument("--manifest", help="optional sidecar manifest path")
    p.add_argument("--seed", type=int, default=0, help="weight seed (exports are deterministic per seed)")
    p.add_argument("--batch-size", dest="batch_size", type=int, default=16, help="segments per forward pass")
    p.add_argument("--timestamp", help="fixed manifest timestamp (default: current UTC time)")

    p = sub.add_parser("idf", help="document-frequency statistics for one side")
    p.add_argument("--segments", required=True)
    p.add_argument("--side", required=True, choices=SIDES)
    p.add_argument("--out", required=True)

    p = sub.add_parser("lm", help="unigram fluency penalties for the hypotheses")
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("remap-identity", help="write an identity remap matrix")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            export_embeddings(
                ExportJob(
                    encoder=args.encoder,
                    segments_path=args.segments,
                    side=args.side,
                    out_path=args.out,
                    manifest_path=args.manifest,
                    seed=args.seed,
                    batch_size=args.batch_size,
                    created_at=args.timestamp,
                )
            )
        elif args.command == "idf":
            export_idf(args.segments, args.side, args.out)
        elif args.command == "lm":
            export_lm_penalties(args.segments, args.out)
        elif args.command == "remap-identity":
            export_identity_remap(args.dim, args.out)
        return 0
    except (EncoderUnavailableError, TokenizationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
