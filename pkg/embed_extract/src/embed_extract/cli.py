"""CLI for the embedding extractor.

Exit codes: 0 on success, 1 for an empty manifest (header-only output,
warning printed), 2 for manifest/model errors.
"""

from __future__ import annotations

import argparse
import sys

from .extract import GRANULARITIES, ExtractError, ExtractJob, extract_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-extract",
        description="Extract sentence embeddings from a corpus manifest to JSONL",
    )
    parser.add_argument("--manifest", required=True, help="corpus manifest CSV")
    parser.add_argument("--model", required=True, help="sentence-transformer id or path")
    parser.add_argument(
        "--granularity", choices=GRANULARITIES, default="document",
        help="one vector per document (pooled) or per sentence",
    )
    parser.add_argument("--out", required=True, help="output JSONL path")
    parser.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExtractJob(
        manifest=args.manifest,
        model=args.model,
        granularity=args.granularity,
        output=args.out,
        batch_size=args.batch_size,
    )
    try:
        summary = extract_embeddings(job)
    except ExtractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {summary['output']}: {summary['documents']} documents, "
        f"{summary['sentences']} sentences, dim {summary['dim']}"
    )
    if summary["truncated"]:
        print(f"warning: {summary['truncated']} documents truncated", file=sys.stderr)
    if summary["documents"] == 0:
        print("warning: empty manifest, header-only output", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
