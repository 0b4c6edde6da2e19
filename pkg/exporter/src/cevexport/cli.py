"""Command-line front end for the context-embedding exporter."""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, export, verify_export


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cevexport",
        description="Encode a contexts manifest into a CEV1 embedding file.",
    )
    parser.add_argument("--contexts", required=True, help="contexts.jsonl sidecar manifest")
    parser.add_argument("--model", required=True, help="encoder model id or local path")
    parser.add_argument("--out", required=True, help="output .cev path")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument(
        "--verify", action="store_true", help="re-read the output and check id agreement"
    )
    args = parser.parse_args(argv)
    try:
        manifest = export(args.contexts, args.model, args.out, args.batch_size)
        print(
            f"wrote {manifest.count} vectors (dim {manifest.dim} = 4 x "
            f"{manifest.hidden_size}) to {args.out}"
        )
        if args.verify:
            n = verify_export(args.contexts, args.out)
            print(f"verified {n} records against the manifest")
        return 0
    except ExportError as exc:
        print(f"cevexport: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
