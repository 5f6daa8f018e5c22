"""Command line entry points for the exporter.

    embed-export graph --out backbone.onnx [--checkpoint weights.pt] [--seed 0]
    embed-export embeddings --crops DIR --out crops.emb [--checkpoint weights.pt]

Exit codes: 0 success, 1 usage error, 2 export/data error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ExportError
from .export import export_embeddings, export_graph


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="embed-export", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_graph = sub.add_parser("graph", help="serialize the backbone as an inference graph")
    p_graph.add_argument("--out", required=True, help="graph file to write")
    p_graph.add_argument("--checkpoint", help="ResNet50 state-dict file (.pt); "
                                              "omitted -> seeded random weights")
    p_graph.add_argument("--seed", type=int, default=0)

    p_emb = sub.add_parser("embeddings", help="embed a directory of crop images")
    p_emb.add_argument("--crops", required=True, help="directory of <crop_id>.<ext> images")
    p_emb.add_argument("--out", required=True, help="embedding file to write")
    p_emb.add_argument("--checkpoint", help="ResNet50 state-dict file (.pt)")
    p_emb.add_argument("--seed", type=int, default=0)
    p_emb.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "graph":
            path = export_graph(args.out, checkpoint=args.checkpoint, seed=args.seed)
            print(f"wrote validated graph to {path} (manifest alongside)")
        else:
            path, manifest = export_embeddings(args.crops, args.out,
                                               checkpoint=args.checkpoint, seed=args.seed,
                                               batch_size=args.batch_size)
            note = f", {len(manifest.skipped)} skipped" if manifest.skipped else ""
            print(f"wrote {manifest.count} embeddings (D={manifest.dimension}) to {path}{note}")
    except ExportError as exc:
        print(f"embed-export: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
