"""Standalone export command producing the neutral graph file format."""

from __future__ import annotations

import argparse
import sys

from .models import REGISTRY
from .trace import ExportManifest, export_graph


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="export-graph",
        description="Export a CNN backbone as a computation-graph JSON file",
    )
    parser.add_argument("--model", required=True, help=f"one of: {', '.join(sorted(REGISTRY))}")
    parser.add_argument("--input-size", type=int, nargs=2, metavar=("H", "W"),
                        default=(224, 224))
    parser.add_argument("--channels", type=int, default=3)
    parser.add_argument("--out", required=True, help="output graph path")
    args = parser.parse_args(argv)
    try:
        manifest = ExportManifest(args.model, tuple(args.input_size),
                                  out_path=args.out, channels=args.channels)
        doc = export_graph(manifest)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    total_params = sum(node["params"] for node in doc["nodes"])
    total_flops = sum(node["flops"] for node in doc["nodes"])
    print(f"wrote {args.out}: {len(doc['nodes'])} ops, {total_params} params, {total_flops} flops")
    return 0


if __name__ == "__main__":
    sys.exit(main())
