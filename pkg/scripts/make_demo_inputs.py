#!/usr/bin/env python3
"""Write demo inputs for the CLI: a small residual backbone graph and a
synthetic two-task results table.

Afterwards the whole pipeline can be driven from the shell:

    treerec detect --graph demo/backbone.json --out-costs demo/costs.txt
    treerec build-table --tasks 3 --points 5 --two-task demo/pairs.csv \
        --costs demo/costs.txt --out demo/table.jsonl
    treerec recommend --table demo/table.jsonl --k 5 --budget-models 2.0
"""

import argparse
import json
from pathlib import Path

import numpy as np

from treerec.synthetic import hidden_pair_curves, table_from_curves


def residual_stage(nodes, index, entry, channels):
    """conv/bn/relu twice plus a skip add, roughly resnet-flavoured costs."""
    base = f"s{index}"
    t = lambda k: f"{base}_t{k}"
    conv_params = 9 * channels * channels
    conv_flops = conv_params * 196
    specs = [
        (f"{base}_conv1", "conv2d", [entry], [t(1)], conv_params, conv_flops),
        (f"{base}_bn1", "batchnorm2d", [t(1)], [t(2)], 2 * channels, channels * 196),
        (f"{base}_relu1", "relu", [t(2)], [t(3)], 0, channels * 196),
        (f"{base}_conv2", "conv2d", [t(3)], [t(4)], conv_params, conv_flops),
        (f"{base}_bn2", "batchnorm2d", [t(4)], [t(5)], 2 * channels, channels * 196),
        (f"{base}_add", "add", [t(5), entry], [t(6)], 0, channels * 196),
        (f"{base}_relu2", "relu", [t(6)], [t(7)], 0, channels * 196),
    ]
    for nid, op, ins, outs, params, flops in specs:
        nodes.append({"id": nid, "op": op, "inputs": ins, "outputs": outs,
                      "params": params, "flops": flops})
    return t(7)


def build_backbone(num_stages=4):
    nodes = [{"id": "stem", "op": "conv2d", "inputs": ["image"], "outputs": ["stem_out"],
              "params": 1728, "flops": 338688}]
    cursor = "stem_out"
    for index in range(num_stages):
        cursor = residual_stage(nodes, index, cursor, channels=16 * (index + 1))
    return {"name": "demo-backbone", "inputs": ["image"], "outputs": [cursor], "nodes": nodes}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="demo")
    parser.add_argument("--tasks", type=int, default=3)
    parser.add_argument("--stages", type=int, default=4,
                        help="residual stages after the stem (points = stages + 1)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    backbone = build_backbone(args.stages)
    (out / "backbone.json").write_text(json.dumps(backbone, indent=1))

    num_points = args.stages + 1
    rng = np.random.default_rng(args.seed)
    curves = hidden_pair_curves(args.tasks, num_points, rng)
    table = table_from_curves(curves, args.tasks, num_points, noise=0.5, rng=rng)
    table.to_csv(out / "pairs.csv")

    print(f"wrote {out / 'backbone.json'} ({len(backbone['nodes'])} ops, "
          f"{num_points} expected blocks)")
    print(f"wrote {out / 'pairs.csv'} ({args.tasks} tasks, depths 0..{num_points})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
