"""Command line interface.

Subcommands: enumerate, detect, build-table, recommend, eval-ranking.
Exit codes: 0 success, 2 validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .costmodel import CostProfile
from .enumerator import enumerate_layouts
from .estimator import TwoTaskTable
from .graphdetect import coarsen_blocks, detect_blocks, parse_graph
from .recommender import Budget, PerformanceTable, build_table, evaluate_ranking, recommend

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


def _cmd_enumerate(args) -> int:
    layouts = enumerate_layouts(args.tasks, args.points)
    lines = [f"{index}\t{layout.to_text()}" for index, layout in enumerate(layouts)]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {len(lines)} layouts to {args.out}")
    else:
        print("\n".join(lines))
    return EXIT_OK


def _cmd_detect(args) -> int:
    graph = parse_graph(args.graph)
    blocks = detect_blocks(graph)
    if args.coarsen is not None:
        blocks = coarsen_blocks(blocks, num_groups=args.coarsen)
    if args.json:
        doc = {"name": graph.name, "blocks": [
            {"label": b.label, "nodes": list(b.node_ids), "entry": b.entry_tensor,
             "exit": b.exit_tensor, "flops": b.flops, "params": b.params}
            for b in blocks
        ]}
        print(json.dumps(doc, indent=1))
    else:
        print(f"{graph.name}: {len(blocks)} computation blocks")
        for block in blocks:
            print(
                f"  {block.label}: {len(block.node_ids)} ops, "
                f"flops={block.flops}, params={block.params} "
                f"[{block.entry_tensor} -> {block.exit_tensor}]"
            )
    if args.out_costs:
        CostProfile(tuple((b.flops, b.params) for b in blocks)).to_file(args.out_costs)
        print(f"wrote cost profile to {args.out_costs}")
    return EXIT_OK


def _cmd_build_table(args) -> int:
    two_task = TwoTaskTable.from_csv(args.two_task, num_tasks=args.tasks, num_points=args.points)
    profile = CostProfile.from_file(args.costs)
    table = build_table(args.tasks, args.points, two_task, profile)
    table.save(args.out)
    print(f"wrote {len(table.records)} records to {args.out} (digest {table.digest()[:12]})")
    return EXIT_OK


def _cmd_recommend(args) -> int:
    table = PerformanceTable.load(args.table)
    if args.budget_flops_pct is not None:
        budget = Budget("flops-pct", args.budget_flops_pct, args.k)
    elif args.budget_models is not None:
        budget = Budget("models", args.budget_models, args.k)
    else:
        budget = Budget("none", k=args.k)
    result = recommend(table, budget)
    print(f"status: {result.status}")
    for record in result.records:
        print(
            f"#{record.index}\tscore={record.score:.4f}\t"
            f"flops%={record.flops_pct:.2f}\tparams%={record.params_pct:.2f}\t"
            f"models={record.models_equivalent:.3f}\t{record.layout}"
        )
    return EXIT_OK


def _cmd_eval_ranking(args) -> int:
    table = PerformanceTable.load(args.table)
    report = evaluate_ranking(table, args.oracle)
    print(f"layouts: {report.num_layouts}")
    print(f"score pearson: {report.score_pearson:.6f}")
    print(f"rank pearson:  {report.rank_pearson:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treerec",
        description="Training-free recommender for tree-structured multi-task architectures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate the layout design space")
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--out", help="write one indexed layout per line to this file")
    p.set_defaults(handler=_cmd_enumerate)

    p = sub.add_parser("detect", help="detect branching points in a computation graph")
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--coarsen", type=int, help="merge into this many flops-balanced blocks")
    p.add_argument("--json", action="store_true", help="print blocks as a JSON document")
    p.add_argument("--out-costs", help="write the per-block cost profile here")
    p.set_defaults(handler=_cmd_detect)

    p = sub.add_parser("build-table", help="build the performance table over the design space")
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--two-task", required=True, help="two-task results CSV")
    p.add_argument("--costs", required=True, help="cost profile file")
    p.add_argument("--out", required=True, help="output table path")
    p.set_defaults(handler=_cmd_build_table)

    p = sub.add_parser("recommend", help="budget-constrained top-k query")
    p.add_argument("--table", required=True)
    p.add_argument("--k", type=int, default=5)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--budget-flops-pct", type=float, help="max flops reduction percentage")
    group.add_argument("--budget-models", type=float, help="max backbone-equivalents")
    p.set_defaults(handler=_cmd_recommend)

    p = sub.add_parser("eval-ranking", help="correlate predictions with an oracle ranking")
    p.add_argument("--table", required=True)
    p.add_argument("--oracle", required=True, help="index,value rows")
    p.set_defaults(handler=_cmd_eval_ranking)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
