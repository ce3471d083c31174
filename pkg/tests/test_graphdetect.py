import json
from itertools import combinations

import numpy as np
import pytest

from treerec import (
    coarsen_blocks,
    detect_blocks,
    find_cut_tensors,
    merge_unparameterized,
    parse_graph,
    segment_candidate_blocks,
)
from treerec.graphdetect import KindTable, balanced_ranges
from helpers import chain_doc, fan_doc, node, random_series_parallel, residual_doc


class TestParseGraph:
    def test_chain_fixture(self):
        graph = parse_graph(chain_doc())
        assert len(graph.nodes) == 4
        tensors = {graph.input_tensor} | set(graph.producer)
        assert len(tensors) == 5

    def test_cycle_rejected(self):
        doc = {"name": "loop", "inputs": ["t0"], "outputs": ["t2"], "nodes": [
            node("a", "conv2d", ["t0", "t3"], ["t1"], 1, 1),
            node("b", "conv2d", ["t1"], ["t2"], 1, 1),
            node("c", "relu", ["t2"], ["t3"], 0, 1),
        ]}
        with pytest.raises(ValueError, match="cycle"):
            parse_graph(doc)

    def test_dangling_tensor_rejected(self):
        doc = {"name": "gap", "inputs": ["t0"], "outputs": ["t2"], "nodes": [
            node("a", "conv2d", ["t0"], ["t1"], 1, 1),
            node("b", "conv2d", ["t9"], ["t2"], 1, 1),
        ]}
        with pytest.raises(ValueError, match="dangling"):
            parse_graph(doc)

    def test_multiple_sources_rejected(self):
        doc = chain_doc()
        doc["inputs"] = ["t0", "tx"]
        with pytest.raises(ValueError, match="one graph input"):
            parse_graph(doc)

    def test_multiple_sinks_rejected(self):
        doc = chain_doc()
        doc["outputs"] = ["t4", "t2"]
        with pytest.raises(ValueError, match="one graph input and one output"):
            parse_graph(doc)

    def test_double_producer_rejected(self):
        doc = {"name": "dup", "inputs": ["t0"], "outputs": ["t1"], "nodes": [
            node("a", "conv2d", ["t0"], ["t1"], 1, 1),
            node("b", "conv2d", ["t0"], ["t1"], 1, 1),
        ]}
        with pytest.raises(ValueError, match="produced by more than one"):
            parse_graph(doc)

    def test_off_path_node_rejected(self):
        doc = chain_doc()
        doc["nodes"].append(node("stray", "relu", ["t1"], ["t9"], 0, 1))
        with pytest.raises(ValueError, match="not on any input-to-output path"):
            parse_graph(doc)

    def test_missing_field_rejected(self):
        doc = chain_doc()
        del doc["nodes"][0]["flops"]
        with pytest.raises(ValueError, match="missing 'flops'"):
            parse_graph(doc)

    def test_negative_cost_rejected(self):
        doc = chain_doc()
        doc["nodes"][0]["params"] = -1
        with pytest.raises(ValueError, match="negative"):
            parse_graph(doc)

    def test_single_document_file(self, tmp_path):
        path = tmp_path / "graph.json"
        path.write_text(json.dumps(chain_doc()))
        assert len(parse_graph(path).nodes) == 4

    def test_line_delimited_file(self, tmp_path):
        doc = chain_doc()
        lines = [json.dumps({"name": doc["name"], "inputs": doc["inputs"], "outputs": doc["outputs"]})]
        lines += [json.dumps(n) for n in doc["nodes"]]
        path = tmp_path / "graph.jsonl"
        path.write_text("\n".join(lines) + "\n")
        graph = parse_graph(path)
        assert len(graph.nodes) == 4
        assert find_cut_tensors(graph) == ["t0", "t1", "t2", "t3", "t4"]


class TestFindCutTensors:
    def test_chain_every_tensor_cuts(self):
        graph = parse_graph(chain_doc())
        assert find_cut_tensors(graph) == ["t0", "t1", "t2", "t3", "t4"]

    def test_residual_skips_parallel_arms(self):
        graph = parse_graph(residual_doc())
        assert find_cut_tensors(graph) == ["t0", "t1", "t4", "t5"]

    def test_fan_out_only_boundaries(self):
        graph = parse_graph(fan_doc())
        assert find_cut_tensors(graph) == ["t0", "t9"]

    def test_node_order_independent(self):
        rng = np.random.default_rng(17)
        for doc_fn in (chain_doc, residual_doc, fan_doc):
            reference = find_cut_tensors(parse_graph(doc_fn()))
            for _ in range(5):
                doc = doc_fn()
                rng.shuffle(doc["nodes"])
                assert find_cut_tensors(parse_graph(doc)) == reference


class TestSegment:
    def test_chain_gives_one_block_per_op(self):
        graph = parse_graph(chain_doc())
        blocks = segment_candidate_blocks(graph, find_cut_tensors(graph))
        assert [b.node_ids for b in blocks] == [("conv1",), ("bn1",), ("relu1",), ("conv2",)]

    def test_residual_three_blocks(self):
        graph = parse_graph(residual_doc())
        blocks = segment_candidate_blocks(graph, find_cut_tensors(graph))
        assert [set(b.node_ids) for b in blocks] == [{"conv1"}, {"conv2", "conv3", "add"}, {"conv4"}]
        assert blocks[1].entry_tensor == "t1" and blocks[1].exit_tensor == "t4"

    def test_single_node_graph(self):
        doc = {"name": "one", "inputs": ["t0"], "outputs": ["t1"], "nodes": [
            node("solo", "conv2d", ["t0"], ["t1"], 5, 50)]}
        graph = parse_graph(doc)
        blocks = segment_candidate_blocks(graph, find_cut_tensors(graph))
        assert len(blocks) == 1


class TestMerge:
    def test_conv_bn_relu_merges_back(self):
        graph = parse_graph(chain_doc())
        blocks = detect_blocks(graph)
        assert [b.node_ids for b in blocks] == [("conv1", "bn1", "relu1"), ("conv2",)]
        assert blocks[0].flops == 1060 and blocks[0].params == 108
        assert blocks[1].flops == 2000 and blocks[1].params == 200

    def test_leading_unparameterized_merges_forward(self):
        doc = {"name": "lead", "inputs": ["t0"], "outputs": ["t2"], "nodes": [
            node("relu0", "relu", ["t0"], ["t1"], 0, 5),
            node("conv1", "conv2d", ["t1"], ["t2"], 10, 100),
        ]}
        blocks = detect_blocks(parse_graph(doc))
        assert len(blocks) == 1
        assert blocks[0].node_ids == ("relu0", "conv1")

    def test_all_parameterized_unchanged(self):
        doc = {"name": "convs", "inputs": ["t0"], "outputs": ["t3"], "nodes": [
            node("c1", "conv2d", ["t0"], ["t1"], 1, 1),
            node("c2", "conv2d", ["t1"], ["t2"], 1, 1),
            node("c3", "conv2d", ["t2"], ["t3"], 1, 1),
        ]}
        blocks = detect_blocks(parse_graph(doc))
        assert [b.node_ids for b in blocks] == [("c1",), ("c2",), ("c3",)]

    def test_batchnorm_merges_despite_params(self):
        doc = {"name": "bn", "inputs": ["t0"], "outputs": ["t2"], "nodes": [
            node("c1", "conv2d", ["t0"], ["t1"], 10, 100),
            node("bn", "batchnorm2d", ["t1"], ["t2"], 8, 10),
        ]}
        blocks = detect_blocks(parse_graph(doc))
        assert len(blocks) == 1

    def test_unknown_op_with_params_anchors(self):
        doc = {"name": "mystery", "inputs": ["t0"], "outputs": ["t2"], "nodes": [
            node("c1", "conv2d", ["t0"], ["t1"], 10, 100),
            node("x", "frobnicate", ["t1"], ["t2"], 3, 10),
        ]}
        blocks = detect_blocks(parse_graph(doc))
        assert len(blocks) == 2

    def test_all_unparameterized_rejected(self):
        doc = {"name": "empty", "inputs": ["t0"], "outputs": ["t2"], "nodes": [
            node("r1", "relu", ["t0"], ["t1"], 0, 1),
            node("r2", "relu", ["t1"], ["t2"], 0, 1),
        ]}
        graph = parse_graph(doc)
        with pytest.raises(ValueError, match="no parameterized"):
            detect_blocks(graph)

    def test_custom_kind_table(self):
        doc = {"name": "custom", "inputs": ["t0"], "outputs": ["t2"], "nodes": [
            node("c1", "conv2d", ["t0"], ["t1"], 10, 100),
            node("x", "frobnicate", ["t1"], ["t2"], 3, 10),
        ]}
        kinds = KindTable(mergeable=KindTable().mergeable | {"frobnicate"})
        blocks = detect_blocks(parse_graph(doc), kinds)
        assert len(blocks) == 1


def brute_force_best_max(flops, num_groups):
    """Exhaustive search over all boundary placements."""
    n = len(flops)
    best = None
    for cuts in combinations(range(1, n), num_groups - 1):
        edges = (0,) + cuts + (n,)
        worst = max(sum(flops[a:b]) for a, b in zip(edges, edges[1:]))
        if best is None or worst < best:
            best = worst
    return best


class TestCoarsen:
    def test_equal_blocks_split_evenly(self):
        ranges = balanced_ranges([1.0] * 10, 5)
        assert ranges == [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]

    def test_matches_exhaustive_search(self):
        cases = [([4, 1, 1, 4], 2), ([5, 1, 1, 1, 5], 3), ([2, 2, 9, 1], 2)]
        rng = np.random.default_rng(23)
        cases += [(list(rng.integers(1, 20, size=rng.integers(3, 9))),
                   int(rng.integers(2, 4))) for _ in range(20)]
        for flops, groups in cases:
            if groups > len(flops):
                continue
            ranges = balanced_ranges(flops, groups)
            worst = max(sum(flops[s:e + 1]) for s, e in ranges)
            assert worst == brute_force_best_max(flops, groups), (flops, groups)

    def test_four_one_one_four(self):
        # the (4,1)(1,4) split dominates with max group total 5
        assert balanced_ranges([4, 1, 1, 4], 2) == [(0, 1), (2, 3)]

    def test_earliest_boundary_tie_break(self):
        # both (1)(1,1) and (1,1)(1) reach max 2; earliest boundary wins
        assert balanced_ranges([1.0, 1.0, 1.0], 2) == [(0, 0), (1, 2)]

    def test_explicit_grouping(self):
        graph = parse_graph(chain_doc())
        blocks = detect_blocks(graph)
        merged = coarsen_blocks(blocks, grouping=[(0, 1)])
        assert len(merged) == 1
        assert merged[0].flops == sum(b.flops for b in blocks)
        assert merged[0].entry_tensor == blocks[0].entry_tensor
        assert merged[0].exit_tensor == blocks[-1].exit_tensor

    def test_bad_grouping_rejected(self):
        graph = parse_graph(chain_doc())
        blocks = detect_blocks(graph)
        with pytest.raises(ValueError):
            coarsen_blocks(blocks, grouping=[(0, 0)])
        with pytest.raises(ValueError):
            coarsen_blocks(blocks, grouping=[(1, 1), (0, 0)])
        with pytest.raises(ValueError):
            coarsen_blocks(blocks)
        with pytest.raises(ValueError):
            coarsen_blocks(blocks, grouping=[(0, 1)], num_groups=1)

    def test_too_many_groups_rejected(self):
        with pytest.raises(ValueError):
            balanced_ranges([1.0, 2.0], 3)


class TestRandomSeriesParallel:
    def test_conservation_and_structure(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            doc = random_series_parallel(rng)
            graph = parse_graph(doc)
            cuts = find_cut_tensors(graph)
            candidates = segment_candidate_blocks(graph, cuts)
            blocks = merge_unparameterized(candidates, graph)

            all_ids = [nid for b in blocks for nid in b.node_ids]
            assert sorted(all_ids) == sorted(n.id for n in graph.nodes)
            assert sum(b.flops for b in blocks) == sum(n.flops for n in graph.nodes)
            assert sum(b.params for b in blocks) == sum(n.params for n in graph.nodes)

            assert blocks[0].entry_tensor == graph.input_tensor
            assert blocks[-1].exit_tensor == graph.output_tensor
            for prev, nxt in zip(blocks, blocks[1:]):
                assert prev.exit_tensor == nxt.entry_tensor
            kinds = KindTable()
            for b in blocks:
                assert any(kinds.is_anchor(graph.by_id[nid]) for nid in b.node_ids)
