import pytest

from treerec import (
    canonicalize,
    count_layouts_oracle,
    enumerate_layouts,
    initial_layout,
    is_valid,
    oracle_chain_keys,
    two_task_space_size,
)
from treerec.enumerator import refines, set_partitions
from treerec.layout import apply_cut, available_cuts

BELL = {1: 1, 2: 2, 3: 5, 4: 15, 5: 52, 6: 203}


class TestCounts:
    @pytest.mark.parametrize("tasks,points,expected", [
        (2, 3, 4),
        (3, 1, 5),
        (3, 2, 12),
        (3, 5, 51),
    ])
    def test_known_space_sizes(self, tasks, points, expected):
        assert len(enumerate_layouts(tasks, points)) == expected
        assert count_layouts_oracle(tasks, points) == expected

    def test_two_tasks_one_switch_point(self):
        for points in range(1, 7):
            assert count_layouts_oracle(2, points) == points + 1

    def test_single_point_is_bell_number(self):
        for tasks, bell in BELL.items():
            assert count_layouts_oracle(tasks, 1) == bell

    def test_monotone_in_points(self):
        for tasks in range(1, 6):
            counts = [count_layouts_oracle(tasks, b) for b in range(1, 7)]
            assert counts == sorted(counts)

    def test_monotone_in_tasks(self):
        for points in range(1, 6):
            counts = [count_layouts_oracle(t, points) for t in range(1, 8)]
            assert counts == sorted(counts)

    def test_count_bounds(self):
        with pytest.raises(ValueError):
            count_layouts_oracle(13, 2)
        with pytest.raises(ValueError):
            count_layouts_oracle(3, 0)


class TestEnumerate:
    def test_first_is_fully_shared(self):
        layouts = enumerate_layouts(3, 4)
        assert layouts[0] == initial_layout(3, 4)

    def test_all_valid_and_distinct(self):
        layouts = enumerate_layouts(4, 3)
        keys = [canonicalize(lay) for lay in layouts]
        assert len(set(keys)) == len(keys)
        assert all(is_valid(lay) for lay in layouts)

    def test_deterministic_order(self):
        assert enumerate_layouts(4, 4) == enumerate_layouts(4, 4)

    def test_matches_chain_oracle(self):
        for tasks in range(1, 5):
            for points in range(1, 5):
                mine = {canonicalize(lay) for lay in enumerate_layouts(tasks, points)}
                assert mine == oracle_chain_keys(tasks, points), (tasks, points)

    def test_closed_under_cuts(self):
        layouts = enumerate_layouts(3, 4)
        keys = {canonicalize(lay) for lay in layouts}
        for lay in layouts:
            for cut in available_cuts(lay):
                assert canonicalize(apply_cut(lay, cut)) in keys

    def test_cap_rejection(self):
        with pytest.raises(ValueError, match="cap"):
            enumerate_layouts(3, 5, cap=50)

    def test_size_bounds(self):
        with pytest.raises(ValueError):
            enumerate_layouts(0, 3)
        with pytest.raises(ValueError):
            enumerate_layouts(3, 0)
        with pytest.raises(ValueError):
            enumerate_layouts(17, 1)


class TestChainOracle:
    def test_partition_counts_are_bell(self):
        for n, bell in BELL.items():
            assert len(set_partitions(n)) == bell

    def test_refines_examples(self):
        top = (frozenset({0, 1, 2}),)
        bottom = (frozenset({0}), frozenset({1}), frozenset({2}))
        mid = (frozenset({0, 1}), frozenset({2}))
        assert refines(bottom, top)
        assert refines(mid, top)
        assert refines(mid, mid)
        assert not refines(top, mid)

    def test_task_bound(self):
        with pytest.raises(ValueError):
            oracle_chain_keys(9, 2)


class TestTwoTaskSpaceSize:
    def test_three_tasks_five_points(self):
        assert two_task_space_size(3, 5) == 18

    def test_five_tasks_five_points(self):
        assert two_task_space_size(5, 5) == 60

    def test_degenerate(self):
        assert two_task_space_size(2, 0) == 1

    def test_rejects_single_task(self):
        with pytest.raises(ValueError):
            two_task_space_size(1, 5)
