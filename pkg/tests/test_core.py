from __future__ import annotations

import functools

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from socsched.core import (
    Assignment,
    MissingParentError,
    PeTimeline,
    ScheduleTable,
    earliest_start,
    edp_weight,
    eft_insertion,
    empty_timelines,
    exec_on,
    rank_order,
    tie_key,
    upward_rank,
    upward_rank_edp,
    validate_schedule,
)
from socsched.model import AppDag, Edge, Platform, TaskNode, canonical_dag, canonical_platform, mean_exec_time

from .conftest import instances

# upward ranks of the ten-task example, computed by hand from its cost tables
CANONICAL_RANKS = {
    1: 108.0, 2: 77.0, 3: 80.0, 4: 80.0, 5: 69.0,
    6: 63 + 1 / 3, 7: 42 + 2 / 3, 8: 35 + 2 / 3, 9: 44 + 1 / 3, 10: 14 + 2 / 3,
}


def _rank_oracle(dag: AppDag, platform: Platform, weight=mean_exec_time) -> dict:
    """Plain recursive definition, independent of the topological sweep."""
    node = dag.task_map
    succ = {t.id: [(e.dst, e.data_volume) for e in dag.edges if e.src == t.id] for t in dag.tasks}
    bw = platform.mean_bandwidth if platform.n_pes > 1 else float("inf")

    @functools.lru_cache(maxsize=None)
    def r(tid):
        tail = [v / bw + r(s) for s, v in succ[tid]]
        return weight(node[tid]) + (max(tail) if tail else 0.0)

    return {t.id: r(t.id) for t in dag.tasks}


class TestRanks:
    def test_canonical_values(self):
        ranks = upward_rank(canonical_dag(), canonical_platform())
        for tid, want in CANONICAL_RANKS.items():
            assert ranks[tid] == pytest.approx(want)

    def test_canonical_order(self):
        order = rank_order(upward_rank(canonical_dag(), canonical_platform()))
        # 3 and 4 tie at 80; the smaller id goes first
        assert order == [1, 3, 4, 2, 5, 6, 9, 7, 8, 10]

    @given(instances(max_pes=4, max_tasks=10, integral=False))
    def test_matches_recursive_oracle(self, inst):
        plat, dag = inst
        got = upward_rank(dag, plat)
        want = _rank_oracle(dag, plat)
        assert got == pytest.approx(want)

    @given(instances(max_pes=4, max_tasks=10, integral=False))
    def test_edp_matches_oracle(self, inst):
        plat, dag = inst
        assert upward_rank_edp(dag, plat) == pytest.approx(_rank_oracle(dag, plat, edp_weight))

    @given(instances(max_pes=4, max_tasks=10))
    def test_parent_outranks_child(self, inst):
        plat, dag = inst
        ranks = upward_rank(dag, plat)
        for e in dag.edges:
            assert ranks[e.src] > ranks[e.dst]
        # so rank order is a topological order
        pos = {t: i for i, t in enumerate(rank_order(ranks))}
        assert all(pos[e.src] < pos[e.dst] for e in dag.edges)

    def test_edp_weight(self):
        t = TaskNode(0, "t", (2.0, 4.0), (1.0, 3.0))
        assert edp_weight(t) == 9.0 * 2.0

    def test_tie_key(self):
        assert tie_key((3, 1)) < tie_key((0, 2))
        assert tie_key(5) == (5, 0)

    def test_rank_order_tolerance(self):
        assert rank_order({2: 1.0, 1: 1.0 - 1e-12, 0: 0.5}) == [1, 2, 0]


class TestSlots:
    def test_insertion_fills_gap(self):
        tl = PeTimeline(0)
        tl.insert(0, 10, "a")
        tl.insert(30, 40, "b")
        assert eft_insertion(5, tl, 0) == (10, 15)
        assert eft_insertion(20, tl, 0) == (10, 30)
        assert eft_insertion(21, tl, 0) == (40, 61)
        assert eft_insertion(5, tl, 35) == (40, 45)
        assert eft_insertion(5, tl, 50) == (50, 55)
        assert tl.busy == [(0, 10, "a"), (30, 40, "b")]

    @given(
        st.lists(st.tuples(st.integers(0, 100), st.integers(1, 15)), max_size=12),
        st.integers(1, 30),
        st.integers(0, 120),
    )
    def test_matches_exhaustive_scan(self, raw, duration, ready):
        tl = PeTimeline(0)
        for s, d in raw:
            if all(s + d <= a or s >= b for a, b, _ in tl.busy):
                tl.insert(s, s + d, len(tl.busy))
        # exhaustive scan over every integer start time
        t = ready
        while any(t < b and t + duration > a for a, b, _ in tl.busy):
            t += 1
        assert eft_insertion(duration, tl, ready) == (t, t + duration)

    def test_earliest_start(self):
        plat = Platform.uniform(2, 2.0)
        tab = ScheduleTable()
        tab.add(Assignment("a", 0, 0, 10))
        preds = [("a", 8.0), ("b", 4.0)]
        assert earliest_start(preds, 0, tab, {"b": (12.0, 1)}, plat) == 14.0
        assert earliest_start(preds, 1, tab, {"b": (12.0, 1)}, plat) == 14.0
        assert earliest_start([], 1, tab, {}, plat, now=3.0) == 3.0
        with pytest.raises(MissingParentError):
            earliest_start([("zz", 1.0)], 0, tab, {}, plat)

    def test_exec_on_unsupported(self):
        with pytest.raises(ValueError):
            exec_on(TaskNode(0, "t", (1.0, None), (1.0, None)), 1)


def _two_task():
    t = (TaskNode(0, "a", (3.0, 4.0), (1.0, 1.0)), TaskNode(1, "b", (2.0, None), (1.0, None)))
    return AppDag("two", t, (Edge(0, 1, 4.0),)), Platform.uniform(2, 2.0)


def _kinds(violations):
    return sorted({v.kind for v in violations})


class TestValidate:
    def test_valid(self):
        dag, plat = _two_task()
        tab = ScheduleTable()
        tab.add(Assignment(0, 1, 0, 4))
        tab.add(Assignment(1, 0, 6, 8))
        assert validate_schedule(tab, [dag], plat) == []

    def test_precedence_counts_comm(self):
        dag, plat = _two_task()
        tab = ScheduleTable()
        tab.add(Assignment(0, 1, 0, 4))
        tab.add(Assignment(1, 0, 5, 7))
        assert _kinds(validate_schedule(tab, [dag], plat)) == ["precedence"]

    def test_unsupported_duration_unassigned_unknown(self):
        dag, plat = _two_task()
        tab = ScheduleTable()
        tab.add(Assignment(0, 0, 0, 5))
        tab.add(Assignment(9, 1, 0, 1))
        assert _kinds(validate_schedule(tab, [dag], plat)) == ["duration", "unassigned", "unknown"]
        tab = ScheduleTable()
        tab.add(Assignment(0, 0, 0, 3))
        tab.add(Assignment(1, 1, 5, 7))
        assert _kinds(validate_schedule(tab, [dag], plat)) == ["unsupported"]

    def test_overlap_with_running(self):
        dag, plat = _two_task()
        tab = ScheduleTable()
        tab.add(Assignment(0, 0, 0, 3))
        tab.add(Assignment(1, 0, 3, 5))
        running = [Assignment("x", 0, 4, 6)]
        assert _kinds(validate_schedule(tab, [dag], plat, running=running)) == ["overlap"]

    def test_past_and_dynamic_dep_cycle(self):
        a = TaskNode(0, "a", (1.0,), (1.0,))
        b = TaskNode(1, "b", (1.0,), (1.0,))
        dag = AppDag("p", (a, b), (Edge(0, 1),))
        plat = Platform.uniform(1)
        tab = ScheduleTable()
        tab.add(Assignment(0, 0, 0, 1))
        tab.add(Assignment(1, 0, 1, 2))
        assert _kinds(validate_schedule(tab, [dag], plat, now=0.5)) == ["past"]
        tab.dynamic_deps = {(1, 0)}
        assert _kinds(validate_schedule(tab, [dag], plat)) == ["cycle", "dynamic_dep"]

    def test_partial_dag_checks_finished_parents(self):
        dag = canonical_dag().with_instance(2)
        part = dag.subgraph([2]).with_instance(2)
        plat = canonical_platform()
        finished = {(2, 1): (9.0, 2)}  # T1 ran on P2; its 18 units of data reach P1 at 27

        def check(start, **kw):
            tab = ScheduleTable()
            tab.add(Assignment((2, 2), 1, start, start + 19))
            return _kinds(validate_schedule(tab, [part], plat, parent_finish=finished, full_dags={2: dag}, **kw))

        assert check(27) == []
        assert check(26) == ["precedence"]
        assert check(27, now=28) == ["past"]
        # without the full DAG the finished parent is invisible
        tab = ScheduleTable()
        tab.add(Assignment((2, 2), 1, 0, 19))
        assert validate_schedule(tab, [part], plat) == []

    def test_empty_timelines(self):
        assert sorted(empty_timelines(canonical_platform())) == [0, 1, 2]


@given(instances(max_pes=3, max_tasks=8))
def test_makespan_definition(inst):
    plat, dag = inst
    assume(len(dag.tasks) >= 1)
    tab = ScheduleTable()
    t = 5.0
    for tid in dag.topo_order:
        d = exec_on(dag.task_map[tid], 0)
        tab.add(Assignment(tid, 0, t, t + d))
        t += d
    assert tab.makespan == pytest.approx(t - 5.0)
    assert tab.finish == t


def test_timeline_copy_on_write():
    a = PeTimeline(0)
    a.insert(0, 5, "x")
    b = a.copy()
    b.insert(5, 6, "y")
    assert a.busy == [(0, 5, "x")]
    a.insert(10, 12, "z")
    assert b.busy == [(0, 5, "x"), (5, 6, "y")]
    c = a.copy()
    c.remove(0, 5, "x")
    assert a.busy == [(0, 5, "x"), (10, 12, "z")] and c.busy == [(10, 12, "z")]
    assert a == PeTimeline(0, [(0, 5, "x"), (10, 12, "z")])
