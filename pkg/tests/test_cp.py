from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socsched.core import Assignment, validate_schedule
from socsched.cp import (
    FEASIBLE,
    OPTIMAL,
    CpInstance,
    InstanceTooLarge,
    brute_force_optimal,
    cp_solve,
    span_objective,
)
from socsched.model import AppDag, Platform, canonical_dag, canonical_platform, synth_profile
from socsched.schedulers import FrameView, heft_base

from .conftest import dags, instances, platforms


def _milp_makespan(dag: AppDag, plat: Platform) -> float:
    """Disjunctive MILP of the single-DAG makespan problem (no insertion restriction)."""
    opt = pytest.importorskip("scipy.optimize")
    from scipy.sparse import lil_matrix

    tasks = [t.id for t in dag.tasks]
    n, z = len(tasks), plat.n_pes
    idx = {t: i for i, t in enumerate(tasks)}
    w = [[dag.task_map[t].exec_time[k] for k in range(z)] for t in tasks]
    big = sum(max(x for x in row if x is not None) for row in w) + sum(e.data_volume for e in dag.edges) + 1
    # variables: x[i,k], s[i], C, y[i<j], zz[edge,k]
    xs = {(i, k): v for v, (i, k) in enumerate((i, k) for i in range(n) for k in range(z))}
    s0 = len(xs)
    c_var = s0 + n
    pairs = list(itertools.combinations(range(n), 2))
    y0 = c_var + 1
    edges = [(idx[e.src], idx[e.dst], e.data_volume) for e in dag.edges]
    z0 = y0 + len(pairs)
    nv = z0 + len(edges) * z
    rows, lo, hi = [], [], []

    def add(coefs, lb, ub):
        rows.append(coefs)
        lo.append(lb)
        hi.append(ub)

    for i in range(n):
        add({xs[i, k]: 1 for k in range(z) if w[i][k] is not None}, 1, 1)
        # C >= s_i + dur_i
        add({c_var: 1, s0 + i: -1, **{xs[i, k]: -w[i][k] for k in range(z) if w[i][k] is not None}}, 0, np.inf)
    for ei, (i, j, vol) in enumerate(edges):
        # s_j >= s_i + dur_i + vol * (1 - same_pe)   (unit bandwidth on the test platforms)
        same = {z0 + ei * z + k: vol for k in range(z)}
        add({s0 + j: 1, s0 + i: -1, **{xs[i, k]: -w[i][k] for k in range(z) if w[i][k] is not None}, **same},
            vol, np.inf)
        for k in range(z):
            add({z0 + ei * z + k: 1, xs[i, k]: -1}, -np.inf, 0)
            add({z0 + ei * z + k: 1, xs[j, k]: -1}, -np.inf, 0)
    for p, (i, j) in enumerate(pairs):
        for k in range(z):
            if w[i][k] is None or w[j][k] is None:
                continue
            # y=1: i before j on k; y=0: j before i
            add({s0 + j: 1, s0 + i: -1, xs[i, k]: -w[i][k] - big, xs[j, k]: -big, y0 + p: -big},
                -3 * big, np.inf)
            add({s0 + i: 1, s0 + j: -1, xs[j, k]: -w[j][k] - big, xs[i, k]: -big, y0 + p: big},
                -2 * big, np.inf)
    a = lil_matrix((len(rows), nv))
    for r, coefs in enumerate(rows):
        for v, cval in coefs.items():
            a[r, v] = cval
    cost = np.zeros(nv)
    cost[c_var] = 1
    integrality = np.zeros(nv)
    integrality[:s0] = 1
    integrality[y0:] = 1
    lb = np.zeros(nv)
    ub = np.full(nv, np.inf)
    ub[:s0] = 1
    ub[y0:] = 1
    for (i, k), v in xs.items():
        if w[i][k] is None:
            ub[v] = 0
    res = opt.milp(cost, constraints=opt.LinearConstraint(a.tocsr(), lo, hi), integrality=integrality,
                   bounds=opt.Bounds(lb, ub))
    assert res.success
    return float(res.fun)


class TestCanonical:
    def test_optimal_beats_heft(self):
        sol = cp_solve(CpInstance([canonical_dag()], canonical_platform()), time_limit=60)
        assert sol.status == OPTIMAL
        assert sol.objective == 73
        assert sol.objective <= heft_base(canonical_dag(), canonical_platform()).makespan
        assert validate_schedule(sol.table, [canonical_dag()], canonical_platform()) == []
        assert span_objective(sol.table, [canonical_dag()]) == sol.objective
        # incumbents only ever improve
        objs = [o for _, o in sol.incumbents]
        assert objs == sorted(objs, reverse=True)

    def test_matches_milp(self):
        assert _milp_makespan(canonical_dag(), canonical_platform()) == pytest.approx(73)


def _small(seed: int) -> CpInstance:
    d = synth_profile(6, 3, 2, 0.6, seed, volume=(0.0, 6.0))
    return CpInstance([d], Platform.uniform(2, 1.0))


@pytest.mark.parametrize("seed", range(6))
def test_small_matches_milp(seed):
    inst = _small(seed)
    assert cp_solve(inst, 30).objective == pytest.approx(_milp_makespan(inst.dags[0], inst.platform))


def test_time_limit_returns_incumbent():
    d = synth_profile(40, 6, 3, 0.5, 1)
    plat = Platform.uniform(3, 2.0)
    sol = cp_solve(CpInstance([d], plat), time_limit=0.2)
    assert sol.status == FEASIBLE
    assert validate_schedule(sol.table, [d], plat) == []
    assert sol.objective <= heft_base(d, plat).makespan


def test_max_width_truncates():
    d = synth_profile(8, 3, 3, 0.5, 2)
    plat = Platform.uniform(3)
    sol = cp_solve(CpInstance([d], plat), time_limit=30, max_width=1)
    assert sol.status == FEASIBLE
    assert validate_schedule(sol.table, [d], plat) == []


def test_multi_dag_with_running():
    plat = canonical_platform()
    d = canonical_dag()
    head = heft_base(d.with_instance(0), plat)
    begun = sorted(head.assignments.values(), key=lambda a: a.start)[:3]
    now = begun[-1].start
    running = [a for a in begun if a.end > now]
    finish = {a.task: (a.end, a.pe) for a in begun}
    views = [FrameView(0, d, frozenset(t.id for t in d.tasks if (0, t.id) not in finish)),
             FrameView(1, d.subgraph([1, 2, 3]), frozenset({1, 2, 3}))]
    inst = CpInstance.from_views(views, plat, running, now, finish)
    sol = cp_solve(inst, time_limit=20)
    assert sol.status in (OPTIMAL, FEASIBLE)
    full = {v.instance: v.dag.with_instance(v.instance) for v in views}
    assert validate_schedule(sol.table, inst.dags, plat, running, finish, now, full) == []


def test_empty_instance():
    sol = cp_solve(CpInstance([], canonical_platform()))
    assert (sol.status, sol.objective) == (OPTIMAL, 0.0)


def test_brute_force_size_guard():
    with pytest.raises(InstanceTooLarge):
        brute_force_optimal(CpInstance([canonical_dag()], canonical_platform()), max_tasks=5)


def test_reduction_does_not_change_brute_force():
    for seed in range(4):
        inst = _small(seed)
        assert brute_force_optimal(inst, reduce=True) == brute_force_optimal(inst, reduce=False)


@settings(max_examples=40)
@given(instances(max_pes=3, max_tasks=6))
def test_cp_equals_brute_force(inst):
    plat, dag = inst
    ci = CpInstance([dag], plat)
    sol = cp_solve(ci, time_limit=30)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(brute_force_optimal(ci))
    assert validate_schedule(sol.table, [dag], plat) == []


@settings(max_examples=20)
@given(platforms(1, 3).flatmap(lambda p: st.tuples(st.just(p), dags(p.n_pes, 1, 3), dags(p.n_pes, 1, 3),
                                                   st.integers(0, 20))))
def test_two_dags_equal_brute_force(arg):
    plat, a, b, now = arg
    ci = CpInstance([a.with_instance(0), b.with_instance(1)], plat, now=float(now),
                    running=[Assignment("busy", 0, 0.0, float(now) + 7)])
    sol = cp_solve(ci, time_limit=30)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(brute_force_optimal(ci))
    assert validate_schedule(sol.table, ci.dags, plat, ci.running, now=float(now)) == []
