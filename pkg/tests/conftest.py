from __future__ import annotations

import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from socsched.model import AppDag, Edge, Platform, TaskNode

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def platforms(draw, min_pes: int = 1, max_pes: int = 3, integral: bool = True) -> Platform:
    z = draw(st.integers(min_pes, max_pes))
    bw_val = st.integers(1, 4).map(float) if integral else st.floats(0.5, 4.0)
    bw = [[0.0] * z for _ in range(z)]
    for i in range(z):
        for j in range(i + 1, z):
            bw[i][j] = bw[j][i] = draw(bw_val)
    idle = tuple(draw(st.sampled_from([0.0, 0.05, 0.1])) for _ in range(z))
    kinds = tuple("cpu" if i == 0 else draw(st.sampled_from(["cpu", "accelerator"])) for i in range(z))
    return Platform.from_dict({
        "name": "random",
        "pes": [{"id": i, "kind": kinds[i], "idle_power": idle[i]} for i in range(z)],
        "link_bandwidth": bw,
    })


@st.composite
def dags(draw, n_pes: int, min_tasks: int = 1, max_tasks: int = 8, integral: bool = True,
         uniform_power: bool = False) -> AppDag:
    """Random DAG: edges only go from lower to higher task id; PE 0 runs everything."""
    n = draw(st.integers(min_tasks, max_tasks))
    cost = st.integers(1, 20).map(float) if integral else st.floats(0.5, 20.0)
    tasks = []
    for i in range(n):
        exec_row, power_row = [], []
        for k in range(n_pes):
            if k == 0 or draw(st.booleans()) or draw(st.booleans()):
                exec_row.append(draw(cost))
                power_row.append(1.0 if uniform_power else draw(st.sampled_from([0.5, 1.0, 2.0, 3.0])))
            else:
                exec_row.append(None)
                power_row.append(None)
        tasks.append(TaskNode(i, f"t{i}", tuple(exec_row), tuple(power_row)))
    edges = []
    for j in range(1, n):
        for i in range(j):
            if draw(st.integers(0, 3)) == 0:
                edges.append(Edge(i, j, float(draw(st.integers(0, 10)))))
    return AppDag("rand", tuple(tasks), tuple(edges))


@st.composite
def instances(draw, max_pes: int = 3, max_tasks: int = 8, integral: bool = True):
    plat = draw(platforms(1, max_pes, integral))
    dag = draw(dags(plat.n_pes, 1, max_tasks, integral))
    return plat, dag


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
