import numpy as np
import pytest

from ssbm import SignedGraph


def random_signed_graph(rng, n, density=0.4, directed=True, self_loops=False, integer=False):
    """Random signed graph with both signs present (when n allows)."""
    edges = []
    for i in range(n):
        for j in range(n) if directed else range(i, n):
            if i == j and not self_loops:
                continue
            if rng.random() < density:
                w = float(rng.integers(1, 4)) if integer else float(rng.uniform(0.2, 3.0))
                edges.append((i, j, w if rng.random() < 0.6 else -w))
    def force(i, j, w):
        # overwrite whatever edge the pair already holds
        return [e for e in edges if {e[0], e[1]} != {i, j}] + [(i, j, w)]

    if not any(w > 0 for *_, w in edges):
        edges = force(0, 1, 1.0)
    if not any(w < 0 for *_, w in edges) and n > 2:
        edges = force(1, 2, -1.0)
    return SignedGraph.from_edges(n, edges, directed=directed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one acceptance outcome; the lines are echoed in the terminal summary."""
    def _record(criterion: str, ok: bool | None, detail: str) -> bool | None:
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"{status}  {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
