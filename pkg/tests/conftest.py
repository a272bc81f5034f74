import random

import numpy as np
import pytest
from hypothesis import strategies as st

from rcccd.communities import Cover, Ensemble, Partition
from rcccd.graph import Graph

# criterion number -> (passed, detail); filled by the acceptance tests
CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        passed, detail = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def criterion():
    def record(num: int, passed: bool, detail: str):
        CRITERIA[num] = (bool(passed), detail)
        print(f"criterion {num}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


@st.composite
def graphs(draw, min_nodes=1, max_nodes=12):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return Graph(n, chosen)


@st.composite
def partitions(draw, n, max_blocks=5):
    labels = draw(st.lists(st.integers(0, max_blocks - 1), min_size=n, max_size=n))
    return Partition.from_labels(labels)


@st.composite
def covers(draw, n, max_blocks=5):
    """Covers over ``n`` nodes: a partition plus a few extra memberships."""
    base = draw(partitions(n, max_blocks))
    comms = [set(c) for c in base]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, len(comms) - 1)), max_size=3))
    for v, c in extra:
        comms[c].add(v)
    return Cover(comms, n)


def random_instance(rng: random.Random, max_n=12, max_blocks=5, max_covers=4, overlap_prob=0.3):
    """Graph and ensemble whose covers coarsen (and sometimes overlap) a planted partition."""
    n = rng.randint(2, max_n)
    blocks = rng.randint(1, min(max_blocks, n))
    label = [rng.randrange(blocks) for _ in range(n)]
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.random() < (0.7 if label[u] == label[v] else 0.15)]
    g = Graph(n, edges)
    covers_ = []
    for _ in range(rng.randint(1, max_covers)):
        merge = [rng.randrange(blocks) for _ in range(blocks)]
        comms: dict[int, set[int]] = {}
        for v in range(n):
            comms.setdefault(merge[label[v]], set()).add(v)
        comms = list(comms.values())
        if len(comms) > 1 and rng.random() < overlap_prob:
            v = rng.randrange(n)
            target = rng.randrange(len(comms))
            comms[target].add(v)
        covers_.append(Cover(comms, n))
    return g, Ensemble(covers_)


@pytest.fixture(scope="session")
def small_lfr():
    from rcccd.benchgen import SMALL_CONFIG, generate_lfr

    return generate_lfr(SMALL_CONFIG.replace(mu=0.1, seed=1))


@pytest.fixture
def two_triangles():
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def as_sets(cover):
    return [set(c) for c in cover]


def np_rng(seed=0):
    return np.random.default_rng(seed)
