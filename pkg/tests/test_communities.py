import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcccd.communities import (Cover, Ensemble, Partition, RoughCommunity, RoughCover, crisp_projection, membership,
                               overlapping_nodes)

from conftest import covers


def test_cover_rejects_empty_and_out_of_range():
    with pytest.raises(ValueError):
        Cover([[0], []], 3)
    with pytest.raises(ValueError):
        Cover([[0, 3]], 3)


def test_partition_validation():
    with pytest.raises(ValueError, match="more than one"):
        Partition([[0, 1], [1, 2]], 3)
    with pytest.raises(ValueError, match="no community"):
        Partition([[0, 1]], 3)


def test_partition_from_labels_orders_by_first_occurrence():
    p = Partition.from_labels([7, 3, 7, 1])
    assert p.communities == (frozenset({0, 2}), frozenset({1}), frozenset({3}))
    assert p.labels().tolist() == [0, 1, 0, 2]


def test_membership_examples():
    assert membership(Partition([[0, 1], [2]], 3), 2) == {1}
    assert membership(Cover([[0, 1], [1, 2]], 3), 1) == {0, 1}
    with pytest.raises(ValueError):
        membership(Partition([[0]], 1), 1)


def test_ensemble_requires_uniform_node_count():
    with pytest.raises(ValueError):
        Ensemble([])
    with pytest.raises(ValueError):
        Ensemble([Partition([[0]], 1), Partition([[0, 1]], 2)])


def test_rough_community_requires_lower_inside_upper():
    with pytest.raises(ValueError):
        RoughCommunity({0, 1}, {0})


def test_rough_cover_invariants():
    with pytest.raises(ValueError, match="overlap"):
        RoughCover([RoughCommunity({0}, {0}), RoughCommunity({0}, {0, 1})], 2)
    with pytest.raises(ValueError, match="cover every node"):
        RoughCover([RoughCommunity({0}, {0})], 2)
    RoughCover([RoughCommunity({0}, {0})], 2, require_total=False)


def test_crisp_projection_without_boundary_is_partition():
    rc = RoughCover([RoughCommunity({0, 1, 2}, {0, 1, 2}), RoughCommunity({3, 4, 5}, {3, 4, 5})], 6)
    proj = crisp_projection(rc)
    assert isinstance(proj, Partition)
    assert list(proj) == rc.lowers


def test_crisp_projection_duplicates_boundary_granule():
    rc = RoughCover([RoughCommunity({0, 1}, {0, 1, 4, 5}), RoughCommunity({2, 3}, {2, 3, 4, 5})], 6)
    proj = crisp_projection(rc)
    assert not isinstance(proj, Partition)
    counts = proj.membership_counts()
    assert counts[4] == counts[5] == 2


def test_overlapping_nodes_examples():
    disjoint = RoughCover([RoughCommunity({0}, {0}), RoughCommunity({1}, {1})], 2)
    assert overlapping_nodes(disjoint) == frozenset()
    triple = RoughCover([RoughCommunity({0}, {0, 3}), RoughCommunity({1}, {1, 3}), RoughCommunity({2}, {2, 3})], 4)
    assert overlapping_nodes(triple) == {3}


@given(st.integers(1, 10).flatmap(lambda n: covers(n)))
@settings(max_examples=150, deadline=None)
def test_membership_is_inverse_of_listing(c):
    for v in range(c.node_count):
        assert membership(c, v) == {i for i, comm in enumerate(c) if v in comm}


@given(st.integers(1, 10).flatmap(lambda n: covers(n)), st.data())
@settings(max_examples=100, deadline=None)
def test_projection_restricted_to_core_is_disjoint(c, data):
    # Build a rough cover: lowers from a partition, uppers widened by extra boundary nodes.
    n = c.node_count
    labels = [min(membership(c, v)) if membership(c, v) else 0 for v in range(n)]
    base = Partition.from_labels(labels)
    uppers = [set(b) for b in base]
    for v in data.draw(st.lists(st.integers(0, n - 1), max_size=3)):
        uppers[data.draw(st.integers(0, len(uppers) - 1))].add(v)
    boundary = set()
    for i, up in enumerate(uppers):
        boundary |= up - base[i]
    lowers = [set(b) - boundary for b in base]
    rc = RoughCover([RoughCommunity(lo, up) for lo, up in zip(lowers, uppers)], n)
    proj = crisp_projection(rc)
    core = set(range(n)) - {v for v in range(n) if proj.membership_counts()[v] > 1}
    seen = set()
    for comm in proj:
        part = comm & core
        assert not (part & seen)
        seen |= part
    # brute-force membership scan agrees with overlapping_nodes
    assert overlapping_nodes(rc) == {v for v in range(n) if sum(v in u for u in rc.uppers) >= 2}
