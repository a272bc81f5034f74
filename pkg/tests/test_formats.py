import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcccd.communities import Cover, Partition, RoughCommunity, RoughCover
from rcccd.formats import (atomic_write, read_cover, read_edge_list, read_lfr, read_rough_cover, write_cover,
                           write_edge_list, write_lfr, write_rough_cover)
from rcccd.graph import Graph

from conftest import covers, graphs


def test_edge_list_round_trip(tmp_path, two_triangles):
    for base in (0, 1):
        f = tmp_path / f"g{base}.txt"
        write_edge_list(f, two_triangles, index_base=base)
        assert read_edge_list(f) == two_triangles


def test_edge_list_merges_both_orientations(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("0 1\n1 0\n1 2 # trailing comment\n\n# comment\n2 1\n")
    g = read_edge_list(f)
    assert g.edge_count == 2 and g.node_count == 3


def test_edge_list_headers_and_overrides(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("# index-base: 1\n# nodes: 5\n1 2\n")
    g = read_edge_list(f)
    assert g.node_count == 5 and g.edges.tolist() == [[0, 1]]
    assert read_edge_list(f, index_base=0, node_count=3).edges.tolist() == [[1, 2]]


@pytest.mark.parametrize("body, match", [("0 0\n", "self-loop"), ("0 x\n", "integer"), ("3\n", "expected"),
                                         ("# index-base: 1\n0 1\n", "below")])
def test_edge_list_errors(tmp_path, body, match):
    f = tmp_path / "g.txt"
    f.write_text(body)
    with pytest.raises(ValueError, match=match):
        read_edge_list(f)


def test_edge_list_node_count_too_small(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("0 4\n")
    with pytest.raises(ValueError, match="exceeds"):
        read_edge_list(f, node_count=3)


def test_cover_round_trip_returns_partition_when_possible(tmp_path):
    p = Partition([[0, 2], [1, 3]], 4)
    write_cover(tmp_path / "p.txt", p)
    back = read_cover(tmp_path / "p.txt", 4)
    assert isinstance(back, Partition) and back == p
    c = Cover([[0, 1], [1, 2, 3]], 4)
    write_cover(tmp_path / "c.txt", c)
    back = read_cover(tmp_path / "c.txt", 4)
    assert not isinstance(back, Partition) and set(back.communities) == set(c.communities)


def test_lfr_round_trip(tmp_path, small_lfr):
    write_lfr(tmp_path, small_lfr.graph, small_lfr.ground_truth)
    g, gt = read_lfr(tmp_path)
    assert g == small_lfr.graph
    assert set(gt.communities) == set(small_lfr.ground_truth.communities)
    first = (tmp_path / "network.dat").read_text().splitlines()[0]
    assert "\t" in first and not first.startswith("0")


def test_lfr_community_file_is_detected_by_name(tmp_path):
    (tmp_path / "community.dat").write_text("1\t1\n2\t1 2\n3\t2\n")
    c = read_cover(tmp_path / "community.dat", 3)
    assert set(c.communities) == {frozenset({0, 1}), frozenset({1, 2})}


def test_cover_errors(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("0 5\n")
    with pytest.raises(ValueError):
        read_cover(f, 3)
    with pytest.raises(ValueError):
        read_cover(f, 6, fmt="csv")


def test_rough_cover_round_trip(tmp_path):
    rc = RoughCover([RoughCommunity({0, 1}, {0, 1, 4}), RoughCommunity({2, 3}, {2, 3, 4})], 5,
                    params={"beta": 0.75, "gamma": 0.8, "k": 2})
    f = tmp_path / "rc.json"
    write_rough_cover(f, rc)
    back = read_rough_cover(f)
    assert [(c.lower, c.upper) for c in back] == [(c.lower, c.upper) for c in rc]
    assert back.params["gamma"] == 0.8
    assert f.read_text().count("\n") >= 4


def test_rough_cover_malformed(tmp_path):
    f = tmp_path / "rc.json"
    f.write_text('{"communities": []}')
    with pytest.raises(ValueError, match="malformed"):
        read_rough_cover(f)
    f.write_text("{")
    with pytest.raises(ValueError, match="JSON"):
        read_rough_cover(f)


def test_atomic_write_leaves_old_file_on_failure(tmp_path, monkeypatch):
    f = tmp_path / "out.txt"
    atomic_write(f, "old\n")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        atomic_write(f, "new\n")
    monkeypatch.undo()
    assert f.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


@given(graphs(min_nodes=1))
@settings(max_examples=40, deadline=None)
def test_edge_list_round_trip_property(tmp_path_factory, g):
    f = tmp_path_factory.mktemp("el") / "g.txt"
    write_edge_list(f, g)
    assert read_edge_list(f) == g


@given(st.integers(1, 9).flatmap(lambda n: covers(n)))
@settings(max_examples=40, deadline=None)
def test_lfr_cover_round_trip_property(tmp_path_factory, c):
    if any(not m for m in c.memberships()):
        return  # LFR rows need at least one community per node
    d = tmp_path_factory.mktemp("lfr")
    write_lfr(d, Graph(c.node_count), c)
    _, back = read_lfr(d)
    assert set(back.communities) == set(c.communities)
