"""Immutable undirected simple graphs and the primitive operations on them."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "Graph",
    "WeightedPairGraph",
    "induced_subgraph",
    "connected_components",
    "threshold_graph",
]


def _canonical_pairs(pairs, node_count: int) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= node_count):
        raise ValueError(f"edge endpoint outside 0..{node_count - 1}")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    return np.stack([lo, hi], axis=1)


class Graph:
    """Undirected simple graph over the dense node ids ``0..n-1``.

    Edges are stored once per unordered pair (``u < v``, lexicographically
    sorted) and adjacency is materialized in CSR form so neighbour scans cost
    O(degree). Instances are read-only.

    Parameters
    ----------
    node_count : int
        Number of nodes ``n``.
    edges : iterable of (int, int)
        Unordered pairs. Orientation duplicates are merged; self-loops are
        rejected.
    original_ids : sequence of int, optional
        Ids of the nodes in a parent graph, kept by :func:`induced_subgraph`.
    """

    __slots__ = ("_n", "_edges", "_indptr", "_indices", "_original_ids", "_adj_lists")

    def __init__(self, node_count: int, edges: Iterable = (), original_ids: Sequence[int] | None = None):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        e = _canonical_pairs(list(edges) if not isinstance(edges, np.ndarray) else edges, node_count)
        if e.size and np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        e = np.unique(e, axis=0) if e.size else np.empty((0, 2), dtype=np.int64)
        self._n = int(node_count)
        self._edges = e
        both = np.concatenate([e, e[:, ::-1]]) if len(e) else e
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.empty(0, dtype=np.int64)
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=self._n) if len(both) else np.zeros(self._n, dtype=np.int64)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._indices = both[:, 1].astype(np.int64) if len(both) else np.empty(0, dtype=np.int64)
        if original_ids is None:
            self._original_ids = np.arange(self._n, dtype=np.int64)
        else:
            self._original_ids = np.asarray(original_ids, dtype=np.int64)
            if len(self._original_ids) != self._n:
                raise ValueError("original_ids must have one entry per node")
        for a in (self._edges, self._indptr, self._indices, self._original_ids):
            a.setflags(write=False)
        self._adj_lists = None

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of ``(u, v)`` with ``u < v``."""
        return self._edges

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    @property
    def original_ids(self) -> np.ndarray:
        return self._original_ids

    def neighbors(self, v: int) -> np.ndarray:
        self._check_node(v)
        return self._indices[self._indptr[v] : self._indptr[v + 1]]

    def adjacency_lists(self) -> list[list[int]]:
        """Plain-Python neighbour lists, cached; used by the pure-Python detectors."""
        if self._adj_lists is None:
            ind = self._indices.tolist()
            ptr = self._indptr.tolist()
            self._adj_lists = [ind[ptr[i] : ptr[i + 1]] for i in range(self._n)]
        return self._adj_lists

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def adjacency_matrix(self) -> sparse.csr_matrix:
        data = np.ones(len(self._indices), dtype=np.int64)
        return sparse.csr_matrix((data, self._indices, self._indptr), shape=(self._n, self._n))

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self._n:
            raise ValueError(f"node {v} not in graph with {self._n} nodes")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.edge_count})"


class WeightedPairGraph:
    """Unordered node pairs carrying a weight in ``[0, 1]``.

    Pairs are canonicalized to ``u < v`` and must be unique.
    """

    __slots__ = ("_n", "_pairs", "_weights")

    def __init__(self, node_count: int, pairs, weights):
        p = _canonical_pairs(pairs, node_count)
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(w) != len(p):
            raise ValueError("pairs and weights differ in length")
        if len(w) and (np.any(w < 0.0) or np.any(w > 1.0) or np.any(np.isnan(w))):
            raise ValueError("weights must lie in [0, 1]")
        if len(p) and np.any(p[:, 0] == p[:, 1]):
            raise ValueError("a pair must join two distinct nodes")
        if len(p):
            order = np.lexsort((p[:, 1], p[:, 0]))
            p, w = p[order], w[order]
            if np.any(np.all(p[1:] == p[:-1], axis=1)):
                raise ValueError("duplicate pair")
        self._n = int(node_count)
        self._pairs = p
        self._weights = w
        p.setflags(write=False)
        w.setflags(write=False)

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def pairs(self) -> np.ndarray:
        return self._pairs

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def __len__(self) -> int:
        return len(self._weights)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self._n}, pairs={len(self)})"


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    """Subgraph on ``nodes`` with every edge of ``g`` joining two of them.

    Nodes are renumbered ``0..len(nodes)-1`` in increasing original-id order;
    the result's ``original_ids`` maps back to ``g``'s ids.
    """
    sel = np.unique(np.fromiter(nodes, dtype=np.int64))
    if sel.size and (sel[0] < 0 or sel[-1] >= g.node_count):
        raise ValueError("unknown node id in induced_subgraph")
    remap = np.full(g.node_count, -1, dtype=np.int64)
    remap[sel] = np.arange(len(sel))
    e = g.edges
    keep = (remap[e[:, 0]] >= 0) & (remap[e[:, 1]] >= 0) if len(e) else np.zeros(0, dtype=bool)
    sub = remap[e[keep]] if len(e) else np.empty((0, 2), dtype=np.int64)
    return Graph(len(sel), sub, original_ids=g.original_ids[sel])


def connected_components(g: Graph) -> list[frozenset[int]]:
    """Maximal connected node sets, ordered by their smallest node id."""
    n = g.node_count
    if n == 0:
        return []
    _, labels = csgraph.connected_components(g.adjacency_matrix(), directed=False)
    return _group_labels(labels)


def _group_labels(labels: np.ndarray) -> list[frozenset[int]]:
    # Relabel in order of first appearance so ordering is by minimum member id.
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    canon = rank[inverse]
    order = np.argsort(canon, kind="stable")
    bounds = np.cumsum(np.bincount(canon))
    groups = np.split(order, bounds[:-1])
    return [frozenset(grp.tolist()) for grp in groups]


def threshold_graph(w: WeightedPairGraph, beta: float) -> Graph:
    """Keep the pairs whose weight is at least ``beta`` (inclusive) as edges."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    return Graph(w.node_count, w.pairs[w.weights >= beta])

