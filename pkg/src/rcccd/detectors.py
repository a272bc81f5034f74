"""Seeded base community detectors used to build consensus ensembles.

Three detectors are provided: asynchronous label propagation, Louvain and
Clauset-Newman-Moore greedy modularity agglomeration. All return
:class:`~rcccd.communities.Partition` objects whose communities are ordered by
smallest member id, so equal inputs give equal outputs.
"""

from __future__ import annotations

import heapq
import random
import warnings
from dataclasses import dataclass

import numpy as np

from .communities import Partition
from .graph import Graph

__all__ = [
    "modularity",
    "label_propagation",
    "louvain",
    "greedy_modularity",
    "LPAInfo",
    "NonConvergenceWarning",
    "DETECTORS",
]

LPA_MAX_SWEEPS = 100


class NonConvergenceWarning(RuntimeWarning):
    """Label propagation hit its sweep cap before every label was stable."""


@dataclass(frozen=True)
class LPAInfo:
    converged: bool
    sweeps: int


def _check_partition_of(g: Graph, p: Partition) -> None:
    if not isinstance(p, Partition):
        p = Partition(p.communities, p.node_count)
    if p.node_count != g.node_count:
        raise ValueError("partition and graph disagree on node_count")


def modularity(g: Graph, p: Partition) -> float:
    """Newman-Girvan modularity ``sum_c in_c/m - (tot_c/2m)^2``.

    ``in_c`` counts edges with both ends in community ``c`` and ``tot_c`` is
    the degree sum of its members.
    """
    _check_partition_of(g, p)
    m = g.edge_count
    if m == 0:
        raise ValueError("modularity is undefined for a graph without edges")
    labels = p.labels() if isinstance(p, Partition) else Partition(p.communities, p.node_count).labels()
    k = len(p)
    e = g.edges
    same = labels[e[:, 0]] == labels[e[:, 1]]
    in_c = np.bincount(labels[e[same, 0]], minlength=k)
    tot = np.bincount(labels, weights=g.degrees, minlength=k)
    return float(np.sum(in_c / m - (tot / (2.0 * m)) ** 2))


def _from_labels(labels) -> Partition:
    return Partition.from_labels(labels)


def label_propagation(g: Graph, seed=None, max_sweeps: int = LPA_MAX_SWEEPS, full_output: bool = False):
    """Asynchronous label propagation.

    Each sweep visits the nodes in a fresh seeded random order; a node takes
    the label most frequent among its neighbours, drawing uniformly among
    tied labels. Propagation stops once every node holds one of its
    neighbourhood's most frequent labels, or after ``max_sweeps`` sweeps, in
    which case a :class:`NonConvergenceWarning` is emitted.

    With ``full_output=True`` returns ``(partition, LPAInfo)``.
    """
    n = g.node_count
    if n == 0:
        raise ValueError("label propagation needs a nonempty graph")
    rng = random.Random(seed)
    adj = g.adjacency_lists()
    labels = list(range(n))
    order = [v for v in range(n) if adj[v]]
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        rng.shuffle(order)
        for v in order:
            counts: dict[int, int] = {}
            for u in adj[v]:
                lab = labels[u]
                counts[lab] = counts.get(lab, 0) + 1
            best = max(counts.values())
            tied = [lab for lab, c in counts.items() if c == best]
            labels[v] = tied[0] if len(tied) == 1 else tied[rng.randrange(len(tied))]
        if _lpa_stable(adj, labels, order):
            converged = True
            break
    if not converged:
        warnings.warn(f"label propagation did not converge in {max_sweeps} sweeps", NonConvergenceWarning,
                      stacklevel=2)
    part = _from_labels(labels)
    if full_output:
        return part, LPAInfo(converged=converged, sweeps=sweeps)
    return part


def _lpa_stable(adj, labels, nodes) -> bool:
    for v in nodes:
        counts: dict[int, int] = {}
        for u in adj[v]:
            lab = labels[u]
            counts[lab] = counts.get(lab, 0) + 1
        if counts.get(labels[v], 0) != max(counts.values()):
            return False
    return True


def louvain(g: Graph, seed=None, full_output: bool = False):
    """Two-phase Louvain modularity optimisation.

    Local moving visits nodes in a seeded random order and moves a node only
    on a strictly positive gain; the graph is then aggregated and the process
    repeats until a level produces no move. The final level is expanded back
    to the original nodes.

    With ``full_output=True`` returns ``(partition, levels)`` where
    ``levels`` lists the partition of the original nodes after each level.
    """
    if g.node_count == 0:
        raise ValueError("louvain needs a nonempty graph")
    if g.edge_count == 0:
        raise ValueError("louvain is undefined for a graph without edges")
    rng = random.Random(seed)
    # Weighted adjacency of the current level; self-loop weight stores twice the internal weight.
    adj: list[dict[int, float]] = [dict.fromkeys(nb, 1.0) for nb in g.adjacency_lists()]
    node_of = list(range(g.node_count))  # original node -> current-level node
    m2 = 2.0 * g.edge_count
    levels = []
    while True:
        comm, moved = _louvain_level(adj, m2, rng)
        if not moved:
            break
        ids: dict[int, int] = {}
        for c in comm:
            if c not in ids:
                ids[c] = len(ids)
        new_adj: list[dict[int, float]] = [{} for _ in ids]
        for i, nbrs in enumerate(adj):
            ci = ids[comm[i]]
            row = new_adj[ci]
            for j, w in nbrs.items():
                cj = ids[comm[j]]
                row[cj] = row.get(cj, 0.0) + w
        node_of = [ids[comm[x]] for x in node_of]
        adj = new_adj
        levels.append(_from_labels(node_of).canonical())
    part = levels[-1] if levels else _from_labels(node_of).canonical()
    if full_output:
        return part, levels
    return part


def _louvain_level(adj, m2: float, rng: random.Random):
    n = len(adj)
    k = [sum(nbrs.values()) for nbrs in adj]
    comm = list(range(n))
    tot = k[:]
    order = list(range(n))
    rng.shuffle(order)
    moved_any = False
    for _ in range(1000):
        moves = 0
        for i in order:
            ki = k[i]
            ci = comm[i]
            links: dict[int, float] = {}
            for j, w in adj[i].items():
                if j != i:
                    cj = comm[j]
                    links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            best = ci
            best_gain = links.get(ci, 0.0) - tot[ci] * ki / m2
            for c, w in links.items():
                gain = w - tot[c] * ki / m2
                if gain > best_gain + 1e-12:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moves += 1
        if moves == 0:
            break
        moved_any = True
    return comm, moved_any


def greedy_modularity(g: Graph, full_output: bool = False):
    """Clauset-Newman-Moore agglomerative modularity maximisation.

    Starting from singletons, the connected pair of communities with the
    largest modularity gain is merged while that gain is positive. Gains are
    kept as exact integers ``2m*l_ij - d_i*d_j`` (proportional to the gain),
    so ties are exact and resolved by the smallest ``(i, j)`` index pair.
    The merged community keeps the id ``i``.

    With ``full_output=True`` returns ``(partition, merges)`` where
    ``merges`` lists ``(i, j, 2m*l_ij - d_i*d_j)`` in merge order.
    """
    n, m = g.node_count, g.edge_count
    if m == 0:
        raise ValueError("greedy modularity is undefined for a graph without edges")
    two_m = 2 * m
    deg = g.degrees.tolist()
    links: list[dict[int, int] | None] = [dict.fromkeys(nb, 1) for nb in g.adjacency_lists()]
    parent = list(range(n))
    heap = []
    for u, v in g.edges.tolist():
        heap.append((-(two_m - deg[u] * deg[v]), u, v))
    heapq.heapify(heap)
    merges = []
    while heap:
        neg, i, j = heapq.heappop(heap)
        li, lj = links[i], links[j]
        if li is None or lj is None or j not in li:
            continue
        if -neg != two_m * li[j] - deg[i] * deg[j]:
            continue  # stale entry
        if -neg <= 0:
            break
        # Merge j into i.
        del li[j]
        del lj[i]
        for x, w in lj.items():
            li[x] = li.get(x, 0) + w
            lx = links[x]
            lx[i] = lx.get(i, 0) + lx.pop(j)
        links[j] = None
        deg[i] += deg[j]
        parent[j] = i
        merges.append((i, j, -neg))
        for x, w in li.items():
            a, b = (i, x) if i < x else (x, i)
            heapq.heappush(heap, (-(two_m * w - deg[i] * deg[x]), a, b))
    part = _from_labels([_find(parent, v) for v in range(n)])
    if full_output:
        return part, merges
    return part


def _find(parent, v):
    root = v
    while parent[root] != root:
        root = parent[root]
    while parent[v] != root:
        parent[v], v = root, parent[v]
    return root


DETECTORS = {
    "lpa": lambda g, seed: label_propagation(g, seed),
    "louvain": louvain,
    "greedy": lambda g, seed=None: greedy_modularity(g),
}
