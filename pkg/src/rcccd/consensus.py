"""Rough-clustering consensus of an ensemble of community covers.

The pipeline runs in five stages:

1. :func:`node_similarity` -- co-membership frequency of every node pair
   across the ensemble, each cover's contribution divided by the product of
   the two nodes' membership counts in that cover.
2. :func:`granulate` -- threshold the similarity at ``beta`` and take the
   connected components as granules of indiscernible nodes, largest first.
3. :func:`select_k` -- number of prototype granules, by default the largest
   community count shared by the bulk of the ensemble's covers.
4. :func:`granule_similarity` -- for every (prototype, leftover granule)
   pair, summed node similarity and edge count, each normalised by the
   prototype's maximum over leftovers, and their mean.
5. :func:`assign` -- leftover granules join the lower and upper
   approximation of the single prototype they match at ``gamma``, only the
   upper approximations when they match several, and the best-matching
   prototype when they match none.

:func:`rc_ccd` composes the stages.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse

from .communities import Cover, Ensemble, Partition, RoughCommunity, RoughCover
from .graph import Graph, WeightedPairGraph, connected_components, induced_subgraph, threshold_graph

__all__ = [
    "SimilarityMatrix",
    "Granulation",
    "GranuleSimilarities",
    "node_similarity",
    "granulate",
    "select_k",
    "k_by_community_count",
    "k_by_rank_size",
    "K_STRATEGIES",
    "granule_similarity",
    "assign",
    "boundary_granules",
    "rc_ccd",
    "ORPHAN_POLICIES",
]

ORPHAN_POLICIES = ("argmax", "new-community")


class SimilarityMatrix(WeightedPairGraph):
    """Sparse symmetric node similarity; pairs not stored are 0."""

    __slots__ = ("_csr",)

    def __init__(self, node_count: int, pairs, weights):
        super().__init__(node_count, pairs, weights)
        p, w = self.pairs, self.weights
        sym = sparse.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([p[:, 0], p[:, 1]]), np.concatenate([p[:, 1], p[:, 0]]))),
            shape=(node_count, node_count),
        ).tocsr()
        sym.sort_indices()
        self._csr = sym

    @property
    def matrix(self) -> sparse.csr_matrix:
        """Symmetric CSR matrix with an empty diagonal."""
        return self._csr

    def value(self, u: int, v: int) -> float:
        if u == v:
            raise ValueError("similarity is defined for distinct nodes")
        return float(self._csr[u, v])

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()


def _incidence(cover: Cover) -> sparse.csr_matrix:
    rows = [v for c in cover for v in c]
    cols = [i for i, c in enumerate(cover) for _ in c]
    data = np.ones(len(rows), dtype=np.int64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(cover.node_count, len(cover)))


def node_similarity(ensemble: Ensemble) -> SimilarityMatrix:
    """Pairwise co-membership similarity over an ensemble of covers.

    For a cover ``P`` a pair contributes ``mc / (|CS_u| * |CS_v|)``, where
    ``mc`` counts the communities of ``P`` holding both nodes and ``|CS_x|``
    counts the communities of ``P`` holding ``x``. Contributions are summed
    over covers in order and divided by the ensemble size. Pairs that never
    share a community are not stored.

    For ensembles of partitions the stored value is exactly
    ``co-membership count / p``.
    """
    if not isinstance(ensemble, Ensemble):
        ensemble = Ensemble(ensemble)
    n = ensemble.node_count
    total = sparse.csr_matrix((n, n), dtype=np.float64)
    for cover in ensemble:
        inc = _incidence(cover)
        mc = sparse.triu(inc @ inc.T, k=1).tocoo()
        counts = cover.membership_counts()
        match = mc.data / (counts[mc.row] * counts[mc.col])
        total = total + sparse.csr_matrix((match, (mc.row, mc.col)), shape=(n, n))
    total = total.tocoo()
    # Sum first, divide once, matching the direct formula's evaluation order.
    weights = total.data / len(ensemble)
    keep = weights > 0
    return SimilarityMatrix(n, np.stack([total.row[keep], total.col[keep]], axis=1), weights[keep])


@dataclass(frozen=True)
class Granulation:
    """Disjoint granules covering every node, largest first.

    Ties in size are broken by the smallest member id.
    """

    granules: tuple[frozenset[int], ...]
    beta: float
    graph: Graph

    @property
    def q(self) -> int:
        return len(self.granules)

    def __len__(self) -> int:
        return len(self.granules)

    def __getitem__(self, i) -> frozenset[int]:
        return self.granules[i]

    def subgraph(self, i: int) -> Graph:
        """Subgraph of the original graph induced by granule ``i``."""
        return induced_subgraph(self.graph, self.granules[i])

    def labels(self) -> np.ndarray:
        out = np.empty(self.graph.node_count, dtype=np.int64)
        for i, gr in enumerate(self.granules):
            out[list(gr)] = i
        return out

    def as_partition(self) -> Partition:
        return Partition(self.granules, self.graph.node_count)


def granulate(g: Graph, sim: SimilarityMatrix, beta: float) -> Granulation:
    """Granules are the connected components of the similarity graph kept at ``>= beta``."""
    if sim.node_count != g.node_count:
        raise ValueError("similarity matrix and graph disagree on node_count")
    comps = connected_components(threshold_graph(sim, beta))
    comps.sort(key=lambda c: (-len(c), min(c)))
    return Granulation(tuple(comps), float(beta), g)


def _check_coverage(coverage: float) -> None:
    if not 0.0 < coverage <= 1.0:
        raise ValueError(f"coverage must be in (0, 1], got {coverage}")


def k_by_community_count(ensemble: Ensemble, coverage: float = 0.9) -> int:
    """Number of prototypes from the histogram of per-cover community counts.

    Covers reporting the same number of communities share a bar whose
    height is how many covers reported it. Bars are ranked by height (ties
    favour the larger count), the shortest run of top bars holding at least
    ``coverage`` of the covers is kept, and ``k`` is the largest community
    count among them. Rare counts from outlier runs are thereby ignored,
    while the finest structure that most runs agree on is retained.
    """
    _check_coverage(coverage)
    if not isinstance(ensemble, Ensemble):
        ensemble = Ensemble(ensemble)
    hist = Counter(len(c) for c in ensemble)
    bars = sorted(hist.items(), key=lambda kv: (-kv[1], -kv[0]))
    kept, cum = [], 0
    for count, freq in bars:
        kept.append(count)
        cum += freq
        if cum >= coverage * len(ensemble):
            break
    return max(1, max(kept))


def k_by_rank_size(ensemble: Ensemble, coverage: float = 0.9) -> int:
    """Number of prototypes from the rank-merged community-size histogram.

    Each cover's communities are ranked by decreasing size; bar ``r`` adds
    up the sizes of every cover's ``r``-th largest community. Bars are
    sorted by decreasing total and ``k`` is the shortest prefix whose share
    of the grand total reaches ``coverage``.

    On covers whose communities differ a lot in size this drops the tail of
    small communities, so it tends to return fewer prototypes than there
    are communities.
    """
    _check_coverage(coverage)
    if not isinstance(ensemble, Ensemble):
        ensemble = Ensemble(ensemble)
    bars: list[int] = []
    for cover in ensemble:
        for r, size in enumerate(sorted((len(c) for c in cover), reverse=True)):
            if r == len(bars):
                bars.append(0)
            bars[r] += size
    bars.sort(reverse=True)
    grand = sum(bars)
    if grand == 0:
        return 1
    cum = 0
    for k, b in enumerate(bars, start=1):
        cum += b
        if cum / grand >= coverage:
            return k
    return len(bars)


K_STRATEGIES: dict[str, Callable[[Ensemble, float], int]] = {
    "community-count": k_by_community_count,
    "rank-size": k_by_rank_size,
}


def select_k(ensemble: Ensemble, coverage: float = 0.9, strategy: str = "community-count") -> int:
    """Number of prototype granules, by a named strategy from :data:`K_STRATEGIES`."""
    try:
        fn = K_STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown k strategy {strategy!r}; choose from {sorted(K_STRATEGIES)}") from None
    return fn(ensemble, coverage)


@dataclass(frozen=True)
class GranuleSimilarities:
    """Prototype-by-leftover similarity tables.

    Row ``i`` is prototype granule ``i``; column ``c`` is leftover granule
    ``k + c``. ``raw_node`` holds summed node similarities, ``raw_edge``
    edge counts and ``composite`` the mean of both after dividing each row
    by its maximum (a zero maximum gives a zero term).
    """

    k: int
    raw_node: np.ndarray
    raw_edge: np.ndarray
    composite: np.ndarray

    @property
    def leftover(self) -> range:
        return range(self.k, self.k + self.composite.shape[1])

    def cs(self, i: int, j: int) -> float:
        """Composite similarity of prototype ``i`` and granule ``j`` (global index)."""
        return float(self.composite[i, j - self.k])


def _row_normalise(a: np.ndarray) -> np.ndarray:
    mx = a.max(axis=1, keepdims=True) if a.shape[1] else np.zeros((a.shape[0], 1))
    out = np.zeros_like(a, dtype=np.float64)
    np.divide(a, mx, out=out, where=mx > 0)
    return out


def granule_similarity(gr: Granulation, sim: SimilarityMatrix, g: Graph, k: int) -> GranuleSimilarities:
    """Similarity of each of the first ``k`` granules to every later granule."""
    q = gr.q
    if not 1 <= k <= q:
        raise ValueError(f"k must be in [1, {q}], got {k}")
    n = g.node_count
    lab = gr.labels()
    z = sparse.csr_matrix((np.ones(n), (np.arange(n), lab)), shape=(n, q))
    zp, zl = z[:, :k], z[:, k:]
    node = np.asarray((zp.T @ sim.matrix @ zl).todense(), dtype=np.float64).reshape(k, q - k)
    adj = g.adjacency_matrix().astype(np.float64)
    edge = np.asarray((zp.T @ adj @ zl).todense(), dtype=np.float64).reshape(k, q - k)
    composite = 0.5 * (_row_normalise(node) + _row_normalise(edge))
    for a in (node, edge, composite):
        a.setflags(write=False)
    return GranuleSimilarities(k, node, edge, composite)


def boundary_granules(cs: GranuleSimilarities, gamma: float) -> frozenset[int]:
    """Leftover granules matching two or more prototypes at ``gamma``."""
    hits = (cs.composite >= gamma).sum(axis=0)
    return frozenset((np.flatnonzero(hits > 1) + cs.k).tolist())


def assign(gr: Granulation, cs: GranuleSimilarities, k: int, gamma: float,
           orphan_policy: str = "argmax") -> RoughCover:
    """Attach every leftover granule to the prototypes it resembles.

    With ``T`` the prototypes whose composite similarity is at least
    ``gamma``: several -> the granule joins each of their upper
    approximations; one -> lower and upper of that prototype; none -> lower
    and upper of the best-scoring prototype (smallest index on ties), or a
    community of its own under ``orphan_policy="new-community"``.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    if orphan_policy not in ORPHAN_POLICIES:
        raise ValueError(f"unknown orphan policy {orphan_policy!r}")
    if cs.k != k or not 1 <= k <= gr.q:
        raise ValueError("k disagrees with the granule similarity table")
    lowers = [set(gr[i]) for i in range(k)]
    uppers = [set(gr[i]) for i in range(k)]
    extra = []
    for col, j in enumerate(cs.leftover):
        scores = cs.composite[:, col]
        hits = np.flatnonzero(scores >= gamma)
        if len(hits) > 1:
            for i in hits:
                uppers[i] |= gr[j]
        elif len(hits) == 1:
            lowers[hits[0]] |= gr[j]
            uppers[hits[0]] |= gr[j]
        elif orphan_policy == "argmax":
            i = int(np.argmax(scores))
            lowers[i] |= gr[j]
            uppers[i] |= gr[j]
        else:
            extra.append(RoughCommunity(gr[j], gr[j]))
    comms = [RoughCommunity(lo, up) for lo, up in zip(lowers, uppers)] + extra
    return RoughCover(comms, gr.graph.node_count)


def rc_ccd(g: Graph, ensemble: Ensemble, beta: float = 0.75, gamma: float = 0.8, coverage: float = 0.9,
           k: int | None = None, orphan_policy: str = "argmax",
           k_strategy: str | Callable[[Ensemble, float], int] = "community-count") -> RoughCover:
    """Consensus rough cover of ``g`` from an ensemble of covers.

    ``k`` overrides the prototype count; otherwise ``k_strategy`` (a name
    from :data:`K_STRATEGIES` or a callable ``(ensemble, coverage) -> k``)
    picks it. Either way it is clamped to ``[1, q]``. The chosen
    parameters are recorded in the result's ``params``.
    """
    if not isinstance(ensemble, Ensemble):
        ensemble = Ensemble(ensemble)
    if ensemble.node_count != g.node_count:
        raise ValueError("ensemble and graph disagree on node_count")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    sim = node_similarity(ensemble)
    gr = granulate(g, sim, beta)
    if k is not None:
        k_raw = k
    elif callable(k_strategy):
        k_raw = k_strategy(ensemble, coverage)
    else:
        k_raw = select_k(ensemble, coverage, k_strategy)
    k_used = max(1, min(int(k_raw), gr.q))
    cs = granule_similarity(gr, sim, g, k_used)
    rc = assign(gr, cs, k_used, gamma, orphan_policy)
    rc.params.update(beta=float(beta), gamma=float(gamma), k=k_used, q=gr.q, coverage=float(coverage),
                     orphan_policy=orphan_policy, ensemble_size=len(ensemble),
                     k_strategy="override" if k is not None else getattr(k_strategy, "__name__", k_strategy))
    return rc
