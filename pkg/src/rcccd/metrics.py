"""Agreement and quality measures for partitions, covers and rough covers."""

from __future__ import annotations

from typing import Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .communities import Cover, Partition, RoughCover, overlapping_nodes
from .graph import Graph

__all__ = [
    "nmi",
    "overlapping_nmi",
    "participation_coefficient",
    "mean_participation",
    "core_accuracy",
    "overlap_confusion",
    "NMI_AVERAGES",
]

NMI_AVERAGES = ("arithmetic", "max", "sqrt", "min")


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(a: Partition, b: Partition, average: str = "arithmetic") -> float:
    """Normalized mutual information of two partitions.

    ``average`` picks the normaliser of ``I(a;b)``: the arithmetic mean
    (default), maximum, geometric mean (``"sqrt"``) or minimum of the two
    entropies. Two single-community partitions score 1.
    """
    if a.node_count != b.node_count:
        raise ValueError("partitions have different node counts")
    if average not in NMI_AVERAGES:
        raise ValueError(f"unknown average {average!r}")
    if not isinstance(a, Partition):
        a = Partition(a.communities, a.node_count)
    if not isinstance(b, Partition):
        b = Partition(b.communities, b.node_count)
    n = a.node_count
    la, lb = a.labels(), b.labels()
    table = np.zeros((len(a), len(b)), dtype=np.int64)
    np.add.at(table, (la, lb), 1)
    ra, rb = table.sum(axis=1), table.sum(axis=0)
    ha, hb = _entropy(ra, n), _entropy(rb, n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    i, j = np.nonzero(table)
    if len(i) == len(a) == len(b):
        return 1.0  # one-to-one blocks: identical up to relabelling, exact despite rounding
    nij = table[i, j]
    mi = float(np.sum(nij / n * np.log(n * nij / (ra[i] * rb[j]))))
    denom = {"arithmetic": (ha + hb) / 2, "max": max(ha, hb), "sqrt": np.sqrt(ha * hb), "min": min(ha, hb)}[average]
    return float(min(1.0, max(0.0, mi / denom)))


def _h(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p, dtype=np.float64)
    nz = p > 0
    out[nz] = -p[nz] * np.log2(p[nz])
    return out


def _normalised_conditional(x: Cover, y: Cover) -> float:
    n = x.node_count
    xs = [np.zeros(n, dtype=bool) for _ in x]
    ys = [np.zeros(n, dtype=bool) for _ in y]
    for arr, c in zip(xs, x):
        arr[list(c)] = True
    for arr, c in zip(ys, y):
        arr[list(c)] = True
    xm = np.array(xs, dtype=np.float64)
    ym = np.array(ys, dtype=np.float64)
    inter = xm @ ym.T
    sx = xm.sum(axis=1)[:, None]
    sy = ym.sum(axis=1)[None, :]
    p11 = inter / n
    p10 = (sx - inter) / n
    p01 = (sy - inter) / n
    p00 = (n - sx - sy + inter) / n
    h11, h10, h01, h00 = _h(p11), _h(p10), _h(p01), _h(p00)
    hy = _h(sy / n) + _h(1.0 - sy / n)
    hx = (_h(sx / n) + _h(1.0 - sx / n)).ravel()
    cond = h11 + h10 + h01 + h00 - hy
    allowed = h11 + h00 > h01 + h10
    cond = np.where(allowed, cond, hx[:, None])
    best = cond.min(axis=1) if cond.shape[1] else hx
    # A community spanning every node explains nothing: its term is 1.
    terms = np.ones(len(hx))
    np.divide(best, hx, out=terms, where=hx > 0)
    return float(terms.mean())


def overlapping_nmi(a: Cover, b: Cover) -> float:
    """Overlapping NMI of Lancichinetti, Fortunato and Kertesz.

    Each community is a binary membership vector. For a community of ``a``
    the conditional entropy given ``b`` is the smallest conditional entropy
    given any single community of ``b`` passing the LFK admissibility test
    (otherwise its own entropy); these are normalised by the community's
    entropy and averaged. The score is ``1 - (H(a|b) + H(b|a)) / 2``.
    A community spanning every node carries no information and gets the
    worst normalised term, so equal covers are special-cased to 1.
    """
    if a.node_count != b.node_count:
        raise ValueError("covers have different node counts")
    if len(a) == 0 or len(b) == 0:
        raise ValueError("overlapping NMI needs nonempty covers")
    if set(a.communities) == set(b.communities):
        return 1.0
    val = 1.0 - 0.5 * (_normalised_conditional(a, b) + _normalised_conditional(b, a))
    return float(min(1.0, max(0.0, val)))


def participation_coefficient(g: Graph, c: Cover, v: int) -> float:
    """Participation coefficient of ``v`` with cover-aware total degree.

    ``d_s`` counts the neighbours of ``v`` in community ``s``; the total is
    ``sum_s d_s``, so a neighbour lying in two communities counts twice.
    """
    if c.node_count != g.node_count:
        raise ValueError("cover and graph disagree on node_count")
    members = c.memberships()
    counts: dict[int, int] = {}
    for u in g.neighbors(v).tolist():
        for s in members[u]:
            counts[s] = counts.get(s, 0) + 1
    total = sum(counts.values())
    if total == 0:
        raise ValueError(f"node {v} has no neighbour inside any community")
    return 1.0 - sum((d / total) ** 2 for d in counts.values())


def mean_participation(g: Graph, c: Cover, nodes: Iterable[int]) -> float:
    """Mean participation coefficient over ``nodes``; nodes without community neighbours are skipped.

    Returns nan when no node qualifies.
    """
    vals = []
    for v in sorted(nodes):
        try:
            vals.append(participation_coefficient(g, c, v))
        except ValueError:
            continue
    return float(np.mean(vals)) if vals else float("nan")


def _match(lowers: list[frozenset[int]], gt: Cover, optimal: bool) -> list[int | None]:
    jac = np.zeros((len(lowers), len(gt)))
    for i, lo in enumerate(lowers):
        if not lo:
            continue
        for j, t in enumerate(gt):
            inter = len(lo & t)
            if inter:
                jac[i, j] = inter / len(lo | t)
    match: list[int | None] = [None] * len(lowers)
    if optimal:
        rows, cols = linear_sum_assignment(jac, maximize=True)
        for i, j in zip(rows, cols):
            if jac[i, j] > 0:
                match[i] = int(j)
        return match
    cand = [(-jac[i, j], i, j) for i, j in zip(*np.nonzero(jac))]
    cand.sort()
    used_r, used_g = set(), set()
    for _, i, j in cand:
        if i in used_r or j in used_g:
            continue
        match[int(i)] = int(j)
        used_r.add(i)
        used_g.add(j)
    return match


def core_accuracy(rc: RoughCover, gt: Cover, optimal: bool = False) -> float:
    """Fraction of lower-approximation nodes inside their matched ground-truth community.

    Rough communities are matched one-to-one to ground-truth communities by
    greedily taking the highest Jaccard index between lower approximation
    and community (ties by index); ``optimal=True`` solves the assignment
    exactly instead.
    """
    if rc.node_count != gt.node_count:
        raise ValueError("rough cover and ground truth have different node counts")
    lowers = rc.lowers
    total = sum(len(lo) for lo in lowers)
    if total == 0:
        raise ValueError("core accuracy is undefined without lower-approximation nodes")
    match = _match(lowers, gt, optimal)
    hit = sum(len(lo & gt[j]) for lo, j in zip(lowers, match) if j is not None)
    return hit / total


def overlap_confusion(rc: RoughCover, gt: Cover) -> tuple[int, int]:
    """``(TP, FP)`` of the predicted overlapping nodes against ground-truth overlap."""
    if rc.node_count != gt.node_count:
        raise ValueError("rough cover and ground truth have different node counts")
    predicted = overlapping_nodes(rc)
    gt_overlap = frozenset(np.flatnonzero(gt.membership_counts() >= 2).tolist())
    tp = len(predicted & gt_overlap)
    return tp, len(predicted) - tp
