"""Synthetic benchmark graphs with planted ground truth.

:func:`generate_lfr` is a self-contained re-derivation of the
Lancichinetti-Fortunato-Radicchi construction: power-law degrees and
community sizes, a mixing fraction ``mu`` of each node's edges leaving its
communities, and optionally nodes that belong to several communities. It is
not a port of the reference generator, so degree sequences differ from that
tool's; the realized mixing is measured on the output so the approximation
can be audited.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .communities import Cover, Partition
from .graph import Graph

__all__ = [
    "LfrConfig",
    "LfrResult",
    "GenerationError",
    "SMALL_CONFIG",
    "LARGE_CONFIG",
    "generate_lfr",
    "realized_mixing",
    "planted_partition",
]


class GenerationError(RuntimeError):
    """The benchmark configuration cannot be realized."""


@dataclass(frozen=True)
class LfrConfig:
    n: int
    tau1: float
    tau2: float
    avg_degree: float
    max_degree: int
    c_min: int
    c_max: int
    mu: float
    o_n: int = 0
    o_m: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 1 <= self.c_min <= self.c_max <= self.n:
            raise ValueError("need 1 <= c_min <= c_max <= n")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must be in [0, 1]")
        if not 0 <= self.o_n <= self.n:
            raise ValueError("o_n must be in [0, n]")
        if self.o_m < 1:
            raise ValueError("o_m must be at least 1")
        if not 0 < self.avg_degree <= self.max_degree < self.n:
            raise ValueError("need 0 < avg_degree <= max_degree < n")

    def replace(self, **changes) -> "LfrConfig":
        d = asdict(self)
        d.update(changes)
        return LfrConfig(**d)

    @property
    def memberships(self) -> int:
        return self.n + self.o_n * (self.o_m - 1)


SMALL_CONFIG = LfrConfig(n=1000, tau1=2, tau2=1, avg_degree=15, max_degree=50, c_min=20, c_max=50,
                         mu=0.1, o_n=100, o_m=2)
LARGE_CONFIG = LfrConfig(n=20000, tau1=2, tau2=1, avg_degree=15, max_degree=50, c_min=40, c_max=100,
                         mu=0.1, o_n=2000, o_m=2)


@dataclass(frozen=True)
class LfrResult:
    graph: Graph
    ground_truth: Cover
    realized_mu: float
    config: LfrConfig
    unmet_stubs: int = 0


def _powerlaw_mean(lo: float, hi: float, tau: float) -> float:
    if math.isclose(tau, 1.0):
        return (hi - lo) / math.log(hi / lo)
    if math.isclose(tau, 2.0):
        return math.log(hi / lo) / (1.0 / lo - 1.0 / hi)
    a, b = 1.0 - tau, 2.0 - tau
    return (a / b) * (hi**b - lo**b) / (hi**a - lo**a)


def _powerlaw_sample(rng: np.random.Generator, lo: float, hi: float, tau: float, size: int) -> np.ndarray:
    """Inverse-CDF samples of density proportional to ``x**-tau`` on ``[lo, hi]``."""
    u = rng.random(size)
    if math.isclose(tau, 1.0):
        return lo * (hi / lo) ** u
    a = 1.0 - tau
    return (lo**a + u * (hi**a - lo**a)) ** (1.0 / a)


def _degree_sequence(cfg: LfrConfig, rng: np.random.Generator) -> np.ndarray:
    kmax = float(cfg.max_degree)
    if cfg.avg_degree >= kmax:
        deg = np.full(cfg.n, cfg.max_degree, dtype=np.int64)
    else:
        f = lambda lo: _powerlaw_mean(lo, kmax, cfg.tau1) - cfg.avg_degree
        lo = brentq(f, 1e-3, kmax * (1 - 1e-9))
        x = _powerlaw_sample(rng, lo, kmax, cfg.tau1, cfg.n)
        deg = np.clip(np.rint(x).astype(np.int64), 1, cfg.max_degree)
    if deg.sum() % 2:
        i = int(np.argmin(deg))
        deg[i] += 1
    return deg


def _community_sizes(cfg: LfrConfig, rng: np.random.Generator) -> list[int]:
    target = cfg.memberships
    sizes: list[int] = []
    total = 0
    while total < target:
        s = int(min(cfg.c_max, math.floor(_powerlaw_sample(rng, cfg.c_min, cfg.c_max + 1, cfg.tau2, 1)[0])))
        if total + s > target:
            rest = target - total
            if rest >= cfg.c_min:
                sizes.append(rest)
                total += rest
            else:
                room = [i for i, x in enumerate(sizes) if x < cfg.c_max]
                while rest and room:
                    i = room[int(rng.integers(len(room)))]
                    sizes[i] += 1
                    rest -= 1
                    total += 1
                    if sizes[i] == cfg.c_max:
                        room.remove(i)
                if rest:
                    raise GenerationError("community size bounds cannot absorb the membership total")
            break
        sizes.append(s)
        total += s
    if len(sizes) < cfg.o_m:
        raise GenerationError(f"only {len(sizes)} communities for {cfg.o_m} memberships per node")
    return sizes


def _split(total: int, parts: int, rng: np.random.Generator) -> list[int]:
    base, extra = divmod(total, parts)
    out = [base] * parts
    for i in rng.choice(parts, size=extra, replace=False):
        out[int(i)] += 1
    return out


def _assign_memberships(cfg, sizes, internal, overlapping, rng):
    """Place every (node, internal degree share) into a community with room for it."""
    n_comm = len(sizes)
    slots = []
    for v in range(cfg.n):
        parts = cfg.o_m if overlapping[v] else 1
        for share in _split(int(internal[v]), parts, rng):
            slots.append((share, v))
    order = rng.permutation(len(slots))
    slots = [slots[i] for i in order]
    slots.sort(key=lambda t: -t[0])
    free = np.array(sizes, dtype=np.int64)
    sizes_arr = np.array(sizes, dtype=np.int64)
    members: list[list[int]] = [[] for _ in range(n_comm)]
    share_of: list[dict[int, int]] = [{} for _ in range(n_comm)]
    node_comms: list[set[int]] = [set() for _ in range(cfg.n)]
    for share, v in slots:
        ok = (free > 0) & (sizes_arr - 1 >= share)
        if node_comms[v]:
            ok[list(node_comms[v])] = False
        cand = np.flatnonzero(ok)
        if len(cand) == 0:
            c = _make_room(v, share, free, sizes_arr, members, share_of, node_comms, rng)
        else:
            w = free[cand].astype(np.float64)
            c = int(cand[rng.choice(len(cand), p=w / w.sum())])
        members[c].append(v)
        share_of[c][v] = share
        node_comms[v].add(c)
        free[c] -= 1
    return members, share_of, node_comms


def _make_room(v, share, free, sizes, members, share_of, node_comms, rng) -> int:
    """Free a slot for ``v`` by moving a member of a community ``v`` can join into one with room.

    Returns the community ``v`` should join.
    """
    open_comms = np.flatnonzero(free > 0)
    hosts = [c for c in rng.permutation(len(sizes)).tolist()
             if c not in node_comms[v] and sizes[c] - 1 >= share]
    for c_open in rng.permutation(open_comms).tolist():
        for c in hosts:
            if c == c_open:
                continue
            for idx in rng.permutation(len(members[c])).tolist():
                u = members[c][idx]
                if c_open in node_comms[u] or share_of[c][u] > sizes[c_open] - 1:
                    continue
                members[c].pop(idx)
                members[c_open].append(u)
                share_of[c_open][u] = share_of[c].pop(u)
                node_comms[u].discard(c)
                node_comms[u].add(c_open)
                free[c_open] -= 1
                free[c] += 1
                return c
    raise GenerationError(
        f"no community can host node {v} with internal degree {share}; "
        f"largest community has {int(sizes.max())} nodes"
    )


def _wire_dense(members: list[int], demand: dict[int, int], rng, edges: set) -> int:
    """Realize a community's internal degrees; returns the number of unmet stubs.

    Randomized Havel-Hakimi: the node with most remaining stubs links to
    distinct members drawn in proportion to their remaining stubs.
    """
    nodes = np.array(members, dtype=np.int64)
    rem = np.array([demand[v] for v in members], dtype=np.int64)
    unmet = 0
    while True:
        live = np.flatnonzero(rem > 0)
        if len(live) == 0:
            break
        top = rem[live].max()
        heads = live[rem[live] == top]
        i = int(heads[rng.integers(len(heads))])
        v = int(nodes[i])
        need = int(rem[i])
        rem[i] = 0
        ok = rem > 0
        for j in np.flatnonzero(ok):
            u = int(nodes[j])
            if ((u, v) if u < v else (v, u)) in edges:
                ok[j] = False
        cand = np.flatnonzero(ok)
        take = min(need, len(cand))
        unmet += need - take
        if take == 0:
            continue
        w = rem[cand].astype(np.float64)
        picked = rng.choice(cand, size=take, replace=False, p=w / w.sum())
        for j in picked:
            u = int(nodes[j])
            edges.add((u, v) if u < v else (v, u))
            rem[j] -= 1
    return unmet


def _wire_sparse(stubs: list[int], rng, valid, edges: set, budget: int) -> int:
    """Random stub matching with swap repair; returns the number of unmet stubs."""
    arr = np.array(stubs, dtype=np.int64)
    rng.shuffle(arr)
    unmet = len(arr) % 2
    if unmet:
        arr = arr[:-1]
    good: list[tuple[int, int]] = []
    bad: list[tuple[int, int]] = []
    for u, v in arr.reshape(-1, 2).tolist():
        key = (u, v) if u < v else (v, u)
        if valid(u, v) and key not in edges:
            edges.add(key)
            good.append(key)
        else:
            bad.append((u, v))
    for u, v in bad:
        fixed = False
        while budget > 0 and good:
            budget -= 1
            idx = int(rng.integers(len(good)))
            x, y = good[idx]
            if rng.random() < 0.5:
                x, y = y, x
            a = (u, x) if u < x else (x, u)
            b = (v, y) if v < y else (y, v)
            if a == b or a in edges or b in edges or not valid(u, x) or not valid(v, y):
                continue
            edges.discard(good[idx])
            edges.add(a)
            edges.add(b)
            good[idx] = a
            good.append(b)
            fixed = True
            break
        if not fixed:
            unmet += 2
    return unmet


def generate_lfr(cfg: LfrConfig) -> LfrResult:
    """Generate an LFR-style graph, its ground-truth cover and the realized mixing.

    Degrees follow a power law with exponent ``tau1`` whose lower cut-off is
    solved so the mean equals ``avg_degree``. Community sizes follow a power
    law with exponent ``tau2`` on ``[c_min, c_max]`` and sum to the number of
    memberships ``n + o_n*(o_m - 1)``. Each node keeps ``mu`` of its stubs
    external (stochastic rounding), the rest split evenly over its
    communities. Each community is wired by a randomized Havel-Hakimi pass;
    external stubs are matched at random and self-loops, repeated edges and
    external edges inside a shared community are repaired by swaps.
    Community sizes are redrawn (up to 50 times) when a draw cannot host
    every node's internal degree. Internal stubs a community cannot realize
    are dropped and counted in ``unmet_stubs``.

    Raises
    ------
    GenerationError
        If some node's internal degree exceeds ``c_max - 1``, no size draw
        hosts every node, or external stubs remain unmatched after
        ``100*m`` swap attempts (``m`` external edges).
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    deg = _degree_sequence(cfg, rng)
    overlapping = np.zeros(cfg.n, dtype=bool)
    overlapping[rng.choice(cfg.n, size=cfg.o_n, replace=False)] = True
    ext_real = cfg.mu * deg
    external = np.floor(ext_real).astype(np.int64)
    external += rng.random(cfg.n) < (ext_real - external)
    internal = deg - external
    shares = np.where(overlapping, -(-internal // cfg.o_m), internal)
    largest_share = int(shares.max(initial=0))
    if largest_share > cfg.c_max - 1:
        raise GenerationError(f"a node needs {largest_share} neighbours inside one community but c_max is {cfg.c_max}")
    for attempt in range(50):
        sizes = _community_sizes(cfg, rng)
        try:
            members, share_of, node_comms = _assign_memberships(cfg, sizes, internal, overlapping, rng)
            break
        except GenerationError:
            if attempt == 49:
                raise

    edges: set[tuple[int, int]] = set()
    unmet = sum(_wire_dense(mem, share_of[c], rng, edges) for c, mem in enumerate(members))
    ext_stubs = [v for v in range(cfg.n) for _ in range(int(external[v]))]
    m_ext = len(ext_stubs) // 2
    left = _wire_sparse(ext_stubs, rng, lambda u, v: u != v and not (node_comms[u] & node_comms[v]), edges,
                        budget=100 * max(1, m_ext))
    if left > len(ext_stubs) % 2:
        raise GenerationError(f"{left} external stubs unmatched after {100 * max(1, m_ext)} swap attempts")

    g = Graph(cfg.n, np.array(sorted(edges), dtype=np.int64).reshape(-1, 2))
    gt = Cover([sorted(m) for m in members], cfg.n)
    if cfg.o_n == 0 or cfg.o_m == 1:
        gt = Partition(gt.communities, cfg.n)
    return LfrResult(g, gt, realized_mixing(g, gt), cfg, unmet + left)


def realized_mixing(g: Graph, gt: Cover) -> float:
    """Mean over non-isolated nodes of the fraction of neighbours sharing no community."""
    comms = [frozenset(m) for m in gt.memberships()]
    fracs = []
    for v, nb in enumerate(g.adjacency_lists()):
        if not nb:
            continue
        out = sum(1 for u in nb if not (comms[v] & comms[u]))
        fracs.append(out / len(nb))
    return float(np.mean(fracs)) if fracs else 0.0


def planted_partition(c: int, size: int, p_in: float, p_out: float, seed=None) -> tuple[Graph, Partition]:
    """``c`` blocks of ``size`` nodes; pairs joined with ``p_in`` inside a block, ``p_out`` across."""
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValueError("probabilities must be in [0, 1]")
    n = c * size
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    same = (iu // size) == (ju // size) if size else np.zeros(0, dtype=bool)
    prob = np.where(same, p_in, p_out)
    keep = rng.random(len(iu)) < prob
    g = Graph(n, np.stack([iu[keep], ju[keep]], axis=1))
    part = Partition([range(b * size, (b + 1) * size) for b in range(c)], n) if n else Partition([], 0)
    return g, part
