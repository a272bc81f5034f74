"""Community assignments: covers, partitions, ensembles and rough covers."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Cover",
    "Partition",
    "Ensemble",
    "RoughCommunity",
    "RoughCover",
    "membership",
    "crisp_projection",
    "overlapping_nodes",
]


class Cover:
    """Ordered list of nonempty node sets over ``node_count`` nodes.

    Communities may overlap and need not cover every node. Community
    identity is positional.
    """

    __slots__ = ("_communities", "_n", "_members")

    def __init__(self, communities: Iterable[Iterable[int]], node_count: int):
        comms = tuple(frozenset(int(v) for v in c) for c in communities)
        for i, c in enumerate(comms):
            if not c:
                raise ValueError(f"community {i} is empty")
            if min(c) < 0 or max(c) >= node_count:
                raise ValueError(f"community {i} references a node outside 0..{node_count - 1}")
        self._communities = comms
        self._n = int(node_count)
        self._members = None

    @property
    def communities(self) -> tuple[frozenset[int], ...]:
        return self._communities

    @property
    def node_count(self) -> int:
        return self._n

    def __len__(self) -> int:
        return len(self._communities)

    def __iter__(self):
        return iter(self._communities)

    def __getitem__(self, i: int) -> frozenset[int]:
        return self._communities[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cover):
            return NotImplemented
        return self._n == other._n and self._communities == other._communities

    def __hash__(self):
        return hash((self._n, self._communities))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(k={len(self)}, n={self._n})"

    def memberships(self) -> list[list[int]]:
        """Community indices of every node (the inverse listing), cached."""
        if self._members is None:
            members: list[list[int]] = [[] for _ in range(self._n)]
            for i, c in enumerate(self._communities):
                for v in c:
                    members[v].append(i)
            self._members = members
        return self._members

    def membership_counts(self) -> np.ndarray:
        return np.array([len(m) for m in self.memberships()], dtype=np.int64)

    def covered(self) -> frozenset[int]:
        return frozenset().union(*self._communities) if self._communities else frozenset()

    def is_partition(self) -> bool:
        return bool(np.all(self.membership_counts() == 1))

    def canonical(self) -> "Cover":
        """Same communities ordered by smallest member id."""
        return type(self)(sorted(self._communities, key=min), self._n)


class Partition(Cover):
    """A cover whose communities are pairwise disjoint and exhaustive."""

    __slots__ = ()

    def __init__(self, communities: Iterable[Iterable[int]], node_count: int):
        super().__init__(communities, node_count)
        counts = self.membership_counts()
        if np.any(counts > 1):
            raise ValueError(f"node {int(np.argmax(counts > 1))} is in more than one community")
        if np.any(counts == 0):
            raise ValueError(f"node {int(np.argmax(counts == 0))} is in no community")

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Build from a per-node label array; communities ordered by first occurrence."""
        groups: dict = {}
        for v, lab in enumerate(labels):
            groups.setdefault(lab, []).append(v)
        return cls(groups.values(), len(labels))

    def labels(self) -> np.ndarray:
        out = np.empty(self._n, dtype=np.int64)
        for i, c in enumerate(self._communities):
            out[list(c)] = i
        return out


class Ensemble:
    """Nonempty ordered collection of covers over a common node set."""

    __slots__ = ("_covers", "_n")

    def __init__(self, covers: Iterable[Cover]):
        covers = tuple(covers)
        if not covers:
            raise ValueError("an ensemble needs at least one cover")
        n = covers[0].node_count
        if any(c.node_count != n for c in covers):
            raise ValueError("all covers must share the same node_count")
        self._covers = covers
        self._n = n

    @property
    def covers(self) -> tuple[Cover, ...]:
        return self._covers

    @property
    def node_count(self) -> int:
        return self._n

    def __len__(self) -> int:
        return len(self._covers)

    def __iter__(self):
        return iter(self._covers)

    def __getitem__(self, i):
        return self._covers[i]


class RoughCommunity:
    """A (lower, upper) approximation pair with ``lower`` inside ``upper``."""

    __slots__ = ("lower", "upper")

    def __init__(self, lower: Iterable[int], upper: Iterable[int]):
        self.lower = frozenset(int(v) for v in lower)
        self.upper = frozenset(int(v) for v in upper)
        if not self.lower <= self.upper:
            raise ValueError("lower approximation must be a subset of the upper one")

    @property
    def boundary(self) -> frozenset[int]:
        return self.upper - self.lower

    def __eq__(self, other) -> bool:
        if not isinstance(other, RoughCommunity):
            return NotImplemented
        return self.lower == other.lower and self.upper == other.upper

    def __hash__(self):
        return hash((self.lower, self.upper))

    def __repr__(self) -> str:
        return f"RoughCommunity(lower={len(self.lower)}, upper={len(self.upper)})"


class RoughCover:
    """``k`` rough communities over ``node_count`` nodes.

    Lower approximations are pairwise disjoint. ``require_total=True``
    additionally checks that the upper approximations cover every node.
    """

    __slots__ = ("_communities", "_n", "params")

    def __init__(self, communities: Iterable[RoughCommunity], node_count: int,
                 params: dict | None = None, require_total: bool = True):
        comms = tuple(communities)
        seen = np.zeros(node_count, dtype=np.int64)
        upper_seen = np.zeros(node_count, dtype=bool)
        for i, rc in enumerate(comms):
            if rc.upper and (min(rc.upper) < 0 or max(rc.upper) >= node_count):
                raise ValueError(f"rough community {i} references a node outside 0..{node_count - 1}")
            seen[list(rc.lower)] += 1
            upper_seen[list(rc.upper)] = True
        if np.any(seen > 1):
            raise ValueError("lower approximations overlap")
        if require_total and not np.all(upper_seen):
            raise ValueError("upper approximations do not cover every node")
        self._communities = comms
        self._n = int(node_count)
        self.params = dict(params or {})

    @property
    def communities(self) -> tuple[RoughCommunity, ...]:
        return self._communities

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def lowers(self) -> list[frozenset[int]]:
        return [c.lower for c in self._communities]

    @property
    def uppers(self) -> list[frozenset[int]]:
        return [c.upper for c in self._communities]

    def __len__(self) -> int:
        return len(self._communities)

    def __iter__(self):
        return iter(self._communities)

    def __getitem__(self, i) -> RoughCommunity:
        return self._communities[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RoughCover):
            return NotImplemented
        return self._n == other._n and self._communities == other._communities

    def __repr__(self) -> str:
        return f"RoughCover(k={len(self)}, n={self._n})"


def membership(cover: Cover, v: int) -> set[int]:
    """Indices of the communities of ``cover`` containing node ``v``."""
    if not 0 <= v < cover.node_count:
        raise ValueError(f"node {v} outside 0..{cover.node_count - 1}")
    return set(cover.memberships()[v])


def crisp_projection(rc: RoughCover) -> Cover:
    """Cover whose i-th community is the i-th upper approximation.

    Boundary nodes end up in several communities. Empty uppers are dropped.
    """
    uppers = [u for u in rc.uppers if u]
    if all(c.lower == c.upper for c in rc) and _disjoint_total(uppers, rc.node_count):
        return Partition(uppers, rc.node_count)
    return Cover(uppers, rc.node_count)


def _disjoint_total(sets: list[frozenset[int]], n: int) -> bool:
    return sum(len(s) for s in sets) == n and len(frozenset().union(*sets)) == n if sets else n == 0


def overlapping_nodes(rc: RoughCover) -> frozenset[int]:
    """Nodes contained in two or more upper approximations."""
    counts = np.zeros(rc.node_count, dtype=np.int64)
    for u in rc.uppers:
        counts[list(u)] += 1
    return frozenset(np.flatnonzero(counts >= 2).tolist())
