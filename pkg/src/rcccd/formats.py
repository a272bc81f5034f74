"""Reading and writing graphs, covers and rough covers.

Formats
-------
edge list
    One ``u v`` pair per line, whitespace separated, ``#`` starts a comment.
    Two optional header comments are understood: ``# index-base: 1`` and
    ``# nodes: N`` (needed when trailing nodes are isolated). Edges listed
    in both orientations, as in LFR ``network.dat``, are merged.
community-per-line
    Line ``i`` holds the members of community ``i``.
LFR community file
    ``node c1 c2 ...`` rows, 1-based; pivoted into communities ordered by
    community id.
rough cover
    JSON object ``{"communities": [{"lower": [...], "upper": [...]}, ...],
    "params": {...}}``; ``params`` carries ``node_count`` alongside the
    consensus parameters.

All writers go through :func:`atomic_write`, so a crash never leaves a
truncated file behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .communities import Cover, Partition, RoughCommunity, RoughCover
from .graph import Graph

__all__ = [
    "atomic_write",
    "read_edge_list",
    "write_edge_list",
    "read_cover",
    "write_cover",
    "read_lfr",
    "write_lfr",
    "read_rough_cover",
    "write_rough_cover",
    "rough_cover_to_dict",
    "rough_cover_from_dict",
]


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file in the same directory and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header_value(line: str, key: str):
    body = line.lstrip("#").strip()
    name, sep, value = body.partition(":")
    if sep and name.strip().lower() == key:
        return value.strip()
    return None


def _data_lines(path):
    """Yield ``(lineno, tokens)`` of non-comment lines and collect header flags."""
    headers: dict[str, str] = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for key in ("index-base", "nodes"):
                    val = _header_value(line, key)
                    if val is not None:
                        headers[key] = val
                continue
            rows.append((lineno, line.split("#", 1)[0].split()))
    return headers, rows


def _parse_int(tok: str, path, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ValueError(f"{path}:{lineno}: expected an integer node id, got {tok!r}") from None


def read_edge_list(path, index_base: int | None = None, node_count: int | None = None) -> Graph:
    """Load an undirected simple graph from an edge-list file.

    ``index_base`` defaults to the file's ``# index-base`` header, else 0.
    ``node_count`` defaults to the ``# nodes`` header, else the largest id
    plus one. Duplicate edges in either orientation are merged; self-loops
    and ids below the base are input errors.
    """
    headers, rows = _data_lines(path)
    base = index_base if index_base is not None else int(headers.get("index-base", 0))
    if base not in (0, 1):
        raise ValueError(f"index base must be 0 or 1, got {base}")
    pairs = []
    for lineno, toks in rows:
        if len(toks) < 2:
            raise ValueError(f"{path}:{lineno}: expected 'u v'")
        u, v = (_parse_int(t, path, lineno) - base for t in toks[:2])
        if u < 0 or v < 0:
            raise ValueError(f"{path}:{lineno}: node id below index base {base}")
        if u == v:
            raise ValueError(f"{path}:{lineno}: self-loop on node {u + base}")
        pairs.append((u, v))
    if node_count is None:
        node_count = int(headers["nodes"]) if "nodes" in headers else (max(max(p) for p in pairs) + 1 if pairs else 0)
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if len(arr) and arr.max() >= node_count:
        raise ValueError(f"{path}: node id {int(arr.max()) + base} exceeds node count {node_count}")
    arr.sort(axis=1)
    arr = np.unique(arr, axis=0)
    return Graph(node_count, arr)


def write_edge_list(path, g: Graph, index_base: int = 0) -> None:
    """Write ``g`` with ``index-base`` and ``nodes`` headers, one edge per line."""
    lines = [f"# index-base: {index_base}", f"# nodes: {g.node_count}"]
    lines += [f"{u + index_base} {v + index_base}" for u, v in g.edges.tolist()]
    atomic_write(path, "\n".join(lines) + "\n")


def _as_cover(communities, node_count: int) -> Cover:
    cover = Cover(communities, node_count)
    return Partition(cover.communities, node_count) if cover.is_partition() else cover


def read_cover(path, node_count: int, index_base: int | None = None, fmt: str = "auto") -> Cover:
    """Load a cover; returns a :class:`Partition` when the communities are disjoint and exhaustive.

    ``fmt`` is ``"lines"`` (community per line), ``"lfr"`` (node-community
    rows) or ``"auto"``, which picks ``"lfr"`` for files named
    ``community.dat``. The index base defaults to the file header, else 1
    for LFR files and 0 otherwise.
    """
    if fmt == "auto":
        fmt = "lfr" if Path(path).name == "community.dat" else "lines"
    if fmt not in ("lines", "lfr"):
        raise ValueError(f"unknown cover format {fmt!r}")
    headers, rows = _data_lines(path)
    if index_base is None:
        index_base = int(headers.get("index-base", 1 if fmt == "lfr" else 0))
    ids = [(lineno, [_parse_int(t, path, lineno) - index_base for t in toks]) for lineno, toks in rows]
    for lineno, vals in ids:
        if any(x < 0 for x in vals):
            raise ValueError(f"{path}:{lineno}: id below index base {index_base}")
    if fmt == "lines":
        comms = [vals for _, vals in ids]
    else:
        groups: dict[int, list[int]] = {}
        for lineno, vals in ids:
            if len(vals) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'node community ...'")
            for c in vals[1:]:
                groups.setdefault(c, []).append(vals[0])
        comms = [groups[c] for c in sorted(groups)]
    try:
        return _as_cover(comms, node_count)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_cover(path, cover: Cover, fmt: str = "lines") -> None:
    """Write a cover as community-per-line (0-based) or as LFR rows (1-based)."""
    if fmt == "lines":
        lines = ["# index-base: 0"] + [" ".join(map(str, sorted(c))) for c in cover]
    elif fmt == "lfr":
        lines = [f"{v + 1}\t" + " ".join(str(c + 1) for c in cs) for v, cs in enumerate(cover.memberships())]
    else:
        raise ValueError(f"unknown cover format {fmt!r}")
    atomic_write(path, "\n".join(lines) + "\n")


def write_lfr(directory, g: Graph, ground_truth: Cover) -> None:
    """Write ``network.dat`` (both orientations, tab separated, 1-based) and ``community.dat``."""
    directory = Path(directory)
    rows = []
    for v in range(g.node_count):
        rows += [f"{v + 1}\t{u + 1}" for u in g.neighbors(v).tolist()]
    atomic_write(directory / "network.dat", "\n".join(rows) + ("\n" if rows else ""))
    write_cover(directory / "community.dat", ground_truth, fmt="lfr")


def read_lfr(directory) -> tuple[Graph, Cover]:
    """Load a ``network.dat`` / ``community.dat`` pair; the node count comes from the community file."""
    directory = Path(directory)
    _, rows = _data_lines(directory / "community.dat")
    n = len(rows)
    g = read_edge_list(directory / "network.dat", index_base=1, node_count=n)
    return g, read_cover(directory / "community.dat", n, index_base=1, fmt="lfr")


def rough_cover_to_dict(rc: RoughCover) -> dict:
    params = dict(rc.params)
    params["node_count"] = rc.node_count
    return {
        "communities": [{"lower": sorted(c.lower), "upper": sorted(c.upper)} for c in rc],
        "params": params,
    }


def rough_cover_from_dict(data: dict) -> RoughCover:
    try:
        params = dict(data["params"])
        n = int(params.pop("node_count"))
        comms = [RoughCommunity(c["lower"], c["upper"]) for c in data["communities"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed rough cover: missing {exc}") from None
    return RoughCover(comms, n, params=params)


def write_rough_cover(path, rc: RoughCover) -> None:
    """Write ``rc`` as JSON, one community per line."""
    data = rough_cover_to_dict(rc)
    comms = ",\n  ".join(json.dumps(c, sort_keys=True) for c in data["communities"])
    text = f'{{"communities": [\n  {comms}\n ],\n "params": {json.dumps(data["params"], sort_keys=True)}}}\n'
    atomic_write(path, text)


def read_rough_cover(path) -> RoughCover:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from None
    return rough_cover_from_dict(data)
