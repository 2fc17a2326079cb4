"""Interaction graphs: rings, square lattices, complete graphs and link augmentation.

Graphs are immutable and stored in CSR form (``indptr``/``indices``), which is
what the integration kernels consume directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_REJECTIONS = 64


class GraphKind(str, Enum):
    ISOLATED = "isolated"
    RING_1D = "ring"
    GRID_2D = "grid"
    COMPLETE = "complete"
    AUGMENTED = "augmented"


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    kind: GraphKind
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], kind: GraphKind,
                   meta: dict | None = None) -> "Graph":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise GraphError(f"edge endpoint out of range for n={n}")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        # dedupe undirected pairs
        key = np.unique(lo * n + hi)
        lo, hi = key // n, key % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        indices = dst.astype(np.int64)
        indptr.setflags(write=False)
        indices.setflags(write=False)
        return cls(n, indptr, indices, kind, dict(meta or {}))

    def neighbors_of(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def neighbors(self) -> list[list[int]]:
        return [self.neighbors_of(i).tolist() for i in range(self.n)]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def edges(self) -> np.ndarray:
        """Edge array of shape (m, 2) with i < j, sorted ascending."""
        src = np.repeat(np.arange(self.n), self.degree())
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges()}

    def has_edge(self, i: int, j: int) -> bool:
        row = self.neighbors_of(i)
        k = np.searchsorted(row, j)
        return bool(k < len(row) and row[k] == j)

    def validate(self) -> None:
        """Raise GraphError unless the adjacency is symmetric, sorted and loop-free."""
        if len(self.indptr) != self.n + 1 or self.indptr[0] != 0:
            raise GraphError("malformed indptr")
        for i in range(self.n):
            row = self.neighbors_of(i)
            if np.any(np.diff(row) <= 0):
                raise GraphError(f"neighbors of {i} not strictly ascending")
            if np.any(row == i):
                raise GraphError(f"self-loop at {i}")
            for j in row:
                if not self.has_edge(int(j), i):
                    raise GraphError(f"edge ({i},{j}) is not symmetric")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None


def isolated(n: int) -> Graph:
    """``n`` sites and no edges: independent traders."""
    if n < 1:
        raise GraphError(f"need at least one site, got {n}")
    return Graph.from_edges(n, [], GraphKind.ISOLATED)


def ring(n: int) -> Graph:
    if n < 3:
        raise GraphError(f"ring needs n >= 3, got {n}")
    i = np.arange(n)
    return Graph.from_edges(n, np.column_stack([i, (i + 1) % n]), GraphKind.RING_1D)


def grid2d(width: int, height: int, periodic: bool = True) -> Graph:
    """Square lattice; site (col, row) has index row * width + col."""
    if width < 3 or height < 3:
        raise GraphError(f"grid needs width, height >= 3, got {width}x{height}")
    idx = np.arange(width * height).reshape(height, width)
    if periodic:
        horiz = np.column_stack([idx.ravel(), np.roll(idx, -1, axis=1).ravel()])
        vert = np.column_stack([idx.ravel(), np.roll(idx, -1, axis=0).ravel()])
    else:
        horiz = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
        vert = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    meta = {"width": width, "height": height, "periodic": periodic}
    return Graph.from_edges(width * height, np.vstack([horiz, vert]), GraphKind.GRID_2D, meta)


def grid_neighbor(graph: Graph, site: int, direction: str) -> int:
    """Original lattice neighbor of ``site`` in one of right/left/bottom/top."""
    w, h = graph.meta["width"], graph.meta["height"]
    row, col = divmod(site, w)
    dc, dr = {"right": (1, 0), "left": (-1, 0), "bottom": (0, 1), "top": (0, -1)}[direction]
    return ((row + dr) % h) * w + (col + dc) % w


def complete(n: int) -> Graph:
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    i, j = np.triu_indices(n, k=1)
    return Graph.from_edges(n, np.column_stack([i, j]), GraphKind.COMPLETE)


def rewire_cycles(base: Graph, p: float, cycles: int, rng: np.random.Generator) -> Graph:
    """Add random non-local links, never removing lattice edges.

    Each cycle visits sites 0..n-1 in order and, with probability ``p``, links
    the site to a uniformly drawn non-adjacent site. A draw hitting an existing
    neighbor is resampled up to MAX_REJECTIONS times, after which the site is
    skipped for that cycle.
    """
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"p must lie in [0, 1], got {p}")
    if cycles < 1:
        raise GraphError(f"cycles must be >= 1, got {cycles}")
    n = base.n
    adj = [set(base.neighbors_of(i).tolist()) for i in range(n)]
    added = []
    for _ in range(cycles):
        for i in range(n):
            if rng.random() >= p:
                continue
            for _ in range(MAX_REJECTIONS):
                j = int(rng.integers(0, n - 1))
                if j >= i:
                    j += 1
                if j not in adj[i]:
                    adj[i].add(j)
                    adj[j].add(i)
                    added.append((i, j))
                    break
    meta = dict(base.meta, p=p, cycles=cycles, base_kind=base.kind.value,
                added_edges=len(added))
    return Graph.from_edges(n, np.vstack([base.edges(), np.asarray(added, dtype=np.int64).reshape(-1, 2)]),
                            GraphKind.AUGMENTED, meta)


def add_links(base: Graph, center: int, targets: Sequence[int]) -> Graph:
    """Link ``center`` to every site in ``targets``."""
    if not 0 <= center < base.n:
        raise GraphError(f"center {center} out of range")
    seen = set()
    for t in targets:
        t = int(t)
        if not 0 <= t < base.n:
            raise GraphError(f"target {t} out of range")
        if t == center:
            raise GraphError(f"target {t} is the center itself")
        if t in seen:
            raise GraphError(f"duplicate target {t}")
        if base.has_edge(center, t):
            raise GraphError(f"target {t} already adjacent to center {center}")
        seen.add(t)
    if not seen:
        return base
    new = np.column_stack([np.full(len(targets), center), np.asarray(targets, dtype=np.int64)])
    meta = dict(base.meta, center=center, n_added=len(targets))
    kind = base.kind if base.kind == GraphKind.AUGMENTED else GraphKind.AUGMENTED
    meta.setdefault("base_kind", base.kind.value)
    return Graph.from_edges(base.n, np.vstack([base.edges(), new]), kind, meta)


def write_edge_list(graph: Graph, path: str | Path) -> None:
    lines = [f"n {graph.n}"]
    lines += [f"{i} {j}" for i, j in graph.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: str | Path) -> Graph:
    text = Path(path).read_text().split("\n")
    header = text[0].split()
    if len(header) != 2 or header[0] != "n":
        raise GraphError(f"{path}: first line must be 'n <count>'")
    n = int(header[1])
    edges = []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"{path}:{lineno}: expected 'i j'")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph.from_edges(n, edges, GraphKind.AUGMENTED, {"source": str(path)})
