"""Simple undirected graphs, instance generators and query-counting oracles."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterable, Optional, Sequence

Edge = tuple[int, int]

MATRIX = "adjacency-matrix"
LIST = "adjacency-list"


class QueryBudgetExceeded(RuntimeError):
    """Raised when an oracle call would exceed its query budget."""


def canonical_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with a canonical (sorted) edge list.

    ``bipartition`` is an optional pair of disjoint vertex sets covering
    every vertex; when present, every edge must cross it.
    """

    num_vertices: int
    edges: tuple[Edge, ...]
    bipartition: Optional[tuple[frozenset[int], frozenset[int]]] = field(default=None)

    def __post_init__(self):
        n = self.num_vertices
        if n < 0:
            raise ValueError("num_vertices must be non-negative")
        edges = tuple(tuple(e) for e in self.edges)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            if u >= v:
                raise ValueError(f"edge ({u}, {v}) is not canonical (need u < v)")
        for a, b in zip(edges, edges[1:]):
            if a >= b:
                raise ValueError(f"edge list not strictly sorted at {a}, {b}")
        object.__setattr__(self, "edges", edges)
        if self.bipartition is not None:
            left, right = (frozenset(p) for p in self.bipartition)
            if left & right or (left | right) != frozenset(range(n)):
                raise ValueError("bipartition must split the vertex set into two disjoint parts")
            for u, v in edges:
                if (u in left) == (v in left):
                    raise ValueError(f"edge ({u}, {v}) does not cross the bipartition")
            object.__setattr__(self, "bipartition", (left, right))

    @classmethod
    def from_edges(cls, num_vertices: int, edges: Iterable[Sequence[int]], bipartition=None) -> "Graph":
        """Build a graph from edges in any order/orientation; duplicates are rejected."""
        canon = sorted(canonical_edge(int(u), int(v)) for u, v in edges)
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise ValueError(f"duplicate edge {a}")
        return cls(num_vertices, tuple(canon), bipartition)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Neighbor lists in ascending vertex order."""
        nbrs: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    def has_edge(self, u: int, v: int) -> bool:
        return canonical_edge(u, v) in self._edge_set

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the isomorphic graph with vertex ``v`` renamed ``perm[v]``."""
        if sorted(perm) != list(range(self.num_vertices)):
            raise ValueError("perm must be a permutation of the vertices")
        bip = None
        if self.bipartition is not None:
            bip = tuple(frozenset(perm[v] for v in part) for part in self.bipartition)
        return Graph.from_edges(self.num_vertices, ((perm[u], perm[v]) for u, v in self.edges), bip)

    # edge-list text format

    def to_edgelist(self) -> str:
        lines = [f"p {self.num_vertices} {self.num_edges}"]
        if self.bipartition is not None:
            left = self.bipartition[0]
            k = len(left)
            if left != frozenset(range(k)):
                raise ValueError("edge-list format needs the first part to be vertices 0..k-1")
            lines.append(f"b {k}")
        lines.extend(f"e {u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edgelist(cls, text: str) -> "Graph":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise ValueError("empty edge-list document")

        def ints(tokens, lineno):
            try:
                return [int(t) for t in tokens]
            except ValueError:
                raise ValueError(f"line {lineno}: expected integers, got {' '.join(tokens)!r}") from None

        head = lines[0].split(" ")
        if len(head) != 3 or head[0] != "p":
            raise ValueError("line 1: expected 'p <num_vertices> <num_edges>'")
        nv, ne = ints(head[1:], 1)
        pos = 1
        bip = None
        if pos < len(lines) and lines[pos].startswith("b"):
            tok = lines[pos].split(" ")
            if len(tok) != 2 or tok[0] != "b":
                raise ValueError(f"line {pos + 1}: expected 'b <size_of_first_part>'")
            (k,) = ints(tok[1:], pos + 1)
            if not 0 <= k <= nv:
                raise ValueError(f"line {pos + 1}: part size {k} out of range")
            bip = (frozenset(range(k)), frozenset(range(k, nv)))
            pos += 1
        edges = []
        for lineno, line in enumerate(lines[pos:], start=pos + 1):
            tok = line.split(" ")
            if len(tok) != 3 or tok[0] != "e":
                raise ValueError(f"line {lineno}: expected 'e <u> <v>', got {line!r}")
            edges.append(tuple(ints(tok[1:], lineno)))
        if len(edges) != ne:
            raise ValueError(f"header declares {ne} edges but {len(edges)} were given")
        return cls(nv, tuple(edges), bip)


def complete_graph(half_size: int) -> Graph:
    """K_{2n} on vertices 0..2n-1."""
    if half_size < 1:
        raise ValueError("half_size must be >= 1")
    nv = 2 * half_size
    return Graph(nv, tuple((u, v) for u in range(nv) for v in range(u + 1, nv)))


def complete_graph_edges(half_size: int) -> tuple[Edge, ...]:
    return complete_graph(half_size).edges


def unique_pm_bipartite(half_size: int) -> Graph:
    """Bipartite graph whose only perfect matching is {(u_i, v_i)}.

    Vertices 0..n-1 are u_1..u_n and n..2n-1 are v_1..v_n; u_i is joined
    to v_j for every j >= i, giving n(n+1)/2 edges.
    """
    n = half_size
    if n < 1:
        raise ValueError("half_size must be >= 1")
    edges = tuple((i, n + j) for i in range(n) for j in range(i, n))
    return Graph(2 * n, edges, (frozenset(range(n)), frozenset(range(n, 2 * n))))


def random_graph(num_vertices: int, num_edges: int, seed: int) -> Graph:
    """Uniformly random simple graph with exactly ``num_edges`` edges."""
    total = comb(num_vertices, 2)
    if num_vertices < 0 or not 0 <= num_edges <= total:
        raise ValueError(f"cannot place {num_edges} edges on {num_vertices} vertices")
    all_edges = [(u, v) for u in range(num_vertices) for v in range(u + 1, num_vertices)]
    picked = random.Random(seed).sample(range(total), num_edges)
    return Graph(num_vertices, tuple(all_edges[i] for i in sorted(picked)))


class QueryOracle:
    """Black-box access to a graph that counts every call.

    In the adjacency-matrix model one query reveals one adjacency bit; in
    the adjacency-list model one query reveals one neighbor-list entry (or
    the end of the list, returned as ``None``). Repeated identical queries
    are charged again. Not safe to share between threads.
    """

    def __init__(self, target: Graph, model: str = MATRIX, budget: Optional[int] = None):
        if model not in (MATRIX, LIST):
            raise ValueError(f"unknown oracle model {model!r}")
        if budget is not None and budget < 0:
            raise ValueError("budget must be non-negative")
        self.target = target
        self.model = model
        self.budget = budget
        self.query_count = 0

    def reset(self):
        self.query_count = 0

    @property
    def remaining(self) -> Optional[int]:
        return None if self.budget is None else self.budget - self.query_count

    def _check_vertex(self, v):
        if not 0 <= v < self.target.num_vertices:
            raise IndexError(f"vertex {v} out of range [0, {self.target.num_vertices})")

    def _charge(self):
        if self.budget is not None and self.query_count >= self.budget:
            raise QueryBudgetExceeded(f"query budget of {self.budget} exhausted")
        self.query_count += 1

    def query(self, i: int, j: int) -> int:
        """Adjacency bit for the pair {i, j}."""
        if self.model != MATRIX:
            raise ValueError("query() needs an adjacency-matrix oracle")
        self._check_vertex(i)
        self._check_vertex(j)
        if i == j:
            raise ValueError("matrix queries need two distinct vertices")
        self._charge()
        return int(self.target.has_edge(i, j))

    def neighbor(self, v: int, k: int) -> Optional[int]:
        """The k-th neighbor of v in ascending order, or None past the end."""
        if self.model != LIST:
            raise ValueError("neighbor() needs an adjacency-list oracle")
        self._check_vertex(v)
        if k < 0:
            raise IndexError("list index must be non-negative")
        self._charge()
        nbrs = self.target.adjacency[v]
        return nbrs[k] if k < len(nbrs) else None


def oracle_query_matrix(oracle: QueryOracle, i: int, j: int) -> int:
    return oracle.query(i, j)


def oracle_query_list(oracle: QueryOracle, v: int, k: int) -> Optional[int]:
    return oracle.neighbor(v, k)


def edge_index(half_size: int) -> dict[Edge, int]:
    """Position of each K_{2n} edge in canonical order."""
    return {e: i for i, e in enumerate(complete_graph_edges(half_size))}

