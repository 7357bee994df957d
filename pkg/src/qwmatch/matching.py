"""Matchings, exhaustive perfect-matching enumeration and exact counting bounds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Optional, Sequence

from .graph import Edge, Graph, canonical_edge


@dataclass(frozen=True, order=True)
class Matching:
    """A set of vertex-disjoint edges, stored in canonical sorted order."""

    edges: tuple[Edge, ...]

    def __post_init__(self):
        edges = tuple(sorted(canonical_edge(int(u), int(v)) for u, v in self.edges))
        seen: set[int] = set()
        for u, v in edges:
            if u in seen or v in seen:
                raise ValueError(f"edges of a matching share a vertex at ({u}, {v})")
            seen.update((u, v))
        object.__setattr__(self, "edges", edges)

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(x for e in self.edges for x in e)

    def is_perfect(self, num_vertices: int) -> bool:
        return 2 * len(self.edges) == num_vertices and self.vertices == frozenset(range(num_vertices))

    def to_json(self) -> list[str]:
        return [f"{u}-{v}" for u, v in self.edges]

    @classmethod
    def from_json(cls, items: Iterable[str]) -> "Matching":
        pairs = []
        for item in items:
            u, _, v = item.partition("-")
            pairs.append((int(u), int(v)))
        return cls(tuple(pairs))


@dataclass(frozen=True)
class CountReport:
    phi: int
    psi_bound: Fraction
    enumerated_count: int


def enumerate_perfect_matchings(graph: Graph, limit: Optional[int] = None) -> list[Matching]:
    """All perfect matchings of ``graph`` in lexicographic order.

    Backtracking always matches the lowest uncovered vertex to each of its
    uncovered neighbors in ascending order, which yields the matchings
    already sorted. With ``limit`` set, the search stops as soon as
    ``limit + 1`` matchings are found, so ``len(result) > limit`` tells the
    caller there are more than ``limit``.
    """
    nv = graph.num_vertices
    if nv % 2:
        return []
    adj = graph.adjacency
    covered = [False] * nv
    stack: list[Edge] = []
    out: list[Matching] = []
    cap = None if limit is None else limit + 1

    def extend(start: int) -> bool:
        u = start
        while u < nv and covered[u]:
            u += 1
        if u == nv:
            out.append(Matching(tuple(stack)))
            return cap is not None and len(out) >= cap
        covered[u] = True
        for v in adj[u]:
            if v > u and not covered[v]:
                covered[v] = True
                stack.append((u, v))
                stop = extend(u + 1)
                stack.pop()
                covered[v] = False
                if stop:
                    covered[u] = False
                    return True
        covered[u] = False
        return False

    extend(0)
    return out


def double_factorial(k: int) -> int:
    result = 1
    while k > 1:
        result *= k
        k -= 2
    return result


def count_pm_complete(half_size: int) -> int:
    """Number of perfect matchings of K_{2n}, i.e. (2n-1)!!."""
    if half_size < 0:
        raise ValueError("half_size must be non-negative")
    return double_factorial(2 * half_size - 1)


def pm_count_upper_bound(num_edges: int, half_size: int) -> Fraction:
    """m^n / n!, an upper bound on perfect matchings of a 2n-vertex, m-edge graph."""
    m, n = num_edges, half_size
    if n < 1:
        raise ValueError("half_size must be >= 1")
    if m < n:
        raise ValueError(f"bound needs m >= n, got m={m}, n={n}")
    return Fraction(m**n, factorial(n))


def count_report(graph: Graph) -> CountReport:
    n = graph.num_vertices // 2
    return CountReport(
        phi=count_pm_complete(n),
        psi_bound=pm_count_upper_bound(graph.num_edges, n),
        enumerated_count=len(enumerate_perfect_matchings(graph)),
    )


def maximum_matching_bipartite(graph: Graph) -> Matching:
    """Maximum-cardinality matching by repeated augmenting-path search.

    Left vertices (the first bipartition part) are processed in ascending
    order and try neighbors in ascending order, so the result is
    deterministic.
    """
    if graph.bipartition is None:
        raise ValueError("graph has no bipartition")
    left = sorted(graph.bipartition[0])
    adj = graph.adjacency
    mate: dict[int, int] = {}  # right vertex -> left vertex

    def augment(u: int, seen: set[int]) -> bool:
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if v not in mate or augment(mate[v], seen):
                mate[v] = u
                return True
        return False

    for u in left:
        augment(u, set())
    return Matching(tuple((u, v) for v, u in mate.items()))


def is_unique_perfect_matching(graph: Graph) -> bool:
    return len(enumerate_perfect_matchings(graph, limit=1)) == 1


def matchings_to_edges(matchings: Sequence[Matching]) -> list[list[str]]:
    return [m.to_json() for m in matchings]
