"""Brute-force reference computations, independent of the library code paths."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def all_pairings(items):
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for p in all_pairings(rest):
            yield [(first, items[i])] + p


def brute_perfect_matchings(num_vertices, edges):
    """Every pairing of the vertex set whose pairs are all edges, as sorted edge tuples."""
    if num_vertices % 2:
        return []
    es = set(edges)
    out = []
    for p in all_pairings(range(num_vertices)):
        cand = tuple(sorted(p))
        if all(e in es for e in cand):
            out.append(cand)
    return sorted(out)


def brute_max_matching_size(edges):
    edges = list(edges)
    for k in range(len(edges), -1, -1):
        for sub in itertools.combinations(edges, k):
            verts = [v for e in sub for v in e]
            if len(verts) == len(set(verts)):
                return k
    return 0


def survival_series_tau(p, marked, initial, terms=20000):
    """E[H] = sum_{j>=1} P(H >= j), summed by propagating the unabsorbed mass."""
    p = np.asarray(p, dtype=float)
    keep = np.ones(p.shape[0], dtype=bool)
    keep[list(marked)] = False
    mass = np.asarray(initial, dtype=float) * keep
    total = 0.0
    for _ in range(terms):
        s = mass.sum()
        if s < 1e-16:
            break
        total += s
        mass = (mass @ p) * keep
    return total


def power_stationary(p, iters=20000):
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    lazy = 0.5 * (p + np.eye(n))
    v = np.full(n, 1.0 / n)
    for _ in range(iters):
        v = v @ lazy
    return v


def random_rational_chain(rng, n, density=0.5, denom=6):
    """Random row-stochastic rational matrix with a Hamiltonian cycle plus a self-loop (ergodic)."""
    rows = []
    for a in range(n):
        w = [0] * n
        w[(a + 1) % n] = int(rng.integers(1, denom + 1))
        for b in range(n):
            if b != (a + 1) % n and rng.random() < density:
                w[b] = int(rng.integers(0, denom + 1))
        rows.append(w)
    rows[0][0] += 1
    return [[Fraction(v, sum(r)) for v in r] for r in rows]


def binom_product(m, k):
    """C(m, k) as prod_{j<k}(m - j) / k! with the factorial formed by a loop."""
    num = 1
    for j in range(k):
        num *= m - j
    den = 1
    for j in range(2, k + 1):
        den *= j
    q, rem = divmod(num, den)
    assert rem == 0
    return q
