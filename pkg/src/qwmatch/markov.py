"""Finite Markov chains: validation, stationary laws, hitting times, walk search.

A chain works in one of two numeric modes. ``"rational"`` stores the
transition matrix as :class:`fractions.Fraction` entries and every derived
quantity is exact; ``"float"`` stores a float64 matrix and derived
quantities are checked against a residual of 1e-10. Small chains default
to rational mode (see ``RATIONAL_CAP``).
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from ._linalg import ITERATIVE_THRESHOLD, fixed_point, solve_float, solve_fraction
from .rng import stream_seed, stream_seeds

RATIONAL = "rational"
FLOAT = "float"
RATIONAL_CAP = 64
STOCHASTIC_TOL = 1e-12
RESIDUAL_TOL = 1e-10
DEFAULT_MAX_STEPS = 1_000_000


class ChainError(ValueError):
    """Invalid chain for the requested operation."""


class InfiniteHittingTime(ArithmeticError):
    """The marked set is unreachable from part of the initial distribution."""


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, (float, np.floating)):
        return Fraction(float(v))
    raise TypeError(f"cannot use {v!r} as a rational entry")


def _is_exact_value(v) -> bool:
    return isinstance(v, (Fraction, int, str, np.integer)) and not isinstance(v, bool)


class MarkovChain:
    """Row-stochastic chain on states ``0..N-1``.

    ``mode=None`` picks rational mode when every entry is exact (int,
    Fraction or "p/q" string) and ``N <= rational_cap``; otherwise float.
    """

    def __init__(self, transitions, mode: Optional[str] = None, labels: Optional[Sequence] = None,
                 rational_cap: int = RATIONAL_CAP):
        if isinstance(transitions, np.ndarray):
            rows = transitions.tolist() if transitions.dtype == object else transitions
        else:
            rows = [list(r) for r in transitions]
        n = len(rows)
        if n == 0:
            raise ChainError("a chain needs at least one state")
        for i, r in enumerate(rows):
            if len(r) != n:
                raise ChainError(f"transition matrix is not square: row {i} has {len(r)} entries, expected {n}")
        if mode is None:
            exact_input = not isinstance(rows, np.ndarray) and all(_is_exact_value(v) for r in rows for v in r)
            mode = RATIONAL if exact_input and n <= rational_cap else FLOAT
        if mode == RATIONAL:
            self.rows = tuple(tuple(_to_fraction(v) for v in r) for r in rows)
            for i, r in enumerate(self.rows):
                if any(v < 0 for v in r):
                    raise ChainError(f"row {i} has a negative entry")
                if sum(r) != 1:
                    raise ChainError(f"row {i} sums to {sum(r)}, not 1")
            self.matrix = None
        elif mode == FLOAT:
            m = np.array(rows, dtype=np.float64) if not isinstance(rows, np.ndarray) else rows.astype(np.float64)
            if not np.all(np.isfinite(m)):
                raise ChainError("transition matrix has non-finite entries")
            neg = np.flatnonzero((m < 0).any(axis=1))
            if neg.size:
                raise ChainError(f"row {neg[0]} has a negative entry")
            bad = np.flatnonzero(np.abs(m.sum(axis=1) - 1.0) > STOCHASTIC_TOL)
            if bad.size:
                raise ChainError(f"row {bad[0]} sums to {m[bad[0]].sum()!r}, not 1")
            self.matrix = m
            self.rows = None
        else:
            raise ChainError(f"unknown mode {mode!r}")
        self.mode = mode
        self.num_states = n
        self.labels = tuple(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != n:
            raise ChainError("labels must have one entry per state")

    @property
    def exact(self) -> bool:
        return self.mode == RATIONAL

    def __repr__(self):
        return f"MarkovChain(num_states={self.num_states}, mode={self.mode!r})"

    def entry(self, a: int, b: int):
        return self.rows[a][b] if self.exact else float(self.matrix[a, b])

    @cached_property
    def support(self) -> tuple[np.ndarray, ...]:
        """Positive-entry column indices per row."""
        if self.exact:
            return tuple(np.array([j for j, v in enumerate(r) if v], dtype=np.int64) for r in self.rows)
        return tuple(np.flatnonzero(row > 0) for row in self.matrix)

    @cached_property
    def float_matrix(self) -> np.ndarray:
        if self.exact:
            return np.array([[float(v) for v in r] for r in self.rows], dtype=np.float64)
        return self.matrix

    @cached_property
    def csr_cdf(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, indices, cumulative probabilities) with each row ending at exactly 1.0."""
        indptr = np.zeros(self.num_states + 1, dtype=np.int64)
        idx, cdf = [], []
        fm = self.float_matrix
        for a, cols in enumerate(self.support):
            if self.exact:
                probs = np.array([float(self.rows[a][j]) for j in cols])
            else:
                probs = fm[a, cols]
            c = np.cumsum(probs)
            c[-1] = 1.0
            idx.append(cols)
            cdf.append(c)
            indptr[a + 1] = indptr[a] + cols.size
        return indptr, np.concatenate(idx), np.concatenate(cdf)

    def _support_graph(self):
        indptr, indices, _ = self.csr_cdf
        data = np.ones(indices.size, dtype=np.int8)
        return csr_matrix((data, indices, indptr), shape=(self.num_states, self.num_states))

    @cached_property
    def report(self) -> "ValidationReport":
        return _validate(self)

    @cached_property
    def stationary(self) -> "Distribution":
        return _stationary(self)

    def step(self, dist: "Distribution") -> "Distribution":
        """The distribution after one transition, ``dist @ P``."""
        if self.exact != dist.exact:
            raise ChainError("distribution and chain use different numeric modes")
        if self.exact:
            out = [Fraction(0)] * self.num_states
            for a, w in enumerate(dist.weights):
                if w:
                    row = self.rows[a]
                    for b in self.support[a]:
                        out[b] += w * row[b]
            return Distribution(tuple(out))
        return Distribution(np.asarray(dist.weights) @ self.matrix, check=False)

    # serialization

    def to_json(self) -> str:
        if self.exact:
            rows = [[f"{v.numerator}/{v.denominator}" for v in r] for r in self.rows]
        else:
            rows = [[float(v) for v in r] for r in self.matrix]
        return json.dumps({"states": self.num_states, "rows": rows, "mode": self.mode})

    @classmethod
    def from_json(cls, text: str) -> "MarkovChain":
        doc = json.loads(text)
        if set(doc) != {"states", "rows", "mode"}:
            raise ChainError("chain JSON must have exactly the keys states, rows, mode")
        if doc["mode"] not in (RATIONAL, FLOAT):
            raise ChainError(f"unknown mode {doc['mode']!r}")
        if len(doc["rows"]) != doc["states"]:
            raise ChainError("row count does not match 'states'")
        if doc["mode"] == RATIONAL:
            rows = [[Fraction(v) for v in r] for r in doc["rows"]]
            return cls(rows, mode=RATIONAL)
        return cls(np.array(doc["rows"], dtype=np.float64), mode=FLOAT)


@dataclass(frozen=True)
class Distribution:
    """Probability vector over states; a tuple of Fractions or a float array."""

    weights: object
    check: bool = True

    def __post_init__(self):
        w = self.weights
        if isinstance(w, np.ndarray):
            w = w.astype(np.float64)
            object.__setattr__(self, "weights", w)
            if self.check and ((w < 0).any() or abs(w.sum() - 1.0) > STOCHASTIC_TOL):
                raise ValueError("weights must be nonnegative and sum to 1")
        else:
            w = tuple(_to_fraction(v) for v in w)
            object.__setattr__(self, "weights", w)
            if self.check and (any(v < 0 for v in w) or sum(w) != 1):
                raise ValueError("weights must be nonnegative and sum to 1")

    @property
    def exact(self) -> bool:
        return not isinstance(self.weights, np.ndarray)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    def mass(self, states: Iterable[int]):
        if self.exact:
            return sum((self.weights[x] for x in states), Fraction(0))
        return float(sum(self.weights[x] for x in states))

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.weights], dtype=np.float64)

    @classmethod
    def point_mass(cls, num_states: int, state: int, exact: bool = True) -> "Distribution":
        if exact:
            return cls(tuple(Fraction(int(i == state)) for i in range(num_states)))
        w = np.zeros(num_states)
        w[state] = 1.0
        return cls(w)


@dataclass(frozen=True)
class ValidationReport:
    stochastic: bool
    irreducible: bool
    aperiodic: bool
    reversible: bool
    period: int = 1

    @property
    def ergodic(self) -> bool:
        return self.irreducible and self.aperiodic


def _component_periods(chain: MarkovChain, labels: np.ndarray, ncomp: int) -> list[int]:
    """gcd of depth(a) + 1 - depth(b) over in-component support edges, per SCC."""
    depth = np.full(chain.num_states, -1, dtype=np.int64)
    periods = [0] * ncomp
    support = chain.support
    for root in range(chain.num_states):
        if depth[root] >= 0:
            continue
        comp = labels[root]
        depth[root] = 0
        queue = deque([root])
        g = 0
        while queue:
            a = queue.popleft()
            for b in support[a]:
                if labels[b] != comp:
                    continue
                if depth[b] < 0:
                    depth[b] = depth[a] + 1
                    queue.append(b)
                else:
                    g = math.gcd(g, abs(int(depth[a]) + 1 - int(depth[b])))
        periods[comp] = g
    return periods


def _validate(chain: MarkovChain) -> ValidationReport:
    ncomp, labels = connected_components(chain._support_graph(), directed=True, connection="strong")
    irreducible = ncomp == 1
    periods = _component_periods(chain, labels, ncomp)
    aperiodic = all(p == 1 for p in periods)
    reversible = False
    if irreducible:
        pi = _stationary(chain)
        reversible = _detailed_balance(chain, pi)
    return ValidationReport(
        stochastic=True,
        irreducible=irreducible,
        aperiodic=aperiodic,
        reversible=reversible,
        period=periods[0] if irreducible else 0,
    )


def validate(chain: MarkovChain) -> ValidationReport:
    """Stochasticity, irreducibility, aperiodicity and reversibility of ``chain``.

    Reversibility is checked by detailed balance against the unique
    stationary distribution, so it is only reported for irreducible chains.
    """
    return chain.report


def _detailed_balance(chain: MarkovChain, pi: Distribution) -> bool:
    if chain.exact:
        w, rows = pi.weights, chain.rows
        for a, cols in enumerate(chain.support):
            for b in cols:
                if w[a] * rows[a][b] != w[b] * rows[b][a]:
                    return False
        return True
    flow = np.asarray(pi.weights)[:, None] * chain.matrix
    return bool(np.max(np.abs(flow - flow.T)) <= RESIDUAL_TOL)


def _tree_stationary(chain: MarkovChain) -> Optional[list[Fraction]]:
    # Reversible fast path: propagate pi_b = pi_a P_ab / P_ba along a BFS tree.
    rows, n = chain.rows, chain.num_states
    w: list[Optional[Fraction]] = [None] * n
    w[0] = Fraction(1)
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in chain.support[a]:
            if w[b] is None:
                back = rows[b][a]
                if not back:
                    return None
                w[b] = w[a] * rows[a][b] / back
                queue.append(b)
    if any(v is None for v in w):
        return None
    total = sum(w)
    w = [v / total for v in w]
    if list(chain.step(Distribution(tuple(w))).weights) != w:
        return None
    return w


def _stationary(chain: MarkovChain) -> Distribution:
    ncomp, _ = connected_components(chain._support_graph(), directed=True, connection="strong")
    if ncomp != 1:
        raise ChainError("stationary distribution is not unique: chain is reducible")
    n = chain.num_states
    if chain.exact:
        w = _tree_stationary(chain)
        if w is None:
            # pi (P - I) = 0 with the last equation replaced by sum(pi) = 1
            a = [[chain.rows[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
            a[-1] = [Fraction(1)] * n
            b = [Fraction(0)] * (n - 1) + [Fraction(1)]
            w = solve_fraction(a, b)
        return Distribution(tuple(w))
    p = chain.matrix
    if n > ITERATIVE_THRESHOLD:
        lazy = 0.5 * (p + np.eye(n))
        w = fixed_point(lambda v: v @ lazy, np.full(n, 1.0 / n))
    else:
        a = p.T - np.eye(n)
        a[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        w = solve_float(a, b)
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    resid = np.max(np.abs(w @ p - w))
    if resid > RESIDUAL_TOL:
        raise ArithmeticError(f"stationary residual {resid:.3e} exceeds {RESIDUAL_TOL}")
    return Distribution(w)


def stationary_distribution(chain: MarkovChain) -> Distribution:
    """Unique pi with pi P = pi; rejects reducible chains."""
    return chain.stationary


def _marked_mask(chain: MarkovChain, marked) -> np.ndarray:
    mask = np.zeros(chain.num_states, dtype=bool)
    for x in marked:
        if not 0 <= int(x) < chain.num_states:
            raise IndexError(f"marked state {x} out of range")
        mask[int(x)] = True
    return mask


def _can_reach(chain: MarkovChain, mask: np.ndarray) -> np.ndarray:
    indptr, indices, _ = chain.csr_cdf
    preds: list[list[int]] = [[] for _ in range(chain.num_states)]
    for a in range(chain.num_states):
        for b in indices[indptr[a]:indptr[a + 1]]:
            preds[b].append(a)
    reach = mask.copy()
    queue = deque(np.flatnonzero(mask).tolist())
    while queue:
        b = queue.popleft()
        for a in preds[b]:
            if not reach[a]:
                reach[a] = True
                queue.append(a)
    return reach


def hitting_times(chain: MarkovChain, marked) -> list:
    """Expected number of transitions to reach ``marked`` from each state.

    Marked states get 0 and states that cannot reach the set get ``math.inf``.
    Solves ``h = 1 + P h`` on the remaining states.
    """
    mask = _marked_mask(chain, marked)
    if not mask.any():
        raise ValueError("marked set must be nonempty")
    reach = _can_reach(chain, mask)
    free = np.flatnonzero(reach & ~mask)
    pos = {int(x): i for i, x in enumerate(free)}
    k = free.size
    if chain.exact:
        a = [[Fraction(0)] * k for _ in range(k)]
        for i, x in enumerate(free):
            a[i][i] = Fraction(1)
            row = chain.rows[x]
            for y in chain.support[x]:
                j = pos.get(int(y))
                if j is not None:
                    a[i][j] -= row[y]
        h_free = solve_fraction(a, [Fraction(1)] * k) if k else []
        zero = Fraction(0)
    else:
        sub = chain.matrix[np.ix_(free, free)]
        if k > ITERATIVE_THRESHOLD:
            h_free = fixed_point(lambda h: 1.0 + sub @ h, np.zeros(k))
        else:
            h_free = solve_float(np.eye(k) - sub, np.ones(k)) if k else np.zeros(0)
        resid = np.max(np.abs(h_free - 1.0 - sub @ h_free), initial=0.0)
        if resid > RESIDUAL_TOL * max(1.0, float(np.max(np.abs(h_free), initial=0.0))):
            raise ArithmeticError(f"hitting-time residual {resid:.3e} exceeds tolerance")
        h_free = [float(v) for v in h_free]
        zero = 0.0
    out = [zero if mask[x] else math.inf for x in range(chain.num_states)]
    for i, x in enumerate(free):
        out[x] = h_free[i]
    return out


def expected_hitting_time(chain: MarkovChain, marked, initial: Optional[Distribution] = None):
    """E[H] for the first entrance into ``marked`` from ``initial``.

    ``initial`` defaults to the stationary distribution. H is 0 if the start
    is already marked. Raises :class:`InfiniteHittingTime` when any state
    with positive initial weight cannot reach the marked set.
    """
    if initial is None:
        initial = chain.stationary
    if len(initial) != chain.num_states:
        raise ValueError("initial distribution has the wrong length")
    h = hitting_times(chain, marked)
    total = Fraction(0) if chain.exact else 0.0
    for x, w in enumerate(initial.weights):
        if w:
            if h[x] == math.inf:
                raise InfiniteHittingTime(f"marked set unreachable from state {x}")
            total += (w if chain.exact else float(w)) * h[x]
    return total


@dataclass(frozen=True)
class WalkResult:
    state: Optional[int]
    steps: int
    timed_out: bool


@dataclass(frozen=True)
class SearchStats:
    steps: np.ndarray
    final_states: np.ndarray
    hits: np.ndarray

    @property
    def trials(self) -> int:
        return int(self.steps.size)

    @property
    def timeouts(self) -> int:
        return int((~self.hits).sum())

    @property
    def mean(self) -> float:
        return float(self.steps.mean())

    @property
    def std(self) -> float:
        return float(self.steps.std(ddof=1)) if self.steps.size > 1 else 0.0

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.steps.size)


def _start_cdf(dist: Distribution) -> np.ndarray:
    w = dist.as_float()
    c = np.cumsum(w)
    c[np.flatnonzero(w > 0)[-1]:] = 1.0
    return c


def _require_ergodic(chain: MarkovChain):
    rep = chain.report
    if not rep.ergodic:
        raise ChainError(
            f"random-walk search needs an ergodic chain (irreducible={rep.irreducible}, aperiodic={rep.aperiodic})"
        )


def simulate_search(chain: MarkovChain, marked, trials: int, seed: int,
                    max_steps: int = DEFAULT_MAX_STEPS, backend: Optional[str] = None) -> SearchStats:
    """Run ``trials`` independent random-walk searches from the stationary law.

    Trial ``i`` uses the SplitMix64 stream ``stream_seed(seed, i)``, so the
    result depends only on ``(seed, trials)`` and not on the backend.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _require_ergodic(chain)
    mask = _marked_mask(chain, marked)
    indptr, indices, cdf = chain.csr_cdf
    final, steps, hits = _kernels.walk_trials(
        indptr, indices, cdf, _start_cdf(chain.stationary), mask,
        stream_seeds(seed, trials), max_steps, backend=backend,
    )
    return SearchStats(steps=steps, final_states=final, hits=hits)


def random_walk_search(chain: MarkovChain, chi: Callable[[int], int], rng_seed: int,
                       max_steps: int = DEFAULT_MAX_STEPS, backend: Optional[str] = None) -> WalkResult:
    """One search: start from pi, step along rows of P until ``chi(x) == 1``.

    Uses trial stream 0 of ``rng_seed``. After ``max_steps`` transitions
    without success the result has ``timed_out=True`` and ``state=None``.
    """
    _require_ergodic(chain)
    mask = np.array([bool(chi(x)) for x in range(chain.num_states)])
    indptr, indices, cdf = chain.csr_cdf
    final, steps, hits = _kernels.walk_trials(
        indptr, indices, cdf, _start_cdf(chain.stationary), mask,
        np.array([stream_seed(rng_seed, 0)], dtype=np.uint64), max_steps, backend=backend,
    )
    if not hits[0]:
        return WalkResult(None, int(steps[0]), True)
    return WalkResult(int(final[0]), int(steps[0]), False)
