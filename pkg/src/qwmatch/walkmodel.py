"""Edge-independent walk instances and the hitting-time bound pipeline.

A :class:`WalkInstance` is a chain whose states are annotated with the
edge sets ``xi(x)`` of K_{2n} that the check step reads. A state is marked
for a perfect matching ``M`` when ``M`` is contained in ``xi(x)``. From
these sets the module computes the least-likely matching mass ``pi_min``,
the per-state matching count ``psi``, and the two bounds

    tau >= (floor(1 / pi_min) - 1) / 2        pi_min <= psi / phi

where ``phi = (2n-1)!!``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Optional, Sequence, Union

import numpy as np

from .graph import Edge, Graph, QueryOracle, complete_graph, complete_graph_edges, unique_pm_bipartite
from .markov import RATIONAL_CAP, MarkovChain, expected_hitting_time
from .matching import Matching, count_pm_complete, enumerate_perfect_matchings

Number = Union[int, float, Fraction]

JOHNSON_STATE_CAP = 5000
EXACT_TAU_CAP_FLOAT = 2000
EXACT_TAU_CAP_RATIONAL = 64


@dataclass(frozen=True)
class Costs:
    setup: float = 0.0
    transition: float = 1.0
    check: float = 1.0


def query_budget(half_size: int, c: float, epsilon: float) -> float:
    """c (2n)^(2 - epsilon): the per-state cap on |xi(x)|."""
    if c <= 0 or not 0 < epsilon < 2:
        raise ValueError("need c > 0 and 0 < epsilon < 2")
    return c * (2 * half_size) ** (2 - epsilon)


@dataclass
class WalkInstance:
    chain: MarkovChain
    xi: Sequence[frozenset]
    half_size: int
    c: float = 1.0
    epsilon: float = 1.0
    costs: Costs = field(default_factory=Costs)

    def __post_init__(self):
        n = self.half_size
        if n < 1:
            raise ValueError("half_size must be >= 1")
        self.xi = tuple(frozenset(tuple(e) for e in s) for s in self.xi)
        if len(self.xi) != self.chain.num_states:
            raise ValueError("xi needs one edge set per chain state")
        budget = query_budget(n, self.c, self.epsilon)
        valid = set(complete_graph_edges(n))
        for x, s in enumerate(self.xi):
            if len(s) > budget * (1 + 1e-12):
                raise ValueError(
                    f"state {x} reads {len(s)} edges, above the budget c(2n)^(2-eps) = {budget:g}"
                )
            bad = s - valid
            if bad:
                raise ValueError(f"state {x} has edges outside K_{2 * n}: {sorted(bad)[:3]}")

    @property
    def num_states(self) -> int:
        return self.chain.num_states

    @cached_property
    def perfect_matchings(self) -> tuple[Matching, ...]:
        """All perfect matchings of K_{2n}; position i is matching index i."""
        return tuple(enumerate_perfect_matchings(complete_graph(self.half_size)))

    @cached_property
    def containment(self) -> np.ndarray:
        """Boolean (states x matchings) table of M_i subset of xi(x)."""
        index = {e: i for i, e in enumerate(complete_graph_edges(self.half_size))}
        xi_inc = np.zeros((self.num_states, len(index)), dtype=np.int32)
        for x, s in enumerate(self.xi):
            for e in s:
                xi_inc[x, index[e]] = 1
        pm_inc = np.zeros((len(self.perfect_matchings), len(index)), dtype=np.int32)
        for i, m in enumerate(self.perfect_matchings):
            for e in m.edges:
                pm_inc[i, index[e]] = 1
        return (xi_inc @ pm_inc.T) == self.half_size


def marked_set(instance: WalkInstance, matching: Matching) -> frozenset[int]:
    """States whose query set contains every edge of ``matching``."""
    if not matching.is_perfect(2 * instance.half_size):
        raise ValueError("marked sets are defined for perfect matchings of K_2n")
    need = set(matching.edges)
    return frozenset(x for x, s in enumerate(instance.xi) if need <= s)


def marked_masses(instance: WalkInstance) -> list:
    """Stationary mass of Y_i for every perfect matching index i."""
    pi = instance.chain.stationary
    table = instance.containment
    if pi.exact:
        return [pi.mass(np.flatnonzero(table[:, i])) for i in range(table.shape[1])]
    return [float(v) for v in table.T.astype(np.float64) @ np.asarray(pi.weights)]


def pi_min(instance: WalkInstance) -> tuple[int, Number]:
    """(index, value) of the perfect matching with least marked mass; lowest index on ties."""
    rep = instance.chain.report
    if not rep.ergodic:
        raise ValueError("pi_min needs an ergodic chain")
    masses = marked_masses(instance)
    low = min(masses)
    if not instance.chain.exact:
        low += 1e-12 * max(low, 1e-300)
    best = next(i for i, v in enumerate(masses) if v <= low)
    return best, masses[best]


def psi(instance: WalkInstance) -> int:
    """Largest number of perfect matchings contained in a single xi(x)."""
    return int(instance.containment.sum(axis=1).max(initial=0))


def eq1_lower_bound(pi_min_value: Number) -> Number:
    """(floor(1/p) - 1) / 2; exact for rational input, 1e-9-snapped for floats."""
    if pi_min_value <= 0 or pi_min_value > 1:
        raise ValueError("pi_min must lie in (0, 1]")
    if isinstance(pi_min_value, (int, Fraction)):
        return Fraction(math.floor(1 / Fraction(pi_min_value)) - 1, 2)
    inv = 1.0 / pi_min_value
    near = round(inv)
    # 1/pi_min within float noise of an integer counts as that integer
    k = near if abs(inv - near) <= 1e-9 * inv else math.floor(inv)
    return (k - 1) / 2


def eq2_upper_bound(psi_value: int, phi_value: int) -> Fraction:
    if phi_value < 1:
        raise ValueError("phi must be >= 1")
    if psi_value < 0:
        raise ValueError("psi must be >= 0")
    return Fraction(psi_value, phi_value)


def cost_model(setup: float, transition: float, check: float, tau: Number) -> tuple[float, float]:
    """Classical S + tau (T + C) and quantized S + sqrt(tau) (T + C).

    The polylogarithmic factor of the quantized cost is not modeled.
    """
    if min(setup, transition, check, tau) < 0:
        raise ValueError("costs and tau must be nonnegative")
    per_step = float(transition) + float(check)
    return float(setup) + float(tau) * per_step, float(setup) + math.sqrt(tau) * per_step


def log_asymptotic_ratio(n: int, c: float, epsilon: float) -> float:
    if n < 1 or c <= 0 or not 0 < epsilon < 2:
        raise ValueError("need n >= 1, c > 0, 0 < epsilon < 2")
    return 0.5 * math.log(n) + n * (epsilon * math.log(n) - (1 - epsilon) * math.log(2) - math.log(c) - 2)


def asymptotic_ratio(n: int, c: float, epsilon: float) -> float:
    """sqrt(n) (n^eps / (2^(1-eps) c e^2))^n, evaluated in log space."""
    lg = log_asymptotic_ratio(n, c, epsilon)
    return math.exp(lg) if lg < 709.0 else math.inf


def johnson_instance(half_size: int, subset_size: int, lazy: bool = False, c: float = 1.0,
                     epsilon: float = 1.0, costs: Optional[Costs] = None,
                     rational_cap: int = RATIONAL_CAP, state_cap: int = JOHNSON_STATE_CAP) -> WalkInstance:
    """Swap walk on r-subsets of E(K_{2n}) with xi(x) = x.

    From subset x the walk removes one edge and adds one absent edge, each
    of the r(m - r) swaps equally likely; the lazy variant first stays put
    with probability 1/2. The chain is symmetric, hence reversible with a
    uniform stationary law.
    """
    n, r = half_size, subset_size
    if n < 1:
        raise ValueError("half_size must be >= 1")
    m = n * (2 * n - 1)
    if not n <= r <= m:
        raise ValueError(f"subset size r={r} must satisfy n={n} <= r <= m={m}")
    if not lazy and m - r < 2:
        raise ValueError(f"non-lazy walk needs m - r >= 2 for aperiodicity (m={m}, r={r}); use lazy=True")
    size = comb(m, r)
    if size > state_cap:
        raise ValueError(f"C({m},{r}) = {size} states exceeds the enumeration cap {state_cap}")
    edges = complete_graph_edges(n)
    states = list(itertools.combinations(range(m), r))
    where = {s: i for i, s in enumerate(states)}
    degree = r * (m - r)
    exact = size <= rational_cap
    if degree == 0:
        stay, move = 1, 0
    elif lazy:
        stay, move = Fraction(1, 2), Fraction(1, 2 * degree)
    else:
        stay, move = 0, Fraction(1, degree)

    def neighbors(s):
        inside = set(s)
        outside = [e for e in range(m) if e not in inside]
        for out in s:
            rest = inside - {out}
            for new in outside:
                yield where[tuple(sorted(rest | {new}))]

    if exact:
        zero = Fraction(0)
        rows = []
        for i, s in enumerate(states):
            row = [zero] * size
            row[i] = Fraction(stay)
            for j in neighbors(s):
                row[j] = move
            rows.append(row)
        chain = MarkovChain(rows, mode="rational", rational_cap=rational_cap)
    else:
        mat = np.zeros((size, size))
        fmove = float(move)
        for i, s in enumerate(states):
            mat[i, i] = float(stay)
            for j in neighbors(s):
                mat[i, j] = fmove
        chain = MarkovChain(mat, mode="float")
    xi = [frozenset(edges[k] for k in s) for s in states]
    return WalkInstance(chain, xi, n, c, epsilon, costs or Costs())


def johnson_pi_marked(half_size: int, subset_size: int) -> Fraction:
    """C(m - n, r - n) / C(m, r): uniform mass of the r-subsets holding one fixed perfect matching."""
    n, r = half_size, subset_size
    if n < 1:
        raise ValueError("half_size must be >= 1")
    m = n * (2 * n - 1)
    if not n <= r <= m:
        raise ValueError(f"need n <= r <= m, got n={n}, r={r}, m={m}")
    return Fraction(comb(m - n, r - n), comb(m, r))


def hard_instance(half_size: int, matching: Matching) -> Graph:
    """Bipartite graph with n(n+1)/2 edges whose only perfect matching is ``matching``."""
    n = half_size
    if not matching.is_perfect(2 * n):
        raise ValueError("matching must be perfect on 2n vertices")
    perm = [0] * (2 * n)
    for i, (a, b) in enumerate(matching.edges):
        perm[i], perm[n + i] = a, b
    return unique_pm_bipartite(n).relabel(perm)


def check_state(instance: WalkInstance, state: int, oracle: QueryOracle) -> int:
    """Evaluate the check step on ``state`` through a matrix oracle.

    Queries every edge of xi(state) once and reports 1 when the present
    edges contain a perfect matching of the 2n vertices.
    """
    present = [e for e in sorted(instance.xi[state]) if oracle.query(*e)]
    sub = Graph.from_edges(2 * instance.half_size, present)
    return int(bool(enumerate_perfect_matchings(sub, limit=0)))


@dataclass(frozen=True)
class BoundReport:
    half_size: int
    num_states: int
    phi: int
    psi: int
    pi_min_index: int
    pi_min: Number
    pi_min_upper: Fraction
    eq1_lower_bound: Number
    exact_tau: Optional[Number]
    classical_cost: float
    quantum_cost: float
    asymptotic_ratio: float

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def analyze(instance: WalkInstance, compute_exact_tau: bool = True, exact_cap: Optional[int] = None) -> BoundReport:
    """Assemble Phi, Psi, pi_min, both bounds, costs and (optionally) the exact tau of Y_1.

    ``exact_cap`` bounds the state count for the hitting-time solve; it
    defaults to 64 for rational chains and 2000 for float chains. Costs use
    the exact tau when available and the eq1 lower bound otherwise.
    """
    chain = instance.chain
    n = instance.half_size
    phi = count_pm_complete(n)
    psi_value = psi(instance)
    idx, pmin = pi_min(instance)
    upper = eq2_upper_bound(psi_value, phi)
    if pmin > 0:
        eq1 = eq1_lower_bound(pmin)
    else:
        eq1 = math.inf
    cap = exact_cap if exact_cap is not None else (EXACT_TAU_CAP_RATIONAL if chain.exact else EXACT_TAU_CAP_FLOAT)
    tau = None
    if compute_exact_tau and chain.num_states <= cap and pmin > 0:
        y1 = marked_set(instance, instance.perfect_matchings[idx])
        tau = expected_hitting_time(chain, y1, chain.stationary)
    cost_tau = tau if tau is not None else eq1
    classical, quantum = cost_model(
        instance.costs.setup, instance.costs.transition, instance.costs.check, cost_tau
    )
    report = BoundReport(
        half_size=n,
        num_states=chain.num_states,
        phi=phi,
        psi=psi_value,
        pi_min_index=idx,
        pi_min=pmin,
        pi_min_upper=upper,
        eq1_lower_bound=eq1,
        exact_tau=tau,
        classical_cost=classical,
        quantum_cost=quantum,
        asymptotic_ratio=asymptotic_ratio(n, instance.c, instance.epsilon),
    )
    slack = 0 if chain.exact else 1e-10
    if report.pi_min > report.pi_min_upper + slack:
        raise ArithmeticError(f"pi_min {report.pi_min} exceeds psi/phi {report.pi_min_upper}")
    if tau is not None and tau < eq1 - slack:
        raise ArithmeticError(f"exact tau {tau} is below the lower bound {eq1}")
    return report
