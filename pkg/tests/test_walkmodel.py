import itertools
import math
from fractions import Fraction as F
from math import comb

import numpy as np
import pytest

from qwmatch.graph import MATRIX, QueryOracle, complete_graph, complete_graph_edges
from qwmatch.markov import MarkovChain
from qwmatch.matching import Matching, count_pm_complete, enumerate_perfect_matchings, is_unique_perfect_matching
from qwmatch.walkmodel import (
    Costs,
    WalkInstance,
    analyze,
    asymptotic_ratio,
    check_state,
    cost_model,
    eq1_lower_bound,
    eq2_upper_bound,
    hard_instance,
    johnson_instance,
    johnson_pi_marked,
    marked_set,
    pi_min,
    psi,
    query_budget,
)

from oracles import binom_product


def uniform_instance(n, xi_fn, c=2.0, epsilon=0.5):
    """A tiny lazy two-state chain where every state has the same query set."""
    half = [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]]
    return WalkInstance(MarkovChain(half), [xi_fn(), xi_fn()], n, c, epsilon)


def brute_marked(n, r, matching):
    edges = complete_graph_edges(n)
    need = set(matching.edges)
    return [i for i, s in enumerate(itertools.combinations(edges, r)) if need <= set(s)]


class TestMarkedSet:
    def test_johnson_n2_r3(self):
        inst = johnson_instance(2, 3)
        m = Matching(((0, 1), (2, 3)))
        got = marked_set(inst, m)
        assert len(got) == 4
        assert sorted(got) == brute_marked(2, 3, m)

    def test_empty_xi(self):
        inst = uniform_instance(2, frozenset)
        assert marked_set(inst, Matching(((0, 1), (2, 3)))) == frozenset()

    def test_full_xi(self):
        inst = uniform_instance(2, lambda: frozenset(complete_graph_edges(2)))
        assert marked_set(inst, Matching(((0, 2), (1, 3)))) == {0, 1}

    def test_rejects_non_perfect(self):
        with pytest.raises(ValueError):
            marked_set(johnson_instance(2, 3), Matching(((0, 1),)))

    @pytest.mark.parametrize("n, r", [(2, 2), (2, 3), (2, 4), (3, 3), (3, 4)])
    def test_oracle_equivalence(self, n, r):
        inst = johnson_instance(n, r)
        expected = johnson_pi_marked(n, r)
        total = comb(n * (2 * n - 1), r)
        for m in inst.perfect_matchings:
            ys = marked_set(inst, m)
            assert sorted(ys) == brute_marked(n, r, m)
            assert F(len(ys), total) == expected


class TestPiMinPsi:
    def test_johnson_n2_r3(self):
        inst = johnson_instance(2, 3)
        assert pi_min(inst) == (0, F(1, 5))
        assert psi(inst) == 1

    def test_johnson_n2_r2(self):
        assert pi_min(johnson_instance(2, 2)) == (0, F(1, 15))

    def test_full_xi(self):
        inst = uniform_instance(2, lambda: frozenset(complete_graph_edges(2)))
        assert pi_min(inst) == (0, 1)
        assert psi(inst) == 3 == count_pm_complete(2)

    def test_empty_xi(self):
        assert psi(uniform_instance(2, frozenset)) == 0

    def test_psi_brute_force(self):
        inst = johnson_instance(2, 4)
        pms = [set(m.edges) for m in enumerate_perfect_matchings(complete_graph(2))]
        expect = max(sum(p <= s for p in pms) for s in inst.xi)
        assert psi(inst) == expect == 2

    def test_float_mode_tie_breaks_to_first(self):
        inst = johnson_instance(3, 3)
        assert inst.chain.mode == "float"
        idx, val = pi_min(inst)
        assert idx == 0 and math.isclose(val, 1 / 455, rel_tol=1e-9)

    @pytest.mark.parametrize("n, r", [(2, 2), (2, 3), (2, 4)])
    def test_eq2_invariant(self, n, r):
        inst = johnson_instance(n, r)
        assert pi_min(inst)[1] <= eq2_upper_bound(psi(inst), count_pm_complete(n))


class TestFormulas:
    @pytest.mark.parametrize("p, expected", [(F(1, 5), 2), (F(1), 0), (F(1, 15), 7), (F(2, 5), F(1, 2))])
    def test_eq1(self, p, expected):
        assert eq1_lower_bound(p) == expected

    def test_eq1_float(self):
        assert eq1_lower_bound(0.25) == 1.5

    @pytest.mark.parametrize("p", [0, -1, F(3, 2)])
    def test_eq1_rejects(self, p):
        with pytest.raises(ValueError):
            eq1_lower_bound(p)

    def test_eq2(self):
        assert eq2_upper_bound(1, 3) == F(1, 3)
        assert eq2_upper_bound(15, 15) == 1
        assert eq2_upper_bound(0, 15) == 0
        with pytest.raises(ValueError):
            eq2_upper_bound(1, 0)

    @pytest.mark.parametrize(
        "args, expected",
        [((10, 1, 2, 100), (310, 40)), ((5, 3, 3, 0), (5, 5)), ((0, 0, 1, 4), (4, 2))],
    )
    def test_cost_model(self, args, expected):
        assert cost_model(*args) == pytest.approx(expected)

    def test_cost_model_rejects_negative(self):
        with pytest.raises(ValueError):
            cost_model(0, -1, 0, 1)

    def test_asymptotic_ratio_values(self):
        assert asymptotic_ratio(4, 1, 1) == pytest.approx(2 * (4 / math.e**2) ** 4, rel=1e-12)
        assert asymptotic_ratio(4, 1, 1) == pytest.approx(0.1718, abs=1e-4)
        assert asymptotic_ratio(1, 1, 1) == pytest.approx(math.exp(-2), rel=1e-12)
        direct = math.sqrt(3) * (3**0.5 / (2**0.5 * 2.0 * math.e**2)) ** 3
        assert asymptotic_ratio(3, 2.0, 0.5) == pytest.approx(direct, rel=1e-12)

    def test_asymptotic_ratio_growth(self):
        assert asymptotic_ratio(20, 1, 1) > asymptotic_ratio(10, 1, 1) * 1e6
        ratios = [asymptotic_ratio(n + 1, 1, 1) / asymptotic_ratio(n, 1, 1) for n in range(5, 40)]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))

    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 2)])
    def test_asymptotic_ratio_domain(self, bad):
        with pytest.raises(ValueError):
            asymptotic_ratio(*bad)

    @pytest.mark.parametrize("n, r, expected", [(2, 3, F(1, 5)), (2, 2, F(1, 15)), (3, 3, F(1, 455))])
    def test_johnson_pi_marked(self, n, r, expected):
        assert johnson_pi_marked(n, r) == expected

    def test_johnson_pi_marked_domain(self):
        with pytest.raises(ValueError):
            johnson_pi_marked(2, 7)


class TestJohnsonInstance:
    def test_n2_r3_rows(self):
        inst = johnson_instance(2, 3)
        assert inst.num_states == 20
        for row in inst.chain.rows:
            assert row.count(F(1, 9)) == 9 and row.count(F(0)) == 11

    def test_states_lexicographic_and_xi(self):
        inst = johnson_instance(2, 3)
        edges = complete_graph_edges(2)
        for x, combo in enumerate(itertools.combinations(edges, 3)):
            assert inst.xi[x] == frozenset(combo)

    def test_ergodic_reversible(self):
        for lazy in (False, True):
            rep = johnson_instance(2, 3, lazy=lazy).chain.report
            assert rep.ergodic and rep.reversible

    def test_lazy_diagonal(self):
        inst = johnson_instance(2, 3, lazy=True)
        assert all(inst.chain.rows[i][i] == F(1, 2) for i in range(20))
        assert inst.chain.rows[0].count(F(1, 18)) == 9

    def test_non_lazy_rejected_near_full(self):
        with pytest.raises(ValueError):
            johnson_instance(2, 6)
        with pytest.raises(ValueError):
            johnson_instance(2, 5)

    def test_lazy_full_subset_single_state(self):
        inst = johnson_instance(2, 6, lazy=True, c=2.0)
        assert inst.num_states == 1 and inst.chain.report.ergodic

    @pytest.mark.parametrize("n, r", [(2, 1), (2, 7), (0, 1)])
    def test_rejects_bad_sizes(self, n, r):
        with pytest.raises(ValueError):
            johnson_instance(n, r)

    def test_budget_enforced(self):
        assert query_budget(2, 1.0, 1.0) == 4
        johnson_instance(2, 4)
        with pytest.raises(ValueError, match="budget"):
            johnson_instance(2, 4, epsilon=1.5)

    def test_xi_sizes(self):
        inst = johnson_instance(3, 4)
        assert all(len(s) == 4 for s in inst.xi)

    def test_state_cap(self):
        with pytest.raises(ValueError, match="cap"):
            johnson_instance(3, 6, c=3.0)

    def test_walk_instance_rejects_foreign_edges(self):
        with pytest.raises(ValueError):
            WalkInstance(MarkovChain([[1]]), [frozenset({(0, 9)})], 2)


class TestAnalyze:
    def test_n2_r3(self):
        rep = analyze(johnson_instance(2, 3))
        assert (rep.phi, rep.psi, rep.pi_min, rep.eq1_lower_bound) == (3, 1, F(1, 5), 2)
        assert rep.pi_min_upper == F(1, 3)
        assert rep.exact_tau >= 2
        assert rep.classical_cost == pytest.approx(float(rep.exact_tau) * 2)
        assert rep.quantum_cost == pytest.approx(math.sqrt(rep.exact_tau) * 2)

    def test_n2_r2(self):
        rep = analyze(johnson_instance(2, 2))
        assert (rep.pi_min, rep.eq1_lower_bound) == (F(1, 15), 7)
        assert rep.exact_tau >= 7

    def test_degenerate_full_xi(self):
        inst = uniform_instance(2, lambda: frozenset(complete_graph_edges(2)))
        rep = analyze(inst)
        assert (rep.pi_min, rep.eq1_lower_bound, rep.exact_tau) == (1, 0, 0)

    def test_exact_tau_omitted_above_cap(self):
        rep = analyze(johnson_instance(2, 3), exact_cap=10)
        assert rep.exact_tau is None
        assert rep.classical_cost == pytest.approx(float(rep.eq1_lower_bound) * 2)

    def test_float_instance(self):
        rep = analyze(johnson_instance(3, 3))
        assert rep.exact_tau >= rep.eq1_lower_bound == 227
        assert rep.pi_min <= float(rep.pi_min_upper)

    def test_costs_used(self):
        inst = johnson_instance(2, 3, costs=Costs(10, 1, 2))
        rep = analyze(inst)
        assert rep.classical_cost == pytest.approx(10 + 3 * float(rep.exact_tau))


class TestHardInstance:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_unique_matching_relabelled(self, n):
        target = enumerate_perfect_matchings(complete_graph(n))[-1]
        g = hard_instance(n, target)
        assert g.num_edges == n * (n + 1) // 2
        assert is_unique_perfect_matching(g)
        assert enumerate_perfect_matchings(g) == [target]

    @pytest.mark.parametrize("n, r", [(2, 3), (2, 4), (3, 3)])
    def test_oracle_checks_find_exactly_y1(self, n, r):
        # On the hard graph only states whose query set holds M_1 can certify
        # a perfect matching, and each check stays inside the query budget.
        inst = johnson_instance(n, r)
        idx, _ = pi_min(inst)
        m1 = inst.perfect_matchings[idx]
        g = hard_instance(n, m1)
        cap = math.floor(query_budget(n, inst.c, inst.epsilon))
        found = set()
        for x in range(inst.num_states):
            oracle = QueryOracle(g, MATRIX, budget=cap)
            if check_state(inst, x, oracle):
                found.add(x)
            assert oracle.query_count == len(inst.xi[x]) <= cap
        assert found == marked_set(inst, m1)


def test_binom_product_oracle_agrees():
    for m in range(0, 40):
        for k in range(0, m + 1):
            assert binom_product(m, k) == comb(m, k)
