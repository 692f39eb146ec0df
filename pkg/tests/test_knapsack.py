import numpy as np
import pytest

from _oracles import subsets
from gapcg.knapsack import (KnapsackProblem, LexKnapsackProblem,
                            brute_force_lex, lex_knapsack, min_knapsack)


def enum_min(problem: KnapsackProblem):
    bits = subsets(problem.n)
    ok = bits @ problem.weight <= problem.capacity
    vals = bits @ problem.profit
    return float(vals[ok].min())


def check_capacity(problem, selection):
    assert problem.weight[selection].sum() <= problem.capacity


# ---------------------------------------------------------------- min_knapsack

def test_min_knapsack_frozen_example():
    # brute force over all 8 subsets gives value -5 via items {0, 1}
    sol = min_knapsack(KnapsackProblem([-2, -3, -1], [3, 4, 5], 7))
    assert sol.value == -5
    assert list(np.flatnonzero(sol.selection)) == [0, 1]


def test_min_knapsack_all_nonnegative_profits():
    sol = min_knapsack(KnapsackProblem([1.0, 0.0, 2.5], [1, 1, 1], 3))
    assert sol.value == 0.0
    assert not sol.selection.any()


def test_min_knapsack_item_exceeding_capacity():
    sol = min_knapsack(KnapsackProblem([-10.0], [9], 5))
    assert sol.value == 0.0
    assert not sol.selection.any()


def test_min_knapsack_zero_weight_items():
    sol = min_knapsack(KnapsackProblem([-1.5, 0.0, -0.5], [0, 0, 0], 0))
    assert sol.value == -2.0
    assert list(sol.selection) == [True, False, True]


def test_min_knapsack_matches_enumeration_seeded():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 16))
        problem = KnapsackProblem(rng.normal(0, 5, n).round(4),
                                  rng.integers(0, 9, n), int(rng.integers(0, 51)))
        sol = min_knapsack(problem)
        check_capacity(problem, sol.selection)
        assert sol.value == pytest.approx(problem.profit[sol.selection].sum(), abs=1e-12)
        assert abs(sol.value - enum_min(problem)) <= 1e-9


def test_min_knapsack_capacity_monotone():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        profit = rng.normal(0, 3, n).round(3)
        weight = rng.integers(1, 8, n)
        cap = int(rng.integers(0, 30))
        lo = min_knapsack(KnapsackProblem(profit, weight, cap)).value
        hi = min_knapsack(KnapsackProblem(profit, weight, cap + int(rng.integers(1, 6)))).value
        assert hi <= lo + 1e-12


# ---------------------------------------------------------------- lex_knapsack

def lex_problem(sim, rc, w, cap, budget):
    return LexKnapsackProblem(sim, rc, w, cap, budget)


def test_lex_frozen_example():
    # brute force over all 8 subsets with lexicographic comparison
    res = lex_knapsack(lex_problem([1, 1, -1], [5, -4, -3], [2, 2, 2], 4, 0.0))
    assert res is not None
    sim, rc, sel = res
    assert sim == 1 and rc == -4.0
    assert list(np.flatnonzero(sel)) == [1]


def test_lex_unconstrained_budget():
    res = lex_knapsack(lex_problem([1, 1, 1], [2.0, -1.0, 3.0], [0, 0, 0], 0, np.inf))
    sim, rc, sel = res
    assert sim == 3 and rc == pytest.approx(4.0)
    assert sel.all()


def test_lex_infeasible_budget():
    assert lex_knapsack(lex_problem([1, 1], [3.0, 4.0], [1, 1], 2, -100.0)) is None


def test_lex_empty_problem():
    assert lex_knapsack(lex_problem([], [], [], 0, -1.0)) is None
    sim, rc, sel = lex_knapsack(lex_problem([], [], [], 0, 0.0))
    assert sim == 0 and rc == 0.0 and len(sel) == 0


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force_lex(lex_problem([0] * 21, [0.0] * 21, [1] * 21, 5, 0.0))


def test_brute_force_empty():
    assert brute_force_lex(lex_problem([], [], [], 0, -0.5)) is None
    sim, rc, sel = brute_force_lex(lex_problem([], [], [], 0, 0.0))
    assert sim == 0 and rc == 0.0


def test_lex_matches_brute_force_seeded():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        n = int(rng.integers(0, 13))
        problem = lex_problem(rng.integers(-1, 2, n), rng.normal(0, 5, n).round(4),
                              rng.integers(0, 8, n), int(rng.integers(0, 30)),
                              float(rng.normal(0, 4)))
        mine = lex_knapsack(problem)
        ref = brute_force_lex(problem)
        assert (mine is None) == (ref is None)
        if mine is not None:
            assert mine[0] == ref[0]
            assert abs(mine[1] - ref[1]) <= 1e-9
            check_capacity(problem, mine[2])
            assert problem.rc_coeff[mine[2]].sum() <= problem.rc_budget


def test_lex_budget_monotone_in_best_sim():
    rng = np.random.default_rng(8)
    for _ in range(200):
        n = int(rng.integers(1, 10))
        sim = rng.integers(-1, 2, n)
        rc = rng.normal(0, 5, n).round(3)
        w = rng.integers(0, 6, n)
        cap = int(rng.integers(0, 20))
        b1 = float(rng.normal(0, 3))
        b2 = b1 + float(rng.random() * 5)
        r1 = lex_knapsack(lex_problem(sim, rc, w, cap, b1))
        r2 = lex_knapsack(lex_problem(sim, rc, w, cap, b2))
        if r1 is not None:
            assert r2 is not None
            assert r2[0] >= r1[0]
