"""Lagrangian-relaxation baseline over the same knapsack kernel.

Dualizing the cover rows decomposes the problem into one knapsack per
machine: ``L(pi) = sum(pi) + sum_i min_knapsack(c_i - pi)``. The concave,
piecewise-linear dual function is maximized by limited-memory quasi-Newton
ascent with a backtracking line search; every dual-function evaluation
(line-search probes included) counts as one iteration for reporting parity
with the column-generation loop.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .knapsack import KnapsackProblem, min_knapsack

MEMORY = 256
ARMIJO = 1e-4
MAX_BACKTRACKS = 30
FALLBACK_STEP = 1e-8
CONVERGENCE_TOL = 1e-6


@dataclass
class LrState:
    pi: np.ndarray
    best_bound: float = -np.inf
    best_pi: np.ndarray | None = None
    evaluations: int = 0
    memory: deque = field(default_factory=lambda: deque(maxlen=MEMORY))


@dataclass
class LrTraceRow:
    evaluation: int
    value: float
    best_bound: float
    accepted: bool


def lr_evaluate(inst, pi):
    """Dual function value, subgradient, and the per-machine selections."""
    pi = np.asarray(pi, dtype=np.float64)
    value = float(pi.sum())
    coverage = np.zeros(inst.num_jobs)
    selections = []
    for i in range(inst.num_machines):
        sol = min_knapsack(KnapsackProblem(inst.cost[i] - pi, inst.resource[i],
                                           int(inst.capacity[i])))
        value += sol.value
        coverage += sol.selection
        selections.append(sol.selection)
    return value, 1.0 - coverage, selections


def _two_loop(grad, memory):
    """Quasi-Newton ascent direction H*grad from the stored (s, y) pairs."""
    q = grad.copy()
    alphas = []
    for s, y in reversed(memory):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        q -= a * y
        alphas.append((rho, a, s, y))
    if memory:
        s, y = memory[-1]
        q *= float(s @ y) / float(y @ y)
    for rho, a, s, y in reversed(alphas):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def _integer_from_partition(inst, selections):
    assignment = np.full(inst.num_jobs, -1, dtype=np.int64)
    for i, sel in enumerate(selections):
        assignment[sel] = i
    ub = int(inst.cost[assignment, np.arange(inst.num_jobs)].sum())
    return assignment, ub


def lr_solve(inst, time_limit: float = 600.0):
    """Maximize the dual bound; returns (best_bound, best_pi, integer, trace).

    ``integer`` is ``(assignment, cost)`` when some probe's selections
    partitioned the jobs exactly, else None. Terminates when the change in
    the dual value between accepted iterates drops below 1e-6, when the
    subgradient vanishes, or when the time limit expires.
    """
    t_end = time.perf_counter() + time_limit
    trace: list[LrTraceRow] = []
    state = LrState(pi=np.zeros(inst.num_jobs))
    integer_solution = None

    def probe(pi, accepted):
        nonlocal integer_solution
        value, grad, sels = lr_evaluate(inst, pi)
        state.evaluations += 1
        if value > state.best_bound:
            state.best_bound = value
            state.best_pi = pi.copy()
        if not grad.any():
            found = _integer_from_partition(inst, sels)
            if integer_solution is None or found[1] < integer_solution[1]:
                integer_solution = found
        trace.append(LrTraceRow(state.evaluations, value, state.best_bound, accepted))
        return value, grad

    value, grad = probe(state.pi, accepted=True)
    if time_limit <= 0:
        return state.best_bound, state.best_pi, integer_solution, trace
    last_accepted_value = value
    consecutive_fallbacks = 0
    while True:
        if not grad.any():
            break  # stationary: dual optimum (and an exact partition)
        gnorm2 = float(grad @ grad)
        direction = _two_loop(grad, state.memory)
        if float(direction @ grad) <= 0.0:
            direction = grad.copy()
        step = 1.0
        accepted = False
        cand_pi = cand_value = cand_grad = None
        for _ in range(MAX_BACKTRACKS + 1):
            cand_pi = state.pi + step * direction
            cand_value, cand_grad = probe(cand_pi, accepted=False)
            if time.perf_counter() > t_end:
                return state.best_bound, state.best_pi, integer_solution, trace
            if cand_value >= value + ARMIJO * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # nonsmooth kink: take a tiny safeguarded gradient step, drop the
            # curvature history, and give the plain gradient a fresh chance
            state.memory.clear()
            cand_pi = state.pi + FALLBACK_STEP * grad
            cand_value, cand_grad = probe(cand_pi, accepted=True)
            consecutive_fallbacks += 1
        else:
            trace[-1].accepted = True
        s = cand_pi - state.pi
        y = -(cand_grad - grad)  # curvature pair for the concave objective
        if float(s @ y) > 1e-10:
            state.memory.append((s, y))
        state.pi, value, grad = cand_pi, cand_value, cand_grad
        if accepted:
            delta = value - last_accepted_value
            last_accepted_value = value
            consecutive_fallbacks = 0
            if abs(delta) < CONVERGENCE_TOL:
                break
        elif consecutive_fallbacks >= 3:
            break  # repeated kinks: the ascent has stalled for good
        if time.perf_counter() > t_end:
            break
    return state.best_bound, state.best_pi, integer_solution, trace
