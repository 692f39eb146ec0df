"""Per-machine pricing strategies for the column-generation loop.

Four strategies map master duals (and, for the template pair, a target
vector per machine) to candidate columns:

* ``dantzig_price``  - plain minimum reduced cost via a knapsack solve.
* ``pessoa_round``   - directional dual smoothing with adaptive mixing and
  a limited backtracking search over smoothing intensities; falls back to
  plain pricing when smoothing finds nothing.
* ``lt_price``       - heuristic template pricing: a Lagrangian scalarization
  of (similarity, reduced cost) tuned by bisection on the trade-off weight.
* ``mt_price``       - exact template pricing via the lexicographic knapsack.

Every strategy only ever returns columns whose reduced cost under the true
duals clears ``mu_i - eps``; the heuristics differ in which such column they
prefer. Phase-one variants replace the cost row by zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .knapsack import KnapsackProblem, LexKnapsackProblem, lex_knapsack, min_knapsack

DEFAULT_EPSILON = 1e-6
DEFAULT_DELTA = 1e-6
LT_MAX_ITERATIONS = 64
LT_RELATIVE_GAP = 1e-3
LT_ABSOLUTE_FLOOR = 1e-9


@dataclass(eq=False)
class TemplateSet:
    """Per-machine target vectors in [0, 1] plus the classification threshold."""

    y: np.ndarray  # (num_machines, num_jobs) floats in [0, 1]
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        self.y = np.clip(np.asarray(self.y, dtype=np.float64), 0.0, 1.0)
        if not 0.0 <= self.delta <= 0.5:
            raise ValueError("delta must lie in [0, 0.5]")


@dataclass(eq=False)
class PricingOutcome:
    machine: int
    selection: np.ndarray | None  # bool mask over jobs; None: no good column
    cost: int | None = None       # true instance cost of the selection
    dantzig_rc: float | None = None
    similarity: int | None = None
    alpha_used: float | None = None
    flagged: bool = False
    proof_fired: bool = False  # LT only: similarity optimality was certified


@dataclass(eq=False)
class PessoaState:
    pi_hat: np.ndarray | None = None
    g_hat: np.ndarray | None = None
    alpha: float = 0.0
    last_rmp_objective: float = math.inf
    freeze_alpha: bool = False


@dataclass(eq=False)
class LtState:
    alpha_warm: np.ndarray = field(default_factory=lambda: np.array([]))

    @classmethod
    def fresh(cls, num_machines: int) -> "LtState":
        return cls(alpha_warm=np.full(num_machines, 0.5))


def similarity_class(y_j: float, delta: float) -> int:
    """Classify a template entry: +1 near one, -1 near zero, 0 in between."""
    if y_j > 1.0 - delta:
        return 1
    if y_j < delta:
        return -1
    return 0


def similarity_vector(y, delta: float) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    return np.where(y > 1.0 - delta, 1, np.where(y < delta, -1, 0)).astype(np.int64)


def reduced_cost_sum(cost_row, pi, selection) -> float:
    """Shared reduced-cost accumulation so pricing and audits agree exactly."""
    return float((np.asarray(cost_row, dtype=np.float64) - pi)[selection].sum())


def _cost_row(inst, i: int, phase1: bool) -> np.ndarray:
    if phase1:
        return np.zeros(inst.num_jobs)
    return inst.cost[i].astype(np.float64)


def _true_cost(inst, i: int, selection) -> int:
    return int(inst.cost[i][selection].sum())


def dantzig_price(inst, i: int, pi, mu_i: float, eps: float = DEFAULT_EPSILON,
                  phase1: bool = False) -> PricingOutcome:
    """Minimum reduced-cost column for machine i, or absent if none is good."""
    cost_row = _cost_row(inst, i, phase1)
    sol = min_knapsack(KnapsackProblem(cost_row - pi, inst.resource[i], int(inst.capacity[i])))
    rc = sol.value - mu_i
    if rc > -eps:
        return PricingOutcome(machine=i, selection=None, dantzig_rc=rc)
    return PricingOutcome(machine=i, selection=sol.selection,
                          cost=_true_cost(inst, i, sol.selection), dantzig_rc=rc)


def mt_price(inst, i: int, y_i, pi, mu_i: float, eps: float = DEFAULT_EPSILON,
             phase1: bool = False, delta: float = DEFAULT_DELTA) -> PricingOutcome:
    """Exact template pricing: maximize similarity over the good columns,
    break ties by minimum reduced cost."""
    cost_row = _cost_row(inst, i, phase1)
    rc_coeff = cost_row - pi
    base = min_knapsack(KnapsackProblem(rc_coeff, inst.resource[i], int(inst.capacity[i])))
    dantzig_rc = base.value - mu_i
    if dantzig_rc > -eps:
        return PricingOutcome(machine=i, selection=None, dantzig_rc=dantzig_rc)
    f = similarity_vector(y_i, delta)
    res = lex_knapsack(LexKnapsackProblem(f, rc_coeff, inst.resource[i],
                                          int(inst.capacity[i]), mu_i - eps))
    if res is None:  # the minimum-rc column itself fits the budget
        raise AssertionError("lex search empty although a good column exists")
    best_sim, _, sel = res
    return PricingOutcome(machine=i, selection=sel, cost=_true_cost(inst, i, sel),
                          dantzig_rc=dantzig_rc, similarity=int(best_sim))


def lt_price(inst, i: int, y_i, pi, mu_i: float, eps: float = DEFAULT_EPSILON,
             state: LtState | None = None, phase1: bool = False,
             delta: float = DEFAULT_DELTA, literal_mode: bool = False,
             trace: list | None = None) -> PricingOutcome:
    """Heuristic template pricing via a scalarized knapsack and bisection.

    For a trade-off weight ``alpha`` the subproblem minimizes
    ``-similarity + alpha * reduced_cost`` over the machine's feasible
    selections. Bisection finds the smallest alpha whose minimizer clears the
    reduced-cost budget, warm-started per machine from the previous call. The
    best budget-clearing selection seen anywhere during the search is
    returned (``literal_mode`` returns the minimizer at the final upper
    weight instead). When the search proves the returned similarity optimal,
    the result matches :func:`mt_price` exactly.
    """
    cost_row = _cost_row(inst, i, phase1)
    rc_coeff = cost_row - pi
    weights = inst.resource[i]
    cap = int(inst.capacity[i])
    base = min_knapsack(KnapsackProblem(rc_coeff, weights, cap))
    dantzig_rc = base.value - mu_i
    if dantzig_rc > -eps:
        return PricingOutcome(machine=i, selection=None, dantzig_rc=dantzig_rc)
    f = similarity_vector(y_i, delta)
    budget = mu_i - eps
    lo, up = 0.0, math.inf
    alpha = float(state.alpha_warm[i]) if state is not None else 0.5
    best = None      # (sim, rc, selection) with max sim then min rc
    at_up = None     # minimizer at the last alpha that tightened the upper end
    proof_fired = False
    for _ in range(LT_MAX_ITERATIONS):
        scalarized = min_knapsack(KnapsackProblem(-f + alpha * rc_coeff, weights, cap))
        x = scalarized.selection
        rc_x = float(rc_coeff[x].sum())
        sim_x = int(f[x].sum())
        member = rc_x <= budget
        if trace is not None:
            trace.append((alpha, lo, up, member))
        if member:
            up = alpha
            at_up = (sim_x, rc_x, x)
            if best is None or sim_x > best[0] or (sim_x == best[0] and rc_x < best[1]):
                best = (sim_x, rc_x, x)
        else:
            lo = alpha
        if best is not None:
            sim_cap = math.floor(alpha * mu_i - scalarized.value + 1e-9)
            if best[0] >= sim_cap:
                proof_fired = True
                break
        if math.isfinite(up):
            if lo > 0.0 and (up - lo) / lo <= LT_RELATIVE_GAP:
                break
            if lo == 0.0 and up <= LT_ABSOLUTE_FLOOR:
                break
            alpha = (lo + up) / 2.0
        else:
            alpha = 2.0 * alpha
    if best is None:
        # Bisection exhausted without confirming membership even though the
        # minimum-rc column qualifies: fall back to it so the loop progresses.
        sel = base.selection
        return PricingOutcome(machine=i, selection=sel, cost=_true_cost(inst, i, sel),
                              dantzig_rc=dantzig_rc,
                              similarity=int(f[sel].sum()), flagged=True)
    sim, rc, sel = at_up if literal_mode else best
    if state is not None:
        state.alpha_warm[i] = up
    return PricingOutcome(machine=i, selection=sel, cost=_true_cost(inst, i, sel),
                          dantzig_rc=dantzig_rc, similarity=int(sim), alpha_used=up,
                          proof_fired=proof_fired)


def _smoothed_duals(pi_t, pi_hat, g_hat, alpha_k: float, k: int):
    """Smoothing target for backtracking step k; None marks pure duals."""
    if alpha_k <= 0.0:
        return None
    pi_k = alpha_k * pi_hat + (1.0 - alpha_k) * pi_t
    if k != 1:
        return pi_k
    g_norm = float(np.linalg.norm(g_hat))
    gap = pi_t - pi_hat
    gap_norm = float(np.linalg.norm(gap))
    if g_norm <= 0.0 or gap_norm <= 0.0:
        return pi_k
    pi_g = pi_hat + gap_norm * g_hat / g_norm
    beta = float(gap @ (pi_g - pi_hat)) / (gap_norm * float(np.linalg.norm(pi_g - pi_hat)))
    rho = beta * pi_g + (1.0 - beta) * pi_t
    dev = rho - pi_hat
    dev_norm = float(np.linalg.norm(dev))
    if dev_norm <= 0.0:
        return pi_k
    pk_norm = float(np.linalg.norm(pi_k - pi_hat))
    return np.maximum(0.0, pi_hat + pk_norm * dev / dev_norm)


def pessoa_round(state: PessoaState, inst, pi_t, mu, eps: float = DEFAULT_EPSILON,
                 rmp_objective: float = math.inf):
    """One full smoothing round across all machines.

    Tries smoothing intensities k = 1..9 (k = 1 additionally bends the
    smoothed point toward the stored subgradient direction when available),
    then reverts to pure duals. A round is accepted as soon as one machine's
    minimizer clears the true reduced-cost budget; only the machines that
    clear it contribute columns. Returns ``(outcomes, state, k_used)``;
    ``dantzig_rc`` is populated only on rounds priced with the pure duals.
    """
    pi_t = np.asarray(pi_t, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if state.pi_hat is None:
        state.pi_hat = pi_t.copy()
        state.g_hat = np.zeros_like(pi_t)
    ni = inst.num_machines

    def price_all(pi_price):
        sols = [min_knapsack(KnapsackProblem(inst.cost[i] - pi_price, inst.resource[i],
                                             int(inst.capacity[i])))
                for i in range(ni)]
        true_rc = np.array([reduced_cost_sum(inst.cost[i], pi_t, sols[i].selection) - mu[i]
                            for i in range(ni)])
        return sols, true_rc

    k_used = None
    sols = true_rc = None
    pure_round = False
    for k in range(1, 10):
        alpha_k = max(0.0, 1.0 - k * (1.0 - state.alpha))
        pi_tilde = _smoothed_duals(pi_t, state.pi_hat, state.g_hat, alpha_k, k)
        pure = pi_tilde is None
        sols, true_rc = price_all(pi_t if pure else pi_tilde)
        k_used = k
        pure_round = pure
        if (true_rc <= -eps).any():
            break
        if pure:  # weaker smoothing cannot help once pure duals failed
            break
    else:
        k_used = 10
    if k_used == 10:  # all smoothed attempts failed: revert to pure duals
        sols, true_rc = price_all(pi_t)
        pure_round = True

    outcomes = []
    for i in range(ni):
        accepted = true_rc[i] <= -eps
        sel = sols[i].selection if accepted else None
        outcomes.append(PricingOutcome(
            machine=i,
            selection=sel,
            cost=_true_cost(inst, i, sel) if accepted else None,
            dantzig_rc=float(sols[i].value - mu[i]) if pure_round else None,
            alpha_used=state.alpha,
        ))

    coverage = np.zeros(inst.num_jobs)
    for sol in sols:
        coverage += sol.selection
    g_round = 1.0 - coverage
    agreement = float(g_round @ (pi_t - state.pi_hat)) > 0.0
    improved = rmp_objective < state.last_rmp_objective - 1e-9
    if improved:
        state.pi_hat = pi_t.copy()
        state.g_hat = g_round
    if not state.freeze_alpha:
        if agreement:
            state.alpha = min(0.9999, 0.9 * state.alpha + 0.1)
        else:
            state.alpha = max(0.0, state.alpha - 0.1)
    state.last_rmp_objective = rmp_objective
    return outcomes, state, k_used
