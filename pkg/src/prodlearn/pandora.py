"""Pandora's problem: reservation values, Weitzman's policy, exact evaluation.

Box ``i`` costs ``costs[i]`` to open and reveals ``t_i ~ D_i``. A policy opens
boxes one at a time and finally keeps the best reward seen (0 if nothing was
opened). Objective: kept reward minus total cost paid.

Policies here are fixed-order index policies: boxes are visited in ``order``
and the policy stops before box ``b`` once the best reward so far is at least
``sigmas[b]``. Because the order is fixed, the cost paid after opening ``j``
boxes is deterministic, which makes budget truncation a prefix cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dist import (
    DiscreteDistribution,
    ProductDistribution,
    SampleMatrix,
    discretize_samples,
    product_empirical,
)
from .errors import CapExceededError

TRUNCATION_CONSTANT = 8.0
BRUTE_FORCE_CAP = 10**6
BRUTE_FORCE_MAX_BOXES = 5


@dataclass(frozen=True, eq=False)
class PandoraInstance:
    marginals: ProductDistribution
    costs: tuple

    def __post_init__(self):
        marginals = self.marginals
        if not isinstance(marginals, ProductDistribution):
            marginals = ProductDistribution(tuple(marginals))
        costs = tuple(float(c) for c in self.costs)
        if len(costs) != marginals.n:
            raise ValueError(f"{len(costs)} costs for {marginals.n} boxes")
        if any(c < 0 for c in costs):
            raise ValueError("costs must be non-negative")
        object.__setattr__(self, "marginals", marginals)
        object.__setattr__(self, "costs", costs)

    @property
    def n(self) -> int:
        return self.marginals.n

    def to_dict(self) -> dict:
        return {**self.marginals.to_dict(), "costs": list(self.costs)}


@dataclass(frozen=True)
class PandoraPolicy:
    """Visit order, per-box stopping thresholds and an optional cost budget.

    ``sigmas`` is indexed by box, not by position in ``order``.
    """

    order: tuple
    sigmas: tuple
    budget: float | None = None

    def __post_init__(self):
        order = tuple(int(b) for b in self.order)
        sigmas = tuple(float(s) for s in self.sigmas)
        if sorted(order) != list(range(len(sigmas))):
            raise ValueError("order must be a permutation of the boxes")
        along = [sigmas[b] for b in order]
        if any(a < b for a, b in zip(along, along[1:])):
            raise ValueError("sigmas must be non-increasing along the visit order")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def n(self) -> int:
        return len(self.order)


def reservation_value(d: DiscreteDistribution, cost: float) -> float:
    """The ``sigma`` solving ``E[(t - sigma)^+] = cost`` (infimum over solutions).

    ``E[(t - sigma)^+]`` is piecewise linear in ``sigma`` with kinks at support
    values, so the root is found exactly on the right segment. A negative
    result means the box is not worth opening even with nothing in hand.
    """
    if cost < 0:
        raise ValueError("cost must be non-negative")
    v, p = d.support, d.probs
    if cost == 0:
        return float(v[-1])
    tail_mass = np.append(d.quantile_at_support[1:], 0.0)  # Pr[t > v_k]
    tail_sum = np.cumsum((p * v)[::-1])[::-1]
    tail_sum = np.append(tail_sum[1:], 0.0)  # E[t; t > v_k]
    # excess at the support values; strictly decreasing while positive
    excess = tail_sum - tail_mass * v
    if cost >= excess[0]:
        return float(d.mean() - cost)
    k = int(np.flatnonzero(excess > cost)[-1])
    # on [v_k, v_{k+1}): excess(sigma) = tail_sum[k] - tail_mass[k] * sigma
    return float((tail_sum[k] - cost) / tail_mass[k])


def weitzman_policy(inst: PandoraInstance) -> PandoraPolicy:
    """Reservation values, boxes sorted by decreasing value (ties: lower index first)."""
    sigmas = tuple(reservation_value(d, c) for d, c in zip(inst.marginals, inst.costs))
    order = tuple(sorted(range(inst.n), key=lambda b: (-sigmas[b], b)))
    return PandoraPolicy(order, sigmas)


def truncated_policy(p: PandoraPolicy, budget: float) -> PandoraPolicy:
    """Same policy, but it stops once the next box would push the paid cost past ``budget``."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    return replace(p, budget=float(budget))


def truncation_budget(eps: float, costs, constant: float = TRUNCATION_CONSTANT) -> float:
    """``constant * ln(4 / eps)``, capped at the total cost."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return min(constant * math.log(4.0 / eps), float(sum(costs)))


def _value_grid(inst: PandoraInstance) -> np.ndarray:
    return np.unique(np.concatenate([[0.0]] + [d.support for d in inst.marginals]))


def _check_dims(p: PandoraPolicy, inst: PandoraInstance):
    if p.n != inst.n:
        raise ValueError(f"policy has {p.n} boxes but the instance has {inst.n}")


def _run(p: PandoraPolicy, inst: PandoraInstance):
    """Yield ``(stop_mass_by_best_value, cost_paid)`` at each decision point, then the end."""
    grid = _value_grid(inst)
    best = np.zeros(grid.size)
    best[0] = 1.0  # nothing opened yet: best-so-far is 0
    paid = 0.0
    budget = math.inf if p.budget is None else p.budget
    for b in p.order:
        c = inst.costs[b]
        if paid + c > budget + 1e-12:
            break
        stop = grid >= p.sigmas[b]
        yield best * stop, paid
        best = best * ~stop
        paid += c
        # law of max(best, t_b) via the product of CDFs
        F = np.cumsum(best) * inst.marginals[b].cdf(grid)
        best = np.diff(F, prepend=0.0)
        if best.sum() <= 0:
            return
    yield best, paid


def evaluate_exact(p: PandoraPolicy, inst: PandoraInstance) -> float:
    """Expected reward minus cost of following ``p`` on ``inst``.

    ``inst`` supplies the true reward laws; the policy may have been designed
    for a different distribution.
    """
    _check_dims(p, inst)
    grid = _value_grid(inst)
    return float(sum(np.dot(mass, grid) - paid * mass.sum() for mass, paid in _run(p, inst)))


def cost_distribution(p: PandoraPolicy, inst: PandoraInstance) -> DiscreteDistribution:
    """Law of the total cost paid by ``p`` on ``inst``."""
    _check_dims(p, inst)
    paid, mass = zip(*((paid, m.sum()) for m, paid in _run(p, inst)))
    return DiscreteDistribution.from_pairs(np.asarray(paid), np.asarray(mass))


def normalized_value(value: float, n: int) -> float:
    """``(value + n) / (n + 1)``: maps the objective range ``[-n, 1]`` onto ``[0, 1]``."""
    return (value + n) / (n + 1)


def simulate(p: PandoraPolicy, inst: PandoraInstance, rewards: np.ndarray):
    """Run ``p`` on explicit reward rows; returns ``(objective, cost_paid)`` arrays."""
    _check_dims(p, inst)
    rewards = np.asarray(rewards, dtype=np.float64)
    rows = rewards.shape[0]
    best = np.zeros(rows)
    paid = np.zeros(rows)
    active = np.ones(rows, dtype=bool)
    budget = math.inf if p.budget is None else p.budget
    spent = 0.0
    for b in p.order:
        c = inst.costs[b]
        if spent + c > budget + 1e-12:
            break
        active &= best < p.sigmas[b]
        spent += c
        paid[active] = spent
        best = np.where(active, np.maximum(best, rewards[:, b]), best)
    return best - paid, paid


def brute_force_optimal(inst: PandoraInstance, cap: int = BRUTE_FORCE_CAP,
                        max_boxes: int = BRUTE_FORCE_MAX_BOXES) -> float:
    """Optimal adaptive value by dynamic programming over (unopened set, best so far).

    Independent of reservation values: at every state it compares stopping
    with opening each remaining box.
    """
    n = inst.n
    grid = _value_grid(inst)
    states = (1 << n) * grid.size
    if n > max_boxes:
        raise CapExceededError(n, max_boxes, what="instance boxes")
    if states > cap:
        raise CapExceededError(states, cap, what="state space")
    idx = [np.searchsorted(grid, d.support) for d in inst.marginals]
    pos = np.arange(grid.size)
    # value[mask] is an array over best-so-far for the set of *opened* boxes
    value = {}
    for mask in range((1 << n) - 1, -1, -1):
        v = grid.copy()
        for b in range(n):
            if mask & (1 << b):
                continue
            nxt = value[mask | (1 << b)]
            after = nxt[np.maximum.outer(pos, idx[b])] @ inst.marginals[b].probs
            v = np.maximum(v, after - inst.costs[b])
        value[mask] = v
    return float(value[0][0])


def learn_perm(samples: SampleMatrix, costs, grid: float | None = None,
               budget: float | None = None, eps: float | None = None) -> PandoraPolicy:
    """Weitzman policy for the product empirical distribution.

    ``grid`` rounds samples down first. ``budget`` truncates the policy; if only
    ``eps`` is given the budget is :func:`truncation_budget` ``(eps, costs)``.
    """
    if grid is not None:
        samples = discretize_samples(samples, grid)
    policy = weitzman_policy(PandoraInstance(product_empirical(samples), tuple(costs)))
    if budget is None and eps is not None:
        budget = truncation_budget(eps, costs)
    if budget is not None and budget > 0:
        policy = truncated_policy(policy, budget)
    return policy


# lower-bound family


def hard_instance(n: int, eps: float, signs) -> PandoraInstance:
    """``n`` boxes of cost ``1/n`` with rewards in {0, 1}.

    ``Pr[t_i = 1]`` is ``(1 + eps)/n`` where ``signs[i]`` is truthy, else
    ``(1 - eps)/n``.
    """
    signs = [bool(s) for s in signs]
    if n < 1 or len(signs) != n:
        raise ValueError("need n >= 1 and one sign per box")
    if not 0 < eps < 1 or (1 + eps) / n > 1:
        raise ValueError("need 0 < eps < 1 and (1 + eps)/n <= 1")
    marginals = []
    for s in signs:
        p1 = (1 + eps) / n if s else (1 - eps) / n
        marginals.append(DiscreteDistribution([0.0, 1.0], [1.0 - p1, p1]))
    return PandoraInstance(ProductDistribution(tuple(marginals)), (1.0 / n,) * n)


def subsequence_policy(n: int, boxes) -> PandoraPolicy:
    """Open ``boxes`` in the given order until a reward of 1 shows up; never open the rest."""
    boxes = [int(b) for b in boxes]
    rest = [b for b in range(n) if b not in boxes]
    sigmas = [0.0] * n
    for b in boxes:
        sigmas[b] = 1.0
    return PandoraPolicy(tuple(boxes + rest), tuple(sigmas))


def hard_instance_opt(n: int, eps: float, n_plus: int) -> float:
    """Optimal value with ``n_plus`` boxes of the ``(1 + eps)/n`` kind."""
    r = 1 - (1 + eps) / n
    return eps / n * sum(r**i for i in range(n_plus))


def subsequence_value(n: int, eps: float, n_plus: int, k_plus: int, k_minus: int) -> float:
    """Value of opening ``n_plus - k_plus`` good boxes, then ``k_minus`` bad ones.

    This is the best a hypothesis with ``k_plus`` omissions and ``k_minus``
    wrong inclusions can do.
    """
    r_plus = 1 - (1 + eps) / n
    r_minus = 1 - (1 - eps) / n
    good = n_plus - k_plus
    return eps / n * (
        sum(r_plus**i for i in range(good)) - r_plus**good * sum(r_minus**i for i in range(k_minus))
    )


def mistake_penalty(n: int, eps: float, k: int) -> float:
    """Lower bound ``(eps k / n) (1 - (1 + eps)/n)^n`` on the loss from ``k`` mistakes."""
    return eps * k / n * (1 - (1 + eps) / n) ** n
