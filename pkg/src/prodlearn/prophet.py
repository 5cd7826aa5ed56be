"""Prophet inequality: threshold strategies, exact evaluation and learning.

Rewards ``t_1..t_n`` arrive in order; a strategy sees ``t_i`` and either stops
with it or moves on. Round ``n`` is always accepted.

Two strategy families are supported:

* :class:`ThresholdStrategy` accepts ``t_i`` iff ``t_i >= thresholds[i]``;
  backward induction produces the optimal one.
* :class:`AcceptanceProbStrategy` accepts ``t_i`` iff its quantile
  ``Pr[t >= t_i]`` is at most ``eps[i]``; this is the i.i.d. strategy driven by
  an ODE, usable with unbounded (proxy) supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import (
    DiscreteDistribution,
    ProductDistribution,
    SampleMatrix,
    ShadingParams,
    discretize_samples,
    empirical,
    product_empirical,
    round_up_to_grid,
    sample,
    shade,
)

DEFAULT_BETA = 1.0 / 0.745
ODE_STEP = 1e-4
ODE_FLOOR = 1e-12


@dataclass(frozen=True)
class ThresholdStrategy:
    """Accept the first ``t_i >= thresholds[i]``; the last round is forced.

    Thresholds may be ``inf`` (never accept in that round). The last threshold
    is ignored by evaluation.
    """

    thresholds: tuple

    def __post_init__(self):
        th = tuple(float(x) for x in self.thresholds)
        if not th:
            raise ValueError("a strategy needs at least one round")
        object.__setattr__(self, "thresholds", th)

    @property
    def n(self) -> int:
        return len(self.thresholds)

    def accept(self, i: int, values, dist: DiscreteDistribution | None = None):
        values = np.asarray(values, dtype=np.float64)
        if i == self.n - 1:
            return np.ones(values.shape, dtype=bool)
        return values >= self.thresholds[i]


@dataclass(frozen=True, eq=False)
class AcceptanceProbStrategy:
    """Accept ``t_i`` iff ``quantile(t_i) <= eps[i]``; the last round is forced.

    Quantiles are taken w.r.t. ``reference`` when set (the strategy then has
    fixed value thresholds learned from that distribution), otherwise w.r.t.
    the round's true distribution.
    """

    eps: tuple
    reference: DiscreteDistribution | None = field(default=None)

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        if not eps:
            raise ValueError("a strategy needs at least one round")
        if any(not 0.0 <= e <= 1.0 for e in eps):
            raise ValueError("acceptance probabilities must lie in [0, 1]")
        object.__setattr__(self, "eps", eps)

    @property
    def n(self) -> int:
        return len(self.eps)

    def accept(self, i: int, values, dist: DiscreteDistribution | None = None):
        values = np.asarray(values, dtype=np.float64)
        if i == self.n - 1:
            return np.ones(values.shape, dtype=bool)
        ref = self.reference if self.reference is not None else dist
        if ref is None:
            raise ValueError("need a distribution to evaluate quantiles")
        return np.asarray(ref.quantile(values)) <= self.eps[i]

    def value_thresholds(self, d: DiscreteDistribution | None = None) -> np.ndarray:
        """Smallest support value of ``d`` (default: the reference) accepted in each round.

        ``inf`` where no value qualifies. The last round is reported like the
        others even though evaluation forces acceptance there.
        """
        d = d if d is not None else self.reference
        if d is None:
            raise ValueError("need a distribution to map quantiles to values")
        q = d.quantile_at_support
        out = np.full(self.n, np.inf)
        for i, e in enumerate(self.eps):
            ok = np.flatnonzero(q <= e)
            if ok.size:
                out[i] = d.support[ok[0]]
        return out


def _as_product(D, n: int | None = None) -> ProductDistribution:
    if isinstance(D, DiscreteDistribution):
        if n is None:
            raise ValueError("a single distribution needs the number of rounds")
        return ProductDistribution.iid(D, n)
    return D


def _check_length(s, D: ProductDistribution):
    if s.n != D.n:
        raise ValueError(f"strategy has {s.n} rounds but the instance has {D.n}")


def _accept_masks(s, D: ProductDistribution):
    return [np.asarray(s.accept(i, d.support, d), dtype=bool) for i, d in enumerate(D)]


def _evaluate_masks(masks, D: ProductDistribution) -> float:
    reach, total = 1.0, 0.0
    for m, d in zip(masks, D):
        total += reach * float(np.dot(d.probs * d.support, m))
        reach *= float(np.dot(d.probs, ~m))
    return total


def backward_induction(D: ProductDistribution) -> tuple[ThresholdStrategy, float]:
    """Optimal thresholds and optimal value.

    ``thresholds[i]`` is the optimal value of the suffix after round ``i``, so
    the last threshold is 0 and thresholds are non-increasing.
    """
    if D.n < 1:
        raise ValueError("empty instance")
    th = [0.0] * D.n
    opt = D[-1].mean()
    for i in range(D.n - 2, -1, -1):
        th[i] = opt
        d = D[i]
        take = d.support >= opt
        opt = float(np.dot(d.probs * d.support, take) + np.dot(d.probs, ~take) * opt)
    return ThresholdStrategy(tuple(th)), opt


def optimal_value(D: ProductDistribution) -> float:
    return backward_induction(D)[1]


def evaluate_exact(s, D) -> float:
    """Expected reward of a threshold or acceptance-probability strategy on ``D``."""
    D = _as_product(D, s.n)
    _check_length(s, D)
    return _evaluate_masks(_accept_masks(s, D), D)


run_quantile_strategy = evaluate_exact


def evaluate_monte_carlo(s, D, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo mean reward and its standard error (``nan`` for one trial)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    D = _as_product(D, s.n)
    _check_length(s, D)
    data = sample(D, trials, seed, key=("prophet-mc",)).data
    accept = np.column_stack([s.accept(i, data[:, i], D[i]) for i in range(D.n)])
    first = np.argmax(accept, axis=1)
    rewards = data[np.arange(trials), first]
    stderr = float(rewards.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return float(rewards.mean()), stderr


def error_decomposition(s, D: ProductDistribution) -> np.ndarray:
    """Per-round shares of ``Opt(D) - value(s, D)``.

    Round ``i`` contributes ``Pr[reach i] * E[(t_i - c_i)^+ - (t_i - c_i) * stop_i(t_i)]``
    where ``c_i`` is the optimal continuation value after round ``i``. Every
    term is non-negative and the terms sum to the regret.
    """
    D = _as_product(D, s.n)
    _check_length(s, D)
    cont = backward_induction(D)[0].thresholds
    terms = np.zeros(D.n)
    reach = 1.0
    for i, (m, d) in enumerate(zip(_accept_masks(s, D), D)):
        gain = d.support - cont[i]
        terms[i] = reach * float(np.dot(d.probs, np.maximum(gain, 0.0) - gain * m))
        reach *= float(np.dot(d.probs, ~m))
    return terms


def expected_max(D: ProductDistribution) -> float:
    """``E[max_i t_i]`` from the product of marginal CDFs on the union grid."""
    grid = np.unique(np.concatenate([d.support for d in D]))
    F = np.prod([d.cdf(grid) for d in D], axis=0)
    return float(np.dot(grid, np.diff(F, prepend=0.0)))


def learn_perm(samples: SampleMatrix, grid: float | None = None) -> ThresholdStrategy:
    """Optimal thresholds for the product empirical distribution.

    With ``grid`` the sample columns are rounded down to the grid first and
    the resulting thresholds are rounded up to grid multiples.
    """
    if grid is not None:
        samples = discretize_samples(samples, grid)
    strategy, _ = backward_induction(product_empirical(samples))
    if grid is None:
        return strategy
    return ThresholdStrategy(tuple(round_up_to_grid(np.asarray(strategy.thresholds), grid)))


# i.i.d. quantile strategy


def _ode_rhs(y: float, beta: float) -> float:
    return y * (math.log(max(y, ODE_FLOOR)) - 1.0) - (beta - 1.0)


def _rk4_step(y: float, h: float, beta: float) -> float:
    k1 = _ode_rhs(y, beta)
    k2 = _ode_rhs(y + 0.5 * h * k1, beta)
    k3 = _ode_rhs(y + 0.5 * h * k2, beta)
    k4 = _ode_rhs(y + h * k3, beta)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def solve_ode(points, beta: float = DEFAULT_BETA, step: float = ODE_STEP) -> np.ndarray:
    """``y`` at the given points in [0, 1] for ``y' = y (log y - 1) - (beta - 1)``, ``y(0) = 1``.

    Classical RK4 with a fixed step; a point off the step grid gets one partial
    step from the grid point below it. ``y`` is floored at 1e-12 inside the log
    only, so it can dip slightly below zero near 1 when ``beta`` is inexact.
    """
    points = np.asarray(points, dtype=np.float64)
    if np.any(points < 0) or np.any(points > 1 + 1e-12):
        raise ValueError("ODE is solved on [0, 1]")
    n_steps = int(round(1.0 / step))
    ys = np.empty(n_steps + 1)
    ys[0] = 1.0
    for k in range(n_steps):
        ys[k + 1] = _rk4_step(ys[k], step, beta)
    out = np.empty(points.shape)
    for idx, x in np.ndenumerate(points):
        k = min(int(math.floor(x / step + 1e-9)), n_steps)
        rest = x - k * step
        out[idx] = _rk4_step(ys[k], rest, beta) if rest > 1e-15 else ys[k]
    return out


def acceptance_probabilities(n: int, beta: float = DEFAULT_BETA) -> np.ndarray:
    """``1 - y(i/n)^(1/(n-1))`` for ``i = 1..n`` (negative ``y`` counts as 0)."""
    if n < 2:
        raise ValueError("need at least two rounds")
    y = solve_ode(np.arange(1, n + 1) / n, beta)
    return 1.0 - np.maximum(y, 0.0) ** (1.0 / (n - 1))


def iid_quantile_strategy(n: int, eps: float, beta: float = DEFAULT_BETA) -> AcceptanceProbStrategy:
    """Acceptance probabilities from the ODE, with rounds below ``eps / n`` skipped."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    probs = acceptance_probabilities(n, beta)
    probs = np.where(probs < eps / n, 0.0, np.clip(probs, 0.0, 1.0))
    return AcceptanceProbStrategy(tuple(probs))


def dominated_empirical_strategy(
    samples: SampleMatrix,
    eps: float,
    delta: float,
    n: int | None = None,
    beta: float = DEFAULT_BETA,
) -> AcceptanceProbStrategy:
    """ODE strategy whose quantiles are read off the shaded pooled empirical.

    All sample values are pooled into one empirical distribution (i.i.d.
    rewards), shaded down, and used as the strategy's fixed reference.
    ``n`` defaults to the number of sample columns.
    """
    values = np.asarray(samples.data).reshape(-1)
    n = samples.n if n is None else n
    pooled = empirical(values)
    shaded = shade(pooled, ShadingParams(values.size, n, delta))
    strategy = iid_quantile_strategy(n, eps, beta)
    return AcceptanceProbStrategy(strategy.eps, reference=shaded)
