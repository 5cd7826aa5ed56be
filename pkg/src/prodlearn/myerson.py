"""Single-item revenue maximization on discrete product value distributions.

The revenue curve of a value distribution lives in quantile space: posting
price ``v`` sells with probability ``q(v) = Pr[t >= v]`` and earns ``v q(v)``.
Ironed virtual values are slopes of the upper concave envelope of that curve,
and Myerson's auction sells to the highest non-negative ironed virtual value
at the critical bid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import (
    DEFAULT_CAP,
    DiscreteDistribution,
    ProductDistribution,
    SampleMatrix,
    discretize_samples,
    product_empirical,
    sample,
)
from .errors import CapExceededError


def upper_concave_hull(points):
    """Upper concave envelope of ``(x, y)`` points (monotone chain).

    Returns hull vertices sorted by ``x``. Collinear middle points are dropped.
    Works with any exact numeric type (``Fraction``) as well as floats.
    """
    pts = sorted(set((x, y) for x, y in points))
    hull = []
    for p in pts:
        # keep only the highest point for a repeated x
        if hull and hull[-1][0] == p[0]:
            hull.pop()
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # pop the middle point unless it lies strictly above the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


@dataclass(frozen=True, eq=False)
class RevenueCurve:
    """Revenue curve points (one per support value) and its ironed envelope.

    ``quantiles[j]`` and ``revenues[j]`` belong to ``support[j]``; quantiles
    decrease with the support. ``envelope`` holds the hull vertices, from
    ``(0, 0)`` to ``(1, min value)``.
    """

    support: np.ndarray
    quantiles: np.ndarray
    revenues: np.ndarray
    envelope: tuple

    @property
    def points(self):
        return list(zip(self.quantiles.tolist(), self.revenues.tolist()))

    def ironed(self, q):
        """Envelope height at quantile(s) ``q``."""
        xs, ys = zip(*self.envelope)
        return np.interp(q, xs, ys)

    def max_revenue(self) -> float:
        return float(max(y for _, y in self.envelope))


def revenue_curve(d: DiscreteDistribution) -> RevenueCurve:
    if d.min < 0:
        raise ValueError("values must be non-negative")
    d = d.trim()
    q = d.quantile_at_support
    r = d.support * q
    env = upper_concave_hull([(0.0, 0.0)] + list(zip(q.tolist(), r.tolist())))
    return RevenueCurve(d.support, q, r, tuple(env))


def _virtual_values(curve: RevenueCurve) -> np.ndarray:
    # support value j owns the quantile interval (q_{j+1}, q_j]; it sits inside
    # one envelope segment, whose slope is the ironed virtual value
    xs = np.array([x for x, _ in curve.envelope])
    ys = np.array([y for _, y in curve.envelope])
    slopes = np.diff(ys) / np.diff(xs)
    seg = np.searchsorted(xs, curve.quantiles, side="left") - 1
    return slopes[np.clip(seg, 0, slopes.size - 1)]


def ironed_virtual_values(d: DiscreteDistribution) -> dict:
    """Map each (positive-mass) support value to its ironed virtual value."""
    curve = revenue_curve(d)
    return dict(zip(curve.support.tolist(), _virtual_values(curve).tolist()))


@dataclass(frozen=True, eq=False)
class SingleItemAuction:
    """Ironed virtual-value tables, one per bidder.

    A report between design support values is treated like the support value
    below it; a report under the lowest support value never wins.
    """

    supports: tuple
    phis: tuple

    def __post_init__(self):
        if len(self.supports) != len(self.phis) or not self.supports:
            raise ValueError("need one virtual-value table per bidder")
        for v, phi in zip(self.supports, self.phis):
            if len(v) != len(phi):
                raise ValueError("support and virtual values differ in length")
            if np.any(np.diff(phi) < 0):
                raise ValueError("ironed virtual values must be non-decreasing")

    @property
    def n(self) -> int:
        return len(self.supports)

    def virtual_value(self, i: int, values):
        v = np.asarray(values, dtype=np.float64)
        idx = np.searchsorted(self.supports[i], v, side="right") - 1
        phi = np.asarray(self.phis[i])[np.maximum(idx, 0)]
        return np.where(idx >= 0, phi, -np.inf)

    def _phi_matrix(self, bids: np.ndarray) -> np.ndarray:
        return np.column_stack([self.virtual_value(i, bids[:, i]) for i in range(self.n)])

    def allocate(self, bids) -> np.ndarray:
        """Winner index per row, or -1 when the item stays unsold."""
        bids = np.atleast_2d(np.asarray(bids, dtype=np.float64))
        phi = self._phi_matrix(bids)
        winner = np.argmax(phi, axis=1)
        sold = phi[np.arange(len(bids)), winner] >= 0
        return np.where(sold, winner, -1)

    def outcome(self, bids):
        """``(winner, payment)`` arrays for each row of ``bids``."""
        bids = np.atleast_2d(np.asarray(bids, dtype=np.float64))
        if bids.shape[1] != self.n:
            raise ValueError(f"expected {self.n} bids per row, got {bids.shape[1]}")
        phi = self._phi_matrix(bids)
        rows = len(bids)
        winner = np.argmax(phi, axis=1)
        sold = phi[np.arange(rows), winner] >= 0
        winner = np.where(sold, winner, -1)
        payment = np.zeros(rows)
        for i in range(self.n):
            mask = winner == i
            if not mask.any():
                continue
            before = phi[mask, :i].max(axis=1) if i > 0 else np.full(mask.sum(), -np.inf)
            after = phi[mask, i + 1:].max(axis=1) if i < self.n - 1 else np.full(mask.sum(), -np.inf)
            table = np.asarray(self.phis[i])
            # lowest support value that beats earlier bidders strictly and
            # later ones (and zero) weakly
            k = np.maximum(
                np.searchsorted(table, before, side="right"),
                np.searchsorted(table, np.maximum(after, 0.0), side="left"),
            )
            payment[mask] = np.asarray(self.supports[i])[k]
        return winner, payment

    def revenue(self, bids) -> np.ndarray:
        return self.outcome(bids)[1]


def myerson_auction(D: ProductDistribution) -> SingleItemAuction:
    supports, phis = [], []
    for d in D:
        curve = revenue_curve(d)
        supports.append(curve.support)
        phis.append(_virtual_values(curve))
    return SingleItemAuction(tuple(supports), tuple(phis))


def expected_revenue(a: SingleItemAuction, D: ProductDistribution, cap: int = DEFAULT_CAP,
                     trials: int | None = None, seed: int = 0) -> tuple[float, float]:
    """Expected revenue of ``a`` when values follow ``D``: ``(mean, stderr)``.

    Exact (stderr 0) by joint enumeration when the joint support fits in
    ``cap``; otherwise Monte Carlo with ``trials`` draws, or
    :class:`CapExceededError` if ``trials`` is not given.
    """
    if a.n != D.n:
        raise ValueError(f"auction has {a.n} bidders but the instance has {D.n}")
    try:
        points, probs = D.joint(cap)
    except CapExceededError:
        if trials is None:
            raise
        return revenue_monte_carlo(a, D, trials, seed)
    return float(np.dot(a.revenue(points), probs)), 0.0


def _max_law(laws, grid):
    """Atoms of ``max`` of independent discrete variables, on ``grid`` (``-inf`` if ``laws`` is empty)."""
    F = np.ones(grid.size)
    for vals, p in laws:
        F *= np.array([p[vals <= g].sum() for g in grid])
    return np.diff(F, prepend=0.0)


def expected_revenue_factored(a: SingleItemAuction, D: ProductDistribution) -> float:
    """Exact expected revenue without enumerating the joint support.

    Bidder ``i`` pays the critical bid fixed by the largest virtual value
    before and after it, so its expected payment only needs the laws of those
    two maxima (products of per-bidder CDFs).
    """
    if a.n != D.n:
        raise ValueError(f"auction has {a.n} bidders but the instance has {D.n}")
    laws = [(a.virtual_value(j, d.support), d.probs) for j, d in enumerate(D)]
    grid = np.unique(np.concatenate([vals for vals, _ in laws] + [[-np.inf]]))
    total = 0.0
    for i in range(a.n):
        before = _max_law(laws[:i], grid) if i > 0 else (grid == -np.inf).astype(float)
        after = _max_law(laws[i + 1:], grid) if i < a.n - 1 else (grid == -np.inf).astype(float)
        table = np.asarray(a.phis[i])
        support = np.asarray(a.supports[i])
        k = np.maximum(
            np.searchsorted(table, grid, side="right")[:, None],
            np.searchsorted(table, np.maximum(grid, 0.0), side="left")[None, :],
        )
        wins = k < table.size
        price = np.where(wins, support[np.minimum(k, table.size - 1)], 0.0)
        sale = np.where(wins, D[i].quantile(price), 0.0)
        total += float(before @ (price * sale) @ after)
    return total


def revenue_monte_carlo(a: SingleItemAuction, D: ProductDistribution, trials: int,
                        seed: int) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rev = a.revenue(sample(D, trials, seed, key=("auction-mc",)).data)
    stderr = float(rev.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return float(rev.mean()), stderr


def optimal_revenue(D: ProductDistribution) -> float:
    """``E[max(0, max_i phi_i(t_i))]`` from the law of each bidder's ironed virtual value.

    This is the revenue of the optimal auction by Myerson's identity; it is
    computed without payments or joint enumeration.
    """
    laws = []
    for d in D:
        d = d.trim()
        phi = _virtual_values(revenue_curve(d))
        laws.append((phi, d.probs))
    grid = np.unique(np.concatenate([phi for phi, _ in laws] + [[0.0]]))
    F = np.ones(grid.size)
    for phi, p in laws:
        F *= np.array([p[phi <= g].sum() for g in grid])
    mass = np.diff(F, prepend=0.0)
    return float(np.dot(np.maximum(grid, 0.0), mass))


def posted_price_revenue(d: DiscreteDistribution, price: float | None = None) -> float:
    """Revenue of posting ``price`` to one buyer, or the best support-value price."""
    if price is not None:
        return float(price * d.quantile(price))
    return float(np.max(d.support * d.quantile_at_support))


def learn_perm(samples: SampleMatrix, grid: float | None = None) -> SingleItemAuction:
    """Myerson's auction for the product empirical distribution."""
    if grid is not None:
        samples = discretize_samples(samples, grid)
    return myerson_auction(product_empirical(samples))
