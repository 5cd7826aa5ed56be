"""Discrete and product distributions.

Everything downstream (prophet, Pandora, auctions, metrics) works on finite
supports. Continuous data enter through :func:`discretize_down`.

Quantile convention: ``quantile(v) = Pr[t >= v]``, i.e. the mass at ``v`` is
included. Under this convention ``v * quantile(v)`` is the revenue of posting
price ``v``, and lowering quantiles pointwise (shading) yields a dominated
distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceededError
from .rng import stream

NORMALIZATION_TOL = 1e-9
DOMINANCE_TOL = 1e-12
DEFAULT_CAP = 10**6
GRID_DECIMALS = 12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finite-support distribution on the real line.

    ``support`` must be strictly increasing. ``probs`` are renormalized so they
    sum to one in working precision; a pre-normalization drift larger than
    ``NORMALIZATION_TOL`` is rejected. Zero-mass support points are allowed
    (auxiliary and shaded distributions keep the input support); use
    :meth:`trim` to drop them.
    """

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        support = np.array(self.support, dtype=np.float64).reshape(-1)
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if support.size == 0:
            raise ValueError("support must be non-empty")
        if support.shape != probs.shape:
            raise ValueError(f"support has {support.size} values but probs has {probs.size}")
        if not np.all(np.isfinite(support)):
            raise ValueError("support values must be finite")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probs must be finite and non-negative")
        total = probs.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probs sum to {total!r}, not 1 (tolerance {NORMALIZATION_TOL})")
        probs = probs / total
        # push the rounding residue onto the largest atom so the sum is 1.0
        probs[np.argmax(probs)] += 1.0 - probs.sum()
        object.__setattr__(self, "support", _readonly(support))
        object.__setattr__(self, "probs", _readonly(probs))

    # construction helpers

    @classmethod
    def from_pairs(cls, values: Iterable[float], probs: Iterable[float]) -> "DiscreteDistribution":
        """Build from unsorted values, merging the mass of repeated values."""
        values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
        probs = np.asarray(list(probs) if not isinstance(probs, np.ndarray) else probs, dtype=np.float64)
        if values.shape != probs.shape:
            raise ValueError("values and probs must have the same length")
        uniq, inverse = np.unique(values, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, probs)
        return cls(uniq, merged)

    @classmethod
    def point_mass(cls, value: float) -> "DiscreteDistribution":
        return cls([value], [1.0])

    @classmethod
    def uniform(cls, values: Iterable[float]) -> "DiscreteDistribution":
        values = np.asarray(list(values), dtype=np.float64)
        return cls.from_pairs(values, np.full(values.size, 1.0 / values.size))

    # accessors

    @property
    def size(self) -> int:
        return int(self.support.size)

    @property
    def min(self) -> float:
        return float(self.support[0])

    @property
    def max(self) -> float:
        return float(self.support[-1])

    @property
    def cdf_at_support(self) -> np.ndarray:
        """``F(v_j)`` for every support value; the last entry is exactly 1."""
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        return cum

    @property
    def quantile_at_support(self) -> np.ndarray:
        """``Pr[t >= v_j]`` for every support value; the first entry is exactly 1."""
        tail = np.cumsum(self.probs[::-1])[::-1].copy()
        tail[0] = 1.0
        return tail

    def cdf(self, v):
        """``Pr[t <= v]``, vectorized over ``v``."""
        cum = np.concatenate(([0.0], self.cdf_at_support))
        out = cum[np.searchsorted(self.support, v, side="right")]
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, v):
        """``Pr[t >= v] = 1 - cdf(v^-)``, vectorized over ``v``."""
        tail = np.concatenate((self.quantile_at_support, [0.0]))
        out = tail[np.searchsorted(self.support, v, side="left")]
        return float(out) if np.ndim(out) == 0 else out

    def pmf(self, v):
        idx = np.searchsorted(self.support, v, side="left")
        idx_c = np.minimum(idx, self.size - 1)
        hit = (idx < self.size) & (self.support[idx_c] == v)
        out = np.where(hit, self.probs[idx_c], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def expect(self, fn) -> float:
        """``E[fn(t)]`` for a vectorized ``fn``."""
        return float(np.dot(np.asarray(fn(self.support), dtype=np.float64), self.probs))

    def trim(self) -> "DiscreteDistribution":
        keep = self.probs > 0
        if keep.all():
            return self
        return DiscreteDistribution(self.support[keep], self.probs[keep])

    def allclose(self, other: "DiscreteDistribution", atol: float = 1e-12) -> bool:
        """Equality of the two pmfs on the union of supports, up to ``atol``."""
        grid = np.union1d(self.support, other.support)
        return bool(np.all(np.abs(self.pmf(grid) - other.pmf(grid)) <= atol))

    def to_dict(self) -> dict:
        return {"support": self.support.tolist(), "probs": self.probs.tolist()}

    def __repr__(self):
        pairs = ", ".join(f"{v:g}: {p:.6g}" for v, p in zip(self.support, self.probs))
        return f"DiscreteDistribution({{{pairs}}})"


@dataclass(frozen=True, eq=False)
class ProductDistribution:
    """Ordered tuple of independent marginals."""

    marginals: tuple

    def __post_init__(self):
        marginals = tuple(self.marginals)
        if not marginals:
            raise ValueError("a product distribution needs at least one marginal")
        for m in marginals:
            if not isinstance(m, DiscreteDistribution):
                raise TypeError(f"marginals must be DiscreteDistribution, got {type(m).__name__}")
        object.__setattr__(self, "marginals", marginals)

    @classmethod
    def iid(cls, d: DiscreteDistribution, n: int) -> "ProductDistribution":
        return cls((d,) * n)

    @property
    def n(self) -> int:
        return len(self.marginals)

    def __len__(self):
        return len(self.marginals)

    def __iter__(self):
        return iter(self.marginals)

    def __getitem__(self, i):
        return self.marginals[i]

    @property
    def joint_size(self) -> int:
        return math.prod(m.size for m in self.marginals)

    def joint(self, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
        """Enumerate the joint support: ``(points[M, n], probs[M])``."""
        size = self.joint_size
        if size > cap:
            raise CapExceededError(size, cap)
        grids = np.meshgrid(*[m.support for m in self.marginals], indexing="ij")
        masses = np.meshgrid(*[m.probs for m in self.marginals], indexing="ij")
        points = np.stack([g.reshape(-1) for g in grids], axis=1)
        probs = np.prod(np.stack([w.reshape(-1) for w in masses], axis=1), axis=1)
        return points, probs

    def dense(self, grids: Sequence[np.ndarray], cap: int = DEFAULT_CAP) -> np.ndarray:
        """Joint pmf as a dense array indexed by the given per-coordinate grids.

        Each grid must contain the support of the matching marginal.
        """
        size = math.prod(len(g) for g in grids)
        if size > cap:
            raise CapExceededError(size, cap)
        out = np.ones(())
        for m, g in zip(self.marginals, grids):
            out = np.multiply.outer(out, m.pmf(np.asarray(g)))
        return out

    def to_dict(self) -> dict:
        return {"marginals": [m.to_dict() for m in self.marginals]}


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """``N`` i.i.d. sample vectors (rows) of dimension ``n``."""

    data: np.ndarray
    seed: int | None = None
    domain: tuple[float, float] | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"sample matrix must be N x n with N, n >= 1, got shape {data.shape}")
        if self.domain is not None:
            lo, hi = self.domain
            if np.any(data < lo) or np.any(data > hi):
                raise ValueError(f"samples fall outside the declared domain [{lo}, {hi}]")
        object.__setattr__(self, "data", _readonly(data))

    @property
    def N(self) -> int:
        return int(self.data.shape[0])

    @property
    def n(self) -> int:
        return int(self.data.shape[1])

    def column(self, i: int) -> np.ndarray:
        return self.data[:, i]

    def head(self, count: int) -> "SampleMatrix":
        return SampleMatrix(self.data[:count], seed=self.seed, domain=self.domain)


@dataclass(frozen=True)
class ShadingParams:
    N: int
    n: int
    delta: float

    def __post_init__(self):
        if self.N < 1 or self.n < 1:
            raise ValueError("N and n must be at least 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def log_term(self) -> float:
        """``ln(2 N n / delta)``."""
        return math.log(2.0 * self.N * self.n / self.delta)


# empirical distributions


def empirical(column) -> DiscreteDistribution:
    """Uniform distribution over the given sample values."""
    column = np.asarray(column, dtype=np.float64).reshape(-1)
    if column.size == 0:
        raise ValueError("cannot build an empirical distribution from no samples")
    values, counts = np.unique(column, return_counts=True)
    return DiscreteDistribution(values, counts / column.size)


def product_empirical(samples: SampleMatrix) -> ProductDistribution:
    """Product of the per-column empirical distributions.

    The joint support is the full product of column supports, so it usually
    puts mass on vectors that never appeared as a sample row.
    """
    if not isinstance(samples, SampleMatrix):
        samples = SampleMatrix(samples)
    return ProductDistribution(tuple(empirical(samples.column(i)) for i in range(samples.n)))


# grids


def grid_point(k, grid: float):
    """The grid value ``k * grid``, rounded to ``GRID_DECIMALS`` decimals."""
    return np.round(np.asarray(k, dtype=np.float64) * grid, GRID_DECIMALS)


def round_down_to_grid(v, grid: float):
    if grid <= 0:
        raise ValueError("grid must be positive")
    return grid_point(np.floor(np.asarray(v, dtype=np.float64) / grid + 1e-9), grid)


def round_up_to_grid(v, grid: float):
    if grid <= 0:
        raise ValueError("grid must be positive")
    return grid_point(np.ceil(np.asarray(v, dtype=np.float64) / grid - 1e-9), grid)


def discretize_down(d: DiscreteDistribution, grid: float) -> DiscreteDistribution:
    """Round every support value down to a multiple of ``grid``; merge collisions."""
    if grid <= 0:
        raise ValueError("grid must be positive")
    return DiscreteDistribution.from_pairs(round_down_to_grid(d.support, grid), d.probs)


def discretize_samples(samples: SampleMatrix, grid: float) -> SampleMatrix:
    return SampleMatrix(round_down_to_grid(samples.data, grid), seed=samples.seed)


# shading and auxiliary distributions


def shading_function(q, params: ShadingParams):
    """``max{0, q - sqrt(2 q (1-q) L / N) - 4 L / N}`` with ``L = ln(2Nn/delta)``."""
    return _shade_curve(q, params, 2.0, 4.0)


def double_shading_function(q, params: ShadingParams):
    """As :func:`shading_function` with constants 8 and 7."""
    return _shade_curve(q, params, 8.0, 7.0)


def _shade_curve(q, params, sqrt_coef, lin_coef):
    q = np.asarray(q, dtype=np.float64)
    L, N = params.log_term, params.N
    out = np.maximum(0.0, q - np.sqrt(np.clip(sqrt_coef * q * (1 - q) * L / N, 0, None)) - lin_coef * L / N)
    return float(out) if out.ndim == 0 else out


def _apply_quantile_map(d: DiscreteDistribution, qmap) -> DiscreteDistribution:
    if d.min < 0:
        raise ValueError("shading is defined for non-negative values only")
    pos = d.support > 0
    values = d.support[pos]
    if values.size == 0:
        return DiscreteDistribution.point_mass(0.0)
    # quantile at each positive value is mapped; monotone by construction of
    # the shading curve, but enforce it against rounding
    q_new = np.minimum.accumulate(np.minimum(qmap(d.quantile_at_support[pos]), 1.0))
    masses = q_new - np.append(q_new[1:], 0.0)
    zero_mass = 1.0 - q_new[0]
    return DiscreteDistribution.from_pairs(np.append(0.0, values), np.append(zero_mass, masses))


def shade(d: DiscreteDistribution, params: ShadingParams) -> DiscreteDistribution:
    """Dominated empirical distribution: quantiles of positive values shaded down.

    The quantile mass removed from positive values is placed at 0.
    """
    return _apply_quantile_map(d, lambda q: shading_function(q, params))


def double_shade(d: DiscreteDistribution, params: ShadingParams) -> DiscreteDistribution:
    return _apply_quantile_map(d, lambda q: double_shading_function(q, params))


def _cdf_gap(F, params):
    L, N = params.log_term, params.N
    return np.sqrt(np.clip(2.0 * F * (1.0 - F) * L / N, 0, None)) + L / N


def upper_auxiliary(d: DiscreteDistribution, params: ShadingParams) -> DiscreteDistribution:
    """Distribution whose CDF is the smallest value the empirical CDF can take.

    ``F(v) - sqrt(2F(1-F)L/N) - L/N`` clipped at 0, and 1 at the top of the
    support. It dominates ``d``.
    """
    F = d.cdf_at_support
    F_hat = np.maximum(0.0, F - _cdf_gap(F, params))
    F_hat[-1] = 1.0
    F_hat = np.maximum.accumulate(F_hat)
    return DiscreteDistribution(d.support, np.diff(F_hat, prepend=0.0))


def lower_auxiliary(d: DiscreteDistribution, params: ShadingParams) -> DiscreteDistribution:
    """Mirror of :func:`upper_auxiliary`: CDF shifted up, capped at 1; dominated by ``d``."""
    F = d.cdf_at_support
    F_check = np.maximum.accumulate(np.minimum(1.0, F + _cdf_gap(F, params)))
    F_check[-1] = 1.0
    return DiscreteDistribution(d.support, np.diff(F_check, prepend=0.0))


def truncate(d: DiscreteDistribution, lower: float, upper: float) -> DiscreteDistribution:
    """Clip quantile space to ``[lower, 1 - upper]``.

    A draw is modelled as ``v(Q)`` with ``Q`` uniform on [0, 1] and ``v`` the
    inverse of the quantile function; truncation replaces ``Q`` by
    ``clip(Q, lower, 1 - upper)``. Quantiles of interior values become
    ``max{lower, min{1 - upper, q}}`` and the clipped quantile mass lands on the
    values at the two boundaries.
    """
    if not (0 <= lower <= 1 and 0 <= upper <= 1):
        raise ValueError("lower and upper must lie in [0, 1]")
    if lower + upper >= 1:
        raise ValueError("truncation needs lower + upper < 1")
    q_hi = d.quantile_at_support
    q_lo = np.append(q_hi[1:], 0.0)
    # value j occupies the quantile interval (q_lo[j], q_hi[j]]
    inner = np.clip(np.minimum(q_hi, 1 - upper) - np.maximum(q_lo, lower), 0.0, None)
    inner = inner + lower * ((q_lo < lower) & (lower <= q_hi))
    inner = inner + upper * ((q_lo < 1 - upper) & (1 - upper <= q_hi))
    return DiscreteDistribution(d.support, inner)


# dominance


def dominates(p, q, tol: float = DOMINANCE_TOL) -> bool:
    """First-order stochastic dominance ``p >= q``: ``F_p <= F_q`` everywhere.

    Accepts two :class:`DiscreteDistribution` or two :class:`ProductDistribution`
    (checked coordinate-wise).
    """
    if isinstance(p, ProductDistribution) and isinstance(q, ProductDistribution):
        if p.n != q.n:
            raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
        return all(dominates(a, b, tol) for a, b in zip(p, q))
    grid = np.union1d(p.support, q.support)
    return bool(np.all(p.cdf(grid) <= q.cdf(grid) + tol))


# sampling


def sample(d, count: int, seed: int, key: tuple = ()) -> SampleMatrix:
    """Draw ``count`` i.i.d. rows from a product (or one-dimensional) distribution.

    Uniforms come from the ``(seed, "sample", *key)`` Philox stream in
    row-major order, so row ``j`` is fixed by the seed, the key and its index:
    a larger draw with the same seed extends a smaller one.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if isinstance(d, DiscreteDistribution):
        d = ProductDistribution((d,))
    u = stream(seed, "sample", *key).random((count, d.n))
    data = np.empty((count, d.n))
    for i, m in enumerate(d):
        idx = np.searchsorted(m.cdf_at_support, u[:, i], side="right")
        data[:, i] = m.support[np.minimum(idx, m.size - 1)]
    return SampleMatrix(data, seed=seed)


# label-conditional products


@dataclass(frozen=True, eq=False)
class LabeledProductDistribution:
    """Joint law of ``(x, y)``: label ``y`` first, then a product law for ``x``.

    ``conditionals[j]`` is the feature distribution given label
    ``labels.support[j]``.
    """

    labels: DiscreteDistribution
    conditionals: tuple

    def __post_init__(self):
        conditionals = tuple(self.conditionals)
        if len(conditionals) != self.labels.size:
            raise ValueError("need one conditional product distribution per label")
        dims = {c.n for c in conditionals}
        if len(dims) != 1:
            raise ValueError("all conditional feature distributions must share a dimension")
        object.__setattr__(self, "conditionals", conditionals)

    @property
    def n(self) -> int:
        return self.conditionals[0].n

    def conditional(self, y) -> ProductDistribution | None:
        idx = np.searchsorted(self.labels.support, y)
        if idx < self.labels.size and self.labels.support[idx] == y:
            return self.conditionals[idx]
        return None

    def to_dict(self) -> dict:
        return {
            "labels": self.labels.to_dict(),
            "conditionals": [c.to_dict() for c in self.conditionals],
        }


def conditional_product_empirical(samples: SampleMatrix, labels) -> LabeledProductDistribution:
    """Empirical label law times per-label product empirical feature laws."""
    if not isinstance(samples, SampleMatrix):
        samples = SampleMatrix(samples)
    labels = np.asarray(labels).reshape(-1)
    if labels.size != samples.N:
        raise ValueError(f"{labels.size} labels for {samples.N} samples")
    label_dist = empirical(labels)
    conditionals = tuple(
        product_empirical(SampleMatrix(samples.data[labels == y])) for y in label_dist.support
    )
    return LabeledProductDistribution(label_dist, conditionals)


def sample_labeled(d: LabeledProductDistribution, count: int, seed: int) -> tuple[SampleMatrix, np.ndarray]:
    """Draw ``count`` feature rows and labels from a label-conditional product."""
    if count < 1:
        raise ValueError("count must be at least 1")
    u = stream(seed, "labels").random(count)
    idx = np.minimum(np.searchsorted(d.labels.cdf_at_support, u, side="right"), d.labels.size - 1)
    labels = d.labels.support[idx]
    data = np.empty((count, d.n))
    for j, cond in enumerate(d.conditionals):
        rows = np.flatnonzero(idx == j)
        if rows.size:
            data[rows] = sample(cond, rows.size, seed, key=("label", j)).data
    return SampleMatrix(data, seed=seed), labels
