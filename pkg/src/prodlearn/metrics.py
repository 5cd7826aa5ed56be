"""Total variation and Hellinger distances.

Supports are aligned by exact value equality; inputs are expected to be grid
aligned already (see :func:`prodlearn.dist.discretize_down`).
"""

from __future__ import annotations

import math

import numpy as np

from .dist import DEFAULT_CAP, DiscreteDistribution, ProductDistribution


def _aligned(p: DiscreteDistribution, q: DiscreteDistribution):
    grid = np.union1d(p.support, q.support)
    return p.pmf(grid), q.pmf(grid)


def total_variation(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Half the L1 distance between the two pmfs."""
    fp, fq = _aligned(p, q)
    return float(min(1.0, 0.5 * np.abs(fp - fq).sum()))


def hellinger_sq(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Squared Hellinger distance ``1/2 sum (sqrt p - sqrt q)^2``."""
    fp, fq = _aligned(p, q)
    return float(min(1.0, 0.5 * np.sum((np.sqrt(fp) - np.sqrt(fq)) ** 2)))


def _check_dims(P: ProductDistribution, Q: ProductDistribution):
    if P.n != Q.n:
        raise ValueError(f"dimension mismatch: {P.n} vs {Q.n}")


def product_hellinger_sq(P: ProductDistribution, Q: ProductDistribution) -> float:
    """Squared Hellinger distance of two product distributions.

    Uses ``1 - H^2(P, Q) = prod_i (1 - H^2(P_i, Q_i))``; the joint is never
    enumerated.
    """
    _check_dims(P, Q)
    affinity = math.prod(1.0 - hellinger_sq(p, q) for p, q in zip(P, Q))
    return float(min(1.0, max(0.0, 1.0 - affinity)))


def total_variation_product_upper(P: ProductDistribution, Q: ProductDistribution) -> float:
    """``sqrt(2) * H(P, Q)``, an upper bound on the joint total variation."""
    return math.sqrt(2.0) * math.sqrt(product_hellinger_sq(P, Q))


def aligned_joints(P: ProductDistribution, Q: ProductDistribution, cap: int = DEFAULT_CAP):
    """Dense joint pmfs of ``P`` and ``Q`` on the product of per-coordinate union grids."""
    _check_dims(P, Q)
    grids = [np.union1d(p.support, q.support) for p, q in zip(P, Q)]
    return P.dense(grids, cap), Q.dense(grids, cap)


def joint_total_variation(P: ProductDistribution, Q: ProductDistribution, cap: int = DEFAULT_CAP) -> float:
    """Total variation between the joints, by enumeration (guarded by ``cap``)."""
    fp, fq = aligned_joints(P, Q, cap)
    return float(min(1.0, 0.5 * np.abs(fp - fq).sum()))


def joint_hellinger_sq(P: ProductDistribution, Q: ProductDistribution, cap: int = DEFAULT_CAP) -> float:
    fp, fq = aligned_joints(P, Q, cap)
    return float(min(1.0, 0.5 * np.sum((np.sqrt(fp) - np.sqrt(fq)) ** 2)))


def smoothed_chi_square(f_d, f_e, N: int, delta: float):
    """Both sides of the smoothed Hellinger/chi-square comparison, per entry.

    Returns ``(lhs, rhs)`` with ``lhs = ((f_d - f_e) / (sqrt f_d + sqrt f_e))^2``
    and ``rhs = (f_d - f_e)^2 / max{f_d, s} + s`` where ``s = ln(1/delta) / N``.
    Entries with ``f_d = f_e = 0`` give ``lhs = 0``.
    """
    f_d = np.asarray(f_d, dtype=np.float64)
    f_e = np.asarray(f_e, dtype=np.float64)
    s = math.log(1.0 / delta) / N
    denom = np.sqrt(f_d) + np.sqrt(f_e)
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = np.where(denom > 0, ((f_d - f_e) / denom) ** 2, 0.0)
    rhs = (f_d - f_e) ** 2 / np.maximum(f_d, s) + s
    return lhs, rhs
