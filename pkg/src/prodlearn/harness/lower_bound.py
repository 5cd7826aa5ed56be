"""Finite-domain lower-bound family.

Each coordinate lives on ``{0, +-1, ..., +-k}``. Sign matrix ``v`` tilts the
mass of ``+-j`` in coordinate ``i`` towards ``v[i, j-1] * j``. The hypothesis
``h^v`` pays 1 exactly on vectors with a single non-zero coordinate whose
value points the way ``v`` says.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dist import DEFAULT_CAP, DiscreteDistribution, ProductDistribution


def _signs(v, n: int | None = None, k: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    if v.ndim != 2 or not np.all(np.abs(v) == 1):
        raise ValueError("sign matrix must be n x k with entries +1/-1")
    if (n is not None and v.shape[0] != n) or (k is not None and v.shape[1] != k):
        raise ValueError(f"sign matrix has shape {v.shape}, expected ({n}, {k})")
    return v


@dataclass(frozen=True, eq=False)
class FiniteLBInstance:
    n: int
    k: int
    eps: float
    v: np.ndarray

    def __post_init__(self):
        if self.n < 2 or self.k < 1:
            raise ValueError("need n >= 2 and k >= 1")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        object.__setattr__(self, "v", _signs(self.v, self.n, self.k))

    def marginal(self, i: int) -> DiscreteDistribution:
        n, k, eps = self.n, self.k, self.eps
        pmf = {0: 1.0 - 1.0 / n}
        for j in range(1, k + 1):
            s = int(self.v[i, j - 1])
            pmf[s * j] = (1 + eps) / (2 * n * k)
            pmf[-s * j] = (1 - eps) / (2 * n * k)
        values = sorted(pmf)
        return DiscreteDistribution(values, [pmf[x] for x in values])

    @property
    def distribution(self) -> ProductDistribution:
        return ProductDistribution(tuple(self.marginal(i) for i in range(self.n)))

    def hypothesis(self, points) -> np.ndarray:
        return hypothesis(self.v, points)


def finite_lb_instance(n: int, k: int, eps: float, v) -> FiniteLBInstance:
    return FiniteLBInstance(n, k, eps, v)


def hypothesis(v, points) -> np.ndarray:
    """``h^v`` on each row of ``points``."""
    v = _signs(v)
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != v.shape[0]:
        raise ValueError("points and sign matrix disagree on the dimension")
    nonzero = pts != 0
    one_hot = nonzero.sum(axis=1) == 1
    i = np.argmax(nonzero, axis=1)
    x = pts[np.arange(len(pts)), i]
    j = np.abs(x).astype(np.int64)
    ok = one_hot & (j >= 1) & (j <= v.shape[1]) & (np.abs(x) == j)
    sign = v[i, np.clip(j - 1, 0, v.shape[1] - 1)]
    return (ok & (np.sign(x) == sign)).astype(np.float64)


def hypothesis_value(v, D: ProductDistribution, cap: int = DEFAULT_CAP) -> float:
    """``E_D[h^v]`` by enumerating the joint support of ``D``."""
    points, probs = D.joint(cap)
    return float(np.dot(hypothesis(v, points), probs))


def hamming(v, w) -> int:
    v, w = _signs(v), _signs(w)
    if v.shape != w.shape:
        raise ValueError(f"shape mismatch: {v.shape} vs {w.shape}")
    return int(np.sum(v != w))


def finite_lb_loss(n: int, k: int, eps: float, v, w) -> float:
    """Closed form of ``h^v(D^v) - h^w(D^v)``."""
    v, w = _signs(v, n, k), _signs(w, n, k)
    return (1 - 1 / n) ** (n - 1) * hamming(v, w) * eps / (n * k)


def finite_lb_loss_enumerated(n: int, k: int, eps: float, v, w, cap: int = DEFAULT_CAP) -> float:
    D = finite_lb_instance(n, k, eps, v).distribution
    return hypothesis_value(v, D, cap) - hypothesis_value(w, D, cap)


def all_sign_matrices(n: int, k: int):
    """Every ``n x k`` sign matrix (``2^(nk)`` of them)."""
    for bits in range(1 << (n * k)):
        yield np.array([1 if bits >> b & 1 else -1 for b in range(n * k)]).reshape(n, k)


def pandora_lb_report(n: int, eps: float, signs, k: int = 1) -> dict:
    """Closed-form optimum and mistake penalty next to exact evaluations.

    ``k`` mistakes are made by dropping the last ``k`` good boxes from the
    optimal subsequence.
    """
    from .. import pandora

    inst = pandora.hard_instance(n, eps, signs)
    good = [i for i, s in enumerate(signs) if s]
    n_plus = len(good)
    k = min(k, n_plus)
    opt_exact = pandora.evaluate_exact(pandora.weitzman_policy(inst), inst)
    kept = good[: n_plus - k]
    h = pandora.evaluate_exact(pandora.subsequence_policy(n, kept), inst)
    return {
        "n": n,
        "eps": eps,
        "n_plus": n_plus,
        "opt_closed_form": pandora.hard_instance_opt(n, eps, n_plus),
        "opt_exact": opt_exact,
        "mistakes": k,
        "value_with_mistakes": h,
        "loss": opt_exact - h,
        "penalty_bound": pandora.mistake_penalty(n, eps, k),
        "brute_force": pandora.brute_force_optimal(inst) if n <= pandora.BRUTE_FORCE_MAX_BOXES else math.nan,
    }
