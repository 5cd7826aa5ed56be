"""Worst-case hypothesis gaps and the label-conditional product empirical."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dist import (
    DEFAULT_CAP,
    LabeledProductDistribution,
    ProductDistribution,
    SampleMatrix,
    conditional_product_empirical,
)
from ..errors import CapExceededError
from ..metrics import aligned_joints, total_variation
from ..rng import stream


def _union_grids(D: ProductDistribution, E: ProductDistribution):
    return [np.union1d(p.support, q.support) for p, q in zip(D, E)]


def sup_hypothesis_gap(D: ProductDistribution, E: ProductDistribution, trials: int = 0,
                       seed: int = 0, cap: int = DEFAULT_CAP) -> float:
    """``sup_h |h(D) - h(E)|`` over hypotheses into [0, 1].

    With ``trials == 0`` this is the exact joint total variation (needs an
    enumerable joint). With ``trials > 0`` it is the largest gap over that
    many random hypothesis tables, a lower bound on the exact value: full
    tables when the joint fits in ``cap``, product-form tables
    ``h(t) = prod_i h_i(t_i)`` otherwise.
    """
    if D.n != E.n:
        raise ValueError(f"dimension mismatch: {D.n} vs {E.n}")
    if trials == 0:
        fD, fE = aligned_joints(D, E, cap)
        return float(min(1.0, 0.5 * np.abs(fD - fE).sum()))
    rng = stream(seed, "hypothesis-tables")
    try:
        fD, fE = aligned_joints(D, E, cap)
    except CapExceededError:
        grids = _union_grids(D, E)
        best = 0.0
        for _ in range(trials):
            hD = hE = 1.0
            for g, p, q in zip(grids, D, E):
                h = rng.random(g.size)
                hD *= float(np.dot(h, p.pmf(g)))
                hE *= float(np.dot(h, q.pmf(g)))
            best = max(best, abs(hD - hE))
        return best
    diff = (fD - fE).reshape(-1)
    best = 0.0
    for _ in range(trials):
        best = max(best, abs(float(np.dot(rng.random(diff.size), diff))))
    return best


@dataclass(frozen=True)
class ClassificationReport:
    label_tv: float
    conditional_tv: float
    bound: float
    joint_tv: float
    gaps: tuple

    @property
    def max_gap(self) -> float:
        return max(self.gaps, default=0.0)


def _grid_points(grids) -> np.ndarray:
    mesh = np.meshgrid(*grids, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def labeled_gap_report(D: LabeledProductDistribution, E: LabeledProductDistribution,
                       hypotheses=(), cap: int = DEFAULT_CAP) -> ClassificationReport:
    """Exact joint TV of ``(x, y)``, its label/conditional bound, and hypothesis gaps.

    ``hypotheses`` are callables ``h(points, y) -> values in [0, 1]``.
    """
    if D.n != E.n:
        raise ValueError(f"dimension mismatch: {D.n} vs {E.n}")
    labels = np.union1d(D.labels.support, E.labels.support)
    wD, wE = D.labels.pmf(labels), E.labels.pmf(labels)
    label_tv = total_variation(D.labels, E.labels)
    cond_tv = 0.0
    joint = 0.0
    h_D = np.zeros(len(hypotheses))
    h_E = np.zeros(len(hypotheses))
    for y, pd, pe in zip(labels, wD, wE):
        cD, cE = D.conditional(y), E.conditional(y)
        if cD is None or cE is None:
            # only one side puts mass on this label
            c = cD if cD is not None else cE
            joint += 0.5 * (pd + pe)
            if hypotheses:
                pts, mass = c.joint(cap)
                for i, h in enumerate(hypotheses):
                    val = float(np.dot(np.asarray(h(pts, y), dtype=np.float64), mass))
                    h_D[i] += pd * val
                    h_E[i] += pe * val
            continue
        grids = _union_grids(cD, cE)
        fD, fE = (f.reshape(-1) for f in aligned_joints(cD, cE, cap))
        cond_tv += pe * 0.5 * np.abs(fD - fE).sum()
        joint += 0.5 * np.abs(pd * fD - pe * fE).sum()
        if hypotheses:
            pts = _grid_points(grids)
            for i, h in enumerate(hypotheses):
                vals = np.asarray(h(pts, y), dtype=np.float64)
                h_D[i] += pd * float(np.dot(vals, fD))
                h_E[i] += pe * float(np.dot(vals, fE))
    gaps = tuple(float(abs(a - b)) for a, b in zip(h_D, h_E))
    return ClassificationReport(label_tv, float(cond_tv), float(label_tv + cond_tv),
                                float(min(1.0, joint)), gaps)


def classification_perm_check(samples: SampleMatrix, labels, D: LabeledProductDistribution,
                              hypotheses=(), cap: int = DEFAULT_CAP) -> ClassificationReport:
    """Compare the true labeled law with the label-conditional product empirical."""
    E = conditional_product_empirical(samples, labels)
    return labeled_gap_report(D, E, hypotheses, cap)


def random_table_hypothesis(seed: int, index: int = 0):
    """A fixed random [0, 1] table over (point, label), hashed per point."""
    def h(points, y):
        pts = np.atleast_2d(points)
        out = np.empty(len(pts))
        for r, row in enumerate(pts):
            key = [int(round(x * 1e6)) & 0xFFFFFFFF for x in row] + [int(round(float(y) * 1e6)) & 0xFFFFFFFF]
            out[r] = stream(seed, "table", index, *key).random()
        return out
    return h

