"""Sample-complexity sweeps: learn from N samples, score regret exactly."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import myerson, pandora, prophet
from ..dist import DEFAULT_CAP, ProductDistribution, product_empirical, sample, discretize_samples
from ..errors import SchemaError
from ..metrics import joint_total_variation
from ..rng import seed_sequence
from .io import CONFIG_SCHEMA, _validate, costs_from_dict, load_json, product_from_dict, write_csv

PROBLEMS = ("prophet", "pandora", "auction", "finite-generic")
CSV_HEADER = ("problem", "n", "k", "N", "trial", "seed", "opt", "alg", "regret")
THREADS_ENV = "PRODLEARN_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise SchemaError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    problem: str
    marginals: ProductDistribution
    N_grid: tuple
    trials: int
    seed: int
    costs: tuple | None = None
    eps: float | None = None
    delta: float | None = None
    grid: float | None = None
    budget: float | None = None
    output: str | None = None
    cap: int = DEFAULT_CAP
    instance_path: str | None = field(default=None)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise SchemaError(f"unknown problem {self.problem!r}; expected one of {', '.join(PROBLEMS)}")
        grid = tuple(int(x) for x in self.N_grid)
        if not grid or any(x < 1 for x in grid) or list(grid) != sorted(set(grid)):
            raise SchemaError("N grid must be a strictly ascending list of positive integers")
        if self.trials < 1:
            raise SchemaError("trials must be at least 1")
        if self.problem == "pandora" and (self.costs is None or len(self.costs) != self.marginals.n):
            raise SchemaError("a Pandora sweep needs one cost per box")
        object.__setattr__(self, "N_grid", grid)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        _validate(doc, CONFIG_SCHEMA, "config")
        inst = doc["instance"]
        path = None
        if isinstance(inst, str):
            path = str(Path(base_dir) / inst)
            inst = load_json(path)
        where = path or "config: instance"
        marginals = product_from_dict(inst, where)
        costs = costs_from_dict(inst, where) if doc["problem"] == "pandora" else None
        return cls(
            problem=doc["problem"],
            marginals=marginals,
            N_grid=tuple(doc["N_grid"]),
            trials=doc["trials"],
            seed=doc["seed"],
            costs=costs,
            eps=doc.get("eps"),
            delta=doc.get("delta"),
            grid=doc.get("grid"),
            budget=doc.get("budget"),
            output=doc.get("output"),
            instance_path=path,
        )


@dataclass(frozen=True)
class SweepRow:
    problem: str
    n: int
    k: int
    N: int
    trial: int
    seed: int
    opt: float
    alg: float
    regret: float

    def as_tuple(self):
        return (self.problem, self.n, self.k, self.N, self.trial, self.seed, self.opt, self.alg, self.regret)


def cell_seed(seed: int, N: int, trial: int) -> int:
    """Seed of the ``(N, trial)`` cell, derived from the base seed."""
    return int(seed_sequence(seed, "sweep", N, trial).generate_state(1, np.uint64)[0] >> 1)


def optimal_value(cfg: ExperimentConfig) -> float:
    D = cfg.marginals
    if cfg.problem == "prophet":
        return prophet.optimal_value(D)
    if cfg.problem == "pandora":
        inst = pandora.PandoraInstance(D, cfg.costs)
        return pandora.evaluate_exact(pandora.weitzman_policy(inst), inst)
    if cfg.problem == "auction":
        return myerson.optimal_revenue(D)
    return 0.0


def learned_value(cfg: ExperimentConfig, samples) -> float:
    """Value on the true distribution of the hypothesis learned from ``samples``.

    For ``finite-generic`` the learner is the product empirical itself and the
    reported value is the largest gap ``|h(D) - h(E)|`` over all hypotheses
    ``h`` into [0, 1], i.e. the joint total variation distance.
    """
    D = cfg.marginals
    if cfg.problem == "prophet":
        return prophet.evaluate_exact(prophet.learn_perm(samples, cfg.grid), D)
    if cfg.problem == "pandora":
        policy = pandora.learn_perm(samples, cfg.costs, cfg.grid, cfg.budget, cfg.eps)
        return pandora.evaluate_exact(policy, pandora.PandoraInstance(D, cfg.costs))
    if cfg.problem == "auction":
        return myerson.expected_revenue_factored(myerson.learn_perm(samples, cfg.grid), D)
    if cfg.grid is not None:
        samples = discretize_samples(samples, cfg.grid)
    return joint_total_variation(D, product_empirical(samples), cfg.cap)


def run_cell(cfg: ExperimentConfig, N: int, trial: int, opt: float) -> SweepRow:
    s = cell_seed(cfg.seed, N, trial)
    samples = sample(cfg.marginals, N, s)
    alg = learned_value(cfg, samples)
    # finite-generic reports the hypothesis gap directly as its regret
    regret = alg if cfg.problem == "finite-generic" else opt - alg
    k = max(m.size for m in cfg.marginals)
    return SweepRow(cfg.problem, cfg.marginals.n, k, N, trial, s, opt, alg, regret)


def run_sweep(cfg: ExperimentConfig, threads: int | None = None) -> list[SweepRow]:
    """All ``(N, trial)`` cells in ``(N, trial)`` order; writes ``cfg.output`` if set."""
    opt = optimal_value(cfg)
    cells = [(N, t) for N in cfg.N_grid for t in range(cfg.trials)]
    threads = default_threads() if threads is None else max(1, threads)
    if threads == 1:
        rows = [run_cell(cfg, N, t, opt) for N, t in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda c: run_cell(cfg, c[0], c[1], opt), cells))
    if cfg.output:
        sweep_csv(rows, cfg.output)
    return rows


def sweep_csv(rows, path=None) -> str:
    return write_csv(CSV_HEADER, [r.as_tuple() for r in rows], path)


def median_regret(rows) -> dict:
    """Median regret per N."""
    by_N = {}
    for r in rows:
        by_N.setdefault(r.N, []).append(r.regret)
    return {N: float(np.median(v)) for N, v in sorted(by_N.items())}


def loglog_slope(medians: dict) -> float:
    """Least-squares slope of log(median regret) against log(N)."""
    Ns = np.array(list(medians.keys()), dtype=np.float64)
    m = np.array(list(medians.values()), dtype=np.float64)
    if np.any(m <= 0):
        return float("-inf") if m[-1] <= 0 < m[0] else float("nan")
    return float(np.polyfit(np.log(Ns), np.log(m), 1)[0])
