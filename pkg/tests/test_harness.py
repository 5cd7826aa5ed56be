import json
import os

import numpy as np
import pytest

from prodlearn.dist import DiscreteDistribution, LabeledProductDistribution, ProductDistribution, sample
from prodlearn.errors import CapExceededError, SchemaError
from prodlearn.harness import classification, experiment, lower_bound
from prodlearn.harness.io import (
    costs_from_dict,
    format_float,
    labeled_from_dict,
    load_product,
    product_from_dict,
    write_csv,
)
from prodlearn.metrics import joint_total_variation

from conftest import random_product

U01 = DiscreteDistribution([0, 1], [0.5, 0.5])


class TestIO:
    def test_round_trip(self, tmp_path, rng):
        D = random_product(rng, n=3)
        path = tmp_path / "d.json"
        path.write_text(json.dumps(D.to_dict()))
        E = load_product(path)
        assert all(a.allclose(b, atol=0) for a, b in zip(D, E))

    @pytest.mark.parametrize("doc", [
        {},
        {"marginals": []},
        {"marginals": [{"support": [0, 1]}]},
        {"marginals": [{"support": [0, 1], "probs": [0.5, 0.6]}]},
        {"marginals": [{"support": [1, 0], "probs": [0.5, 0.5]}]},
        {"marginals": [{"support": ["a"], "probs": [1]}]},
    ])
    def test_schema_errors(self, doc):
        with pytest.raises(SchemaError):
            product_from_dict(doc)

    def test_costs(self):
        doc = {"marginals": [U01.to_dict()], "costs": [0.2]}
        assert costs_from_dict(doc) == (0.2,)
        with pytest.raises(SchemaError):
            costs_from_dict({"marginals": [U01.to_dict()]})
        with pytest.raises(SchemaError):
            costs_from_dict({"marginals": [U01.to_dict()], "costs": [0.1, 0.2]})
        with pytest.raises(SchemaError):
            costs_from_dict({"marginals": [U01.to_dict()], "costs": [-0.1]})

    def test_labeled(self):
        doc = {"labels": U01.to_dict(), "conditionals": [{"marginals": [U01.to_dict()]}] * 2}
        L = labeled_from_dict(doc)
        assert L.n == 1
        with pytest.raises(SchemaError):
            labeled_from_dict({"labels": U01.to_dict(), "conditionals": [{"marginals": [U01.to_dict()]}]})

    def test_csv_format(self):
        assert format_float(1 / 3) == "0.333333333333"
        assert format_float(0.0) == "0"
        text = write_csv(("a", "b"), [(1, 0.1 + 0.2)])
        assert text == "a,b\n1,0.3\n"


def sweep_config(problem, D, **kw):
    defaults = dict(N_grid=(100, 1000), trials=3, seed=11)
    defaults.update(kw)
    return experiment.ExperimentConfig(problem, D, **defaults)


class TestSweep:
    def test_point_mass_zero_regret(self):
        D = ProductDistribution((DiscreteDistribution.point_mass(0.3), DiscreteDistribution.point_mass(0.6)))
        for problem, extra in [("prophet", {}), ("pandora", {"costs": (0.1, 0.1)}), ("auction", {}), ("finite-generic", {})]:
            rows = experiment.run_sweep(sweep_config(problem, D, **extra), threads=1)
            assert len(rows) == 6
            assert all(r.regret == 0.0 for r in rows)

    def test_deterministic_csv(self, tmp_path, rng):
        D = random_product(rng, n=3, max_size=4)
        cfg = sweep_config("prophet", D, output=str(tmp_path / "a.csv"))
        experiment.run_sweep(cfg, threads=1)
        first = (tmp_path / "a.csv").read_bytes()
        experiment.run_sweep(cfg, threads=3)
        assert (tmp_path / "a.csv").read_bytes() == first
        header = first.decode().splitlines()[0]
        assert header == "problem,n,k,N,trial,seed,opt,alg,regret"

    def test_ordered_cells(self, rng):
        D = random_product(rng, n=2)
        rows = experiment.run_sweep(sweep_config("auction", D), threads=4)
        assert [(r.N, r.trial) for r in rows] == [(N, t) for N in (100, 1000) for t in range(3)]
        # every row can be regenerated from its own seed
        r = rows[4]
        assert np.array_equal(sample(D, r.N, r.seed).data, sample(D, r.N, experiment.cell_seed(11, r.N, r.trial)).data)

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv(experiment.THREADS_ENV, "3")
        assert experiment.default_threads() == 3
        monkeypatch.setenv(experiment.THREADS_ENV, "x")
        with pytest.raises(SchemaError):
            experiment.default_threads()

    def test_config_validation(self):
        with pytest.raises(SchemaError):
            sweep_config("unknown", ProductDistribution((U01,)))
        with pytest.raises(SchemaError):
            sweep_config("prophet", ProductDistribution((U01,)), N_grid=(100, 10))
        with pytest.raises(SchemaError):
            sweep_config("prophet", ProductDistribution((U01,)), trials=0)
        with pytest.raises(SchemaError):
            sweep_config("pandora", ProductDistribution((U01,)))

    def test_config_from_file(self, tmp_path):
        (tmp_path / "inst.json").write_text(json.dumps({"marginals": [U01.to_dict()] * 2, "costs": [0.25, 0.25]}))
        cfg = experiment.ExperimentConfig.from_dict(
            {"problem": "pandora", "instance": "inst.json", "N_grid": [10, 20], "trials": 2, "seed": 1}, tmp_path)
        assert cfg.costs == (0.25, 0.25) and cfg.marginals.n == 2
        with pytest.raises(SchemaError):
            experiment.ExperimentConfig.from_dict({"problem": "prophet"}, tmp_path)

    def test_regret_trend(self):
        g = np.linspace(0, 1, 1001)
        w = (g + 0.0005) * (1.0005 - g)
        D = ProductDistribution((DiscreteDistribution(g, w / w.sum()), DiscreteDistribution.uniform(g)))
        rows = experiment.run_sweep(sweep_config("prophet", D, N_grid=(100, 1000, 10000), trials=20), threads=1)
        med = experiment.median_regret(rows)
        vals = list(med.values())
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert experiment.loglog_slope(med) <= -0.35

    def test_finite_generic_is_tv(self, rng):
        D = random_product(rng, n=2, max_size=3)
        row = experiment.run_sweep(sweep_config("finite-generic", D, N_grid=(50,), trials=1), threads=1)[0]
        from prodlearn.dist import product_empirical
        E = product_empirical(sample(D, 50, row.seed))
        assert row.regret == pytest.approx(joint_total_variation(D, E), abs=1e-15)


class TestFiniteLowerBound:
    def test_pmf(self):
        inst = lower_bound.finite_lb_instance(2, 1, 0.5, [[1], [1]])
        for i in range(2):
            m = inst.marginal(i)
            assert m.pmf(0) == 0.5 and m.pmf(1) == 0.375 and m.pmf(-1) == 0.125
        for bad in [(1, 1, 0.5, [[1]]), (2, 1, 1.0, [[1], [1]]), (2, 1, 0.5, [[1], [0]]), (2, 2, 0.5, [[1], [1]])]:
            with pytest.raises(ValueError):
                lower_bound.finite_lb_instance(*bad)

    def test_hypothesis(self):
        v = np.array([[1, -1], [-1, 1]])
        assert lower_bound.hypothesis(v, [[0, 0]]).tolist() == [0.0]
        assert lower_bound.hypothesis(v, [[1, 0], [-2, 0], [0, -1], [0, 2]]).tolist() == [1, 1, 1, 1]
        assert lower_bound.hypothesis(v, [[-1, 0], [2, 0], [1, 1], [0.5, 0], [3, 0]]).tolist() == [0, 0, 0, 0, 0]

    def test_loss_examples(self):
        v = np.ones((2, 1), dtype=int)
        assert lower_bound.finite_lb_loss(2, 1, 0.5, v, v) == 0.0
        w = np.array([[1], [-1]])
        assert lower_bound.finite_lb_loss(2, 1, 0.5, v, w) == pytest.approx(0.125)
        v = np.ones((3, 2), dtype=int)
        w = np.array([[-1, -1], [-1, -1], [1, 1]])
        loss = lower_bound.finite_lb_loss(3, 2, 0.3, v, w)
        assert loss == pytest.approx((2 / 3) ** 2 * 4 * 0.3 / 6)
        assert round(loss, 4) == 0.0889
        assert lower_bound.finite_lb_loss_enumerated(3, 2, 0.3, v, w) == pytest.approx(loss, abs=1e-12)
        with pytest.raises(ValueError):
            lower_bound.finite_lb_loss(3, 2, 0.3, v, np.ones((2, 2)))

    def test_closed_form_all_shapes(self, rng):
        for n in range(2, 5):
            for k in range(1, 4):
                for _ in range(5):
                    v = rng.choice([-1, 1], size=(n, k))
                    w = rng.choice([-1, 1], size=(n, k))
                    eps = float(rng.uniform(0.05, 0.95))
                    closed = lower_bound.finite_lb_loss(n, k, eps, v, w)
                    assert closed == pytest.approx(lower_bound.finite_lb_loss_enumerated(n, k, eps, v, w), abs=1e-12)

    def test_all_sign_matrices(self):
        mats = list(lower_bound.all_sign_matrices(2, 2))
        assert len(mats) == 16 and len({m.tobytes() for m in mats}) == 16

    def test_pandora_report(self):
        rep = lower_bound.pandora_lb_report(3, 0.3, [1, 0, 1], k=1)
        assert rep["opt_exact"] == pytest.approx(rep["opt_closed_form"], abs=1e-12)
        assert rep["opt_exact"] == pytest.approx(rep["brute_force"], abs=1e-12)
        assert rep["loss"] >= rep["penalty_bound"]


class TestClassification:
    def test_identical(self, rng):
        D = random_product(rng, n=2)
        assert classification.sup_hypothesis_gap(D, D) == 0.0
        assert classification.sup_hypothesis_gap(D, D, trials=10) == 0.0

    def test_exact_vs_sampled(self, rng):
        for _ in range(30):
            D, E = random_product(rng, n=2, max_size=2), random_product(rng, n=2, max_size=2)
            exact = classification.sup_hypothesis_gap(D, E)
            grids = [np.union1d(p.support, q.support) for p, q in zip(D, E)]
            assert exact == pytest.approx(0.5 * np.abs(D.dense(grids) - E.dense(grids)).sum(), abs=1e-15)
            assert classification.sup_hypothesis_gap(D, E, trials=50, seed=1) <= exact + 1e-12

    def test_product_tables_beyond_cap(self, rng):
        D = ProductDistribution.iid(DiscreteDistribution.uniform(np.arange(10) / 10), 3)
        E = ProductDistribution.iid(DiscreteDistribution.uniform(np.arange(5) / 5), 3)
        with pytest.raises(CapExceededError):
            classification.sup_hypothesis_gap(D, E, cap=100)
        gap = classification.sup_hypothesis_gap(D, E, trials=20, cap=100)
        assert 0 < gap <= classification.sup_hypothesis_gap(D, E) + 1e-12

    def labeled(self, rng, labels=(0, 1)):
        w = rng.dirichlet(np.ones(len(labels)))
        return LabeledProductDistribution(
            DiscreteDistribution(list(labels), w),
            tuple(random_product(rng, n=2, max_size=3) for _ in labels),
        )

    def test_bound_dominates_joint(self, rng):
        for t in range(30):
            D = self.labeled(rng)
            from prodlearn.dist import sample_labeled
            x, y = sample_labeled(D, 40, seed=t)
            tables = [classification.random_table_hypothesis(t, i) for i in range(3)]
            rep = classification.classification_perm_check(x, y, D, tables)
            assert rep.bound >= rep.joint_tv - 1e-12
            assert rep.max_gap <= rep.joint_tv + 1e-12

    def test_identical_labeled(self, rng):
        D = self.labeled(rng)
        rep = classification.labeled_gap_report(D, D, [classification.random_table_hypothesis(0)])
        assert rep.joint_tv == 0.0 and rep.bound == 0.0 and rep.gaps == (0.0,)

    def test_single_label_reduces(self, rng):
        for _ in range(10):
            D = self.labeled(rng, labels=(0,))
            E = self.labeled(rng, labels=(0,))
            rep = classification.labeled_gap_report(D, E)
            exact = classification.sup_hypothesis_gap(D.conditionals[0], E.conditionals[0])
            assert rep.label_tv == 0.0
            assert rep.joint_tv == pytest.approx(exact, abs=1e-12)
            assert rep.bound == pytest.approx(exact, abs=1e-12)

    def test_label_missing_on_one_side(self, rng):
        D = self.labeled(rng, labels=(0, 1, 2))
        E = self.labeled(rng, labels=(0, 1))
        rep = classification.labeled_gap_report(D, E)
        assert rep.bound >= rep.joint_tv - 1e-12
