"""Command line interface.

Exit codes: 0 success, 2 schema or input error, 3 enumeration cap exceeded.
Results go to stdout as JSON, sweeps as CSV.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import metrics, myerson, pandora, prophet
from .dist import DEFAULT_CAP, ProductDistribution, sample_labeled
from .errors import CapExceededError, SchemaError
from .harness import classification, experiment, lower_bound
from .harness.io import costs_from_dict, dump_json, labeled_from_dict, load_json, product_from_dict, write_csv

EXIT_OK, EXIT_SCHEMA, EXIT_CAP = 0, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    return [int(x) for x in _floats(text)]


def _sign_matrix(text: str) -> np.ndarray:
    rows = [_ints(r) for r in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise SchemaError("sign matrix rows differ in length")
    return np.array(rows)


def _product(path) -> ProductDistribution:
    return product_from_dict(load_json(path), str(path))


def _pandora_instance(path) -> pandora.PandoraInstance:
    doc = load_json(path)
    return pandora.PandoraInstance(product_from_dict(doc, str(path)), costs_from_dict(doc, str(path)))


def _emit(doc):
    sys.stdout.write(dump_json(doc))


def _sweep(args, problem: str, costs=None):
    cfg = experiment.ExperimentConfig(
        problem=problem,
        marginals=_product(args.instance),
        N_grid=tuple(args.N),
        trials=args.trials,
        seed=args.seed,
        costs=costs,
        eps=getattr(args, "eps", None),
        grid=args.grid,
        budget=getattr(args, "budget", None),
        cap=args.cap,
    )
    rows = experiment.run_sweep(cfg, args.threads)
    sys.stdout.write(experiment.sweep_csv(rows, args.output))


# handlers


def cmd_metrics(args):
    P, Q = _product(args.p), _product(args.q)
    try:
        tv = metrics.joint_total_variation(P, Q, args.cap)
    except CapExceededError:
        if args.strict:
            raise
        tv = None  # left empty in the CSV
    row = (tv, metrics.product_hellinger_sq(P, Q), metrics.total_variation_product_upper(P, Q))
    sys.stdout.write(write_csv(("tv", "hellinger_sq", "tv_upper"), [row]))


def cmd_prophet_solve(args):
    s, opt = prophet.backward_induction(_product(args.instance))
    _emit({"thresholds": list(s.thresholds), "opt": opt})


def cmd_prophet_eval(args):
    D = _product(args.instance)
    s = prophet.ThresholdStrategy(tuple(_floats(args.thresholds)))
    out = {"value": prophet.evaluate_exact(s, D)}
    if args.mc_trials:
        out["mc_mean"], out["mc_stderr"] = prophet.evaluate_monte_carlo(s, D, args.mc_trials, args.seed)
    _emit(out)


def cmd_prophet_decompose(args):
    D = _product(args.instance)
    s = prophet.ThresholdStrategy(tuple(_floats(args.thresholds)))
    terms = prophet.error_decomposition(s, D)
    _emit({"terms": terms.tolist(), "total": float(terms.sum()),
           "regret": prophet.optimal_value(D) - prophet.evaluate_exact(s, D)})


def cmd_prophet_learn(args):
    _sweep(args, "prophet")


def cmd_prophet_iid(args):
    s = prophet.iid_quantile_strategy(args.n, args.eps, args.beta)
    _emit({"eps": list(s.eps), "beta": args.beta})


def cmd_pandora_solve(args):
    inst = _pandora_instance(args.instance)
    p = pandora.weitzman_policy(inst)
    _emit({"order": list(p.order), "sigmas": list(p.sigmas), "value": pandora.evaluate_exact(p, inst)})


def cmd_pandora_eval(args):
    inst = _pandora_instance(args.instance)
    p = pandora.PandoraPolicy(tuple(_ints(args.order)), tuple(_floats(args.sigmas)), args.budget)
    value = pandora.evaluate_exact(p, inst)
    _emit({"value": value, "normalized": pandora.normalized_value(value, inst.n)})


def cmd_pandora_learn(args):
    doc = load_json(args.instance)
    _sweep(args, "pandora", costs_from_dict(doc, str(args.instance)))


def cmd_pandora_oracle(args):
    inst = _pandora_instance(args.instance)
    _emit({"opt": pandora.brute_force_optimal(inst, args.cap)})


def cmd_pandora_hard(args):
    signs = _ints(args.signs)
    inst = pandora.hard_instance(args.n, args.eps, signs)
    _emit({**inst.to_dict(), "opt": pandora.hard_instance_opt(args.n, args.eps, sum(1 for s in signs if s))})


def cmd_auction_solve(args):
    D = _product(args.instance)
    a = myerson.myerson_auction(D)
    _emit({
        "supports": [s.tolist() for s in a.supports],
        "virtual_values": [np.asarray(p).tolist() for p in a.phis],
        "revenue": myerson.optimal_revenue(D),
    })


def cmd_auction_eval(args):
    a = myerson.myerson_auction(_product(args.design))
    mean, stderr = myerson.expected_revenue(a, _product(args.instance), args.cap, args.mc_trials, args.seed)
    _emit({"revenue": mean, "stderr": stderr})


def cmd_auction_learn(args):
    _sweep(args, "auction")


def cmd_experiment_sweep(args):
    from pathlib import Path

    cfg = experiment.ExperimentConfig.from_dict(load_json(args.config), Path(args.config).parent)
    output = args.output if args.output is not None else cfg.output
    rows = experiment.run_sweep(cfg, args.threads)
    sys.stdout.write(experiment.sweep_csv(rows, output))


def cmd_lb_finite(args):
    v = _sign_matrix(args.v) if args.v else np.ones((args.n, args.k), dtype=int)
    w = _sign_matrix(args.w) if args.w else -v
    inst = lower_bound.finite_lb_instance(args.n, args.k, args.eps, v)
    _emit({
        "marginals": [inst.marginal(i).to_dict() for i in range(args.n)],
        "hamming": lower_bound.hamming(v, w),
        "loss_closed_form": lower_bound.finite_lb_loss(args.n, args.k, args.eps, v, w),
        "loss_enumerated": lower_bound.finite_lb_loss_enumerated(args.n, args.k, args.eps, v, w, args.cap),
    })


def cmd_lb_pandora(args):
    _emit(lower_bound.pandora_lb_report(args.n, args.eps, _ints(args.signs), args.mistakes))


def cmd_check_classification(args):
    D = labeled_from_dict(load_json(args.instance), str(args.instance))
    samples, labels = sample_labeled(D, args.N, args.seed)
    tables = [classification.random_table_hypothesis(args.seed, i) for i in range(args.tables)]
    rep = classification.classification_perm_check(samples, labels, D, tables, args.cap)
    _emit({"label_tv": rep.label_tv, "conditional_tv": rep.conditional_tv, "bound": rep.bound,
           "joint_tv": rep.joint_tv, "gaps": list(rep.gaps)})


# parser


def _common_learn(p):
    p.add_argument("instance")
    p.add_argument("--N", type=int, nargs="+", required=True, help="sample sizes (ascending)")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=float, default=None, help="round samples down to this grid")
    p.add_argument("--output", default=None, help="also write the CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodlearn", description=__doc__.splitlines()[0])
    parser.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration cap (joint points)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="distances between two product distributions")
    p.add_argument("p")
    p.add_argument("q")
    p.add_argument("--strict", action="store_true", help="fail instead of skipping joint TV above the cap")
    p.set_defaults(func=cmd_metrics)

    pr = sub.add_parser("prophet").add_subparsers(dest="action", required=True)
    p = pr.add_parser("solve")
    p.add_argument("instance")
    p.set_defaults(func=cmd_prophet_solve)
    for name, fn in (("eval", cmd_prophet_eval), ("decompose", cmd_prophet_decompose)):
        p = pr.add_parser(name)
        p.add_argument("instance")
        p.add_argument("--thresholds", required=True, help="comma-separated, 'inf' allowed")
        if name == "eval":
            p.add_argument("--mc-trials", type=int, default=0)
            p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=fn)
    p = pr.add_parser("learn")
    _common_learn(p)
    p.set_defaults(func=cmd_prophet_learn)
    p = pr.add_parser("iid-strategy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--beta", type=float, default=prophet.DEFAULT_BETA)
    p.set_defaults(func=cmd_prophet_iid)

    pa = sub.add_parser("pandora").add_subparsers(dest="action", required=True)
    p = pa.add_parser("solve")
    p.add_argument("instance")
    p.set_defaults(func=cmd_pandora_solve)
    p = pa.add_parser("eval")
    p.add_argument("instance")
    p.add_argument("--order", required=True)
    p.add_argument("--sigmas", required=True)
    p.add_argument("--budget", type=float, default=None)
    p.set_defaults(func=cmd_pandora_eval)
    p = pa.add_parser("learn")
    _common_learn(p)
    p.add_argument("--eps", type=float, default=None, help="truncate at the default budget for this eps")
    p.add_argument("--budget", type=float, default=None)
    p.set_defaults(func=cmd_pandora_learn)
    p = pa.add_parser("oracle")
    p.add_argument("instance")
    p.set_defaults(func=cmd_pandora_oracle)
    p = pa.add_parser("hard-instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--signs", required=True, help="comma-separated 0/1")
    p.set_defaults(func=cmd_pandora_hard)

    au = sub.add_parser("auction").add_subparsers(dest="action", required=True)
    p = au.add_parser("solve")
    p.add_argument("instance")
    p.set_defaults(func=cmd_auction_solve)
    p = au.add_parser("eval")
    p.add_argument("instance", help="true value distribution")
    p.add_argument("--design", required=True, help="distribution the auction is built for")
    p.add_argument("--mc-trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_auction_eval)
    p = au.add_parser("learn")
    _common_learn(p)
    p.set_defaults(func=cmd_auction_learn)

    ex = sub.add_parser("experiment").add_subparsers(dest="action", required=True)
    p = ex.add_parser("sweep")
    p.add_argument("config")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_experiment_sweep)

    lb = sub.add_parser("lb").add_subparsers(dest="action", required=True)
    p = lb.add_parser("finite")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--v", default=None, help="rows separated by ';', e.g. '1,-1;1,1'")
    p.add_argument("--w", default=None, help="comparison signs (default: -v)")
    p.set_defaults(func=cmd_lb_finite)
    p = lb.add_parser("pandora")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--signs", required=True)
    p.add_argument("--mistakes", type=int, default=1)
    p.set_defaults(func=cmd_lb_pandora)

    ch = sub.add_parser("check").add_subparsers(dest="action", required=True)
    p = ch.add_parser("classification")
    p.add_argument("instance", help="labeled instance JSON")
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tables", type=int, default=10, help="random hypothesis tables to test")
    p.set_defaults(func=cmd_check_classification)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
