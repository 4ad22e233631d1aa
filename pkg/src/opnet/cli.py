"""Command line interface.

Subcommands:
  train            one training run; writes trace.csv, weights.bin, report.json
  rate             sweep over an n grid; writes rate.csv, report.json
  verify lemma5    indicator-network guarantee (Monte Carlo, perturbed weights)
  verify lemma8    multiscale construction: telescoping, term count, weight scaling
  verify descent   per-step descent recursion and drift bound on seeded runs
  verify pl        gradient-dominance inequality for the outer-weight ridge problem
  gradcheck        analytic gradient vs central finite differences

Exit codes: 0 success, 1 verification failures, 2 invalid configuration.
Every train/rate run prints the full-scale and desk schedules side by side.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .harness import ConfigError, ExperimentConfig, run_experiment
from .net import Topology, init_weights, save_weights, truncated_predictor
from .optim import theorem_schedule, train
from .rng import stable_seed
from .synth import NoiseModel, l2_error, make_target, sample_dataset
from . import verify as verify_suites


def _load_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        cfg = ExperimentConfig()
    if args.out is not None:
        cfg.outdir = args.out
    if args.seed is not None:
        cfg.master_seed = args.seed
    cfg.validate()
    return cfg


def _print_schedules(cfg: ExperimentConfig, n: int) -> None:
    hp = cfg.hyper_for(n)
    d_eff = cfg.d_star if cfg.estimator == "interaction" else cfg.d
    topo = Topology(d=d_eff, L=cfg.L, r=cfg.r, K=cfg.K)
    print(theorem_schedule(n, topo, hp, mode="desk").side_by_side())
    for check in hp.check_constants():
        print(f"  constants: {check}")


def _cmd_train(args) -> int:
    cfg = _load_config(args)
    if cfg.estimator != "plain":
        print("train runs the plain estimator; use rate for interaction sweeps", file=sys.stderr)
        return 2
    n = int(args.n if args.n is not None else cfg.n_grid[0])
    _print_schedules(cfg, n)
    target = make_target(cfg.target_kind, cfg.target_p, cfg.target_C, cfg.d, cfg.target_params)
    noise = NoiseModel(kind=cfg.noise_kind, scale=cfg.noise_scale)
    seed = stable_seed(cfg.master_seed, n, 0)
    data = sample_dataset(target, noise, n, seed)
    hp = cfg.hyper_for(n)
    topo = Topology(d=cfg.d, L=cfg.L, r=cfg.r, K=cfg.K)
    w0 = init_weights(topo, hp, stable_seed(seed, "init"))
    trace = train(w0, data, hp)
    err, se = l2_error(
        truncated_predictor(trace.final_weights, hp.beta_n),
        target,
        cfg.mc_points,
        stable_seed(seed, "mc"),
    )
    outdir = Path(cfg.outdir or "out")
    outdir.mkdir(parents=True, exist_ok=True)
    trace.to_csv(outdir / "trace.csv")
    save_weights(trace.final_weights, outdir / "weights.bin")
    report = {
        "n": n,
        "initial_risk": float(trace.risks[0]),
        "final_risk": float(trace.risks[-1]),
        "final_drift": float(trace.drifts[-1]),
        "log_n": hp.log_n,
        "beta_n": hp.beta_n,
        "l2_error": err,
        "l2_std_error": se,
        "constant_checks": [str(c) for c in hp.check_constants()],
    }
    (outdir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"final risk {trace.risks[-1]:.6g} (initial {trace.risks[0]:.6g}), "
          f"L2 error {err:.6g} +- {se:.2g}; outputs in {outdir}")
    return 0


def _cmd_rate(args) -> int:
    cfg = _load_config(args)
    _print_schedules(cfg, cfg.n_grid[0])
    report = run_experiment(cfg)
    for n in cfg.n_grid:
        print(f"n={n}: mean L2 error {report.means[n]:.6g}")
    if report.slope:
        print(
            f"fitted slope {report.slope.slope:.4f} (stderr {report.slope.stderr:.4f}); "
            f"references {report.reference_slopes}"
        )
    if cfg.outdir:
        print(f"outputs in {cfg.outdir}")
    return 0


def _emit(report: dict, out: str | None) -> int:
    text = json.dumps(report, indent=2, sort_keys=True, default=float)
    if out:
        Path(out).write_text(text + "\n")
    print(text)
    return 0 if report.get("passed") else 1


def _cmd_verify(args) -> int:
    if args.check == "lemma5":
        report = verify_suites.run_indicator_suite(
            d=args.d,
            delta=args.delta,
            s=args.s,
            n=args.n,
            points=args.points,
            perturbations=args.perturbations,
            seed=args.seed,
        )
    elif args.check == "lemma8":
        report = verify_suites.run_multiscale_suite(
            levels=tuple(args.levels),
            d=args.d,
            points=args.points,
            seed=args.seed,
        )
        cov = verify_suites.run_covering_suite(
            ks=tuple(args.levels), d=args.d, seed=args.seed
        )
        report["covering"] = cov
        report["passed"] = bool(report["passed"] and cov["passed"])
    elif args.check == "descent":
        report = verify_suites.run_descent_suite(runs=args.runs, seed=args.seed)
    elif args.check == "pl":
        report = verify_suites.run_pl_suite(instances=args.instances, seed=args.seed)
    else:
        raise AssertionError(f"unknown check {args.check}")
    return _emit(report, args.out)


def _cmd_gradcheck(args) -> int:
    report = verify_suites.run_gradcheck(instances=args.instances, seed=args.seed)
    print(
        f"max relative error {report['max_rel_error']:.3e} over "
        f"{report['instances']} instances (tolerance {report['tolerance']:.0e})"
    )
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opnet",
        description="Over-parametrized parallel network regression: training, sweeps, verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="one training run")
    p_train.add_argument("--config", help="JSON experiment config")
    p_train.add_argument("--n", type=int, help="sample size (default: first grid entry)")
    p_train.add_argument("--seed", type=int, help="master seed override")
    p_train.add_argument("--out", help="output directory")
    p_train.set_defaults(fn=_cmd_train)

    p_rate = sub.add_parser("rate", help="convergence sweep over the n grid")
    p_rate.add_argument("--config", help="JSON experiment config")
    p_rate.add_argument("--seed", type=int, help="master seed override")
    p_rate.add_argument("--out", help="output directory")
    p_rate.set_defaults(fn=_cmd_rate)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    v_sub = p_verify.add_subparsers(dest="check", required=True)

    p5 = v_sub.add_parser("lemma5", help="box-indicator network guarantee")
    p5.add_argument("--d", type=int, default=1)
    p5.add_argument("--delta", type=float, default=0.1)
    p5.add_argument("--s", type=int, default=2)
    p5.add_argument("--n", type=float, default=None, help="accuracy surrogate n")
    p5.add_argument("--points", type=int, default=10_000)
    p5.add_argument("--perturbations", type=int, default=100)
    p5.add_argument("--seed", type=int, default=5)
    p5.add_argument("--out", help="write the JSON report here")
    p5.set_defaults(fn=_cmd_verify)

    p8 = v_sub.add_parser("lemma8", help="multiscale construction checks")
    p8.add_argument("--d", type=int, default=1)
    p8.add_argument("--levels", type=int, nargs="+", default=[1, 2, 3])
    p8.add_argument("--points", type=int, default=10_000)
    p8.add_argument("--seed", type=int, default=17)
    p8.add_argument("--out", help="write the JSON report here")
    p8.set_defaults(fn=_cmd_verify)

    pd = v_sub.add_parser("descent", help="descent recursion on seeded runs")
    pd.add_argument("--runs", type=int, default=20)
    pd.add_argument("--seed", type=int, default=3)
    pd.add_argument("--out", help="write the JSON report here")
    pd.set_defaults(fn=_cmd_verify)

    pp = v_sub.add_parser("pl", help="outer-weight gradient dominance")
    pp.add_argument("--instances", type=int, default=10_000)
    pp.add_argument("--seed", type=int, default=11)
    pp.add_argument("--out", help="write the JSON report here")
    pp.set_defaults(fn=_cmd_verify)

    p_grad = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p_grad.add_argument("--instances", type=int, default=36)
    p_grad.add_argument("--seed", type=int, default=7)
    p_grad.set_defaults(fn=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
