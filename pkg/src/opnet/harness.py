"""Experiment runner: training sweeps over n with log-log slope fitting.

A run draws a fresh sample for every (n, replication) cell, trains the
configured estimator, measures its truncated L2 error against the known
target by Monte Carlo, and fits the slope of log error against log n.
Slope verdicts are comparative and tolerance-banded: the theory's rates
are asymptotic with unspecified constants, so the fitted slope is always
reported next to the reference exponents -1/(1+d) and -1/(1+d*), never
asserted equal to them.

Cell seeds derive from (master_seed, n, replication) through a stable
hash, so grid points are independent and individually reproducible, and
cells may run concurrently without affecting any output byte.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .interaction import (
    InteractionSpec,
    init_interaction,
    train_interaction,
    truncated_interaction_predictor,
)
from .net import Topology, init_weights, truncated_predictor
from .optim import theorem_schedule, train
from .params import DeskOverrides, HyperParams
from .rng import stable_seed
from .synth import NoiseModel, l2_error, make_target, sample_dataset

THREAD_ENV_VAR = "OPNET_THREADS"


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    """Everything one sweep needs; serializes to/from a flat JSON object."""

    # target and noise
    target_kind: str = "lipschitz-cone"
    target_p: float = 1.0
    target_C: float = 1.0
    d: int = 1
    target_params: dict = field(default_factory=dict)
    noise_kind: str = "gaussian"
    noise_scale: float = 0.1
    # estimator
    estimator: str = "plain"  # "plain" | "interaction"
    d_star: Optional[int] = None
    L: int = 2
    r: int = 2
    K: int = 64
    # schedule (desk scale); tau defaults to 1/(1+d) resp. 1/(1+d*)
    t_n: int = 500
    c1: float = 8.0
    c2: float = 1.0
    c5: float = 1.0
    tau: Optional[float] = None
    # sweep
    n_grid: tuple = (100, 200, 400)
    replications: int = 3
    mc_points: int = 20_000
    master_seed: int = 0
    outdir: Optional[str] = None

    def validate(self) -> None:
        if self.estimator not in ("plain", "interaction"):
            raise ConfigError(f"estimator must be plain|interaction, got {self.estimator!r}")
        if self.estimator == "interaction":
            if self.d_star is None or not 1 <= self.d_star <= self.d:
                raise ConfigError(f"interaction estimator needs 1 <= d_star <= d, got {self.d_star}")
        grid = tuple(int(n) for n in self.n_grid)
        if len(grid) == 0:
            raise ConfigError("n_grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing, got {grid}")
        if any(n < 3 for n in grid):
            raise ConfigError("all n in the grid must be >= 3")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.mc_points < 2:
            raise ConfigError(f"mc_points must be >= 2, got {self.mc_points}")
        if self.t_n < 0 or self.K < 1 or self.L < 2 or self.r < 1:
            raise ConfigError("need t_n >= 0, K >= 1, L >= 2, r >= 1")

    @property
    def effective_tau(self) -> float:
        if self.tau is not None:
            return self.tau
        if self.estimator == "interaction":
            return 1.0 / (1.0 + self.d_star)
        return 1.0 / (1.0 + self.d)

    def hyper_for(self, n: int) -> HyperParams:
        return HyperParams.remark_defaults(
            n,
            self.c5,
            c1=self.c1,
            c2=self.c2,
            tau=self.effective_tau,
            t_n=self.t_n,
            desk=DeskOverrides(K_cap=self.K, t_n_cap=self.t_n),
        )

    def to_json(self) -> str:
        payload = asdict(self)
        payload["n_grid"] = list(self.n_grid)
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config JSON must be an object")
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "n_grid" in payload:
            payload["n_grid"] = tuple(payload["n_grid"])
        cfg = cls(**payload)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class CellResult:
    n: int
    replication: int
    error: float
    std_error: float
    final_risk: float
    initial_risk: float
    drift: float


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float
    stderr: float


def fit_slope(pairs) -> SlopeFit:
    """Ordinary least squares of log error on log n.

    Needs at least 3 points and strictly positive errors.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError(f"need >= 3 (n, error) pairs to fit a slope, got {len(pairs)}")
    ns = np.array([float(p[0]) for p in pairs])
    errs = np.array([float(p[1]) for p in pairs])
    if np.any(errs <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    x = np.log(ns)
    y = np.log(errs)
    xm = x - x.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ y / sxx)
    intercept = float(y.mean() - slope * x.mean())
    res = y - (slope * x + intercept)
    rss = float(res @ res)
    dof = len(pairs) - 2
    stderr = math.sqrt(rss / dof / sxx) if dof > 0 else float("nan")
    return SlopeFit(slope=slope, intercept=intercept, residual=rss, stderr=stderr)


@dataclass
class RateReport:
    config: ExperimentConfig
    cells: list
    means: dict
    slope: Optional[SlopeFit]
    reference_slopes: dict
    schedule_text: str

    def to_csv(self, path) -> None:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            fh.write("# schema=rate-v1\n")
            fh.write("n,replication,l2_error,std_error,initial_risk,final_risk,drift\n")
            for c in self.cells:
                fh.write(
                    f"{c.n},{c.replication},{c.error!r},{c.std_error!r},"
                    f"{c.initial_risk!r},{c.final_risk!r},{c.drift!r}\n"
                )

    def to_dict(self) -> dict:
        return {
            "config": json.loads(self.config.to_json()),
            "cells": [asdict(c) for c in self.cells],
            "mean_errors": {str(n): self.means[n] for n in sorted(self.means)},
            "slope": asdict(self.slope) if self.slope else None,
            "reference_slopes": self.reference_slopes,
            "schedule": self.schedule_text,
        }

    def write(self, outdir) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        self.to_csv(outdir / "rate.csv")
        (outdir / "report.json").write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        )


def _worker_count() -> int:
    env = os.environ.get(THREAD_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREAD_ENV_VAR} must be an integer, got {env!r}")
    return min(8, os.cpu_count() or 1)


def run_cell(cfg: ExperimentConfig, target, noise, n: int, rep: int) -> CellResult:
    """Train one estimator on one fresh sample and measure its L2 error."""
    seed = stable_seed(cfg.master_seed, n, rep)
    data = sample_dataset(target, noise, n, seed)
    hp = cfg.hyper_for(n)
    if cfg.estimator == "plain":
        topo = Topology(d=cfg.d, L=cfg.L, r=cfg.r, K=cfg.K)
        w0 = init_weights(topo, hp, stable_seed(seed, "init"))
        trace = train(w0, data, hp)
        predictor = truncated_predictor(trace.final_weights, hp.beta_n)
    else:
        spec = InteractionSpec(d=cfg.d, d_star=cfg.d_star, L=cfg.L, r=cfg.r, K=cfg.K)
        w0 = init_interaction(spec, hp, stable_seed(seed, "init"))
        trace = train_interaction(w0, data, hp)
        predictor = truncated_interaction_predictor(trace.final_weights, hp.beta_n)
    err, se = l2_error(predictor, target, cfg.mc_points, stable_seed(seed, "mc"))
    return CellResult(
        n=n,
        replication=rep,
        error=err,
        std_error=se,
        final_risk=float(trace.risks[-1]),
        initial_risk=float(trace.risks[0]),
        drift=float(trace.drifts[-1]),
    )


def run_experiment(cfg: ExperimentConfig) -> RateReport:
    """Full sweep over the n grid; writes rate.csv and report.json if outdir set.

    Cells run concurrently (worker count from the OPNET_THREADS environment
    variable); each cell is internally deterministic and aggregation order
    follows the grid, so outputs are byte-identical regardless of scheduling.
    """
    cfg.validate()
    target = make_target(cfg.target_kind, cfg.target_p, cfg.target_C, cfg.d, cfg.target_params)
    noise = NoiseModel(kind=cfg.noise_kind, scale=cfg.noise_scale)

    keys = [(n, rep) for n in cfg.n_grid for rep in range(cfg.replications)]
    workers = _worker_count()
    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(
                zip(keys, pool.map(lambda k: run_cell(cfg, target, noise, *k), keys))
            )
    else:
        results = {k: run_cell(cfg, target, noise, *k) for k in keys}

    cells = [results[k] for k in keys]
    means = {
        n: float(np.mean([results[(n, rep)].error for rep in range(cfg.replications)]))
        for n in cfg.n_grid
    }
    slope = None
    if len(cfg.n_grid) >= 3 and all(v > 0 for v in means.values()):
        slope = fit_slope([(n, means[n]) for n in cfg.n_grid])
    refs = {"plain": -1.0 / (1.0 + cfg.d)}
    if cfg.d_star is not None:
        refs["interaction"] = -1.0 / (1.0 + cfg.d_star)

    hp0 = cfg.hyper_for(cfg.n_grid[0])
    topo0 = Topology(
        d=(cfg.d_star if cfg.estimator == "interaction" else cfg.d),
        L=cfg.L,
        r=cfg.r,
        K=cfg.K,
    )
    schedule_text = theorem_schedule(cfg.n_grid[0], topo0, hp0, mode="desk").side_by_side()

    report = RateReport(
        config=cfg,
        cells=cells,
        means=means,
        slope=slope,
        reference_slopes=refs,
        schedule_text=schedule_text,
    )
    if cfg.outdir:
        report.write(cfg.outdir)
    return report
