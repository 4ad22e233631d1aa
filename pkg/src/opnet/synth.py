"""Synthetic targets with known smoothness, samplers, and L2 error metering.

Targets declare a Hölder pair (p, C): |m(x) - m(z)| <= C ||x - z||^p.  The
declaration is verified at registration by spot-checking random pairs, so
an experiment can trust the smoothness class it claims to test.  The
design distribution is fixed to uniform on [0,1]^d, which keeps
ground-truth integrals computable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .optim import Dataset
from .rng import philox

KINDS = ("constant", "linear", "lipschitz-cone", "hoelder-bump", "additive-interaction")

HOLDER_CHECK_PAIRS = 10_000
HOLDER_REL_TOL = 1e-9


@dataclass(frozen=True)
class TargetFunction:
    """Evaluator on [0,1]^d with declared Hölder smoothness (p, C)."""

    fn: Callable = field(repr=False)
    p: float
    C: float
    d: int
    kind: str
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        X = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.asarray(self.fn(X), dtype=np.float64)

    def sup_norm_estimate(self, n_probe: int = 4096, seed: int = 0) -> float:
        gen = philox(seed, "supnorm")
        return float(np.max(np.abs(self(gen.uniform(0, 1, size=(n_probe, self.d))))))


def holder_violations(
    target: TargetFunction, n_pairs: int = HOLDER_CHECK_PAIRS, seed: int = 0
) -> int:
    """Count of random pairs violating |m(x)-m(z)| <= C ||x-z||^p."""
    gen = philox(seed, "holder")
    x = gen.uniform(0, 1, size=(n_pairs, target.d))
    z = gen.uniform(0, 1, size=(n_pairs, target.d))
    lhs = np.abs(target(x) - target(z))
    rhs = target.C * np.linalg.norm(x - z, axis=1) ** target.p
    return int(np.sum(lhs > rhs * (1.0 + HOLDER_REL_TOL) + 1e-15))


def make_target(kind: str, p: float, C: float, d: int, params: Optional[dict] = None) -> TargetFunction:
    """Build a registered target and verify its declared (p, C) on random pairs.

    The theory's regime is 1/2 <= p <= 1; other exponents are accepted but
    flagged in params["out_of_regime"].
    """
    params = dict(params or {})
    if not 0 < p <= 1:
        raise ValueError(f"Hölder exponent must lie in (0, 1], got {p}")
    if C <= 0:
        raise ValueError(f"Hölder constant must be positive, got {C}")
    if not 0.5 <= p <= 1:
        params["out_of_regime"] = True

    if kind == "constant":
        value = float(params.get("value", 0.0))
        fn = lambda X: np.full(X.shape[0], value)
    elif kind == "linear":
        slope = np.asarray(params.get("slope", np.ones(d)), dtype=np.float64)
        intercept = float(params.get("intercept", 0.0))
        if slope.shape != (d,):
            raise ValueError(f"slope must have shape ({d},)")
        if p != 1 or np.linalg.norm(slope) > C * (1 + HOLDER_REL_TOL):
            raise ValueError("linear targets need p=1 and C >= ||slope||")
        fn = lambda X: X @ slope + intercept
    elif kind == "lipschitz-cone":
        x0 = np.asarray(params.get("x0", np.full(d, 0.5)), dtype=np.float64)
        fn = lambda X: C * np.linalg.norm(X - x0, axis=1) ** p
    elif kind == "hoelder-bump":
        # amp * relu(1 - (||x-x0||/rho)^2)^p has Hölder constant amp*(2/rho)^p
        x0 = np.asarray(params.get("x0", np.full(d, 0.5)), dtype=np.float64)
        rho = float(params.get("rho", 0.5))
        amp = C / (2.0 / rho) ** p
        params["amp"] = amp

        def fn(X, x0=x0, rho=rho, amp=amp, p=p):
            core = np.maximum(0.0, 1.0 - (np.linalg.norm(X - x0, axis=1) / rho) ** 2)
            return amp * core**p

    elif kind == "additive-interaction":
        from .interaction import enumerate_subsets

        d_star = int(params.get("d_star", 1))
        subsets = enumerate_subsets(d, d_star)
        groups = len(subsets)
        amps = np.asarray(params.get("amps", np.full(groups, 1.0)), dtype=np.float64)
        freqs = np.asarray(params.get("freqs", np.full(groups, 2.0 * math.pi)), dtype=np.float64)
        phases = np.asarray(params.get("phases", np.zeros(groups)), dtype=np.float64)
        if not (amps.shape == freqs.shape == phases.shape == (groups,)):
            raise ValueError(f"amps/freqs/phases must have shape ({groups},)")
        # each component a*sin(w*mean(x_I)+phi) is Lipschitz with a*w/sqrt(d*)
        lipschitz = float(np.sum(np.abs(amps) * np.abs(freqs)) / math.sqrt(d_star))
        if p != 1 or lipschitz > C * (1 + HOLDER_REL_TOL):
            raise ValueError(
                f"additive targets need p=1 and C >= {lipschitz:.6g} (sum of component constants)"
            )
        cols = [np.asarray(s, dtype=np.int64) - 1 for s in subsets]

        def fn(X, cols=cols, amps=amps, freqs=freqs, phases=phases):
            out = np.zeros(X.shape[0])
            for c, a, w_, phi in zip(cols, amps, freqs, phases):
                out += a * np.sin(w_ * X[:, c].mean(axis=1) + phi)
            return out

        params["subsets"] = [list(s) for s in subsets]
    else:
        raise ValueError(f"unknown target kind {kind!r}; known kinds: {KINDS}")

    target = TargetFunction(fn=fn, p=p, C=C, d=d, kind=kind, params=params)
    bad = holder_violations(target, n_pairs=2000, seed=7)
    if bad:
        raise ValueError(
            f"target {kind!r} violates its declared ({p}, {C})-smoothness on "
            f"{bad} of 2000 spot-check pairs"
        )
    return target


@dataclass(frozen=True)
class NoiseModel:
    """Additive noise on the responses; kinds: gaussian, bounded-uniform, none.

    With bounded m, gaussian noise of any finite scale and bounded noise
    trivially satisfy the exponential moment condition E exp(c5 Y^2) < inf
    for small enough c5 (see subexponential_moment_report for an empirical
    probe of a documented heuristic c5).
    """

    kind: str = "none"
    scale: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "bounded-uniform", "none"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind != "none" and not (self.scale >= 0 and math.isfinite(self.scale)):
            raise ValueError(f"noise scale must be finite and >= 0, got {self.scale}")

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "none" or self.scale == 0.0:
            return np.zeros(n)
        if self.kind == "gaussian":
            return gen.normal(0.0, self.scale, size=n)
        return gen.uniform(-self.scale, self.scale, size=n)


def sample_dataset(m: TargetFunction, noise: NoiseModel, n: int, seed: int) -> Dataset:
    """n i.i.d. pairs with X uniform on [0,1]^d and Y = m(X) + noise."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    gen = philox(seed, "dataset")
    xs = gen.uniform(0.0, 1.0, size=(n, m.d))
    ys = m(xs) + noise.sample(gen, n)
    return Dataset(xs=xs, ys=ys)


def export_dataset(data: Dataset, path, metadata: dict) -> None:
    """CSV of the sample plus a JSON sidecar describing how it was drawn."""
    path = Path(path)
    data.to_csv(path)
    Path(str(path) + ".json").write_text(json.dumps(metadata, indent=2) + "\n")


def l2_error(
    estimate: Callable, m: TargetFunction, n_mc: int, seed: int
) -> tuple[float, float]:
    """Monte Carlo (integral of (estimate - m)^2, standard error) under uniform X."""
    if n_mc < 2:
        raise ValueError(f"need n_mc >= 2, got {n_mc}")
    gen = philox(seed, "l2mc")
    x = gen.uniform(0.0, 1.0, size=(n_mc, m.d))
    sq = (np.asarray(estimate(x), dtype=np.float64) - m(x)) ** 2
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(n_mc))


def subexponential_moment_report(
    m: TargetFunction, noise: NoiseModel, n_draws: int = 1_000_000, seed: int = 0
) -> dict:
    """Empirical probe of E exp(c5 Y^2) at the heuristic c5.

    Uses c5 = 1/(8*(scale^2 + sup|m|^2)); reports the running mean of
    exp(c5 Y^2), which should stay bounded for bounded m.  A diagnostic,
    not a proof.
    """
    sup_m = m.sup_norm_estimate(seed=seed)
    c5 = 1.0 / (8.0 * (noise.scale**2 + sup_m**2 + 1e-12))
    gen = philox(seed, "moment")
    block = 100_000
    total = 0.0
    count = 0
    running_max = 0.0
    while count < n_draws:
        take = min(block, n_draws - count)
        x = gen.uniform(0, 1, size=(take, m.d))
        y = m(x) + noise.sample(gen, take)
        vals = np.exp(c5 * y**2)
        total += float(vals.sum())
        count += take
        running_max = max(running_max, float(total / count))
    mean = total / count
    return {
        "c5": c5,
        "draws": count,
        "mean_exp_c5_y2": mean,
        "running_mean_max": running_max,
        "finite": math.isfinite(mean),
    }
