"""Regularized empirical risk, exact gradient, full-batch GD, and checkers.

The objective is

    F(w) = (1/n) * sum_i (y_i - f_w(x_i))^2  +  c3 * sum_k v_k^2,

where only the outer weights v_k are penalized.  Training is plain
full-batch gradient descent with constant step size lambda_n = 1/L_n for
t_n steps; the deployed estimator truncates the trained network to
[-beta_n, beta_n].

Two executable facts about this objective are exposed as checkers:

* restricted to the outer weights, F is a ridge quadratic, so the squared
  gradient norm dominates 4*c3 times the optimality gap (a
  Polyak-Lojasiewicz inequality, exact for quadratics);
* with a step size below the inverse curvature, each GD step decreases F
  by at least ||grad||^2/(2*L_n), and the iterate drift obeys
  ||w_t - w_0|| <= sqrt(2*t/L_n*(F_0 - F_t)).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import mpmath as mp
import numpy as np
import scipy.linalg

from .net import (
    Topology,
    WeightVector,
    partial_activations,
    sigmoid,
)
from .params import DeskOverrides, HyperParams, ceil_stable
from .rng import philox

GRAD_CHUNK = 512


class TrainingDiverged(RuntimeError):
    """Raised when the risk becomes non-finite during training."""

    def __init__(self, step: int, value: float):
        super().__init__(f"risk became non-finite ({value}) at step {step}")
        self.step = step
        self.value = value


@dataclass(frozen=True)
class Dataset:
    """An i.i.d. regression sample: xs (n, d) and ys (n,)."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.ascontiguousarray(self.xs, dtype=np.float64)
        ys = np.ascontiguousarray(self.ys, dtype=np.float64)
        if xs.ndim != 2:
            raise ValueError(f"xs must be (n, d), got shape {xs.shape}")
        if ys.shape != (xs.shape[0],):
            raise ValueError(f"ys must be ({xs.shape[0]},), got {ys.shape}")
        if xs.shape[0] < 1:
            raise ValueError("dataset must contain at least one point")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    def to_csv(self, path) -> None:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{j + 1}" for j in range(self.d)] + ["y"])
            for row, y in zip(self.xs, self.ys):
                writer.writerow([repr(v) for v in row] + [repr(y)])


def _check_dims(w: WeightVector, data: Dataset) -> None:
    if data.d != w.topology.d:
        raise ValueError(
            f"dataset dimension {data.d} does not match topology d={w.topology.d}"
        )


def empirical_risk(w: WeightVector, data: Dataset, c3: float) -> float:
    """(1/n) sum of squared residuals plus c3 * sum of squared outer weights."""
    _check_dims(w, data)
    _, top = partial_activations(w, data.xs)
    res = data.ys - top @ w.outer
    return float(res @ res / data.n + c3 * float(w.outer @ w.outer))


def _chunk_gradient_sums(w: WeightVector, X: np.ndarray, y: np.ndarray):
    """Per-chunk sums of d/dw of sum_i (f_w(x_i) - y_i)^2, unnormalized.

    Reverse-mode accumulation through the activation tableau.  Returns a
    flat array aligned with the weight layout plus the chunk's residual
    sum of squares.
    """
    t = w.topology
    acts, top = partial_activations(w, X)
    err = top @ w.outer - y  # (n,)
    sse = float(err @ err)

    g = WeightVector.zeros(t)
    g.outer[:] = 2.0 * (err @ top)

    # top layer first: only its first unit carries signal (the other top
    # units exist in storage but have zero outer fan-out), so its delta is
    # the (n, K) matrix below and the generic (n, K, r) recursion starts
    # one level down.
    delta_top = 2.0 * err[:, None] * w.outer * top * (1.0 - top)  # (n, K)
    below = acts[-1]
    top_block = w.level(t.L - 1)
    g_top = g.level(t.L - 1)
    g_top[:, 0, 0] = delta_top.sum(axis=0)
    g_top[:, 0, 1:] = np.einsum("nk,nkj->kj", delta_top, below)
    back = delta_top[:, :, None] * top_block[:, 0, 1:]  # (n, K, r)
    delta = back * below * (1.0 - below)

    for level in range(t.L - 2, -1, -1):
        below = acts[level - 1] if level > 0 else None  # (n, K, r)
        gblock = g.level(level)
        gblock[:, :, 0] = delta.sum(axis=0)
        if level == 0:
            # gW[k,i,j] = sum_n delta[n,k,i] * X[n,j]
            gblock[:, :, 1:] = np.tensordot(delta, X, axes=([0], [0]))
        else:
            # batched over k: (K,r,n) @ (K,n,r) -> (K,r,r)
            gblock[:, :, 1:] = np.matmul(
                delta.transpose(1, 2, 0), below.transpose(1, 0, 2)
            )
        if level > 0:
            wblock = w.level(level)
            # back[n,k,j] = sum_i delta[n,k,i] * W[k,i,j]
            back = np.matmul(
                delta.transpose(1, 0, 2), wblock[:, :, 1:]
            ).transpose(1, 0, 2)
            delta = back * below * (1.0 - below)
    return g.flat, sse


def gradient(w: WeightVector, data: Dataset, c3: float) -> WeightVector:
    """Exact gradient of empirical_risk at w.

    Samples are processed in fixed-size chunks and the per-chunk partial
    sums reduced in a fixed order, so the result is bit-identical no
    matter how chunks are scheduled.
    """
    _check_dims(w, data)
    n = data.n
    partials = [
        _chunk_gradient_sums(w, data.xs[s : s + GRAD_CHUNK], data.ys[s : s + GRAD_CHUNK])[0]
        for s in range(0, n, GRAD_CHUNK)
    ]
    total = np.add.reduce(np.stack(partials, axis=0), axis=0)
    g = WeightVector(w.topology, total / n)
    g.outer[:] += 2.0 * c3 * w.outer
    return g


def risk_and_gradient(w: WeightVector, data: Dataset, c3: float):
    """One fused pass returning (F(w), grad F(w)); used by the trainer."""
    _check_dims(w, data)
    n = data.n
    partials = []
    sse = 0.0
    for s in range(0, n, GRAD_CHUNK):
        part, chunk_sse = _chunk_gradient_sums(
            w, data.xs[s : s + GRAD_CHUNK], data.ys[s : s + GRAD_CHUNK]
        )
        partials.append(part)
        sse += chunk_sse
    total = np.add.reduce(np.stack(partials, axis=0), axis=0)
    g = WeightVector(w.topology, total / n)
    g.outer[:] += 2.0 * c3 * w.outer
    penalty = c3 * float(w.outer @ w.outer)
    return sse / n + penalty, g


def gd_step(w: WeightVector, data: Dataset, hp: HyperParams) -> WeightVector:
    """One descent step w - lambda_n * grad F(w)."""
    if hp.lambda_n < 0:
        raise ValueError("step size must be nonnegative")
    return w.axpy(-hp.lambda_n, gradient(w, data, hp.c3))


@dataclass
class TrainTrace:
    """Step-by-step record of one training run (length t_n + 1)."""

    risks: np.ndarray
    grad_norms: np.ndarray
    drifts: np.ndarray
    final_weights: WeightVector
    L_n: float
    groups: int = 1

    def __len__(self) -> int:
        return len(self.risks)

    def to_csv(self, path) -> None:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            fh.write("# schema=trace-v1\n")
            if self.groups != 1:
                fh.write(f"# groups={self.groups}\n")
            writer = csv.writer(fh)
            writer.writerow(["step", "risk", "grad_norm", "drift"])
            for step in range(len(self.risks)):
                writer.writerow(
                    [
                        step,
                        repr(float(self.risks[step])),
                        repr(float(self.grad_norms[step])),
                        repr(float(self.drifts[step])),
                    ]
                )


def _run_gd(w0_flat: np.ndarray, value_and_grad, t_n: int, lambda_n: float):
    """Shared GD loop over a flat parameter vector.

    value_and_grad maps a flat vector to (risk, flat gradient).  Records
    risk, gradient norm, and drift from the start at steps 0..t_n and
    raises TrainingDiverged on a non-finite risk.
    """
    risks = np.empty(t_n + 1)
    grad_norms = np.empty(t_n + 1)
    drifts = np.empty(t_n + 1)
    w = w0_flat.copy()
    for step in range(t_n + 1):
        risk, g = value_and_grad(w)
        if not math.isfinite(risk):
            raise TrainingDiverged(step, risk)
        risks[step] = risk
        grad_norms[step] = np.linalg.norm(g)
        drifts[step] = np.linalg.norm(w - w0_flat)
        if step < t_n:
            w = w - lambda_n * g
    return risks, grad_norms, drifts, w


def train(w0: WeightVector, data: Dataset, hp: HyperParams) -> TrainTrace:
    """Run t_n full-batch GD steps from w0 and record the trace.

    The deployed estimator for the returned weights is
    net.truncated_predictor(trace.final_weights, hp.beta_n).
    """
    _check_dims(w0, data)

    def value_and_grad(flat):
        risk, g = risk_and_gradient(WeightVector(w0.topology, flat), data, hp.c3)
        return risk, g.flat

    risks, grad_norms, drifts, final = _run_gd(
        w0.flat, value_and_grad, hp.t_n, hp.lambda_n
    )
    return TrainTrace(
        risks=risks,
        grad_norms=grad_norms,
        drifts=drifts,
        final_weights=WeightVector(w0.topology, final),
        L_n=hp.L_n,
    )


# -- schedules ---------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    """One resolved schedule; full-scale values may be astronomical.

    K is an exact integer; L_n, t_n, lambda_n are mpmath numbers in
    full-scale mode and ordinary floats/ints in desk mode.
    """

    K: int
    L_n: object
    t_n: object
    lambda_n: object

    def describe(self) -> str:
        return (
            f"K={_num_str(self.K)} L_n={_num_str(self.L_n)} "
            f"t_n={_num_str(self.t_n)} lambda_n={_num_str(self.lambda_n)}"
        )


@dataclass(frozen=True)
class ScheduleReport:
    mode: str
    paper: Schedule
    desk: Schedule

    @property
    def active(self) -> Schedule:
        return self.desk if self.mode == "desk" else self.paper

    def side_by_side(self) -> str:
        return (
            f"full-scale schedule: {self.paper.describe()}\n"
            f"desk schedule:       {self.desk.describe()}"
        )


def _num_str(x) -> str:
    if isinstance(x, int):
        return str(x) if x < 10**12 else mp.nstr(mp.mpf(x), 6)
    if isinstance(x, mp.mpf):
        return mp.nstr(x, 6)
    return f"{x:.6g}"


def theorem_schedule(
    n, topo: Topology, hp: HyperParams, mode: str = "desk"
) -> ScheduleReport:
    """Resolve (K, L_n, t_n, lambda_n) from the full-scale formulas.

    Full-scale: K = n^(6d+r+2), L_n = (log n)^(10L+10) * K^(3/2),
    t_n = ceil(c6 * L_n * log n), lambda_n = 1/L_n.  These are far beyond
    any feasible computation for realistic n, which is the point of
    reporting them: desk mode applies the caps from hp.desk and both
    schedules are always returned so the gap stays visible.
    """
    if mode not in ("theorem", "desk"):
        raise ValueError(f"mode must be 'theorem' or 'desk', got {mode!r}")
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")

    with mp.workdps(60):
        log_n = mp.log(n)
        exponent = 6 * topo.d + topo.r + 2
        if float(n) == int(n):
            K_paper = int(n) ** exponent
            K_mp = mp.mpf(int(n)) ** exponent
        else:
            K_mp = mp.mpf(n) ** exponent
            K_paper = int(mp.floor(K_mp))
        L_n_paper = mp.power(log_n, 10 * topo.L + 10) * mp.power(K_mp, mp.mpf(3) / 2)
        t_n_paper = int(mp.ceil(hp.c6 * L_n_paper * log_n))
        paper = Schedule(
            K=K_paper,
            L_n=L_n_paper,
            t_n=t_n_paper,
            lambda_n=1 / L_n_paper,
        )

    desk_cfg = hp.desk or DeskOverrides()
    K_desk = K_paper if desk_cfg.K_cap is None else min(K_paper, desk_cfg.K_cap)
    if desk_cfg.L_n_cap is not None:
        L_n_desk = float(desk_cfg.L_n_cap)
        t_n_desk = ceil_stable(hp.c6 * L_n_desk * math.log(n))
    elif desk_cfg.t_n_cap is not None:
        t_n_desk = int(desk_cfg.t_n_cap)
        L_n_desk = t_n_desk / (hp.c6 * math.log(n))
    else:
        L_n_desk = hp.L_n
        t_n_desk = hp.t_n
    if desk_cfg.t_n_cap is not None:
        t_n_desk = min(t_n_desk, desk_cfg.t_n_cap)
    desk = Schedule(
        K=K_desk, L_n=L_n_desk, t_n=t_n_desk, lambda_n=1.0 / L_n_desk
    )
    return ScheduleReport(mode=mode, paper=paper, desk=desk)


# -- outer-weight ridge subproblem -------------------------------------------


def outer_design(w: WeightVector, data: Dataset) -> np.ndarray:
    """(n, K) design matrix B with B[i, k] = output of subnetwork k at x_i."""
    _check_dims(w, data)
    return forward_activations(w, data.xs)[-1][:, :, 0]


def outer_risk(a: np.ndarray, B: np.ndarray, y: np.ndarray, c3: float) -> float:
    """F restricted to outer weights a with frozen subnetwork outputs B."""
    res = B @ a - y
    return float(res @ res / len(y) + c3 * a @ a)


def outer_gradient(a: np.ndarray, B: np.ndarray, y: np.ndarray, c3: float) -> np.ndarray:
    return 2.0 / len(y) * (B.T @ (B @ a - y)) + 2.0 * c3 * a


def outer_ridge_oracle(w: WeightVector, data: Dataset, c3: float) -> np.ndarray:
    """Exact minimizer of F over the outer weights (inner weights frozen).

    Solves (B^T B / n + c3 I) a = B^T y / n by Cholesky with iterative
    refinement until the normal-equation residual is <= 1e-10.
    """
    if c3 <= 0:
        raise ValueError("c3 must be > 0 for a unique ridge minimizer")
    B = outer_design(w, data)
    n, K = B.shape
    G = B.T @ B / n + c3 * np.eye(K)
    rhs = B.T @ data.ys / n
    cho = scipy.linalg.cho_factor(G)
    a = scipy.linalg.cho_solve(cho, rhs)
    for _ in range(3):
        residual = rhs - G @ a
        if np.linalg.norm(residual) <= 1e-10:
            break
        a = a + scipy.linalg.cho_solve(cho, residual)
    return a


@dataclass(frozen=True)
class PLCheck:
    lhs: float
    rhs: float
    holds: bool


PL_TOL = 1e-9


def check_pl(w: WeightVector, data: Dataset, c3: float) -> PLCheck:
    """Gradient-dominance check for the outer-weight ridge subproblem.

    lhs = ||grad_a F(a)||^2 at the current outer weights, rhs = 4*c3 times
    the gap to the ridge optimum; for this quadratic lhs >= rhs exactly,
    checked with absolute slack 1e-9.
    """
    B = outer_design(w, data)
    a = w.outer.copy()
    g = outer_gradient(a, B, data.ys, c3)
    lhs = float(g @ g)
    a_opt = outer_ridge_oracle(w, data, c3)
    gap = outer_risk(a, B, data.ys, c3) - outer_risk(a_opt, B, data.ys, c3)
    rhs = 4.0 * c3 * gap
    return PLCheck(lhs=lhs, rhs=rhs, holds=lhs >= rhs - PL_TOL)


# -- descent recursion check --------------------------------------------------


DESCENT_REL_TOL = 1e-9


@dataclass
class DescentReport:
    """Per-step verdicts for the smooth-descent recursion and drift bound."""

    descent_ok: np.ndarray
    drift_ok: np.ndarray
    descent_slack: np.ndarray
    drift_slack: np.ndarray

    @property
    def all_hold(self) -> bool:
        return bool(np.all(self.descent_ok) and np.all(self.drift_ok))


def check_descent(trace: TrainTrace, L_n: Optional[float] = None) -> DescentReport:
    """Check F_t <= F_{t-1} - ||g_{t-1}||^2/(2 L_n) and the drift bound.

    Both inequalities are exact in real arithmetic whenever the step size
    1/L_n is below the local inverse curvature; tolerance is 1e-9 relative.
    Violations are reported, not raised: aggressive desk schedules can
    legitimately break the hypotheses.
    """
    L = float(L_n if L_n is not None else trace.L_n)
    F = trace.risks
    g = trace.grad_norms
    steps = len(F) - 1
    descent_ok = np.empty(steps, dtype=bool)
    drift_ok = np.empty(steps, dtype=bool)
    descent_slack = np.empty(steps)
    drift_slack = np.empty(steps)
    for k in range(1, steps + 1):
        bound = F[k - 1] - g[k - 1] ** 2 / (2.0 * L)
        slack = bound - F[k] + DESCENT_REL_TOL * abs(F[k - 1])
        descent_slack[k - 1] = slack
        descent_ok[k - 1] = slack >= 0
        gap = max(0.0, F[0] - F[k])
        limit = math.sqrt(2.0 * k / L * gap)
        dslack = limit - trace.drifts[k] + DESCENT_REL_TOL * max(1.0, limit)
        drift_slack[k - 1] = dslack
        drift_ok[k - 1] = dslack >= 0
    return DescentReport(
        descent_ok=descent_ok,
        drift_ok=drift_ok,
        descent_slack=descent_slack,
        drift_slack=drift_slack,
    )


def estimate_curvature(
    w: WeightVector,
    data: Dataset,
    c3: float,
    probes: int = 8,
    radius: float = 1.0,
    seed: int = 0,
) -> float:
    """Empirical curvature bound: max gradient difference quotient near w.

    Samples probe points on spheres of the given radius around w (plus one
    point down the gradient direction, where GD will actually go) and
    returns the largest ||grad(a) - grad(b)|| / ||a - b|| observed.  Scale
    by a safety factor before using as L_n.
    """
    gen = philox(seed, "curvature")
    g0 = gradient(w, data, c3)
    points = [w.flat]
    grads = [g0.flat]
    gnorm = g0.norm()
    if gnorm > 0:
        points.append(w.flat - radius * g0.flat / gnorm)
    for _ in range(probes):
        u = gen.normal(size=w.topology.weight_count)
        u /= np.linalg.norm(u)
        points.append(w.flat + radius * gen.uniform(0.1, 1.0) * u)
    for p in points[1:]:
        grads.append(gradient(WeightVector(w.topology, p), data, c3).flat)
    best = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            dist = np.linalg.norm(points[i] - points[j])
            if dist == 0:
                continue
            quot = np.linalg.norm(grads[i] - grads[j]) / dist
            best = max(best, float(quot))
    return best
