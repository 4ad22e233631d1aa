"""Sum-of-projections estimator for interaction models.

When the regression function is a sum of components each depending on only
d* of the d input coordinates, the estimator becomes a sum over all
size-d* coordinate subsets I of independent parallel-network groups, each
seeing only the projection x_I:

    f_w(x) = sum_I f_{w_I}(x_I),

trained jointly by full-batch GD on the shared residual, with the ridge
penalty summing over every group's outer weights.  Groups are stored
contiguously in lexicographic subset order inside one flat vector so the
plain GD update path is reused unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .net import Topology, WeightVector, forward, init_weights
from .optim import Dataset, TrainTrace, _run_gd, risk_and_gradient
from .params import HyperParams
from .rng import stable_seed

SUBSET_CAP = 256


def enumerate_subsets(d: int, d_star: int, cap: int = SUBSET_CAP) -> list[tuple[int, ...]]:
    """All size-d* subsets of {1..d} (1-based), lexicographic.

    The intended regime is d* < d; d* = d is accepted and yields the single
    full subset (useful as a degenerate case that must match the plain
    estimator).  Refuses to enumerate more than `cap` subsets.
    """
    if not 1 <= d_star <= d:
        raise ValueError(f"need 1 <= d* <= d, got d*={d_star}, d={d}")
    count = math.comb(d, d_star)
    if count > cap:
        raise ValueError(
            f"{count} coordinate subsets exceed the configured cap of {cap}; "
            f"raise the cap explicitly if this is intended"
        )
    return [tuple(c) for c in combinations(range(1, d + 1), d_star)]


@dataclass(frozen=True)
class InteractionSpec:
    """Ambient dimension, interaction order, and the per-group topology."""

    d: int
    d_star: int
    L: int
    r: int
    K: int
    subset_cap: int = SUBSET_CAP
    subsets: tuple = field(init=False)

    def __post_init__(self):
        subsets = tuple(enumerate_subsets(self.d, self.d_star, self.subset_cap))
        object.__setattr__(self, "subsets", subsets)

    @property
    def groups(self) -> int:
        return len(self.subsets)

    @property
    def group_topology(self) -> Topology:
        return Topology(d=self.d_star, L=self.L, r=self.r, K=self.K)

    @property
    def weight_count(self) -> int:
        return self.groups * self.group_topology.weight_count

    def columns(self, g: int) -> np.ndarray:
        """0-based input columns of group g."""
        return np.asarray(self.subsets[g], dtype=np.int64) - 1


@dataclass(frozen=True)
class InteractionWeights:
    """Concatenated per-group weight vectors, groups in subset order."""

    spec: InteractionSpec
    flat: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.flat, dtype=np.float64)
        if arr.shape != (self.spec.weight_count,):
            raise ValueError(
                f"flat storage has shape {arr.shape}, spec requires "
                f"({self.spec.weight_count},)"
            )
        object.__setattr__(self, "flat", arr)

    @classmethod
    def zeros(cls, spec: InteractionSpec) -> "InteractionWeights":
        return cls(spec, np.zeros(spec.weight_count))

    def group(self, g: int) -> WeightVector:
        """Group g's weights as a WeightVector view (shared storage)."""
        size = self.spec.group_topology.weight_count
        return WeightVector(self.spec.group_topology, self.flat[g * size : (g + 1) * size])

    def outer_sum_squares(self) -> float:
        return sum(float(self.group(g).outer @ self.group(g).outer) for g in range(self.spec.groups))


def init_interaction(spec: InteractionSpec, hp: HyperParams, seed: int) -> InteractionWeights:
    """Initialize every group independently; group g uses the child stream
    stable_seed(seed, g)."""
    w = InteractionWeights.zeros(spec)
    for g in range(spec.groups):
        w.group(g).flat[:] = init_weights(
            spec.group_topology, hp, stable_seed(seed, g)
        ).flat
    return w


def forward_interaction(w: InteractionWeights, x) -> np.ndarray:
    """f_w(x) = sum over groups of the group network on its projection."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != w.spec.d:
        raise ValueError(f"input has dimension {X.shape[1]}, spec expects {w.spec.d}")
    out = np.zeros(X.shape[0])
    for g in range(w.spec.groups):
        out += forward(w.group(g), X[:, w.spec.columns(g)])
    return float(out[0]) if single else out


def _projections(spec: InteractionSpec, data: Dataset) -> list[Dataset]:
    """Per-group datasets carrying the projected inputs (ys shared)."""
    return [
        Dataset(xs=np.ascontiguousarray(data.xs[:, spec.columns(g)]), ys=data.ys)
        for g in range(spec.groups)
    ]


def interaction_risk(w: InteractionWeights, data: Dataset, c3: float) -> float:
    """Shared-residual squared error plus the ridge penalty over all groups."""
    res = data.ys - forward_interaction(w, data.xs)
    return float(res @ res / data.n + c3 * w.outer_sum_squares())


def interaction_risk_and_gradient(
    w: InteractionWeights, data: Dataset, c3: float, projections: Optional[list] = None
):
    """(risk, gradient) of the joint objective.

    The composite gradient is the concatenation of per-group gradients of
    the shared-residual objective.  Computed by differencing each group's
    own prediction out of the shared residual: running the plain
    single-network machinery on (x_I, y - sum_{J != I} f_J) reproduces the
    joint residual exactly, so the per-group passes stay bit-identical to
    the plain path.
    """
    if projections is None:
        projections = _projections(w.spec, data)
    preds = [forward(w.group(g), proj.xs) for g, proj in enumerate(projections)]
    total = np.sum(preds, axis=0)
    risk = None
    grads = []
    for g, proj in enumerate(projections):
        target = proj.ys - (total - preds[g])
        group_data = Dataset(xs=proj.xs, ys=target)
        group_risk, group_grad = risk_and_gradient(w.group(g), group_data, c3)
        grads.append(group_grad.flat)
        if g == 0:
            # shared residual term is identical across groups; add the other
            # groups' penalties afterwards
            risk = group_risk
    penalty_rest = c3 * sum(
        float(w.group(g).outer @ w.group(g).outer) for g in range(1, w.spec.groups)
    )
    return risk + penalty_rest, InteractionWeights(w.spec, np.concatenate(grads))


def train_interaction(
    w0: InteractionWeights, data: Dataset, hp: HyperParams
) -> TrainTrace:
    """Joint full-batch GD over the concatenated weight vector.

    Trace schema matches the plain trainer; the trace records the group
    count so exported CSVs carry it as metadata.
    """
    if data.d != w0.spec.d:
        raise ValueError(f"dataset dimension {data.d} does not match spec d={w0.spec.d}")
    projections = _projections(w0.spec, data)

    def value_and_grad(flat):
        risk, g = interaction_risk_and_gradient(
            InteractionWeights(w0.spec, flat), data, hp.c3, projections
        )
        return risk, g.flat

    risks, grad_norms, drifts, final = _run_gd(
        w0.flat, value_and_grad, hp.t_n, hp.lambda_n
    )
    return TrainTrace(
        risks=risks,
        grad_norms=grad_norms,
        drifts=drifts,
        final_weights=InteractionWeights(w0.spec, final),
        L_n=hp.L_n,
        groups=w0.spec.groups,
    )


def truncated_interaction_predictor(w: InteractionWeights, beta: float):
    """Deployed estimator x -> clamp(f_w(x), [-beta, beta])."""

    def predict(x):
        return np.clip(forward_interaction(w, x), -beta, beta)

    return predict
