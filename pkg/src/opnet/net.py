"""Network topology, flat weight storage, and the logistic forward pass.

The estimator is a linear combination of K fully connected subnetworks of
depth L and width r computed in parallel:

    f_w(x) = sum_k  v_k * a_k(x),

where a_k(x) is the first unit of subnetwork k's top layer, every hidden
unit applies the logistic squasher sigma(z) = 1/(1+exp(-z)), layer 1 reads
the d input coordinates, and layers 2..L read the previous layer's r units.
Weights are addressed as w[k, i, j, level]: `level` in 0..L-1 selects the
weight block feeding layer level+1, unit i in 1..r, input j in 1..fan_in
with j = 0 the bias.  Level L holds the K outer weights v_k (one per
subnetwork, addressed as w[k, 1, 1, L]).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import philox

SIGMOID_CLIP = 700.0

_MAGIC = int.from_bytes(b"OPNETW01", "little")
_HEADER = struct.Struct("<5q")  # magic, d, L, r, K


def sigmoid(x):
    """Logistic squasher 1/(1+exp(-x)), input clipped to +-700.

    The clip keeps exp() finite; inside the clip range the result is the
    correctly rounded double of the true value.  Works on scalars and
    arrays; scalars come back as float.
    """
    z = np.clip(x, -SIGMOID_CLIP, SIGMOID_CLIP)
    out = 1.0 / (1.0 + np.exp(-z))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def truncate(z, beta: float):
    """Clamp z to [-beta, beta] (componentwise for arrays)."""
    if beta <= 0:
        raise ValueError(f"truncation level must be positive, got {beta}")
    out = np.clip(z, -beta, beta)
    if np.isscalar(z) or np.ndim(z) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Topology:
    """Shape of the parallel network: input dim d, depth L, width r, K subnetworks."""

    d: int
    L: int
    r: int
    K: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"input dimension d must be >= 1, got {self.d}")
        if self.L < 2:
            raise ValueError(f"depth L must be >= 2, got {self.L}")
        if self.r < 1:
            raise ValueError(f"width r must be >= 1, got {self.r}")
        if self.K < 1:
            raise ValueError(f"subnetwork count K must be >= 1, got {self.K}")

    def fan_in(self, level: int) -> int:
        """Number of non-bias inputs of the weight block at `level`."""
        return self.d if level == 0 else self.r

    def level_offset(self, level: int) -> int:
        """Offset of weight block `level` inside one subnetwork's slab."""
        if level == 0:
            return 0
        return self.r * (self.d + 1) + (level - 1) * self.r * (self.r + 1)

    @property
    def inner_size(self) -> int:
        """Weights per subnetwork below the outer level."""
        return self.r * (self.d + 1) + (self.L - 1) * self.r * (self.r + 1)

    @property
    def weight_count(self) -> int:
        """Total storage: K inner slabs plus the K outer weights."""
        return self.K * self.inner_size + self.K


@dataclass(frozen=True)
class WeightVector:
    """All weights of a parallel network in one flat float64 array.

    Layout is subnetwork-major: subnetwork k occupies the contiguous slab
    flat[k*S : (k+1)*S] (S = topology.inner_size) ordered by level, then
    unit, then input (bias first); the K outer weights form the tail block.
    Values are treated as immutable after construction; arithmetic helpers
    return new instances.
    """

    topology: Topology
    flat: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.flat, dtype=np.float64)
        if arr.shape != (self.topology.weight_count,):
            raise ValueError(
                f"flat storage has shape {arr.shape}, topology requires "
                f"({self.topology.weight_count},)"
            )
        object.__setattr__(self, "flat", arr)

    @classmethod
    def zeros(cls, topology: Topology) -> "WeightVector":
        return cls(topology, np.zeros(topology.weight_count))

    def copy(self) -> "WeightVector":
        return WeightVector(self.topology, self.flat.copy())

    # -- index map ---------------------------------------------------------

    def offset(self, k: int, i: int, j: int, level: int) -> int:
        """Flat position of w[k, i, j, level]; k, i are 1-based, j=0 is the bias."""
        t = self.topology
        if not 1 <= k <= t.K:
            raise IndexError(f"subnetwork k={k} out of range 1..{t.K}")
        if level == t.L:
            if i != 1 or j != 1:
                raise IndexError("outer level holds only (i=1, j=1) per subnetwork")
            return t.K * t.inner_size + (k - 1)
        if not 0 <= level < t.L:
            raise IndexError(f"level {level} out of range 0..{t.L}")
        fan = t.fan_in(level)
        if not 1 <= i <= t.r:
            raise IndexError(f"unit i={i} out of range 1..{t.r}")
        if not 0 <= j <= fan:
            raise IndexError(f"input j={j} out of range 0..{fan}")
        return (k - 1) * t.inner_size + t.level_offset(level) + (i - 1) * (fan + 1) + j

    def tuple_at(self, offset: int) -> tuple[int, int, int, int]:
        """Inverse of offset(): (k, i, j, level) stored at a flat position."""
        t = self.topology
        if not 0 <= offset < t.weight_count:
            raise IndexError(f"offset {offset} out of range 0..{t.weight_count}")
        inner_total = t.K * t.inner_size
        if offset >= inner_total:
            return (offset - inner_total + 1, 1, 1, t.L)
        k, rest = divmod(offset, t.inner_size)
        for level in range(t.L - 1, -1, -1):
            start = t.level_offset(level)
            if rest >= start:
                fan = t.fan_in(level)
                i, j = divmod(rest - start, fan + 1)
                return (k + 1, i + 1, j, level)
        raise AssertionError("unreachable")

    # -- views -------------------------------------------------------------

    def level(self, level: int) -> np.ndarray:
        """(K, r, fan_in+1) view of the weight block at `level` (0..L-1).

        Index [k-1, i-1, j]; column 0 is the bias.  A view into the flat
        storage, so reads are cheap; do not write through it.
        """
        t = self.topology
        if not 0 <= level < t.L:
            raise IndexError(f"level {level} out of range 0..{t.L - 1}")
        fan = t.fan_in(level)
        start = t.level_offset(level)
        span = t.r * (fan + 1)
        inner = self.flat[: t.K * t.inner_size].reshape(t.K, t.inner_size)
        return inner[:, start : start + span].reshape(t.K, t.r, fan + 1)

    @property
    def outer(self) -> np.ndarray:
        """(K,) view of the outer weights v_k."""
        t = self.topology
        return self.flat[t.K * t.inner_size :]

    # -- arithmetic --------------------------------------------------------

    def axpy(self, alpha: float, other: "WeightVector") -> "WeightVector":
        """self + alpha * other, as a new WeightVector."""
        if other.topology != self.topology:
            raise ValueError("topology mismatch")
        return WeightVector(self.topology, self.flat + alpha * other.flat)

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))


def _check_input(topology: Topology, x) -> tuple[np.ndarray, bool]:
    """Coerce x to an (n, d) batch; returns (batch, was_single_point)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] != topology.d:
            raise ValueError(
                f"input has dimension {arr.shape[0]}, topology expects {topology.d}"
            )
        return arr[None, :], True
    if arr.ndim == 2:
        if arr.shape[1] != topology.d:
            raise ValueError(
                f"input has dimension {arr.shape[1]}, topology expects {topology.d}"
            )
        return arr, False
    raise ValueError(f"input must be a point or a batch of points, got ndim={arr.ndim}")


def forward_activations(w: WeightVector, x) -> list[np.ndarray]:
    """All hidden unit values, layer by layer.

    Returns [A_1, ..., A_L] where A_l has shape (n, K, r) for a batch input
    (or (1, K, r) for a single point).  A_L[:, :, 0] are the subnetwork
    outputs that the outer weights combine.
    """
    t = w.topology
    X, _ = _check_input(t, x)
    block = w.level(0)
    # z[n,k,i] = sum_j X[n,j] * W[k,i,j] + bias[k,i]
    z = np.tensordot(X, block[:, :, 1:], axes=([1], [2])) + block[:, :, 0]
    acts = [sigmoid(z)]
    for level in range(1, t.L):
        block = w.level(level)
        # batched over k: (K,n,r) @ (K,r,r)^T -> (K,n,r)
        z = np.matmul(
            acts[-1].transpose(1, 0, 2), block[:, :, 1:].transpose(0, 2, 1)
        ).transpose(1, 0, 2) + block[:, :, 0]
        acts.append(sigmoid(np.ascontiguousarray(z)))
    return acts


def partial_activations(w: WeightVector, x) -> tuple[list[np.ndarray], np.ndarray]:
    """Layers 1..L-1 in full plus only the first unit of the top layer.

    Returns ([A_1, ..., A_{L-1}], top) with top of shape (n, K).  The other
    top-layer units never influence the output (their outer fan-out is
    zero), so the hot paths skip them; forward_activations materializes
    them when the full tableau is wanted.
    """
    t = w.topology
    X, _ = _check_input(t, x)
    block = w.level(0)
    z = np.tensordot(X, block[:, :, 1:], axes=([1], [2])) + block[:, :, 0]
    acts = [sigmoid(z)]
    for level in range(1, t.L - 1):
        block = w.level(level)
        z = np.matmul(
            acts[-1].transpose(1, 0, 2), block[:, :, 1:].transpose(0, 2, 1)
        ).transpose(1, 0, 2) + block[:, :, 0]
        acts.append(sigmoid(np.ascontiguousarray(z)))
    top_block = w.level(t.L - 1)
    # z_top[n,k] = sum_j W[k,0,j] A[n,k,j] + bias[k,0]
    z_top = (acts[-1] * top_block[:, 0, 1:]).sum(axis=2) + top_block[:, 0, 0]
    return acts, sigmoid(z_top)


def subnet_outputs(w: WeightVector, x) -> np.ndarray:
    """(n, K) matrix of subnetwork outputs a_k(x_i) (top layer, first unit)."""
    return partial_activations(w, x)[1]


def forward(w: WeightVector, x):
    """Network output f_w(x); float for a single point, (n,) array for a batch."""
    t = w.topology
    X, single = _check_input(t, x)
    out = subnet_outputs(w, X) @ w.outer
    return float(out[0]) if single else out


def init_weights(topology: Topology, hp, seed: int) -> WeightVector:
    """Random initialization: zero outer weights, uniform inner weights.

    Level 0 is uniform on +-c2*(log n)^2*n^tau, levels 1..L-1 uniform on
    +-c1*(log n)^2.  The i-th flat slot consumes the i-th variate of the
    Philox stream keyed by `seed`, so the fill is independent of iteration
    order and bit-reproducible.
    """
    if hp.n < 2:
        raise ValueError(f"sample size n must be >= 2 for log n > 0, got {hp.n}")
    t = topology
    gen = philox(seed)
    u = gen.uniform(-1.0, 1.0, size=t.weight_count)
    w = WeightVector(t, u)
    log_n_sq = np.log(hp.n) ** 2
    w.level(0)[:] *= hp.c2 * log_n_sq * hp.n**hp.tau
    for level in range(1, t.L):
        w.level(level)[:] *= hp.c1 * log_n_sq
    w.outer[:] = 0.0
    return w


def perturb_inner(w: WeightVector, magnitude: float, seed: int) -> WeightVector:
    """Add independent uniform(+-magnitude) noise to every inner weight.

    Outer weights stay untouched; used to probe robustness of constructed
    networks to bounded weight perturbations.
    """
    t = w.topology
    gen = philox(seed)
    noise = gen.uniform(-magnitude, magnitude, size=t.weight_count)
    out = w.copy()
    out.flat[: t.K * t.inner_size] += noise[: t.K * t.inner_size]
    return out


def truncated_predictor(w: WeightVector, beta: float):
    """The deployed estimator x -> truncate(f_w(x), beta)."""

    def predict(x):
        return truncate(forward(w, x), beta)

    return predict


# -- serialization ----------------------------------------------------------


def save_weights(w: WeightVector, path) -> None:
    """Write weights to `path` in the binary format, plus a JSON sidecar.

    Format (little-endian): header of five int64 (magic, d, L, r, K)
    followed by weight_count float64 in flat layout.  The sidecar
    `<path>.json` repeats the topology for tooling that cannot parse the
    binary.
    """
    path = Path(path)
    t = w.topology
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, t.d, t.L, t.r, t.K))
        fh.write(w.flat.astype("<f8").tobytes())
    sidecar = {
        "format": "opnet-weights-v1",
        "d": t.d,
        "L": t.L,
        "r": t.r,
        "K": t.K,
        "weight_count": t.weight_count,
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_weights(path) -> WeightVector:
    path = Path(path)
    raw = path.read_bytes()
    magic, d, L, r, K = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path} is not a weight file (bad magic)")
    topology = Topology(d=d, L=L, r=r, K=K)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.shape[0] != topology.weight_count:
        raise ValueError(
            f"{path} holds {body.shape[0]} weights, header implies "
            f"{topology.weight_count}"
        )
    return WeightVector(topology, body.astype(np.float64))
