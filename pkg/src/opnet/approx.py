"""Constructive networks: smooth box indicators and multiscale approximants.

Two explicit weight constructions are implemented, each with a Monte Carlo
verifier for its guarantee.

Box indicator.  A single subnetwork (K=1) of depth L >= 2 and width
r >= 2d whose output is >= 1 - n^(-s) on the shrunken box
[u+delta, v-delta] and <= n^(-s) once any coordinate leaves the expanded
box [u-delta, v+delta].  Layer 1 compares each coordinate against the two
faces of the box with slope 4d(log n)^2/delta; layer 2 aggregates the 2d
comparisons with weight 8(log n)^2 and bias -8(log n)^2(2d - 1/2); any
further layers propagate the decision through sigma(6(log n)^2 a -
3(log n)^2).  The guarantee survives arbitrary perturbations of all
non-outer weights up to log n, which the verifier probes by sampling.

Multiscale approximant.  A (p,C)-smooth f on [0,1]^d is approximated by a
telescoping sum of piecewise-constant differences over nested shifted-grid
coverings P^(0)..P^(l) (level k: (2^k+1)^d cubes of side 2^-k).  Each
telescope term becomes one indicator subnetwork whose outer weight is the
difference of f at the two cube centers; per-coordinate grid shifts are
chosen by pigeonhole so the delta-border strips carry empirical mass at
most 4*delta*2^k each.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .net import Topology, WeightVector, forward, perturb_inner
from .rng import philox, stable_seed


class HypothesisViolation(ValueError):
    """A named precondition of a constructive builder failed."""

    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.name = name


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle [u_1, v_1] x ... x [u_d, v_d]."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=np.float64))
        v = np.atleast_1d(np.asarray(self.v, dtype=np.float64))
        if u.shape != v.shape or u.ndim != 1:
            raise ValueError("u and v must be equal-length vectors")
        if not np.all(u < v):
            raise ValueError("box requires u < v componentwise")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def d(self) -> int:
        return self.u.shape[0]

    def margin_ok(self, delta: float) -> bool:
        """Whether every side is at least 2*delta long."""
        return bool(np.all(self.v - self.u >= 2.0 * delta))

    def shrunken(self, delta: float) -> tuple[np.ndarray, np.ndarray]:
        return self.u + delta, self.v - delta

    def expanded(self, delta: float) -> tuple[np.ndarray, np.ndarray]:
        return self.u - delta, self.v + delta


@dataclass(frozen=True)
class IndicatorNetSpec:
    """Everything the indicator construction needs.

    n is the accuracy surrogate (the guarantee is in powers of 1/n), s the
    accuracy exponent.  Hypotheses checked at construction unless
    validate=False: 0 < delta <= 1, box sides >= 2*delta (skippable via
    require_margin, since telescope terms legitimately get thin boxes),
    L >= 2, r >= 2d, n >= 8d, n >= exp(r+1), n >= exp(s).
    """

    box: Box
    delta: float
    n: float
    s: int
    L: int = 2
    r: Optional[int] = None
    validate: bool = True
    require_margin: bool = True

    def __post_init__(self):
        if self.r is None:
            object.__setattr__(self, "r", 2 * self.box.d)
        if not self.validate:
            return
        d = self.box.d
        if not 0 < self.delta <= 1:
            raise HypothesisViolation("delta", f"need 0 < delta <= 1, got {self.delta}")
        if self.L < 2:
            raise HypothesisViolation("depth", f"need L >= 2, got {self.L}")
        if self.r < 2 * d:
            raise HypothesisViolation("width", f"need r >= 2d = {2 * d}, got {self.r}")
        if self.require_margin and not self.box.margin_ok(self.delta):
            raise HypothesisViolation(
                "margin", f"box sides must be >= 2*delta = {2 * self.delta}"
            )
        if self.n < 8 * d:
            raise HypothesisViolation("n_vs_dimension", f"need n >= 8d = {8 * d}, got {self.n}")
        if self.n < math.exp(self.r + 1):
            raise HypothesisViolation(
                "n_vs_width", f"need n >= exp(r+1) = {math.exp(self.r + 1):.1f}, got {self.n}"
            )
        if self.n < math.exp(self.s):
            raise HypothesisViolation(
                "n_vs_exponent", f"need n >= exp(s) = {math.exp(self.s):.1f}, got {self.n}"
            )

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def topology(self) -> Topology:
        return Topology(d=self.box.d, L=self.L, r=self.r, K=1)


def _fill_indicator_slab(
    w: WeightVector, k: int, u: np.ndarray, v: np.ndarray, delta: float, log_n: float
) -> None:
    """Write the indicator weights for box [u, v] into subnetwork k (1-based).

    Assumes the slab is currently zero; only the nonzero entries of the
    construction are written.
    """
    t = w.topology
    d = t.d
    ln2 = log_n**2
    slope = 4.0 * d * ln2 / delta
    lvl0 = w.level(0)
    for j in range(d):
        lvl0[k - 1, j, 1 + j] = slope
        lvl0[k - 1, j, 0] = -slope * u[j]
        lvl0[k - 1, d + j, 1 + j] = -slope
        lvl0[k - 1, d + j, 0] = slope * v[j]
    lvl1 = w.level(1)
    lvl1[k - 1, 0, 1 : 2 * d + 1] = 8.0 * ln2
    lvl1[k - 1, 0, 0] = -8.0 * ln2 * (2 * d - 0.5)
    for level in range(2, t.L):
        block = w.level(level)
        block[k - 1, 0, 1] = 6.0 * ln2
        block[k - 1, 0, 0] = -3.0 * ln2


def build_indicator(spec: IndicatorNetSpec) -> WeightVector:
    """Single-subnetwork indicator of spec.box; outer weight fixed to 1.

    All weights not pinned by the construction are zero, so the network
    output equals the top unit of the one subnetwork.
    """
    w = WeightVector.zeros(spec.topology)
    _fill_indicator_slab(w, 1, spec.box.u, spec.box.v, spec.delta, spec.log_n)
    w.outer[0] = 1.0
    return w


@dataclass
class RegionStats:
    points: int = 0
    trials: int = 0
    min_value: float = math.inf
    max_value: float = -math.inf
    violations: int = 0

    def update(self, values: np.ndarray, bad: np.ndarray) -> None:
        self.points = len(values)
        self.trials += 1
        self.min_value = min(self.min_value, float(values.min()))
        self.max_value = max(self.max_value, float(values.max()))
        self.violations += int(bad.sum())


@dataclass
class IndicatorReport:
    """Verification outcome for one indicator network."""

    hypotheses: dict
    threshold: float
    inner: RegionStats
    outer: RegionStats
    shell: RegionStats

    @property
    def passed(self) -> bool:
        return self.inner.violations == 0 and self.outer.violations == 0

    def to_json(self) -> str:
        def region(rs: RegionStats) -> dict:
            return {
                "points": rs.points,
                "trials": rs.trials,
                "min_value": rs.min_value if math.isfinite(rs.min_value) else None,
                "max_value": rs.max_value if math.isfinite(rs.max_value) else None,
                "violations": rs.violations,
            }

        return json.dumps(
            {
                "hypotheses": self.hypotheses,
                "threshold": self.threshold,
                "inner": region(self.inner),
                "outer": region(self.outer),
                "shell": region(self.shell),
                "passed": self.passed,
            },
            indent=2,
        )


def _sample_outer_region(gen, lo, hi, alpha, d, count):
    """Uniform points of [-alpha, alpha]^d with some coordinate outside [lo, hi]."""
    out = np.empty((0, d))
    guard = 0
    while len(out) < count:
        batch = gen.uniform(-alpha, alpha, size=(4 * count, d))
        keep = np.any((batch < lo) | (batch > hi), axis=1)
        out = np.vstack([out, batch[keep]])
        guard += 1
        if guard > 200:
            raise RuntimeError("outer region has negligible volume; widen alpha")
    return out[:count]


def _sample_shell(gen, inner_lo, inner_hi, outer_lo, outer_hi, alpha, d, count):
    """Points between the shrunken and expanded boxes (no guarantee applies)."""
    lo = np.maximum(outer_lo, -alpha)
    hi = np.minimum(outer_hi, alpha)
    out = np.empty((0, d))
    for _ in range(200):
        batch = gen.uniform(lo, hi, size=(4 * count, d))
        inside_inner = np.all((batch >= inner_lo) & (batch <= inner_hi), axis=1)
        out = np.vstack([out, batch[~inside_inner]])
        if len(out) >= count:
            break
    return out[:count]


def verify_indicator(
    net: WeightVector,
    spec: IndicatorNetSpec,
    perturbation: float,
    trials: int,
    seed: int,
    n_points: int = 10_000,
    alpha: Optional[float] = None,
) -> IndicatorReport:
    """Monte Carlo check of the two-sided indicator guarantee.

    Samples n_points in the shrunken box, n_points in the outer region of
    [-alpha, alpha]^d, and `trials` random perturbations of all non-outer
    weights by up to `perturbation` (must be <= log n).  Asserts value
    >= 1 - n^(-s) inside and <= n^(-s) outside for every perturbation;
    shell points (between the two boxes) are recorded but never asserted.
    """
    if perturbation > spec.log_n:
        raise ValueError(
            f"perturbation {perturbation} exceeds the allowed log n = {spec.log_n:.4f}"
        )
    d = spec.box.d
    if alpha is None:
        alpha = min(2.0, spec.log_n)
    if not 1.0 <= alpha <= spec.log_n:
        raise ValueError(f"alpha must lie in [1, log n], got {alpha}")
    threshold = spec.n ** (-spec.s)
    inner_lo, inner_hi = spec.box.shrunken(spec.delta)
    outer_lo, outer_hi = spec.box.expanded(spec.delta)

    gen = philox(seed, "indicator-points")
    inner_pts = gen.uniform(inner_lo, inner_hi, size=(n_points, d))
    outer_pts = _sample_outer_region(gen, outer_lo, outer_hi, alpha, d, n_points)
    shell_pts = _sample_shell(
        gen, inner_lo, inner_hi, outer_lo, outer_hi, alpha, d, max(64, n_points // 10)
    )

    report = IndicatorReport(
        hypotheses={
            "d": d,
            "delta": spec.delta,
            "n": spec.n,
            "s": spec.s,
            "L": spec.L,
            "r": spec.r,
            "log_n": spec.log_n,
            "perturbation": perturbation,
            "alpha": alpha,
        },
        threshold=threshold,
        inner=RegionStats(),
        outer=RegionStats(),
        shell=RegionStats(),
    )

    variants = [net]
    for trial in range(trials):
        variants.append(perturb_inner(net, perturbation, stable_seed(seed, "perturb", trial)))
    for variant in variants:
        vi = forward(variant, inner_pts)
        report.inner.update(vi, vi < 1.0 - threshold)
        vo = forward(variant, outer_pts)
        report.outer.update(vo, vo > threshold)
        if len(shell_pts):
            vs = forward(variant, shell_pts)
            report.shell.update(vs, np.zeros(len(vs), dtype=bool))
    return report


# -- shifted-grid coverings ----------------------------------------------------


@dataclass(frozen=True)
class CoveringLevel:
    """One level of the covering: a shifted grid of cubes of side 1/2^k."""

    k: int
    side: float
    shifts: np.ndarray          # (d,) per-coordinate shift in [0, side]
    border_masses: np.ndarray   # (d,) empirical mass of the selected strips

    @property
    def cells_per_dim(self) -> int:
        return 2**self.k + 1 if self.k > 0 else 1

    @property
    def origin(self) -> np.ndarray:
        if self.k == 0:
            return np.zeros_like(self.shifts)
        return self.shifts - self.side


@dataclass(frozen=True)
class MultiscaleCovering:
    """Nested coverings P^(0)..P^(l) of [0,1]^d by shifted grids."""

    d: int
    delta: float
    levels: list[CoveringLevel]

    @property
    def l(self) -> int:
        return len(self.levels) - 1

    def cell_index(self, x: np.ndarray, k: int) -> np.ndarray:
        """(n, d) integer grid index of the cube containing each point.

        Cells tile half-open except the last cell per coordinate, which is
        closed, so every point of [0,1]^d lands in exactly one cell.
        """
        level = self.levels[k]
        X = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if k == 0:
            return np.zeros(X.shape, dtype=np.int64)
        idx = np.floor((X - level.origin) / level.side).astype(np.int64)
        return np.clip(idx, 0, level.cells_per_dim - 1)

    def cell_center(self, k: int, idx: np.ndarray) -> np.ndarray:
        level = self.levels[k]
        return level.origin + (np.asarray(idx) + 0.5) * level.side

    def cell_bounds(self, k: int, idx) -> tuple[np.ndarray, np.ndarray]:
        level = self.levels[k]
        idx = np.asarray(idx, dtype=np.float64)
        lo = level.origin + idx * level.side
        return lo, lo + level.side

    def center_of(self, x: np.ndarray, k: int) -> np.ndarray:
        """z_{P^(k)}(x): center of the level-k cube containing x."""
        return self.cell_center(k, self.cell_index(x, k))


def _strip_mass(values: np.ndarray, origin: float, side: float, delta: float) -> float:
    """Fraction of points within delta of a grid line origin + m*side."""
    t = np.mod(values - origin, side)
    return float(np.mean((t <= delta) | (t >= side - delta)))


def build_covering(
    l: int, delta: float, empirical_sample: np.ndarray, seed: int = 0
) -> MultiscaleCovering:
    """Choose grid shifts so border strips carry little empirical mass.

    For each level k and coordinate, all floor(1/(2 delta 2^k)) candidate
    shifts by multiples of 2*delta are tried and the one whose delta-strip
    around the grid lines has minimal mass on the sample is kept.  The
    candidate strips are pairwise disjoint, so the selected mass is at most
    4*delta*2^k per coordinate by pigeonhole.  Requires 2*delta*2^l <= 1/2.
    """
    sample = np.atleast_2d(np.asarray(empirical_sample, dtype=np.float64))
    if sample.size == 0:
        raise ValueError("empirical sample must be nonempty")
    d = sample.shape[1]
    if not 0 < delta < 0.5:
        raise ValueError(f"need 0 < delta < 1/2, got {delta}")
    if 2.0 * delta * 2**l > 0.5:
        raise ValueError(
            f"need 2*delta*2^l <= 1/2, got {2.0 * delta * 2 ** l:.4f} (l={l}, delta={delta})"
        )
    if sample.shape[0] > 1 << 20:
        gen = philox(seed, "covering-subsample")
        keep = gen.choice(sample.shape[0], size=1 << 20, replace=False)
        sample = sample[np.sort(keep)]

    levels = [
        CoveringLevel(k=0, side=1.0, shifts=np.zeros(d), border_masses=np.zeros(d))
    ]
    for k in range(1, l + 1):
        side = 0.5**k
        q = int(1.0 / (2.0 * delta) * side)  # candidate shift count
        shifts = np.empty(d)
        masses = np.empty(d)
        for j in range(d):
            candidates = 2.0 * delta * np.arange(q)
            mass = np.array(
                [_strip_mass(sample[:, j], -side + s, side, delta) for s in candidates]
            )
            pick = int(np.argmin(mass))
            shifts[j] = candidates[pick]
            masses[j] = mass[pick]
        levels.append(
            CoveringLevel(k=k, side=side, shifts=shifts, border_masses=masses)
        )
    return MultiscaleCovering(d=d, delta=delta, levels=levels)


def border_mass(
    covering: MultiscaleCovering, k: int, sample: np.ndarray
) -> tuple[np.ndarray, float]:
    """(per-coordinate strip masses, union mass) of level k on a sample."""
    level = covering.levels[k]
    X = np.atleast_2d(np.asarray(sample, dtype=np.float64))
    if k == 0:
        return np.zeros(covering.d), 0.0
    per = np.empty(covering.d)
    in_any = np.zeros(X.shape[0], dtype=bool)
    for j in range(covering.d):
        t = np.mod(X[:, j] - level.origin[j], level.side)
        hit = (t <= covering.delta) | (t >= level.side - covering.delta)
        per[j] = float(np.mean(hit))
        in_any |= hit
    return per, float(np.mean(in_any))


# -- multiscale approximant -----------------------------------------------------


@dataclass(frozen=True)
class TelescopeTerm:
    """One telescoping difference: weight * indicator(fine cube ∩ coarse cube)."""

    k: int
    fine_idx: tuple
    coarse_idx: tuple
    weight: float
    lo: np.ndarray
    hi: np.ndarray


@dataclass
class MultiscaleNet:
    """Indicator-network sum approximating f(z_{P^(l)}(x)).

    One subnetwork per telescope term plus one for the base cube
    [-1, 2]^d; subnetwork k's outer weight is its term's constant.
    """

    weights: WeightVector
    covering: MultiscaleCovering
    terms: list[TelescopeTerm]
    base_weight: float
    n: float
    s: int
    f: Callable = field(repr=False)

    @property
    def term_count(self) -> int:
        return 1 + len(self.terms)

    @property
    def term_count_bound(self) -> int:
        l = self.covering.l
        return 1 + l * (2**l + 1) ** (2 * self.covering.d)

    @property
    def replication_factor(self) -> int:
        """R = l*(2^l+1)^(2d) + 1, the worst-case term count."""
        l = self.covering.l
        return l * (2**l + 1) ** (2 * self.covering.d) + 1

    def containing_weight_sum(self, x: np.ndarray) -> np.ndarray:
        """Sum of outer weights of all terms whose cube contains each point.

        By construction this telescopes exactly to f(z_{P^(l)}(x)).
        """
        X = np.atleast_2d(np.asarray(x, dtype=np.float64))
        total = np.full(X.shape[0], self.base_weight)
        lookup = {(t.k, t.fine_idx, t.coarse_idx): t.weight for t in self.terms}
        indices = [self.covering.cell_index(X, k) for k in range(self.covering.l + 1)]
        for k in range(1, self.covering.l + 1):
            fine, coarse = indices[k], indices[k - 1]
            for row in range(X.shape[0]):
                key = (k, tuple(fine[row]), tuple(coarse[row]))
                total[row] += lookup.get(key, 0.0)
        return total

    def piecewise_value(self, x: np.ndarray) -> np.ndarray:
        """f at the center of the finest cube containing each point."""
        X = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.asarray(self.f(self.covering.center_of(X, self.covering.l)))

    def outer_sum_squares(self) -> float:
        return float(self.weights.outer @ self.weights.outer)

    def max_outer_weight(self) -> float:
        return float(np.max(np.abs(self.weights.outer)))

    def replicated_outer_weights(self) -> np.ndarray:
        """Outer weights after repeating the construction R^2 times at 1/R^2 scale."""
        R = self.replication_factor
        return np.tile(self.weights.outer / R**2, R**2)

    def replicated_sum_squares(self) -> float:
        return self.outer_sum_squares() / self.replication_factor**2

    def certified_sum_squares_bound(self) -> float:
        """Worst-case-arithmetic bound on the replicated sum of squares.

        Prices all R^3 replicated slots at the largest constructed outer
        weight: R^3 * (w_max / R^2)^2 = w_max^2 / R, which in turn is at
        most w_max^2 / 2^(2dl).
        """
        return self.max_outer_weight() ** 2 / self.replication_factor

    def replicate(self) -> "MultiscaleNet":
        """Materialize the replicated construction as an actual WeightVector.

        Network size grows by R^2, so only call this for small l; the
        function computed is identical to the unreplicated network.
        """
        R2 = self.replication_factor**2
        t = self.weights.topology
        big = WeightVector.zeros(Topology(d=t.d, L=t.L, r=t.r, K=t.K * R2))
        slab = t.inner_size
        inner = self.weights.flat[: t.K * slab]
        big.flat[: t.K * R2 * slab] = np.tile(inner, R2)
        big.outer[:] = np.tile(self.weights.outer / R2, R2)
        return MultiscaleNet(
            weights=big,
            covering=self.covering,
            terms=self.terms,
            base_weight=self.base_weight,
            n=self.n,
            s=self.s,
            f=self.f,
        )


def build_multiscale_net(
    f: Callable,
    covering: MultiscaleCovering,
    n: float,
    s: int,
    L: int = 2,
    r: Optional[int] = None,
) -> MultiscaleNet:
    """Assemble the telescoping indicator-network approximant of f.

    Terms are one base indicator of [-1, 2]^d weighted by f at the center
    of [0,1]^d, plus, for each level k and each nonempty intersection of a
    level-k cube with a level-(k-1) cube, an indicator of the intersection
    weighted by the difference of f at the two cube centers.  Zero-volume
    intersections are skipped.  Thin intersections (side < 2*delta) are
    kept: no inner guarantee applies there, but their border region is
    what the covering shifts control.
    """
    d = covering.d
    delta = covering.delta
    log_n = math.log(n)
    # hypothesis screen shared with the single-box builder (margin waived)
    IndicatorNetSpec(
        box=Box(u=np.full(d, -1.0), v=np.full(d, 2.0)),
        delta=delta,
        n=n,
        s=s,
        L=L,
        r=r if r is not None else 2 * d,
        require_margin=False,
    )
    r = r if r is not None else 2 * d

    center0 = np.full(d, 0.5)
    base_weight = float(np.asarray(f(center0[None, :])).reshape(-1)[0])

    terms: list[TelescopeTerm] = []
    for k in range(1, covering.l + 1):
        fine = covering.levels[k]
        coarse = covering.levels[k - 1]
        for fine_idx in itertools.product(range(fine.cells_per_dim), repeat=d):
            lo1, hi1 = covering.cell_bounds(k, fine_idx)
            ranges = []
            for j in range(d):
                if k - 1 == 0:
                    ranges.append(range(1))
                    continue
                first = math.floor((lo1[j] - coarse.origin[j]) / coarse.side)
                last = math.ceil((hi1[j] - coarse.origin[j]) / coarse.side) - 1
                first = max(first, 0)
                last = min(last, coarse.cells_per_dim - 1)
                ranges.append(range(first, last + 1))
            for coarse_idx in itertools.product(*ranges):
                lo2, hi2 = covering.cell_bounds(k - 1, coarse_idx)
                lo = np.maximum(lo1, lo2)
                hi = np.minimum(hi1, hi2)
                if not np.all(lo < hi):
                    continue  # zero-volume contact
                z1 = covering.cell_center(k, np.asarray(fine_idx))
                z2 = covering.cell_center(k - 1, np.asarray(coarse_idx))
                weight = float(
                    np.asarray(f(z1[None, :])).reshape(-1)[0]
                    - np.asarray(f(z2[None, :])).reshape(-1)[0]
                )
                terms.append(
                    TelescopeTerm(
                        k=k,
                        fine_idx=tuple(int(m) for m in fine_idx),
                        coarse_idx=tuple(int(m) for m in coarse_idx),
                        weight=weight,
                        lo=lo,
                        hi=hi,
                    )
                )

    K = 1 + len(terms)
    w = WeightVector.zeros(Topology(d=d, L=L, r=r, K=K))
    _fill_indicator_slab(w, 1, np.full(d, -1.0), np.full(d, 2.0), delta, log_n)
    w.outer[0] = base_weight
    for pos, term in enumerate(terms, start=2):
        _fill_indicator_slab(w, pos, term.lo, term.hi, delta, log_n)
        w.outer[pos - 1] = term.weight
    return MultiscaleNet(
        weights=w,
        covering=covering,
        terms=terms,
        base_weight=base_weight,
        n=n,
        s=s,
        f=f,
    )


def approx_error(net, f: Callable, n_mc: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of the squared L2 distance between net and f.

    Points are uniform on [0,1]^d (the design distribution used
    throughout); returns (estimate, standard error).
    """
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    weights = net.weights if isinstance(net, MultiscaleNet) else net
    d = weights.topology.d
    gen = philox(seed, "approx-error")
    X = gen.uniform(0.0, 1.0, size=(n_mc, d))
    sq = (forward(weights, X) - np.asarray(f(X))) ** 2
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else 0.0


@dataclass(frozen=True)
class WeightRangeCompat:
    """Whether indicator slopes fit inside the random-initialization range.

    The construction needs first-layer weights up to 8d(log n)^2/delta
    while initialization draws them from +-c2(log n)^2 n^tau; compatible
    iff 8d/delta <= c2 n^tau.  Reported, never assumed.
    """

    holds: bool
    required: float
    available: float


def weight_range_compat(
    d: int, delta: float, c2: float, n: float, tau: float
) -> WeightRangeCompat:
    required = 8.0 * d / delta
    available = c2 * n**tau
    return WeightRangeCompat(holds=required <= available, required=required, available=available)
