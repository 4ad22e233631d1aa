"""Executable verification suites for the optimization and construction facts.

Each suite returns a plain dict report with a "passed" flag; the CLI turns
these into JSON output and exit codes, and the acceptance tests assert on
them directly.  All randomness is seeded, so a suite is a deterministic
function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np

from .approx import (
    Box,
    IndicatorNetSpec,
    build_covering,
    build_indicator,
    build_multiscale_net,
    border_mass,
    verify_indicator,
)
from .net import Topology, WeightVector, forward, init_weights
from .optim import (
    Dataset,
    check_descent,
    check_pl,
    empirical_risk,
    estimate_curvature,
    gradient,
    train,
)
from .params import HyperParams
from .rng import philox, stable_seed
from .synth import NoiseModel, make_target, sample_dataset

GRADCHECK_TOL = 1e-6
FD_STEP = 1e-5
REL_FLOOR = 1e-3  # gradient components below this scale are compared absolutely


def fd_gradient(w: WeightVector, data: Dataset, c3: float, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of the empirical risk, component by component.

    Independent oracle for the analytic gradient: uses only risk
    evaluations, never the reverse-mode code path.
    """
    base = w.flat
    out = np.empty_like(base)
    for q in range(base.shape[0]):
        bump = np.zeros_like(base)
        bump[q] = step
        hi = empirical_risk(WeightVector(w.topology, base + bump), data, c3)
        lo = empirical_risk(WeightVector(w.topology, base - bump), data, c3)
        out[q] = (hi - lo) / (2.0 * step)
    return out


def gradient_rel_error(analytic: np.ndarray, fd: np.ndarray) -> float:
    """Max componentwise |analytic - fd| / max(|analytic|, |fd|, floor)."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), REL_FLOOR)
    return float(np.max(np.abs(analytic - fd) / denom))


def run_gradcheck(instances: int = 200, seed: int = 7) -> dict:
    """Analytic vs finite-difference gradients on random small networks.

    Instances cycle through every (d, L, K) combination of d in {1,2,3},
    L in {2,3}, K in {1,5,50}; weights are O(1)-scaled so the finite
    differences stay well conditioned.
    """
    gen = philox(seed, "gradcheck")
    ds, Ls, Ks = (1, 2, 3), (2, 3), (1, 5, 50)
    worst = 0.0
    combos = set()
    for i in range(instances):
        d = ds[i % len(ds)]
        L = Ls[(i // len(ds)) % len(Ls)]
        K = Ks[(i // (len(ds) * len(Ls))) % len(Ks)]
        combos.add((d, L, K))
        r = int(gen.integers(2, 4))
        n = int(gen.integers(4, 10))
        topo = Topology(d=d, L=L, r=r, K=K)
        w = WeightVector(topo, gen.uniform(-2.0, 2.0, size=topo.weight_count))
        # keep f_w = sum of K terms at O(1) so the risk stays O(1); central
        # differences on an O(K) risk carry cancellation noise ~ulp(F)/step
        # that would swamp the comparison for reasons unrelated to the gradient
        w.outer[:] /= math.sqrt(K)
        data = Dataset(
            xs=gen.uniform(0, 1, size=(n, d)), ys=gen.normal(0.0, 1.0, size=n)
        )
        c3 = float(gen.uniform(0.0, 0.3))
        err = gradient_rel_error(gradient(w, data, c3).flat, fd_gradient(w, data, c3))
        worst = max(worst, err)
    return {
        "instances": instances,
        "combinations": sorted(combos),
        "max_rel_error": worst,
        "tolerance": GRADCHECK_TOL,
        "passed": worst <= GRADCHECK_TOL,
    }


def run_pl_suite(instances: int = 10_000, seed: int = 11) -> dict:
    """Gradient-dominance inequality on random outer-weight ridge instances."""
    gen = philox(seed, "pl")
    failures = 0
    min_slack = math.inf
    for i in range(instances):
        d = 1 + i % 2
        K = 1 + int(gen.integers(0, 8))
        n = int(gen.integers(3, 25))
        topo = Topology(d=d, L=2, r=2, K=K)
        w = WeightVector(topo, gen.uniform(-3.0, 3.0, size=topo.weight_count))
        data = Dataset(
            xs=gen.uniform(0, 1, size=(n, d)), ys=gen.normal(0.0, 2.0, size=n)
        )
        c3 = float(gen.uniform(1e-3, 0.5))
        chk = check_pl(w, data, c3)
        min_slack = min(min_slack, chk.lhs - chk.rhs)
        if not chk.holds:
            failures += 1
    return {
        "instances": instances,
        "failures": failures,
        "min_slack": min_slack,
        "passed": failures == 0,
    }


def run_descent_suite(
    runs: int = 20,
    seed: int = 3,
    n: int = 100,
    K: int = 40,
    t_n: int = 150,
    safety: float = 4.0,
) -> dict:
    """Per-step descent recursion and drift bound on conservatively stepped runs.

    For each seeded run the inverse step size is set to `safety` times an
    empirical curvature estimate around the initialization, which puts the
    step size in the regime where both inequalities must hold.
    """
    target = make_target("lipschitz-cone", 1.0, 1.0, 1, {"x0": [0.3]})
    noise = NoiseModel("gaussian", 0.2)
    all_ok = True
    details = []
    for run in range(runs):
        run_seed = stable_seed(seed, "descent", run)
        data = sample_dataset(target, noise, n, run_seed)
        hp0 = HyperParams.remark_defaults(n, 1.0, c1=2.0, c2=0.5, d=1, t_n=t_n)
        topo = Topology(d=1, L=2, r=3, K=K)
        w0 = init_weights(topo, hp0, stable_seed(run_seed, "init"))
        L_est = estimate_curvature(
            w0, data, hp0.c3, probes=6, radius=1.0, seed=run_seed
        )
        hp = replace(hp0, L_n=safety * max(L_est, 1.0), t_n=t_n)
        trace = train(w0, data, hp)
        report = check_descent(trace)
        ok = report.all_hold
        all_ok = all_ok and ok
        details.append(
            {
                "run": run,
                "L_est": L_est,
                "L_n": hp.L_n,
                "descent_min_slack": float(report.descent_slack.min()),
                "drift_min_slack": float(report.drift_slack.min()),
                "all_hold": ok,
            }
        )
    return {"runs": runs, "steps_per_run": t_n, "passed": all_ok, "details": details}


def run_indicator_suite(
    d: int,
    delta: float,
    s: int,
    n: Optional[float] = None,
    points: int = 10_000,
    perturbations: int = 100,
    seed: int = 5,
    L: int = 3,
) -> dict:
    """Two-sided indicator guarantee under worst-allowed weight perturbations."""
    r = 2 * d
    if n is None:
        n = math.ceil(max(8 * d, math.exp(r + 1), math.exp(s))) + 1
    box = Box(u=np.full(d, 0.2), v=np.full(d, 0.8))
    spec = IndicatorNetSpec(box=box, delta=delta, n=n, s=s, L=L, r=r)
    net = build_indicator(spec)
    report = verify_indicator(
        net,
        spec,
        perturbation=spec.log_n,
        trials=perturbations,
        seed=seed,
        n_points=points,
    )
    out = {
        "d": d,
        "delta": delta,
        "s": s,
        "n": n,
        "L": L,
        "r": r,
        "threshold": report.threshold,
        "inner_min": report.inner.min_value,
        "outer_max": report.outer.max_value,
        "inner_violations": report.inner.violations,
        "outer_violations": report.outer.violations,
        "variants": report.inner.trials,
        "points_per_region": points,
        "passed": report.passed,
    }
    return out


def run_covering_suite(
    ks=(1, 2, 3), d: int = 1, points: int = 100_000, seed: int = 13
) -> dict:
    """Shift search achieves the pigeonhole border-mass bound on uniform samples."""
    per_k = []
    all_ok = True
    for k in ks:
        delta = 0.5**k / 8.0
        sample = philox(seed, "covering", k).uniform(0, 1, size=(points, d))
        covering = build_covering(k, delta, sample, seed)
        level = covering.levels[k]
        per_bound = 4.0 * delta * 2**k
        union_bound = 4.0 * d * 2**k * delta
        per, union = border_mass(covering, k, sample)
        ok = bool(np.all(level.border_masses <= per_bound) and union <= union_bound)
        all_ok = all_ok and ok
        per_k.append(
            {
                "k": k,
                "delta": delta,
                "selected_masses": [float(v) for v in level.border_masses],
                "per_coordinate_bound": per_bound,
                "union_mass": union,
                "union_bound": union_bound,
                "passed": ok,
            }
        )
    return {"levels": per_k, "points": points, "d": d, "passed": all_ok}


TELESCOPE_TOL = 1e-12


def run_multiscale_suite(
    levels=(1, 2, 3),
    d: int = 1,
    n: float = 100.0,
    s: int = 2,
    L: int = 2,
    points: int = 10_000,
    sample_size: int = 50_000,
    seed: int = 17,
) -> dict:
    """Telescoping identity, term-count bound, and outer-weight scaling.

    The scaling checks follow the worst-case replication arithmetic: with
    R(l) = l*(2^l+1)^(2d)+1 copies-squared at weight 1/R^2, the certified
    bound on the replicated sum of squares is c^2/R(l) for a single
    constant c (the largest constructed outer weight across levels), whose
    per-level ratio sits within a factor 2 of 2^(-2d); the actual sum must
    stay below the certified bound and decay at least that fast.
    """
    f = make_target("lipschitz-cone", 1.0, 1.0, d, {"x0": np.full(d, 0.3).tolist()})
    per_level = {}
    all_ok = True
    for l in levels:
        delta = 0.5**l / 8.0
        sample = philox(seed, "ms-sample", l).uniform(0, 1, size=(sample_size, d))
        covering = build_covering(l, delta, sample, seed)
        net = build_multiscale_net(f, covering, n=n, s=s, L=L)
        pts = philox(seed, "ms-points", l).uniform(0, 1, size=(points, d))
        tele_err = float(
            np.max(np.abs(net.containing_weight_sum(pts) - net.piecewise_value(pts)))
        )
        sup_observed = float(np.max(np.abs(forward(net.weights, pts))))
        sup_bound = _constructed_sup_bound(net)
        per_level[l] = {
            "terms": net.term_count,
            "term_bound": net.term_count_bound,
            "telescope_max_err": tele_err,
            "sum_squares": net.replicated_sum_squares(),
            "max_outer": net.max_outer_weight(),
            "R": net.replication_factor,
            "sup_observed": sup_observed,
            "sup_bound": sup_bound,
            "checks": {
                "telescope": tele_err <= TELESCOPE_TOL,
                "term_count": net.term_count <= net.term_count_bound,
                "sup": sup_observed <= sup_bound,
            },
        }
        all_ok = all_ok and all(per_level[l]["checks"].values())

    levels = sorted(per_level)
    c_const = max(per_level[l]["max_outer"] for l in levels)
    predicted = 0.5 ** (2 * d)
    scaling = []
    for l in levels:
        row = per_level[l]
        certified = c_const**2 / row["R"]
        row["certified_bound"] = certified
        ok_below = row["sum_squares"] <= certified + 1e-15
        ok_pow = certified <= c_const**2 / 2 ** (2 * d * l) + 1e-15
        row["checks"]["sum_below_certified"] = ok_below
        row["checks"]["certified_below_power"] = ok_pow
        all_ok = all_ok and ok_below and ok_pow
    for a, b in zip(levels, levels[1:]):
        cert_ratio = per_level[b]["certified_bound"] / per_level[a]["certified_bound"]
        sum_ratio = per_level[b]["sum_squares"] / per_level[a]["sum_squares"]
        ok_cert = predicted / 2.0 <= cert_ratio <= predicted * 2.0
        ok_sum = sum_ratio <= predicted * 2.0
        scaling.append(
            {
                "from": a,
                "to": b,
                "certified_ratio": cert_ratio,
                "sum_ratio": sum_ratio,
                "predicted": predicted,
                "certified_within_factor2": ok_cert,
                "sum_decays_at_least": ok_sum,
            }
        )
        all_ok = all_ok and ok_cert and ok_sum
    return {
        "per_level": per_level,
        "scaling": scaling,
        "predicted_per_level": predicted,
        "passed": all_ok,
    }


def _constructed_sup_bound(net) -> float:
    """Sup-norm bound assembled from the construction's own constants.

    At any point, at most 4^d terms per level can be inside or within
    delta of their cube (contributing at most their weight), and every
    other term's indicator is below n^(-s).
    """
    d = net.covering.d
    threshold = net.n ** (-net.s)
    by_level = {}
    for t in net.terms:
        by_level.setdefault(t.k, []).append(abs(t.weight))
    bound = abs(net.base_weight)
    for k in sorted(by_level):
        bound += 4**d * max(by_level[k])
    total_abs = abs(net.base_weight) + sum(abs(t.weight) for t in net.terms)
    return bound + threshold * total_abs
