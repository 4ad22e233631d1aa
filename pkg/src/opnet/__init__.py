"""Over-parametrized parallel sigmoid network regression by gradient descent.

Public surface: network core (`net`), hyperparameters (`params`), training
and checkers (`optim`), constructive approximants (`approx`), the
sum-of-projections interaction estimator (`interaction`), synthetic
targets (`synth`), the experiment harness (`harness`), and verification
suites (`verify`).
"""

from .net import (
    Topology,
    WeightVector,
    forward,
    forward_activations,
    init_weights,
    load_weights,
    perturb_inner,
    save_weights,
    sigmoid,
    subnet_outputs,
    truncate,
    truncated_predictor,
)
from .params import ConstraintCheck, DeskOverrides, HyperParams
from .optim import (
    Dataset,
    DescentReport,
    PLCheck,
    TrainTrace,
    TrainingDiverged,
    check_descent,
    check_pl,
    empirical_risk,
    estimate_curvature,
    gd_step,
    gradient,
    outer_ridge_oracle,
    theorem_schedule,
    train,
)
from .approx import (
    Box,
    HypothesisViolation,
    IndicatorNetSpec,
    MultiscaleCovering,
    MultiscaleNet,
    approx_error,
    build_covering,
    build_indicator,
    build_multiscale_net,
    verify_indicator,
    weight_range_compat,
)
from .interaction import (
    InteractionSpec,
    InteractionWeights,
    enumerate_subsets,
    forward_interaction,
    init_interaction,
    train_interaction,
)
from .synth import NoiseModel, TargetFunction, l2_error, make_target, sample_dataset
from .harness import ExperimentConfig, RateReport, fit_slope, run_experiment
from .rng import philox, stable_seed

__version__ = "0.1.0"
