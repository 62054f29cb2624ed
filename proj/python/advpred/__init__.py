"""Adversarial surrogate losses for multiclass prediction.

Thin wrapper around the compiled ``_advpred`` extension. Labels are 1-based,
matching the C++ library and the command line tool.
"""

from ._advpred import (
    Abstain,
    AdvpredError,
    BaseMetric,
    FeatureMap,
    GaussianKernel,
    General,
    KernelModel,
    LinearKernel,
    LinearModel,
    LossMatrix,
    OrdinalAbsolute,
    OrdinalSquared,
    Weighted,
    ZeroOne,
    abstain_prediction,
    adversarial_loss,
    adversary_choice,
    bayes_set,
    build_loss_matrix,
    check_consistency,
    describe,
    dumps_model,
    enumerate_vertices,
    kernel,
    loads_linear_model,
    run_experiment,
    solve_adversary_game,
    solve_predictor_game,
    subgradient,
    train_linear,
    train_pegasos_kernel,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
