"""HMC with neural-network gradient approximations and an exact Metropolis step."""

from ._nnghmc import (
    BananaTarget,
    ConfigError,
    DiagonalGaussianTarget,
    GarchTarget,
    LogisticRegressionTarget,
    TargetModel,
    ess,
    gen_garch,
    gen_logistic,
    ill_conditioned_variances,
    ks_statistic,
    net_forward,
    resolve_config,
    run_config,
    run_hmc,
    run_nnghmc,
    verify,
)

__all__ = [
    "BananaTarget",
    "ConfigError",
    "DiagonalGaussianTarget",
    "GarchTarget",
    "LogisticRegressionTarget",
    "TargetModel",
    "ess",
    "gen_garch",
    "gen_logistic",
    "ill_conditioned_variances",
    "ks_statistic",
    "net_forward",
    "resolve_config",
    "run_config",
    "run_hmc",
    "run_nnghmc",
    "verify",
]
