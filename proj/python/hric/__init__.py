"""IAB power allocation with guidance-assisted DDPG."""

from ._hric import (
    ContractError,
    Environment,
    default_config,
    evaluate_epa,
    los_probability,
    noise_sigma_cosine,
    noise_sigma_linear,
    normalize_config,
    on_simplex,
    parse_guidance,
    path_loss_gain,
    project_to_simplex,
    select_action,
    serialize_policy,
    shannon_rate,
    train,
)

__all__ = [
    "ContractError",
    "Environment",
    "default_config",
    "evaluate_epa",
    "los_probability",
    "noise_sigma_cosine",
    "noise_sigma_linear",
    "normalize_config",
    "on_simplex",
    "parse_guidance",
    "path_loss_gain",
    "project_to_simplex",
    "select_action",
    "serialize_policy",
    "shannon_rate",
    "train",
]
