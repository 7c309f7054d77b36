"""Multi-agent deep Q-learning intrusion detection."""

from ._core import (
    Error,
    IncompatibleError,
    IoError,
    RunConfig,
    ValidationError,
    adapt,
    agent_digests,
    decider_reward,
    evaluate,
    l1_reward,
    make_synthetic,
    model_digest,
    model_labels,
    predict_csv,
    preprocess,
    train,
    wmse_gradient,
    wmse_loss,
)

__all__ = [
    "Error",
    "IncompatibleError",
    "IoError",
    "RunConfig",
    "ValidationError",
    "adapt",
    "agent_digests",
    "decider_reward",
    "evaluate",
    "l1_reward",
    "make_synthetic",
    "model_digest",
    "model_labels",
    "predict_csv",
    "preprocess",
    "train",
    "wmse_gradient",
    "wmse_loss",
]
