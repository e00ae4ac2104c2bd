"""Matrix-based Renyi entropy estimators and the multi-view
entropy-bottleneck model (python bindings over the C++ core)."""

from meib._meib import (
    ConfigError,
    DimensionError,
    IoError,
    Model,
    NumericError,
    entropy_gradient_wrt_gram,
    estimate_sigma,
    generate_synth,
    joint_entropy,
    mi_gradient,
    mutual_information,
    mutual_information_batches,
    normalized_gram,
    renyi_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "IoError",
    "Model",
    "NumericError",
    "entropy_gradient_wrt_gram",
    "estimate_sigma",
    "generate_synth",
    "joint_entropy",
    "mi_gradient",
    "mutual_information",
    "mutual_information_batches",
    "normalized_gram",
    "renyi_entropy",
]
