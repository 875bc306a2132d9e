"""Generative-augmented architecture search and two-stage regression."""

from ._nasreg import (
    ArchitectureSpec,
    DataError,
    Dataset,
    DivergenceError,
    PipelineArtifact,
    SchemaError,
    compute_metrics,
    decode_point,
    encode_spec,
    fit_linear,
    gpr_fit_predict,
    knn_predict,
    load_artifact,
    load_csv,
    poly_augment,
    run_pipeline,
    save_artifact,
)

__version__ = "0.1.0"

__all__ = [
    "ArchitectureSpec",
    "DataError",
    "Dataset",
    "DivergenceError",
    "PipelineArtifact",
    "SchemaError",
    "compute_metrics",
    "decode_point",
    "encode_spec",
    "fit_linear",
    "gpr_fit_predict",
    "knn_predict",
    "load_artifact",
    "load_csv",
    "poly_augment",
    "run_pipeline",
    "save_artifact",
]
