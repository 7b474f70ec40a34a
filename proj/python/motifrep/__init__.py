"""Motif repetition analysis and generation."""

from ._motifrep import (
    MAX_ROWS,
    NUM_ATTRIBUTES,
    CheckpointError,
    Model,
    MotifrepError,
    SchemaError,
    Service,
    ValidityError,
    VocabularyError,
    classify,
    classify_pitches,
    detokenize,
    development,
    generate,
    lcs_similarity,
    pitches,
    tokenize,
    validate,
)

__all__ = [
    "MAX_ROWS",
    "NUM_ATTRIBUTES",
    "CheckpointError",
    "Model",
    "MotifrepError",
    "SchemaError",
    "Service",
    "ValidityError",
    "VocabularyError",
    "classify",
    "classify_pitches",
    "detokenize",
    "development",
    "generate",
    "lcs_similarity",
    "pitches",
    "tokenize",
    "validate",
]
