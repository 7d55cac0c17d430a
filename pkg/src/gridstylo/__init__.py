"""Authorship attribution from entity grids and char-bigram convolutions."""

from .corpus import BigramSequence, Chunk, Document, char_bigrams, chunk_document, oversample
from .errors import ConfigError, DataError, GridStyloError
from .estimators import CnnAuthorClassifier, DiscourseFeaturizer, SvmAuthorClassifier
from .featurize import (
    SEP,
    TRANSITION_ORDER,
    DiscourseSequence,
    ProbabilityVector,
    Vocab,
    build_vocab,
    gr_de_global,
    gr_de_local,
    gr_transition_pv,
    rst_de_edu_order,
    rst_de_global,
    rst_de_local,
    rst_pv,
)
from .grid import (
    AnnotationRecord,
    EntityGrid,
    Mention,
    RelationLabel,
    Role,
    RstGrid,
    build_gr_grid,
    build_rst_grid,
    load_annotation,
    slice_annotation,
    validate_grid,
)
from .harness import (
    ExperimentResult,
    FoldPlan,
    chunk_sweep,
    kfold_split,
    macro_f1,
    nearest_neighbors,
    run_multiclass,
    run_pairwise,
)
from .pipeline import AnnotatedChunk, load_corpus

__version__ = "1.0.0"

__all__ = [
    "AnnotatedChunk",
    "AnnotationRecord",
    "BigramSequence",
    "Chunk",
    "CnnAuthorClassifier",
    "ConfigError",
    "DataError",
    "DiscourseFeaturizer",
    "DiscourseSequence",
    "Document",
    "EntityGrid",
    "ExperimentResult",
    "FoldPlan",
    "GridStyloError",
    "Mention",
    "ProbabilityVector",
    "RelationLabel",
    "Role",
    "RstGrid",
    "SEP",
    "SvmAuthorClassifier",
    "TRANSITION_ORDER",
    "Vocab",
    "build_gr_grid",
    "build_rst_grid",
    "build_vocab",
    "char_bigrams",
    "chunk_document",
    "chunk_sweep",
    "gr_de_global",
    "gr_de_local",
    "gr_transition_pv",
    "kfold_split",
    "load_annotation",
    "load_corpus",
    "macro_f1",
    "nearest_neighbors",
    "oversample",
    "rst_de_edu_order",
    "rst_de_global",
    "rst_de_local",
    "rst_pv",
    "run_multiclass",
    "run_pairwise",
    "slice_annotation",
    "validate_grid",
    "__version__",
]
