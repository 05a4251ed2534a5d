"""Gradual machine learning for aspect-level sentiment analysis.

Pipeline: lexicon rules label the easy aspect units, those labels seed a
factor graph over word and discourse features, and the remaining units are
labeled one per pass in evidential-support order by subgraph inference.
"""

from .corpus import (
    ACSA,
    ATSA,
    AspectUnit,
    Corpus,
    CorpusError,
    EmbeddingTable,
    NEGATIVE,
    POSITIVE,
    enumerate_aspect_units,
    load_corpus,
    load_embeddings,
    save_corpus,
    tokenize,
)
from .easy import EasyStats, EvidenceSet, NoEvidenceError, label_easy_instances
from .engine import (
    EngineConfig,
    RunResult,
    UnitRecord,
    bench_csv,
    bench_scaling,
    evaluate,
    prepare,
    run,
)
from .evidence import Mass, SupportScore, UncertaintyParams, evidential_support
from .features import FeatureIndex, FeatureStats, OPPOSITE, SIMILAR
from .graph import FactorGraph, Subgraph
from .inference import InferenceConfig, MarginalResult, exact_marginal, run_subgraph
from .lexicon import (
    ConnectiveLists,
    Lexicon,
    LexiconError,
    load_connectives,
    load_lexicon,
    save_lexicon,
)
from .synth import generate_synthetic, synthetic_lexicon

__version__ = "0.1.0"

__all__ = [
    "ACSA",
    "ATSA",
    "AspectUnit",
    "Corpus",
    "CorpusError",
    "EmbeddingTable",
    "NEGATIVE",
    "POSITIVE",
    "enumerate_aspect_units",
    "load_corpus",
    "load_embeddings",
    "save_corpus",
    "tokenize",
    "EasyStats",
    "EvidenceSet",
    "NoEvidenceError",
    "label_easy_instances",
    "EngineConfig",
    "RunResult",
    "UnitRecord",
    "bench_csv",
    "bench_scaling",
    "evaluate",
    "prepare",
    "run",
    "Mass",
    "SupportScore",
    "UncertaintyParams",
    "evidential_support",
    "FeatureIndex",
    "FeatureStats",
    "OPPOSITE",
    "SIMILAR",
    "FactorGraph",
    "Subgraph",
    "InferenceConfig",
    "MarginalResult",
    "exact_marginal",
    "run_subgraph",
    "ConnectiveLists",
    "Lexicon",
    "LexiconError",
    "load_connectives",
    "load_lexicon",
    "save_lexicon",
    "generate_synthetic",
    "synthetic_lexicon",
]
