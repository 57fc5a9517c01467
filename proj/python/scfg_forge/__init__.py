"""Synchronous grammar extraction and non-terminal merging."""

from ._core import (
    Bitext,
    CorpusError,
    Grammar,
    GrammarError,
    MergeError,
    MergePlan,
    PipelineError,
    blue_fringe,
    coverage,
    derive,
    dissimilarity,
    dissimilarity_threshold,
    equivalent,
    extract_baseline,
    extract_specialized,
    fisher_differ,
    fisher_p_value,
    hoeffding_differ,
    kmedoids,
    nt_dissimilarity,
    phrase_inventory,
    run_pipeline,
)

__all__ = [
    "Bitext",
    "CorpusError",
    "Grammar",
    "GrammarError",
    "MergeError",
    "MergePlan",
    "PipelineError",
    "blue_fringe",
    "coverage",
    "derive",
    "dissimilarity",
    "dissimilarity_threshold",
    "equivalent",
    "extract_baseline",
    "extract_specialized",
    "fisher_differ",
    "fisher_p_value",
    "hoeffding_differ",
    "kmedoids",
    "nt_dissimilarity",
    "phrase_inventory",
    "run_pipeline",
]
