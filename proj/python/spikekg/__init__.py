"""Spike-train knowledge graph embeddings (Python bindings)."""

from ._spikekg import (
    ConfigError,
    KnowledgeGraph,
    Model,
    NumericalError,
    SpikekgError,
    VocabError,
    isi_statistics,
    load_checkpoint,
    load_dataset,
    score,
    solve_interval,
    spike_times,
    train,
)

__all__ = [
    "ConfigError",
    "KnowledgeGraph",
    "Model",
    "NumericalError",
    "SpikekgError",
    "VocabError",
    "isi_statistics",
    "load_checkpoint",
    "load_dataset",
    "score",
    "solve_interval",
    "spike_times",
    "train",
]
