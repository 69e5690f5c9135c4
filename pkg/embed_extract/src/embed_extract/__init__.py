"""Sentence-embedding extraction into the JSONL interchange format."""

from .extract import (
    GRANULARITIES,
    ExtractError,
    ExtractJob,
    extract_embeddings,
    read_manifest,
    split_sentences,
)

__version__ = "0.1.0"
