"""Precomputed sentence/document embedding tables.

The interchange format is JSONL: line 1 is a header object
``{"dim": <int>, "granularity": "document"|"sentence", "model": <string>}``
and every following line is ``{"id": ..., "s": <sentence index, sentence
granularity only>, "v": [<dim floats>]}``. Load errors carry 1-based
physical line numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import LabeledCorpus
from .errors import AlignmentError, EmbeddingError

GRANULARITIES = ("document", "sentence")


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable table of per-document (or per-sentence) vectors."""

    dim: int
    granularity: str
    model: str
    # document granularity: doc_id -> vector
    # sentence granularity: doc_id -> {sentence index -> vector}
    vectors: dict = field(repr=False)

    def doc_ids(self) -> list[str]:
        return list(self.vectors.keys())

    def __len__(self) -> int:
        return len(self.vectors)

    def to_document_table(self) -> "EmbeddingTable":
        """Mean-pool sentence vectors (by ascending sentence index) per document."""
        if self.granularity == "document":
            return self
        pooled = {
            doc_id: mean_pool([vec for _, vec in sorted(sents.items())])
            for doc_id, sents in self.vectors.items()
        }
        return EmbeddingTable(
            dim=self.dim, granularity="document", model=self.model, vectors=pooled
        )


def mean_pool(sentence_vectors) -> np.ndarray:
    """Elementwise arithmetic mean of equal-length vectors."""
    if len(sentence_vectors) == 0:
        raise ValueError("mean_pool requires at least one vector")
    arrays = [np.asarray(v, dtype=float) for v in sentence_vectors]
    lengths = {a.shape for a in arrays}
    if len(lengths) != 1 or arrays[0].ndim != 1:
        raise ValueError("mean_pool requires 1-D vectors of equal length")
    return np.mean(arrays, axis=0)


def _check_vector(value, dim: int, line_no: int) -> np.ndarray:
    if not isinstance(value, list) or len(value) != dim:
        got = len(value) if isinstance(value, list) else type(value).__name__
        raise EmbeddingError(f"line {line_no}: dim mismatch (expected {dim}, got {got})")
    for x in value:
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
            raise EmbeddingError(f"line {line_no}: non-finite or non-numeric value")
    return np.asarray(value, dtype=float)


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Load and validate a JSONL embedding file."""
    path = Path(path)
    if not path.is_file():
        raise EmbeddingError(f"embedding file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    header_no = None
    for idx, line in enumerate(lines, start=1):
        if line.strip():
            header_no = idx
            break
    if header_no is None:
        raise EmbeddingError(f"empty embedding file: {path}")
    try:
        header = json.loads(lines[header_no - 1])
    except json.JSONDecodeError as exc:
        raise EmbeddingError(f"line {header_no}: malformed JSON ({exc.msg})") from exc
    if not isinstance(header, dict):
        raise EmbeddingError(f"line {header_no}: header must be a JSON object")
    dim = header.get("dim")
    granularity = header.get("granularity")
    model = header.get("model", "")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim <= 0:
        raise EmbeddingError(f"line {header_no}: header dim must be a positive integer")
    if granularity not in GRANULARITIES:
        raise EmbeddingError(
            f"line {header_no}: header granularity must be one of {GRANULARITIES}"
        )

    vectors: dict = {}
    for line_no in range(header_no + 1, len(lines) + 1):
        line = lines[line_no - 1]
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EmbeddingError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise EmbeddingError(f"line {line_no}: entry must be an object with a string id")
        doc_id = entry["id"]
        vec = _check_vector(entry.get("v"), dim, line_no)
        if granularity == "document":
            if "s" in entry:
                raise EmbeddingError(
                    f"line {line_no}: sentence index not allowed at document granularity"
                )
            if doc_id in vectors:
                raise EmbeddingError(f"line {line_no}: duplicate id {doc_id!r}")
            vectors[doc_id] = vec
        else:
            s = entry.get("s")
            if not isinstance(s, int) or isinstance(s, bool) or s < 0:
                raise EmbeddingError(
                    f"line {line_no}: sentence granularity requires a non-negative "
                    f"integer 's'"
                )
            sents = vectors.setdefault(doc_id, {})
            if s in sents:
                raise EmbeddingError(
                    f"line {line_no}: duplicate sentence index {s} for id {doc_id!r}"
                )
            sents[s] = vec
    return EmbeddingTable(dim=dim, granularity=granularity, model=model, vectors=vectors)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write a table back to the JSONL interchange format."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {"dim": table.dim, "granularity": table.granularity, "model": table.model}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for doc_id in table.doc_ids():
            if table.granularity == "document":
                entries = [(None, table.vectors[doc_id])]
            else:
                entries = sorted(table.vectors[doc_id].items())
            for s, vec in entries:
                obj: dict = {"id": doc_id}
                if s is not None:
                    obj["s"] = s
                obj["v"] = [float(x) for x in vec]
                fh.write(json.dumps(obj) + "\n")


def align(table: EmbeddingTable, corpus: LabeledCorpus) -> np.ndarray:
    """Matrix of document vectors in corpus order (pooling sentence tables first)."""
    doc_table = table.to_document_table()
    missing = [d.id for d in corpus.documents if d.id not in doc_table.vectors]
    if missing:
        raise AlignmentError(
            "embedding table is missing document ids: " + ", ".join(missing)
        )
    return np.vstack([doc_table.vectors[d.id] for d in corpus.documents])
