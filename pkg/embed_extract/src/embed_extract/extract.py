"""Extract sentence embeddings from a corpus manifest into JSONL.

The manifest is the CSV interchange format (``id,label,path`` with paths
relative to the manifest, or ``id,label,text``; ``#`` comment lines).
Output follows the JSONL embedding interchange: a header object with
``dim``, ``granularity`` and ``model`` (plus ``pooling`` and truncation
provenance), then one vector object per document or sentence.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])[\"')\]]*\s+")
GRANULARITIES = ("document", "sentence")


class ExtractError(Exception):
    """Manifest or model problem that aborts extraction."""


@dataclass(frozen=True)
class ExtractJob:
    manifest: str
    model: str
    granularity: str = "document"
    output: str = "embeddings.jsonl"
    batch_size: int = 32

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")
        if not self.model:
            raise ValueError("model identifier must be non-empty")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def read_manifest(path: str | Path) -> list[tuple[str, str]]:
    """Read (id, text) pairs from a manifest CSV."""
    path = Path(path)
    if not path.is_file():
        raise ExtractError(f"manifest not found: {path}")
    raw = path.read_text(encoding="utf-8-sig")
    data_lines = [
        line
        for line in raw.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not data_lines:
        raise ExtractError(f"manifest has no header: {path}")
    reader = csv.reader(io.StringIO("\n".join(data_lines)))
    header = [h.strip().lower() for h in next(reader)]
    if header == ["id", "label", "path"]:
        inline = False
    elif header == ["id", "label", "text"]:
        inline = True
    else:
        raise ExtractError(f"bad manifest header {header!r}")
    docs = []
    seen = set()
    for row_no, row in enumerate(reader, start=1):
        if len(row) != 3:
            raise ExtractError(f"row {row_no}: expected 3 fields")
        doc_id, _, payload = (f.strip() for f in row)
        if not doc_id or doc_id in seen:
            raise ExtractError(f"row {row_no}: missing or duplicate id")
        seen.add(doc_id)
        if inline:
            text = payload
        else:
            doc_path = path.parent / payload
            if not doc_path.is_file():
                raise ExtractError(f"row {row_no}: file not found: {payload}")
            text = doc_path.read_text(encoding="utf-8")
        docs.append((doc_id, text))
    return docs


def split_sentences(text: str) -> list[str]:
    """Terminal-punctuation sentence split; never returns an empty list for
    non-blank text."""
    pieces = [p.strip() for p in _SENTENCE_SPLIT.split(text)]
    pieces = [p for p in pieces if p]
    return pieces if pieces else ([text.strip()] if text.strip() else [])


def _load_model(identifier: str):
    from sentence_transformers import SentenceTransformer

    try:
        return SentenceTransformer(identifier, device="cpu")
    except Exception as exc:  # model hub or path failure
        raise ExtractError(f"could not load model {identifier!r}: {exc}") from exc


def _find_truncated(model, doc_sentences: dict[str, list[str]]) -> list[str]:
    """Doc ids with at least one sentence beyond the model's token window."""
    tokenizer = getattr(model, "tokenizer", None)
    max_len = model.get_max_seq_length()
    if tokenizer is None or not max_len:
        return []
    truncated = []
    for doc_id, sentences in doc_sentences.items():
        for sent in sentences:
            if len(tokenizer(sent, truncation=False)["input_ids"]) > max_len:
                truncated.append(doc_id)
                break
    return truncated


def extract_embeddings(job: ExtractJob) -> dict:
    """Run the extraction job; returns a summary with document counts.

    Document granularity emits the mean of the document's sentence vectors,
    so the two granularities are numerically consistent.
    """
    docs = read_manifest(job.manifest)
    model = _load_model(job.model)
    # renamed in newer sentence-transformers releases
    dim_fn = getattr(model, "get_embedding_dimension", None)
    if dim_fn is None:
        dim_fn = model.get_sentence_embedding_dimension
    dim = int(dim_fn())

    doc_sentences = {doc_id: split_sentences(text) for doc_id, text in docs}
    for doc_id, sentences in doc_sentences.items():
        if not sentences:
            raise ExtractError(f"document {doc_id!r} has no text to embed")
    header = {
        "dim": dim,
        "granularity": job.granularity,
        "model": job.model,
        "pooling": "mean",
    }
    truncated = _find_truncated(model, doc_sentences)
    if truncated:
        header["truncated_docs"] = sorted(truncated)

    flat: list[str] = []
    spans: list[tuple[str, int, int]] = []
    for doc_id, _ in docs:
        sentences = doc_sentences[doc_id]
        spans.append((doc_id, len(flat), len(flat) + len(sentences)))
        flat.extend(sentences)
    if flat:
        vectors = model.encode(
            flat,
            batch_size=job.batch_size,
            convert_to_numpy=True,
            show_progress_bar=False,
        ).astype(float)
    else:
        vectors = np.empty((0, dim))

    out_path = Path(job.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for doc_id, start, end in spans:
            if job.granularity == "sentence":
                for s, vec in enumerate(vectors[start:end]):
                    fh.write(
                        json.dumps({"id": doc_id, "s": s, "v": vec.tolist()}) + "\n"
                    )
            else:
                pooled = vectors[start:end].mean(axis=0)
                fh.write(json.dumps({"id": doc_id, "v": pooled.tolist()}) + "\n")
    return {
        "documents": len(docs),
        "sentences": len(flat),
        "dim": dim,
        "truncated": len(truncated),
        "output": str(out_path),
    }
