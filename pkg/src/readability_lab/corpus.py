"""Labeled corpus loading and rule-based sentence/token segmentation.

Manifests are UTF-8 CSV files with header ``id,label,path`` (``path``
relative to the manifest directory) or ``id,label,text`` for inline text.
Lines starting with ``#`` are comments; a ``# classes: a,b,c`` comment
declares the class order explicitly, otherwise classes are numbered by
first appearance. Error messages refer to 1-based data row numbers
(header and comment lines are not counted).
"""

from __future__ import annotations

import csv
import io
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

PROFILES = ("english", "filipino")

# Fixed per-profile guard lists: a period ending one of these tokens does not
# terminate a sentence. Lowercase, trailing period included.
ABBREVIATIONS = {
    "english": frozenset(
        {
            "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.",
            "vs.", "etc.", "e.g.", "i.e.", "no.", "fig.", "vol.", "al.",
        }
    ),
    "filipino": frozenset(
        {"g.", "gng.", "bb.", "dr.", "atbp.", "blg.", "sto.", "sta."}
    ),
}

_TERMINALS = ".!?"
_CLOSERS = "\"')]}”’»"
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class Document:
    """One labeled text: unique id, raw text and a 0-based class index."""

    id: str
    text: str
    label: int


@dataclass(frozen=True)
class LabeledCorpus:
    documents: tuple[Document, ...]
    class_names: tuple[str, ...]

    def labels(self) -> list[int]:
        return [d.label for d in self.documents]

    def ids(self) -> list[str]:
        return [d.id for d in self.documents]


@dataclass(frozen=True)
class SegmentedDocument:
    """Sentence-split document with per-sentence token lists.

    ``tokens`` holds NFC-normalized lowercase word tokens (the comparison
    form used everywhere downstream); ``tokens_raw`` keeps the original
    surface forms in the same order.
    """

    doc_id: str
    sentences: tuple[str, ...]
    tokens: tuple[tuple[str, ...], ...]
    tokens_raw: tuple[tuple[str, ...], ...]

    def all_tokens(self) -> list[str]:
        return [t for sent in self.tokens for t in sent]


@dataclass(frozen=True)
class CorpusStats:
    doc_count: int
    sentence_count: int
    vocab_size: int


def _check_profile(profile: str) -> None:
    if profile not in PROFILES:
        raise ValueError(f"unknown language profile {profile!r}; expected one of {PROFILES}")


def _parse_class_directive(line: str) -> list[str] | None:
    body = line.lstrip().lstrip("#").strip()
    if body.lower().startswith("classes:"):
        names = [n.strip() for n in body[len("classes:"):].split(",")]
        return [n for n in names if n]
    return None


def load_manifest(path: str | Path) -> LabeledCorpus:
    """Load a labeled corpus from a CSV manifest.

    Documents appear in manifest order. Every document must contain at
    least one word token and the corpus must contain at least two classes.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    raw = path.read_text(encoding="utf-8-sig")

    declared: list[str] | None = None
    data_lines: list[str] = []
    for line in raw.splitlines():
        if line.lstrip().startswith("#"):
            names = _parse_class_directive(line)
            if names is not None:
                declared = names
            continue
        if line.strip():
            data_lines.append(line)
    if not data_lines:
        raise ManifestError(f"manifest is empty: {path}")

    reader = csv.reader(io.StringIO("\n".join(data_lines)))
    header = [h.strip().lower() for h in next(reader)]
    if header == ["id", "label", "path"]:
        inline = False
    elif header == ["id", "label", "text"]:
        inline = True
    else:
        raise ManifestError(
            f"bad manifest header {header!r}; expected id,label,path or id,label,text"
        )

    documents: list[Document] = []
    seen_ids: set[str] = set()
    class_names: list[str] = list(declared) if declared else []
    for row_no, row in enumerate(reader, start=1):
        if len(row) != 3:
            raise ManifestError(f"row {row_no}: expected 3 fields, got {len(row)}")
        doc_id, label_str, payload = (field.strip() for field in row)
        if not doc_id:
            raise ManifestError(f"row {row_no}: empty id")
        if doc_id in seen_ids:
            raise ManifestError(f"row {row_no}: duplicate id {doc_id!r}")
        if not label_str:
            raise ManifestError(f"row {row_no}: empty label")
        if label_str not in class_names:
            if declared:
                raise ManifestError(f"row {row_no}: unknown label {label_str!r}")
            class_names.append(label_str)

        if inline:
            text = payload
        else:
            doc_path = (path.parent / payload).resolve()
            if not doc_path.is_file():
                raise ManifestError(f"row {row_no}: file not found: {payload}")
            text = doc_path.read_text(encoding="utf-8")
        if not _WORD_RE.search(text):
            raise ManifestError(f"row {row_no}: empty text")

        seen_ids.add(doc_id)
        documents.append(Document(id=doc_id, text=text, label=class_names.index(label_str)))

    present = {d.label for d in documents}
    if len(present) < 2:
        raise ManifestError("corpus must contain at least 2 distinct classes")
    return LabeledCorpus(documents=tuple(documents), class_names=tuple(class_names))


def _split_sentences(text: str, abbreviations: frozenset[str]) -> list[str]:
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch not in _TERMINALS:
            i += 1
            continue
        # absorb a run of terminators ("...", "?!") and closing quotes
        j = i + 1
        while j < n and text[j] in _TERMINALS:
            j += 1
        if ch == "." and j == i + 1:
            # the word ending at this period, e.g. "Dr."
            w = i
            while w > start and not text[w - 1].isspace():
                w -= 1
            if text[w : i + 1].lower() in abbreviations:
                i = j
                continue
        while j < n and text[j] in _CLOSERS:
            j += 1
        if j < n and not text[j].isspace():
            # mid-token punctuation such as "3.14" or "e.g.x"
            i = j
            continue
        piece = text[start:j].strip()
        if piece:
            sentences.append(piece)
        start = j
        i = j
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    if not sentences and text.strip():
        sentences.append(text.strip())
    return sentences


def segment(doc: Document, profile: str = "english") -> SegmentedDocument:
    """Split a document into sentences and word tokens.

    The text is NFC-normalized, then sentences end at runs of ``. ! ?``
    followed by whitespace, unless the period closes a known abbreviation.
    Tokens are maximal runs of word characters; ``tokens`` holds the
    lowercase copies.
    """
    _check_profile(profile)
    if not doc.text:
        raise ValueError(f"document {doc.id!r} has empty text")
    # NFC before tokenizing: combining marks would otherwise split tokens
    text = unicodedata.normalize("NFC", doc.text)
    sentences = _split_sentences(text, ABBREVIATIONS[profile])
    tokens_raw = tuple(tuple(_WORD_RE.findall(s)) for s in sentences)
    tokens = tuple(tuple(t.lower() for t in sent) for sent in tokens_raw)
    return SegmentedDocument(
        doc_id=doc.id, sentences=tuple(sentences), tokens=tokens, tokens_raw=tokens_raw
    )


def corpus_stats(corpus: LabeledCorpus, profile: str = "english") -> CorpusStats:
    """Document, sentence and distinct-lowercase-token counts."""
    _check_profile(profile)
    sentence_count = 0
    vocab: set[str] = set()
    for doc in corpus.documents:
        seg = segment(doc, profile)
        sentence_count += len(seg.sentences)
        vocab.update(seg.all_tokens())
    return CorpusStats(
        doc_count=len(corpus.documents),
        sentence_count=sentence_count,
        vocab_size=len(vocab),
    )
