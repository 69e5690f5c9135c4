"""Group-tagged registry of handcrafted linguistic features.

The registry spans the surface (TRAD), lexical diversity (LEX), syntactic
(SYN), semantic (SEM), morphological (MORPH) and orthographic (ORTHO)
categories with a compact, documented feature set per language profile.
Groups can be removed as a pure filter, which is how the substitution
experiment builds its reduced feature space. Parse-tree features have no
extractor here (no parser in scope): the SYN group carries POS-tag
densities only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .corpus import PROFILES, SegmentedDocument

GROUPS = ("TRAD", "LEX", "SYN", "SEM", "MORPH", "ORTHO")
COARSE_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "FUNC", "OTHER")
CONTENT_TAGS = frozenset({"NOUN", "VERB", "ADJ", "ADV"})

# kind governs the range invariant: densities lie in [0, 1], counts and
# ratios are non-negative.
KINDS = ("count", "density", "ratio")

_VOWELS_EN = frozenset("aeiouy")
_VOWELS_FIL = frozenset("aeiou")

_FIL_VERB_AFFIXES = (
    "nag", "mag", "nang", "um", "in", "i", "ma", "na", "maka", "naka", "pag",
)


@dataclass(frozen=True)
class AnnotationSet:
    """Per-token coarse POS tags, aligned with a document's token lists."""

    tags: tuple[tuple[str, ...], ...]
    lemmas: tuple[tuple[str, ...], ...] | None = None

    def all_tags(self) -> list[str]:
        return [t for sent in self.tags for t in sent]


@dataclass(frozen=True)
class FeatureSpec:
    id: str
    description: str
    group: str
    kind: str
    profiles: frozenset[str]
    fn: Callable[["_DocView"], float] = field(compare=False, repr=False)


@dataclass(frozen=True)
class FeatureVector:
    doc_id: str
    values: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.values).all():
            raise ValueError(f"feature vector for {self.doc_id!r} has non-finite values")


class FeatureRegistry:
    """Ordered, immutable collection of feature specs for one profile."""

    def __init__(self, profile: str, specs: Sequence[FeatureSpec]):
        if profile not in PROFILES:
            raise ValueError(f"unknown language profile {profile!r}")
        ids = [s.id for s in specs]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate feature ids in registry")
        for s in specs:
            if s.group not in GROUPS:
                raise ValueError(f"feature {s.id!r} has unknown group {s.group!r}")
            if s.kind not in KINDS:
                raise ValueError(f"feature {s.id!r} has unknown kind {s.kind!r}")
        self.profile = profile
        self.specs = tuple(specs)

    def ids(self) -> list[str]:
        return [s.id for s in self.specs]

    def groups(self) -> set[str]:
        return {s.group for s in self.specs}

    def remove_groups(self, groups) -> "FeatureRegistry":
        """Registry without the given groups; relative order is preserved."""
        groups = set(groups)
        unknown = groups - set(GROUPS)
        if unknown:
            raise ValueError(f"unknown feature groups: {sorted(unknown)}")
        return FeatureRegistry(
            self.profile, [s for s in self.specs if s.group not in groups]
        )

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self) -> Iterator[FeatureSpec]:
        return iter(self.specs)


def remove_groups(registry: FeatureRegistry, groups) -> FeatureRegistry:
    return registry.remove_groups(groups)


def count_syllables(word: str, profile: str = "english") -> int:
    """Syllable count of a single word token, always at least 1.

    English counts maximal vowel-letter groups (aeiouy) and drops a lone
    terminal 'e' group when more than one group is present. Filipino counts
    every vowel letter (aeiou) as a nucleus.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown language profile {profile!r}")
    w = "".join(ch for ch in word.lower() if ch.isalnum())
    if not w:
        raise ValueError(f"cannot count syllables of {word!r}")
    if profile == "filipino":
        return max(1, sum(1 for ch in w if ch in _VOWELS_FIL))
    groups = 0
    in_group = False
    last_group_start = -1
    for i, ch in enumerate(w):
        if ch in _VOWELS_EN:
            if not in_group:
                groups += 1
                in_group = True
                last_group_start = i
        else:
            in_group = False
    if groups > 1 and w.endswith("e") and w[last_group_start:] == "e":
        groups -= 1
    return max(1, groups)


def _letter_skeleton(word: str, vowels: frozenset[str]) -> str:
    """Map a token to its consonant/vowel skeleton (non-letters count as C)."""
    return "".join("V" if ch in vowels else "C" for ch in word)


def _syllable_patterns(word: str) -> list[str]:
    """Split a token into syllable skeletons: one vowel nucleus per syllable,
    a single onset consonant attached to each nucleus, remaining consonants
    trailing as coda."""
    skel = _letter_skeleton(word, _VOWELS_FIL)
    nuclei = [i for i, ch in enumerate(skel) if ch == "V"]
    if not nuclei:
        return [skel] if skel else []
    starts = []
    for pos, v in enumerate(nuclei):
        if pos == 0:
            starts.append(0)
        else:
            starts.append(v - 1 if skel[v - 1] == "C" and v - 1 > nuclei[pos - 1] else v)
    starts[0] = 0
    bounds = starts[1:] + [len(skel)]
    return [skel[s:e] for s, e in zip(starts, bounds)]


class _DocView:
    """Precomputed token/tag statistics a feature function reads from."""

    def __init__(self, doc: SegmentedDocument, annotations: AnnotationSet, profile: str):
        self.profile = profile
        self.sentences = doc.sentences
        self.tokens = doc.all_tokens()
        self.tags = annotations.all_tags()
        self.n_tokens = len(self.tokens)
        self.n_sentences = len(doc.sentences)
        self._syllables: list[int] | None = None

    def syllables(self) -> list[int]:
        if self._syllables is None:
            self._syllables = [count_syllables(t, self.profile) for t in self.tokens]
        return self._syllables

    def tag_count(self, tag: str) -> int:
        return sum(1 for t in self.tags if t == tag)


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _f_word_count(v: _DocView) -> float:
    return float(v.n_tokens)


def _f_sentence_count(v: _DocView) -> float:
    return float(v.n_sentences)


def _f_avg_sentence_length(v: _DocView) -> float:
    return _safe_div(v.n_tokens, v.n_sentences)


def _f_avg_word_length(v: _DocView) -> float:
    return _safe_div(sum(len(t) for t in v.tokens), v.n_tokens)


def _f_avg_syllables(v: _DocView) -> float:
    return _safe_div(sum(v.syllables()), v.n_tokens)


def _f_polysyllable_ratio(v: _DocView) -> float:
    return _safe_div(sum(1 for s in v.syllables() if s >= 3), v.n_tokens)


def _f_ttr(v: _DocView) -> float:
    return _safe_div(len(set(v.tokens)), v.n_tokens)


def _f_root_ttr(v: _DocView) -> float:
    return _safe_div(len(set(v.tokens)), math.sqrt(v.n_tokens)) if v.n_tokens else 0.0


def _f_corrected_ttr(v: _DocView) -> float:
    return _safe_div(len(set(v.tokens)), math.sqrt(2 * v.n_tokens)) if v.n_tokens else 0.0


def _density_of(tag: str) -> Callable[[_DocView], float]:
    def fn(v: _DocView) -> float:
        return _safe_div(v.tag_count(tag), v.n_tokens)

    return fn


def _f_lexical_density(v: _DocView) -> float:
    return _safe_div(sum(1 for t in v.tags if t in CONTENT_TAGS), v.n_tokens)


def _f_content_diversity(v: _DocView) -> float:
    content = [tok for tok, tag in zip(v.tokens, v.tags) if tag in CONTENT_TAGS]
    return _safe_div(len(set(content)), len(content))


def _f_cluster_ratio(v: _DocView) -> float:
    clustered = sum(1 for t in v.tokens if "CC" in _letter_skeleton(t, _VOWELS_FIL))
    return _safe_div(clustered, v.n_tokens)


def _pattern_density(pattern: str) -> Callable[[_DocView], float]:
    def fn(v: _DocView) -> float:
        total = 0
        hits = 0
        for tok in v.tokens:
            for p in _syllable_patterns(tok):
                total += 1
                hits += p == pattern
        return _safe_div(hits, total)

    return fn


def _f_verb_affix_density(v: _DocView) -> float:
    def affixed(tok: str) -> bool:
        return len(tok) > 4 and (
            any(tok.startswith(a) for a in _FIL_VERB_AFFIXES) or tok.endswith("in")
        )

    return _safe_div(sum(1 for t in v.tokens if affixed(t)), v.n_tokens)


_BOTH = frozenset(PROFILES)
_FIL = frozenset({"filipino"})


def _all_specs() -> list[FeatureSpec]:
    return [
        FeatureSpec("word_count", "total word tokens", "TRAD", "count", _BOTH, _f_word_count),
        FeatureSpec("sentence_count", "total sentences", "TRAD", "count", _BOTH, _f_sentence_count),
        FeatureSpec("avg_sentence_length", "mean tokens per sentence", "TRAD", "ratio", _BOTH, _f_avg_sentence_length),
        FeatureSpec("avg_word_length", "mean characters per token", "TRAD", "ratio", _BOTH, _f_avg_word_length),
        FeatureSpec("avg_syllables_per_word", "mean syllables per token", "TRAD", "ratio", _BOTH, _f_avg_syllables),
        FeatureSpec("polysyllable_ratio", "share of tokens with 3+ syllables", "TRAD", "density", _BOTH, _f_polysyllable_ratio),
        FeatureSpec("ttr", "distinct tokens / tokens", "LEX", "density", _BOTH, _f_ttr),
        FeatureSpec("root_ttr", "distinct tokens / sqrt(tokens)", "LEX", "ratio", _BOTH, _f_root_ttr),
        FeatureSpec("corrected_ttr", "distinct tokens / sqrt(2 * tokens)", "LEX", "ratio", _BOTH, _f_corrected_ttr),
        FeatureSpec("noun_density", "NOUN tags / tokens", "SYN", "density", _BOTH, _density_of("NOUN")),
        FeatureSpec("verb_density", "VERB tags / tokens", "SYN", "density", _BOTH, _density_of("VERB")),
        FeatureSpec("adj_density", "ADJ tags / tokens", "SYN", "density", _BOTH, _density_of("ADJ")),
        FeatureSpec("adv_density", "ADV tags / tokens", "SYN", "density", _BOTH, _density_of("ADV")),
        FeatureSpec("function_word_density", "FUNC tags / tokens", "SYN", "density", _BOTH, _density_of("FUNC")),
        FeatureSpec("lexical_density", "content-word tags / tokens", "SEM", "density", _BOTH, _f_lexical_density),
        FeatureSpec("content_word_diversity", "distinct content words / content words", "SEM", "density", _BOTH, _f_content_diversity),
        FeatureSpec("consonant_cluster_ratio", "tokens containing a consonant cluster", "ORTHO", "density", _FIL, _f_cluster_ratio),
        FeatureSpec("cv_syllable_density", "share of CV syllable patterns", "ORTHO", "density", _FIL, _pattern_density("CV")),
        FeatureSpec("cvc_syllable_density", "share of CVC syllable patterns", "ORTHO", "density", _FIL, _pattern_density("CVC")),
        FeatureSpec("v_syllable_density", "share of bare-V syllable patterns", "ORTHO", "density", _FIL, _pattern_density("V")),
        FeatureSpec("verb_affix_density", "tokens carrying a verbal affix", "MORPH", "density", _FIL, _f_verb_affix_density),
    ]


def default_registry(profile: str) -> FeatureRegistry:
    """The built-in registry filtered to the features computable for ``profile``."""
    if profile not in PROFILES:
        raise ValueError(f"unknown language profile {profile!r}")
    return FeatureRegistry(profile, [s for s in _all_specs() if profile in s.profiles])


def load_lexicon(path: str | Path) -> dict[str, str]:
    """Load a ``word<TAB>TAG`` lexicon mapping lowercase words to coarse tags."""
    lexicon: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}: line {line_no}: expected word<TAB>TAG")
            word, tag = parts[0].strip().lower(), parts[1].strip().upper()
            if tag not in COARSE_TAGS:
                raise ValueError(f"{path}: line {line_no}: unknown tag {tag!r}")
            lexicon[word] = tag
    return lexicon


def bundled_lexicon_path(profile: str) -> Path:
    """Path of the small lexicon shipped with the package for ``profile``."""
    if profile not in PROFILES:
        raise ValueError(f"unknown language profile {profile!r}")
    return Path(resources.files("readability_lab").joinpath(f"data/lexicon_{profile}.tsv"))


def tag_pos(doc: SegmentedDocument, lexicon: dict[str, str]) -> AnnotationSet:
    """Lexicon lookup on lowercase tokens; unknown tokens get OTHER."""
    tags = tuple(
        tuple(lexicon.get(tok, "OTHER") for tok in sent) for sent in doc.tokens
    )
    return AnnotationSet(tags=tags)


def extract(
    doc: SegmentedDocument, registry: FeatureRegistry, annotations: AnnotationSet
) -> FeatureVector:
    """Compute the registry's features for one document, in registry order."""
    if len(registry) == 0:
        raise ValueError("cannot extract with an empty feature registry")
    if tuple(len(s) for s in annotations.tags) != tuple(len(s) for s in doc.tokens):
        raise ValueError(
            f"annotations misaligned with tokens for document {doc.doc_id!r}"
        )
    view = _DocView(doc, annotations, registry.profile)
    values = np.array([spec.fn(view) for spec in registry], dtype=float)
    return FeatureVector(doc_id=doc.doc_id, values=values)


def extract_corpus(segmented_docs, registry, annotations_list) -> np.ndarray:
    """Stack per-document feature vectors into a documents x features matrix."""
    rows = [
        extract(doc, registry, ann).values
        for doc, ann in zip(segmented_docs, annotations_list, strict=True)
    ]
    return np.vstack(rows) if rows else np.empty((0, len(registry)))


def export_features_csv(path: str | Path, registry: FeatureRegistry, vectors) -> None:
    """Write extracted vectors as CSV with a doc_id column and feature-id header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id"] + registry.ids())
        for vec in vectors:
            writer.writerow([vec.doc_id] + [repr(float(x)) for x in vec.values])
