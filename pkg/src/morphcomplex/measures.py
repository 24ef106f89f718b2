"""Sample-level complexity measures.

Seven measures are computed per bootstrap sample: type/token ratio (ttr),
information in word structure (ws), word entropy (wh), lemma entropy (lh),
mean size of paradigm (msp), inflectional synthesis (is) and morphological
feature entropy (mfh).  The eighth measure, negative inflection accuracy
(neg_ia), lives in the ``inflection`` module because it is trained once per
treebank rather than averaged over repetitions.

Measures that need lemma or feature annotation return ``None`` (the
unavailable marker) instead of a value when the sample carries no usable
annotation; downstream analysis drops those cells rather than treating
them as zeros.
"""

from __future__ import annotations

import logging
import math
import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .sampling import Sample

log = logging.getLogger(__name__)

SAMPLE_MEASURES = ("ttr", "ws", "wh", "lh", "msp", "is", "mfh")
ALL_MEASURES = SAMPLE_MEASURES + ("neg_ia",)

# One fixed deflate-class setting; ws values are only comparable when every
# text went through the same compressor.  Recorded in run metadata.
COMPRESSOR_SETTING = "zlib-level9"
_COMPRESS_LEVEL = 9

# Replacement strings must never contain the characters used to join
# tokens and sentences when serializing for compression.
_DELIMITERS = frozenset({" ", "\n", "\r", "\t"})
_DISTORT_MAX_RETRIES = 32


def plugin_entropy(counts: Mapping[str, int]) -> float:
    """Maximum-likelihood entropy in bits of a frequency table.

    No smoothing: probabilities are raw relative frequencies c_i / N.
    """
    if not counts:
        raise ValueError("empty frequency table")
    total = 0
    for item, c in counts.items():
        if c < 1:
            raise ValueError(f"count for {item!r} must be >= 1, got {c}")
        total += c
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log2(p)
    return max(h, 0.0)


def ttr(sample: Sample) -> float:
    """Distinct word forms divided by running tokens."""
    if sample.n_tokens == 0:
        raise ValueError("empty sample")
    types = {tok.form for tok in sample.tokens()}
    return len(types) / sample.n_tokens


def word_entropy(sample: Sample) -> float:
    """Entropy of the word-form frequency distribution."""
    return plugin_entropy(Counter(tok.form for tok in sample.tokens()))


def lemma_entropy(sample: Sample) -> float | None:
    """Entropy of the lemma frequency distribution; None without lemmas."""
    counts = Counter(tok.lemma for tok in sample.tokens() if tok.lemma)
    if not counts:
        return None
    return plugin_entropy(counts)


def msp(sample: Sample) -> float | None:
    """Mean size of paradigm: form types per lemma type.

    Only tokens carrying a lemma participate; None when there are none.
    """
    forms: set[str] = set()
    lemmas: set[str] = set()
    for tok in sample.tokens():
        if tok.lemma:
            forms.add(tok.form)
            lemmas.add(tok.lemma)
    if not lemmas:
        return None
    return len(forms) / len(lemmas)


def inflectional_synthesis(sample: Sample, count_values: bool = False) -> float | None:
    """Largest per-lemma union of inflectional feature keys in the sample.

    ``count_values=True`` switches the unit from feature keys to full
    key=value pairs.
    """
    per_lemma: dict[str, set] = {}
    for tok in sample.tokens():
        if not tok.lemma or not tok.feats:
            continue
        units = tok.feats if count_values else tuple(k for k, _ in tok.feats)
        per_lemma.setdefault(tok.lemma, set()).update(units)
    if not per_lemma:
        return None
    return float(max(len(s) for s in per_lemma.values()))


def feature_entropy(sample: Sample) -> float | None:
    """Entropy of the token-level Key=Value pair distribution (mfh).

    Each pair counts once per token carrying it, so frequent inflections
    weigh more than rare ones.
    """
    counts: Counter[str] = Counter()
    for tok in sample.tokens():
        if not tok.lemma or not tok.feats:
            continue
        for key, value in tok.feats:
            counts[f"{key}={value}"] += 1
    if not counts:
        return None
    return plugin_entropy(counts)


@dataclass(frozen=True)
class CharUnigramModel:
    """Character distribution estimated from the sample's word forms."""

    chars: tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-9:
            raise ValueError("character probabilities must sum to 1")


def char_unigram_model(sample: Sample) -> CharUnigramModel:
    """Token-weighted character counts over forms, delimiters excluded."""
    counts: Counter[str] = Counter()
    for tok in sample.tokens():
        for ch in tok.form:
            if ch not in _DELIMITERS:
                counts[ch] += 1
    if not counts:
        # Degenerate sample whose forms are all delimiter characters.
        counts["x"] = 1
    chars = tuple(sorted(counts))
    total = sum(counts.values())
    probs = np.array([counts[c] / total for c in chars], dtype=float)
    return CharUnigramModel(chars, probs)


def _next_free(candidate: str, used: set[str], chars: tuple[str, ...]) -> str:
    """Deterministic successor scan over same-length strings.

    Treats the candidate as a base-N numeral over the sorted alphabet and
    increments until an unused string appears (wrapping around).
    """
    index = {c: i for i, c in enumerate(chars)}
    n = len(chars)
    digits = [index[c] for c in candidate]
    capacity = n ** len(digits)
    for _ in range(capacity):
        pos = len(digits) - 1
        while pos >= 0:
            digits[pos] = (digits[pos] + 1) % n
            if digits[pos] != 0:
                break
            pos -= 1
        cand = "".join(chars[d] for d in digits)
        if cand not in used:
            return cand
    raise RuntimeError("distortion alphabet exhausted for this word length")


def distort(sample: Sample, rng: np.random.Generator) -> list[list[str]]:
    """Replace every word type with a random same-length string.

    One injective type-to-replacement mapping is built per sample;
    replacement characters are drawn i.i.d. from the sample's character
    unigram model.  Every occurrence of a type is replaced identically, so
    the distorted text keeps the original type/token statistics while its
    within-word structure is destroyed.
    """
    model = char_unigram_model(sample)
    chars = np.array(model.chars)
    mapping: dict[str, str] = {}
    used: set[str] = set()
    for tok in sample.tokens():
        if tok.form in mapping:
            continue
        length = len(tok.form)
        if length == 0:
            mapping[tok.form] = ""
            continue
        replacement = None
        for _ in range(_DISTORT_MAX_RETRIES):
            draw = rng.choice(chars, size=length, p=model.probabilities)
            cand = "".join(draw)
            if cand not in used:
                replacement = cand
                break
        if replacement is None:
            replacement = _next_free(cand, used, model.chars)
            log.warning(
                "distort: retry budget exhausted for a length-%d type; "
                "used deterministic disambiguation",
                length,
            )
        mapping[tok.form] = replacement
        used.add(replacement)
    return [[mapping[tok.form] for tok in sent.tokens] for sent in sample.sentences]


def serialize_rows(rows: Iterable[Iterable[str]]) -> str:
    """Join tokens with single spaces and sentences with newlines."""
    return "\n".join(" ".join(row) for row in rows)


def serialize_sample(sample: Sample) -> str:
    return serialize_rows([tok.form for tok in sent.tokens] for sent in sample.sentences)


def compression_ratio(text: str) -> float:
    """Compressed size over raw size of the UTF-8 serialization."""
    data = text.encode("utf-8")
    if not data:
        raise ValueError("cannot compress empty text")
    return len(zlib.compress(data, _COMPRESS_LEVEL)) / len(data)


def word_structure_information(sample: Sample, rng: np.random.Generator) -> float:
    """Rise in compression ratio caused by destroying word structure (ws).

    Positive values mean the original words carried internal regularities
    the compressor could exploit; the more morphology, the bigger the rise.
    """
    original = serialize_sample(sample)
    distorted = serialize_rows(distort(sample, rng))
    return compression_ratio(distorted) - compression_ratio(original)


def sample_measure_functions(
    names: Iterable[str] = SAMPLE_MEASURES,
    is_count_values: bool = False,
) -> dict[str, Callable[[Sample, np.random.Generator], float | None]]:
    """Build the registry mapping measure names to (sample, rng) callables."""
    registry: dict[str, Callable[[Sample, np.random.Generator], float | None]] = {
        "ttr": lambda s, rng: ttr(s),
        "ws": word_structure_information,
        "wh": lambda s, rng: word_entropy(s),
        "lh": lambda s, rng: lemma_entropy(s),
        "msp": lambda s, rng: msp(s),
        "is": lambda s, rng: inflectional_synthesis(s, count_values=is_count_values),
        "mfh": lambda s, rng: feature_entropy(s),
    }
    unknown = [n for n in names if n not in registry]
    if unknown:
        raise ValueError(f"unknown sample-level measures: {unknown}")
    return {name: registry[name] for name in names}
