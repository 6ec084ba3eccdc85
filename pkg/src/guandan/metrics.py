"""Text metrics for commentary evaluation.

The pipeline is deliberately dependency-free and deterministic:

- ``preprocess`` normalizes to NFC, lowercases non-CJK alphanumeric runs,
  strips punctuation and symbols, emits whitespace-free tokens (contiguous
  alnum runs for Latin-ish script, unigrams plus bigrams for CJK runs),
  removes bundled zh+en stopwords, and applies a Porter stemmer to ASCII
  alphabetic tokens. Stopwords are filtered both before and after stemming,
  and the stemmer is iterated to a fixed point (single-pass Porter maps
  agreed -> agre -> agr), so re-feeding the output tokens reproduces them
  unchanged.
- ``tfidf_cosine`` embeds two texts with smoothed idf
  (log((1+N)/(1+df)) + 1) fit on the background corpus plus both texts,
  then takes the cosine of the L2-normalized count-weighted vectors.
- ``sentiment`` scores tokens against a bundled valence lexicon; matched
  tokens contribute |valence| mass to their polarity, unmatched tokens
  contribute unit mass to neutral, and compound = S / sqrt(S^2 + 15) for
  the net valence sum S.
- ``nb_score`` is P(positive | tokens) under a multinomial naive Bayes
  with Laplace smoothing (alpha = 1) trained on a bundled mini corpus of
  labeled commentary sentences; tokens outside the training vocabulary
  are ignored.
- ``evaluate_run`` renders one metric row per system in the report column
  order: label, neg, neu, pos, compound, cosine, ttr, nb_score.
"""

from __future__ import annotations

import csv
import io
import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable, NamedTuple, Sequence

__all__ = [
    "MetricError",
    "UndefinedMetricError",
    "ClassifierNotTrainedError",
    "TokenStream",
    "EvalRow",
    "EvalReport",
    "porter_stem",
    "preprocess",
    "tfidf_cosine",
    "ttr",
    "sentiment",
    "NbClassifier",
    "default_classifier",
    "nb_score",
    "evaluate_run",
    "reference_row",
    "stopwords",
    "valence_lexicon",
]

REPORT_COLUMNS = ("label", "neg", "neu", "pos", "compound", "cosine", "ttr", "nb_score")

POSITIVE_LABEL = "pos"
NEGATIVE_LABEL = "neg"


class MetricError(Exception):
    """Base error for the metrics module."""


class UndefinedMetricError(MetricError):
    """A metric has no defined value for the given input."""


class ClassifierNotTrainedError(MetricError):
    """The naive-Bayes classifier was used before being fitted."""


# ---------------------------------------------------------------------------
# Porter stemmer (classic algorithm, ASCII lowercase input)

_VOWELS = "aeiou"


def _cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        # y is a vowel when preceded by a consonant
        return True if i == 0 else not _cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    # number of VC sequences in [C](VC)^m[V]
    n = len(stem)
    k = 0
    while k < n and _cons(stem, k):
        k += 1
    count = 0
    while k < n:
        while k < n and not _cons(stem, k):
            k += 1
        if k >= n:
            break
        count += 1
        while k < n and _cons(stem, k):
            k += 1
    return count


def _has_vowel(stem: str) -> bool:
    return any(not _cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _cons(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    n = len(word)
    if n < 3:
        return False
    return (
        _cons(word, n - 3)
        and not _cons(word, n - 2)
        and _cons(word, n - 1)
        and word[-1] not in "wxy"
    )


# longest suffix first; within a step only the first string match is tried
_STEP2_RULES = (
    ("ational", "ate"), ("ization", "ize"), ("iveness", "ive"),
    ("fulness", "ful"), ("ousness", "ous"), ("tional", "tion"),
    ("biliti", "ble"), ("entli", "ent"), ("ousli", "ous"),
    ("ation", "ate"), ("alism", "al"), ("aliti", "al"),
    ("iviti", "ive"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"),
    ("ator", "ate"), ("eli", "e"),
)
_STEP3_RULES = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"),
    ("iciti", "ic"), ("ical", "ic"), ("ness", ""), ("ful", ""),
)
_STEP4_SUFFIXES = (
    "ement", "ance", "ence", "able", "ible", "ment",
    "ant", "ent", "ion", "ism", "ate", "iti", "ous", "ive", "ize",
    "al", "er", "ic", "ou",
)


def _apply_rules(word: str, rules: tuple[tuple[str, str], ...]) -> str:
    for suffix, repl in rules:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) > 0:
                return stem + repl
            return word
    return word


def porter_stem(word: str) -> str:
    """Classic Porter stem of a lowercase ASCII word."""
    if len(word) <= 2:
        return word
    w = word
    # step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif not w.endswith("ss") and w.endswith("s"):
        w = w[:-1]
    # step 1b
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            w = w[:-1]
    else:
        stripped = False
        if w.endswith("ed") and _has_vowel(w[:-2]):
            w = w[:-2]
            stripped = True
        elif w.endswith("ing") and _has_vowel(w[:-3]):
            w = w[:-3]
            stripped = True
        if stripped:
            if w.endswith(("at", "bl", "iz")):
                w += "e"
            elif _ends_double_cons(w) and w[-1] not in "lsz":
                w = w[:-1]
            elif _measure(w) == 1 and _ends_cvc(w):
                w += "e"
    # step 1c
    if w.endswith("y") and _has_vowel(w[:-1]):
        w = w[:-1] + "i"
    # steps 2 and 3
    w = _apply_rules(w, _STEP2_RULES)
    w = _apply_rules(w, _STEP3_RULES)
    # step 4
    for suffix in _STEP4_SUFFIXES:
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if _measure(stem) > 1 and (suffix != "ion" or (stem and stem[-1] in "st")):
                w = stem
            break
    # step 5a
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            w = stem
    # step 5b
    if w.endswith("ll") and _measure(w) > 1:
        w = w[:-1]
    return w


def _stem_fixpoint(word: str) -> str:
    # every pass shrinks or preserves the word, so this settles fast
    for _ in range(10):
        stemmed = porter_stem(word)
        if stemmed == word:
            return word
        word = stemmed
    return word


# ---------------------------------------------------------------------------
# Tokenization

_CJK_RANGES = ((0x3400, 0x4DBF), (0x4E00, 0x9FFF), (0xF900, 0xFAFF))


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


class TokenStream(NamedTuple):
    """Cleaned tokens plus light metadata about the source text."""

    tokens: list[str]
    source_length: int
    language: str


def _data_text(name: str) -> str:
    return (resources.files("guandan") / "data" / name).read_text(encoding="utf-8")


def _data_lines(name: str) -> list[str]:
    lines = []
    for raw in _data_text(name).splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """Bundled zh+en stopword set."""
    return frozenset(_data_lines("stopwords_en.txt")) | frozenset(
        _data_lines("stopwords_zh.txt")
    )


def _raw_tokens(text: str) -> list[str]:
    # non-CJK alnum runs become one lowercased token; CJK runs emit a unigram
    # per character interleaved with the bigram starting there
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if _is_cjk(ch):
            j = i
            while j < n and _is_cjk(text[j]):
                j += 1
            run = text[i:j]
            for k in range(len(run)):
                out.append(run[k])
                if k + 1 < len(run):
                    out.append(run[k : k + 2])
            i = j
        elif ch.isalnum():
            j = i
            while j < n and text[j].isalnum() and not _is_cjk(text[j]):
                j += 1
            out.append(text[i:j].lower())
            i = j
        else:
            i += 1
    return out


def preprocess(text: str) -> TokenStream:
    """Normalize, tokenize, drop stopwords, and stem ASCII words."""
    norm = unicodedata.normalize("NFC", text)
    stops = stopwords()
    tokens: list[str] = []
    for tok in _raw_tokens(norm):
        if tok in stops:
            continue
        if tok.isascii() and tok.isalpha():
            tok = _stem_fixpoint(tok)
            if tok in stops:
                continue
        tokens.append(tok)
    cjk_chars = sum(1 for ch in norm if _is_cjk(ch))
    ascii_letters = sum(1 for ch in norm if ch.isascii() and ch.isalpha())
    language = "zh" if cjk_chars > 0 and cjk_chars >= ascii_letters else "en"
    return TokenStream(tokens=tokens, source_length=len(norm), language=language)


# ---------------------------------------------------------------------------
# tf-idf cosine

def tfidf_cosine(candidate: str, reference: str, background: Iterable[str]) -> float:
    """Cosine of tf-idf vectors, idf fit on background plus both texts."""
    bg_docs = [preprocess(t).tokens for t in background]
    if not bg_docs:
        raise ValueError("background corpus must be nonempty")
    cand = preprocess(candidate).tokens
    ref = preprocess(reference).tokens
    docs = bg_docs + [cand, ref]
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc))
    n_docs = len(docs)
    idf = {t: math.log((1 + n_docs) / (1 + k)) + 1.0 for t, k in df.items()}

    def embed(tokens: list[str]) -> tuple[dict[str, float], float]:
        weights = {t: c * idf[t] for t, c in Counter(tokens).items()}
        return weights, math.sqrt(sum(x * x for x in weights.values()))

    vec_a, norm_a = embed(cand)
    vec_b, norm_b = embed(ref)
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    dot = sum(w * vec_b.get(t, 0.0) for t, w in vec_a.items())
    return max(0.0, min(1.0, dot / (norm_a * norm_b)))


# ---------------------------------------------------------------------------
# Type-token ratio

def ttr(tokens: Sequence[str]) -> float:
    """Distinct-over-total token ratio."""
    if not tokens:
        raise UndefinedMetricError("type-token ratio of an empty token stream")
    return float(Fraction(len(set(tokens)), len(tokens)))


# ---------------------------------------------------------------------------
# Valence sentiment

@lru_cache(maxsize=1)
def valence_lexicon() -> dict[str, float]:
    """Token -> valence map; ASCII keys are stored stemmed."""
    lex: dict[str, float] = {}
    for line in _data_lines("valence_lexicon.tsv"):
        key, _, value = line.partition("\t")
        key = unicodedata.normalize("NFC", key.strip()).lower()
        if key.isascii() and key.isalpha():
            key = _stem_fixpoint(key)
        lex[key] = float(value)
    return lex


def sentiment(text: str) -> dict[str, float]:
    """Lexicon polarity masses and compound score for a text."""
    lex = valence_lexicon()
    pos_mass = 0.0
    neg_mass = 0.0
    neutral = 0
    net = 0.0
    for tok in preprocess(text).tokens:
        v = lex.get(tok)
        if v is None or v == 0.0:
            neutral += 1
        elif v > 0:
            pos_mass += v
            net += v
        else:
            neg_mass -= v
            net += v
    total = pos_mass + neg_mass + neutral
    if total == 0.0:
        return {"neg": 0.0, "neu": 1.0, "pos": 0.0, "compound": 0.0}
    compound = net / math.sqrt(net * net + 15.0)
    compound = max(-1.0, min(1.0, compound))
    return {
        "neg": neg_mass / total,
        "neu": neutral / total,
        "pos": pos_mass / total,
        "compound": compound,
    }


# ---------------------------------------------------------------------------
# Naive-Bayes sentiment score

class NbClassifier:
    """Multinomial naive Bayes over preprocessed tokens, Laplace alpha=1.

    Tokens outside the training vocabulary carry no evidence: an unseen
    or empty text scores exactly the class prior.
    """

    def __init__(self, alpha: float = 1.0) -> None:
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.alpha = alpha
        self._classes: tuple[str, ...] = ()
        self._log_prior: dict[str, float] = {}
        self._log_like: dict[str, dict[str, float]] = {}
        self._vocab: frozenset[str] = frozenset()

    @property
    def trained(self) -> bool:
        return bool(self._classes)

    def fit(self, texts: Sequence[str], labels: Sequence[str]) -> "NbClassifier":
        if len(texts) != len(labels):
            raise ValueError("texts and labels must have equal length")
        if not texts:
            raise ValueError("training corpus is empty")
        classes = tuple(sorted(set(labels)))
        if len(classes) != 2:
            raise ValueError("exactly two class labels required")
        token_counts: dict[str, Counter[str]] = {c: Counter() for c in classes}
        doc_counts: Counter[str] = Counter()
        for text, label in zip(texts, labels):
            doc_counts[label] += 1
            token_counts[label].update(preprocess(text).tokens)
        vocab = frozenset().union(*(set(c) for c in token_counts.values()))
        n_docs = sum(doc_counts.values())
        self._classes = classes
        self._log_prior = {c: math.log(doc_counts[c] / n_docs) for c in classes}
        self._log_like = {}
        for c in classes:
            total = sum(token_counts[c].values()) + self.alpha * len(vocab)
            self._log_like[c] = {
                t: math.log((token_counts[c][t] + self.alpha) / total) for t in vocab
            }
        self._vocab = vocab
        return self

    def prob(self, label: str, text: str) -> float:
        """Posterior probability of ``label`` given the text."""
        if not self.trained:
            raise ClassifierNotTrainedError("classifier has not been fitted")
        if label not in self._classes:
            raise ValueError(f"unknown class label: {label!r}")
        tokens = [t for t in preprocess(text).tokens if t in self._vocab]
        scores = {c: self._log_prior[c] for c in self._classes}
        for tok in tokens:
            for c in self._classes:
                scores[c] += self._log_like[c][tok]
        peak = max(scores.values())
        exps = {c: math.exp(s - peak) for c, s in scores.items()}
        return exps[label] / sum(exps.values())


@lru_cache(maxsize=1)
def default_classifier() -> NbClassifier:
    """Classifier fitted on the bundled labeled commentary corpus."""
    texts: list[str] = []
    labels: list[str] = []
    for line in _data_lines("nb_corpus.tsv"):
        label, _, text = line.partition("\t")
        labels.append(label.strip())
        texts.append(text.strip())
    return NbClassifier().fit(texts, labels)


def nb_score(text: str) -> float:
    """P(positive | text) under the bundled naive-Bayes classifier."""
    return default_classifier().prob(POSITIVE_LABEL, text)


# ---------------------------------------------------------------------------
# Report

@dataclass(frozen=True)
class EvalRow:
    """One system's metric row; None renders as an absent cell."""

    label: str
    neg: float
    neu: float
    pos: float
    compound: float
    cosine: float | None
    ttr: float | None
    nb_score: float | None

    def as_dict(self) -> dict[str, object]:
        return {col: getattr(self, col) for col in REPORT_COLUMNS}


@dataclass(frozen=True)
class EvalReport:
    """Per-system metric rows in stable input order."""

    rows: tuple[EvalRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            cells: list[str] = [row.label]
            for col in REPORT_COLUMNS[1:]:
                value = getattr(row, col)
                cells.append("" if value is None else f"{value:.6f}")
            writer.writerow(cells)
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"rows": [row.as_dict() for row in self.rows]},
            ensure_ascii=False,
            indent=2,
        )


def _collapse(text_or_texts: str | Sequence[str]) -> str:
    if isinstance(text_or_texts, str):
        return text_or_texts
    return "\n".join(text_or_texts)


def _metric_row(
    label: str,
    document: str,
    reference_doc: str | None,
    background: Sequence[str],
) -> EvalRow:
    senti = sentiment(document)
    if reference_doc is None:
        cosine = None
    else:
        cosine = tfidf_cosine(document, reference_doc, background)
    try:
        diversity: float | None = ttr(preprocess(document).tokens)
    except UndefinedMetricError:
        diversity = None
    return EvalRow(
        label=label,
        neg=senti["neg"],
        neu=senti["neu"],
        pos=senti["pos"],
        compound=senti["compound"],
        cosine=cosine,
        ttr=diversity,
        nb_score=nb_score(document),
    )


def evaluate_run(
    generated: Sequence[str | Sequence[str]],
    reference: str | Sequence[str],
    labels: Sequence[str],
) -> EvalReport:
    """One metric row per system, measured against a shared reference.

    Each ``generated`` entry (and the reference) may be a single text or a
    list of texts; lists collapse into one newline-joined document, so ttr
    and the sentiment masses are per-document figures. The idf background
    is the collapsed reference plus every collapsed system document.
    """
    if len(generated) != len(labels):
        raise ValueError("generated and labels must have equal length")
    reference_doc = _collapse(reference)
    documents = [_collapse(g) for g in generated]
    background = documents + [reference_doc]
    rows = tuple(
        _metric_row(label, doc, reference_doc, background)
        for label, doc in zip(labels, documents)
    )
    return EvalReport(rows=rows)


def reference_row(reference: str | Sequence[str], label: str = "Original") -> EvalRow:
    """Metric row for the reference itself; self-similarity stays absent."""
    return _metric_row(label, _collapse(reference), None, ())
