"""Quantitative evaluation metrics.

Text overlap metrics (BLEU-4, ROUGE-L, a lite METEOR, CIDEr-D, embedding
cosine), dimension extraction metrics (Pearson correlation, accuracy), and
detection metrics (token posterior, EER, minDCF). All functions are pure;
corpus statistics are built once and read-shared.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Protocol, Sequence

import numpy as np

from .core import Language

_WORD_RE = re.compile(r"\w+", re.UNICODE)

# Character-level tokens for languages written without spaces.
_CHAR_LEVEL = frozenset({Language.ZH, Language.JA})


@dataclass(frozen=True)
class TokenizedText:
    tokens: tuple[str, ...]
    language: Language = Language.EN


def tokenize(text: str, language: Language = Language.EN) -> TokenizedText:
    """Deterministic tokenization: lowercase word split for en/fr,
    character-level for zh/ja."""
    lowered = text.lower()
    if language in _CHAR_LEVEL:
        tokens = tuple(ch for ch in lowered if not ch.isspace())
    else:
        tokens = tuple(_WORD_RE.findall(lowered))
    return TokenizedText(tokens=tokens, language=language)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(
    candidate: TokenizedText, references: Sequence[TokenizedText], max_n: int = 4
) -> float:
    """Sentence BLEU with n up to 4, add-one smoothing on the n>1 precisions,
    and the standard brevity penalty against the closest reference length.

    Unigram precision is left unsmoothed, so zero token overlap scores
    exactly 0. Orders longer than the candidate contribute a neutral
    smoothed precision of 1.
    """
    if not references:
        raise ValueError("bleu4 requires at least one reference")
    cand = candidate.tokens
    if not cand:
        return 0.0

    log_precision_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(cand, n)
        total = max(len(cand) - n + 1, 0)
        max_ref_counts: Counter = Counter()
        for ref in references:
            for gram, count in _ngram_counts(ref.tokens, n).items():
                max_ref_counts[gram] = max(max_ref_counts[gram], count)
        matches = sum(
            min(count, max_ref_counts[gram]) for gram, count in cand_counts.items()
        )
        if n == 1:
            if matches == 0:
                return 0.0
            precision = matches / total
        else:
            precision = (matches + 1) / (total + 1)
        log_precision_sum += math.log(precision) / max_n

    cand_len = len(cand)
    ref_len = min(
        (abs(len(r.tokens) - cand_len), len(r.tokens)) for r in references
    )[1]
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_precision_sum)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: TokenizedText, reference: TokenizedText, beta: float = 1.2) -> float:
    """LCS-based F-measure with beta = 1.2 (recall-weighted)."""
    cand, ref = candidate.tokens, reference.tokens
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return (1 + beta**2) * precision * recall / (recall + beta**2 * precision)


_STEM_SUFFIXES = ("ing", "ed", "es", "ly", "s")


def _stem(token: str) -> str:
    """Crude suffix stripper for the stem-match stage (English-oriented)."""
    for suffix in _STEM_SUFFIXES:
        if suffix == "s" and token.endswith("ss"):
            continue
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def _compatible(a: str, b: str) -> bool:
    return a == b or _stem(a) == _stem(b)


_EXACT_ALIGN_LIMIT = 14


def _align_exact(cand: Sequence[str], ref: Sequence[str]) -> tuple[int, int]:
    """Optimal alignment: maximum matches, then minimum chunks.

    A chunk breaks whenever a matched pair (i, j) does not directly extend
    the pair (i-1, j-1). Memoized search over (position, used mask, last
    matched reference index); only usable for short references.
    """
    compat = [
        tuple(j for j, r in enumerate(ref) if _compatible(c, r)) for c in cand
    ]
    memo: dict[tuple[int, int, int], tuple[int, int]] = {}

    def best(i: int, mask: int, last: int) -> tuple[int, int]:
        # Returns (matches, -chunks) for the candidate suffix starting at i.
        # last = -2 marks "no adjacent previous match" (start or after a skip).
        if i == len(cand):
            return (0, 0)
        key = (i, mask, last)
        cached = memo.get(key)
        if cached is not None:
            return cached
        result = best(i + 1, mask, -2)
        for j in compat[i]:
            bit = 1 << j
            if mask & bit:
                continue
            new_chunk = 0 if j == last + 1 else 1
            matches, neg_chunks = best(i + 1, mask | bit, j)
            outcome = (matches + 1, neg_chunks - new_chunk)
            if outcome > result:
                result = outcome
        memo[key] = result
        return result

    matches, neg_chunks = best(0, 0, -2)
    return matches, -neg_chunks


def _align_greedy(cand: Sequence[str], ref: Sequence[str]) -> tuple[int, int]:
    """Two-stage greedy alignment for long inputs: exact matches first, then
    stem matches, each preferring the reference position that extends the
    previous chunk."""
    mapping: dict[int, int] = {}
    used: set[int] = set()
    for stage_match in (lambda a, b: a == b, _compatible):
        last = -1
        for i, token in enumerate(cand):
            if i in mapping:
                last = mapping[i]
                continue
            choices = [
                j
                for j, r in enumerate(ref)
                if j not in used and stage_match(token, r)
            ]
            if not choices:
                last = -1
                continue
            j = last + 1 if last + 1 in choices else choices[0]
            mapping[i] = j
            used.add(j)
            last = j
    matches = len(mapping)
    chunks = 0
    previous: Optional[tuple[int, int]] = None
    for i in sorted(mapping):
        if previous is None or not (i == previous[0] + 1 and mapping[i] == previous[1] + 1):
            chunks += 1
        previous = (i, mapping[i])
    return matches, chunks


def meteor_lite(
    candidate: TokenizedText,
    reference: TokenizedText,
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    """Unigram harmonic-mean metric with a fragmentation penalty.

    Matching uses exact and stem stages only. The penalty is
    gamma * ((chunks - 1) / matches) ** beta, so a perfectly contiguous
    alignment is not penalized and identical texts score exactly 1.
    Alignments are optimal (max matches, then min chunks) for references up
    to 14 tokens and greedy beyond that.
    """
    cand, ref = candidate.tokens, reference.tokens
    if not cand or not ref:
        return 0.0
    if len(ref) <= _EXACT_ALIGN_LIMIT and len(cand) <= 4 * _EXACT_ALIGN_LIMIT:
        matches, chunks = _align_exact(cand, ref)
    else:
        matches, chunks = _align_greedy(cand, ref)
    if matches == 0:
        return 0.0
    precision = matches / len(cand)
    recall = matches / len(ref)
    f_mean = precision * recall / (alpha * precision + (1 - alpha) * recall)
    penalty = gamma * ((chunks - 1) / matches) ** beta
    return f_mean * (1 - penalty)


@dataclass(frozen=True)
class CorpusStats:
    """Document frequencies over the evaluation set's reference groups."""

    num_docs: int
    document_frequency: Mapping[tuple, int]


def corpus_stats(
    reference_groups: Sequence[Sequence[TokenizedText]], max_n: int = 4
) -> CorpusStats:
    df: Counter = Counter()
    for references in reference_groups:
        grams: set = set()
        for ref in references:
            for n in range(1, max_n + 1):
                grams.update(_ngram_counts(ref.tokens, n))
        df.update(grams)
    return CorpusStats(num_docs=len(reference_groups), document_frequency=dict(df))


def cider_d(
    candidate: TokenizedText,
    references: Sequence[TokenizedText],
    stats: CorpusStats,
    max_n: int = 4,
    sigma: float = 6.0,
) -> float:
    """TF-IDF n-gram cosine (n = 1..4) with clipped candidate counts and a
    gaussian length penalty (sigma = 6), averaged over references and orders,
    scaled by 10."""
    if not references:
        raise ValueError("cider_d requires at least one reference")
    log_docs = math.log(max(stats.num_docs, 1))

    def tfidf(tokens: Sequence[str]) -> tuple[list[dict], list[float]]:
        vectors: list[dict] = []
        norms: list[float] = []
        for n in range(1, max_n + 1):
            vec = {}
            norm_sq = 0.0
            for gram, count in _ngram_counts(tokens, n).items():
                idf = log_docs - math.log(max(stats.document_frequency.get(gram, 0), 1))
                weight = count * idf
                vec[gram] = weight
                norm_sq += weight * weight
            vectors.append(vec)
            norms.append(math.sqrt(norm_sq))
        return vectors, norms

    cand_vecs, cand_norms = tfidf(candidate.tokens)
    total = 0.0
    for reference in references:
        ref_vecs, ref_norms = tfidf(reference.tokens)
        delta = float(len(candidate.tokens) - len(reference.tokens))
        length_penalty = math.exp(-(delta**2) / (2 * sigma**2))
        for n in range(max_n):
            value = sum(
                min(weight, ref_vecs[n].get(gram, 0.0)) * ref_vecs[n].get(gram, 0.0)
                for gram, weight in cand_vecs[n].items()
            )
            if cand_norms[n] != 0.0 and ref_norms[n] != 0.0:
                value /= cand_norms[n] * ref_norms[n]
            total += value * length_penalty / max_n
    return 10.0 * total / len(references)


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


class HashEmbeddingProvider:
    """Deterministic test provider: signed hashed bag-of-words projection.

    Reproducible across processes (sha256, not the salted builtin hash);
    stands in for sentence-embedding models in offline runs.
    """

    def __init__(self, dimension: int = 64, language: Language = Language.EN):
        self.dimension = dimension
        self.language = language

    def embed(self, text: str) -> np.ndarray:
        import hashlib

        vector = np.zeros(self.dimension)
        for token in tokenize(text, self.language).tokens:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            index = int.from_bytes(digest[:8], "big") % self.dimension
            sign = 1.0 if digest[8] & 1 else -1.0
            vector[index] += sign
        return vector


def embedding_similarity(
    candidate: str, reference: str, provider: EmbeddingProvider
) -> float:
    """Cosine of provider embeddings; 0.0 when either vector is zero."""
    a = provider.embed(candidate)
    b = provider.embed(reference)
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))


class ZeroVariance(ValueError):
    """Pearson correlation is undefined for a constant vector."""


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("pearson requires at least 2 points")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    var_x = float(np.dot(dx, dx))
    var_y = float(np.dot(dy, dy))
    if var_x == 0.0 or var_y == 0.0:
        raise ZeroVariance("constant input vector")
    return float(np.dot(dx, dy) / math.sqrt(var_x * var_y))


def accuracy(preds: Sequence, golds: Sequence) -> float:
    """Exact-match rate; None (invalid/no-verdict) predictions count as wrong."""
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} vs {len(golds)}")
    if not golds:
        return 0.0
    correct = sum(1 for p, g in zip(preds, golds) if p is not None and p == g)
    return correct / len(golds)


def token_posterior(logit_real: float, logit_fake: float) -> float:
    """p(fake) from a two-way softmax over the key-token logits,
    computed overflow-safely via max subtraction."""
    shift = max(logit_real, logit_fake)
    exp_fake = math.exp(logit_fake - shift)
    exp_real = math.exp(logit_real - shift)
    return exp_fake / (exp_fake + exp_real)


class TrialLabel(str, Enum):
    BONAFIDE = "bonafide"
    SPOOF = "spoof"


@dataclass(frozen=True)
class ScoredTrial:
    """One detection trial. Higher score means more likely spoofed."""

    score: float
    label: TrialLabel

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"trial score must be finite, got {self.score}")


@dataclass(frozen=True)
class DcfParams:
    """Detection cost parameters. Defaults follow common anti-spoofing
    protocol practice and are fully configurable."""

    c_miss: float = 1.0
    c_fa: float = 10.0
    p_target: float = 0.05

    def __post_init__(self):
        if self.c_miss < 0 or self.c_fa < 0:
            raise ValueError("costs must be non-negative")
        if not 0.0 < self.p_target < 1.0:
            raise ValueError("p_target must lie in (0, 1)")
        if self.normalizer <= 0.0:
            raise ValueError("normalization denominator must be positive")

    @property
    def normalizer(self) -> float:
        return min(self.c_miss * self.p_target, self.c_fa * (1.0 - self.p_target))


def _partition_scores(trials: Sequence[ScoredTrial]) -> tuple[np.ndarray, np.ndarray]:
    spoof = np.sort([t.score for t in trials if t.label is TrialLabel.SPOOF])
    bona = np.sort([t.score for t in trials if t.label is TrialLabel.BONAFIDE])
    if len(spoof) == 0 or len(bona) == 0:
        raise ValueError("need at least one trial of each label")
    return spoof, bona


def eer(trials: Sequence[ScoredTrial]) -> float:
    """Equal error rate, linearly interpolated at the P_miss = P_fa crossing
    of the threshold sweep over sorted unique scores.

    Decisions are 'spoof' at or above the threshold, so P_miss rises and
    P_fa falls as the threshold sweeps upward. Degenerate all-equal scores
    land at 0.5 by the interpolation rule.
    """
    spoof, bona = _partition_scores(trials)
    thresholds = np.unique(np.concatenate([spoof, bona]))
    # Operating point just above each unique score, prefixed by the
    # all-accept point below every score.
    p_miss = np.concatenate(
        [[0.0], np.searchsorted(spoof, thresholds, side="right") / len(spoof)]
    )
    p_fa = np.concatenate(
        [[1.0], 1.0 - np.searchsorted(bona, thresholds, side="right") / len(bona)]
    )
    return interpolate_eer(p_miss, p_fa)


def interpolate_eer(p_miss: np.ndarray, p_fa: np.ndarray) -> float:
    """Shared crossing rule: first index where P_miss >= P_fa, linear
    interpolation on the segment entering the crossing."""
    diff = p_miss - p_fa
    index = int(np.flatnonzero(diff >= 0)[0])
    if diff[index] == 0.0:
        return float(p_miss[index])
    m1, f1 = float(p_miss[index - 1]), float(p_fa[index - 1])
    m2, f2 = float(p_miss[index]), float(p_fa[index])
    t = (f1 - m1) / ((f1 - m1) + (m2 - f2))
    return m1 + t * (m2 - m1)


def min_dcf(trials: Sequence[ScoredTrial], params: DcfParams = DcfParams()) -> float:
    """Minimum normalized detection cost over all decision thresholds.

    Thresholds are the midpoints between consecutive sorted unique scores
    plus the two infinities; cost is
    c_miss * P_miss * p_target + c_fa * P_fa * (1 - p_target), normalized by
    the best trivial system min(c_miss * p_target, c_fa * (1 - p_target)).
    """
    spoof, bona = _partition_scores(trials)
    unique = np.unique(np.concatenate([spoof, bona]))
    midpoints = (unique[:-1] + unique[1:]) / 2.0
    thresholds = np.concatenate([[-np.inf], midpoints, [np.inf]])
    p_miss = np.searchsorted(spoof, thresholds, side="left") / len(spoof)
    p_fa = 1.0 - np.searchsorted(bona, thresholds, side="left") / len(bona)
    costs = (
        params.c_miss * p_miss * params.p_target
        + params.c_fa * p_fa * (1.0 - params.p_target)
    )
    return float(np.min(costs)) / params.normalizer


def load_trials(path: str | Path) -> list[ScoredTrial]:
    """Read a JSON-lines score file: one {id, score, label} object per line."""
    trials = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            try:
                trials.append(
                    ScoredTrial(
                        score=float(record["score"]),
                        label=TrialLabel(record["label"]),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"line {lineno}: bad trial record: {exc}") from exc
    return trials
