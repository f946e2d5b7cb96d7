import math
import random

import numpy as np
import pytest

from speechqc.core import Language
from speechqc.metrics import (
    DcfParams,
    HashEmbeddingProvider,
    ScoredTrial,
    TokenizedText,
    TrialLabel,
    ZeroVariance,
    accuracy,
    bleu4,
    cider_d,
    corpus_stats,
    eer,
    embedding_similarity,
    meteor_lite,
    min_dcf,
    pearson,
    rouge_l,
    token_posterior,
    tokenize,
    load_trials,
)
from speechqc.metrics import _compatible
import oracles

VOCAB = ["the", "speech", "sounds", "clear", "noisy", "warm", "flat", "bright",
         "slow", "fast", "muffled", "crisp"]


def toks(*tokens):
    return TokenizedText(tokens=tokens)


def rand_tokens(rng, lo=1, hi=10):
    return tuple(rng.choice(VOCAB) for _ in range(rng.randint(lo, hi)))


# -- tokenization ----------------------------------------------------------

def test_tokenize_en_lowercase_and_punct():
    assert tokenize("The speech, sounds Clear!").tokens == ("the", "speech", "sounds", "clear")


def test_tokenize_character_level_cjk():
    assert tokenize("中文 语音", Language.ZH).tokens == ("中", "文", "语", "音")
    assert tokenize("とても 良い", Language.JA).tokens == ("と", "て", "も", "良", "い")


def test_tokenize_deterministic():
    text = "Une parole claire, naturelle."
    assert tokenize(text, Language.FR) == tokenize(text, Language.FR)


# -- BLEU ------------------------------------------------------------------

def test_bleu_identity():
    candidate = toks("a", "clear", "voice", "with", "warm", "tone")
    assert bleu4(candidate, [candidate]) == 1.0


def test_bleu_zero_overlap():
    assert bleu4(toks("x", "y", "z"), [toks("a", "b", "c")]) == 0.0


def test_bleu_fixture_matches_oracle():
    fixture = [
        (("the", "speech", "sounds", "clear", "today"),
         [("the", "speech", "sounds", "very", "clear"), ("speech", "sounds", "clear")]),
        (("noisy", "and", "flat"), [("noisy", "and", "warm")]),
        (("warm", "warm", "warm"), [("warm", "tone")]),
        (("a", "b", "c", "d", "e", "f"), [("a", "b", "c", "d", "e", "f")]),
        (("slow", "speech",), [("fast", "speech", "slow")]),
    ]
    for cand, refs in fixture:
        got = bleu4(TokenizedText(cand), [TokenizedText(r) for r in refs])
        expected = oracles.naive_bleu4(cand, refs)
        assert got == pytest.approx(expected, abs=1e-9)


def test_bleu_random_matches_oracle():
    rng = random.Random(11)
    for _ in range(100):
        cand = rand_tokens(rng)
        refs = [rand_tokens(rng) for _ in range(rng.randint(1, 3))]
        got = bleu4(TokenizedText(cand), [TokenizedText(r) for r in refs])
        assert got == pytest.approx(oracles.naive_bleu4(cand, refs), abs=1e-9)
        assert 0.0 <= got <= 1.0


def test_bleu_requires_reference():
    with pytest.raises(ValueError):
        bleu4(toks("a"), [])


# -- ROUGE-L ----------------------------------------------------------------

def test_rouge_identity_and_disjoint():
    same = toks("clear", "warm", "voice")
    assert rouge_l(same, same) == 1.0
    assert rouge_l(toks("x", "y"), toks("a", "b")) == 0.0


def test_rouge_random_matches_oracle():
    rng = random.Random(5)
    for _ in range(100):
        cand, ref = rand_tokens(rng), rand_tokens(rng)
        got = rouge_l(TokenizedText(cand), TokenizedText(ref))
        assert got == pytest.approx(oracles.naive_rouge_l(cand, ref), abs=1e-9)
        assert 0.0 <= got <= 1.0


# -- METEOR-lite -------------------------------------------------------------

def test_meteor_identity():
    candidate = toks("the", "voice", "is", "clear")
    assert meteor_lite(candidate, candidate) == 1.0


def test_meteor_empty_candidate():
    assert meteor_lite(toks(), toks("a")) == 0.0


def test_meteor_stem_stage_matches():
    # "sounds" and "sound" align through the stem stage.
    got = meteor_lite(toks("sound", "clear"), toks("sounds", "clear"))
    assert got > 0.9


def test_meteor_random_matches_oracle():
    rng = random.Random(7)
    for _ in range(100):
        cand, ref = rand_tokens(rng, 1, 8), rand_tokens(rng, 1, 8)
        got = meteor_lite(TokenizedText(cand), TokenizedText(ref))
        expected = oracles.naive_meteor(cand, ref, _compatible)
        assert got == pytest.approx(expected, abs=1e-9)
        assert 0.0 <= got <= 1.0


# -- CIDEr-D ------------------------------------------------------------------

def _stat_groups(rng, n_docs=6):
    return [[rand_tokens(rng)] for _ in range(n_docs)]


def test_cider_identity_is_maximal_for_corpus():
    rng = random.Random(3)
    groups = _stat_groups(rng)
    stats = corpus_stats([[TokenizedText(r) for r in g] for g in groups])
    ref = groups[0][0]
    self_score = cider_d(TokenizedText(ref), [TokenizedText(ref)], stats)
    for _ in range(20):
        other = rand_tokens(rng)
        assert cider_d(TokenizedText(other), [TokenizedText(ref)], stats) <= self_score + 1e-12


def test_cider_no_overlap_zero():
    groups = [[("a", "b")], [("c", "d")]]
    stats = corpus_stats([[TokenizedText(r) for r in g] for g in groups])
    assert cider_d(TokenizedText(("x", "y")), [TokenizedText(("a", "b"))], stats) == 0.0


def test_cider_fixture_matches_oracle():
    groups = [
        [("the", "speech", "is", "clear")],
        [("the", "speech", "is", "noisy")],
        [("warm", "bright", "tone")],
    ]
    stats = corpus_stats([[TokenizedText(r) for r in g] for g in groups])
    for cand, refs in [
        (("the", "speech", "is", "clear"), groups[0]),
        (("speech", "clear",), groups[0]),
        (("warm", "tone"), groups[2]),
    ]:
        got = cider_d(TokenizedText(cand), [TokenizedText(r) for r in refs], stats)
        expected = oracles.naive_cider_d(cand, refs, groups)
        assert got == pytest.approx(expected, abs=1e-9)


def test_cider_random_matches_oracle():
    rng = random.Random(19)
    for _ in range(100):
        groups = _stat_groups(rng, n_docs=rng.randint(2, 5))
        stats = corpus_stats([[TokenizedText(r) for r in g] for g in groups])
        cand = rand_tokens(rng)
        refs = rng.choice(groups)
        got = cider_d(TokenizedText(cand), [TokenizedText(r) for r in refs], stats)
        expected = oracles.naive_cider_d(cand, refs, groups)
        assert got == pytest.approx(expected, abs=1e-9)
        assert got >= 0.0


# -- embedding similarity -----------------------------------------------------

class StubProvider:
    dimension = 3

    def __init__(self, table):
        self.table = table

    def embed(self, text):
        return np.array(self.table[text], dtype=float)


def test_embedding_identity():
    provider = HashEmbeddingProvider()
    assert embedding_similarity("a warm clear voice", "a warm clear voice", provider) == pytest.approx(1.0, abs=1e-12)


def test_embedding_orthogonal_vectors():
    provider = StubProvider({"x": [1, 0, 0], "y": [0, 1, 0]})
    assert embedding_similarity("x", "y", provider) == 0.0


def test_embedding_matches_dot_product_oracle():
    provider = HashEmbeddingProvider(dimension=16)
    rng = random.Random(2)
    for _ in range(50):
        a = " ".join(rand_tokens(rng))
        b = " ".join(rand_tokens(rng))
        got = embedding_similarity(a, b, provider)
        va, vb = provider.embed(a), provider.embed(b)
        na = math.sqrt(sum(x * x for x in va))
        nb = math.sqrt(sum(x * x for x in vb))
        expected = 0.0 if na == 0 or nb == 0 else sum(x * y for x, y in zip(va, vb)) / (na * nb)
        assert got == pytest.approx(expected, abs=1e-9)
        assert -1.0 - 1e-9 <= got <= 1.0 + 1e-9


def test_embedding_provider_deterministic():
    provider = HashEmbeddingProvider()
    assert np.array_equal(provider.embed("warm tone"), provider.embed("warm tone"))


# -- pearson / accuracy -------------------------------------------------------

def test_pearson_perfect_correlations():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_pearson_zero_variance():
    with pytest.raises(ZeroVariance):
        pearson([1, 1, 1], [1, 2, 3])


def test_pearson_affine_invariance():
    rng = random.Random(4)
    for _ in range(50):
        xs = [rng.random() for _ in range(10)]
        ys = [rng.random() for _ in range(10)]
        base = pearson(xs, ys)
        a, b = rng.uniform(0.1, 5), rng.uniform(-3, 3)
        assert pearson(xs, [a * y + b for y in ys]) == pytest.approx(base, abs=1e-9)
        assert pearson(xs, [-a * y + b for y in ys]) == pytest.approx(-base, abs=1e-9)


def test_accuracy_counts():
    assert accuracy(["a", "b"], ["a", "b"]) == 1.0
    assert accuracy(["a", "b"], ["b", "a"]) == 0.0
    assert accuracy(["a", "b", None, "d"], ["a", "x", "c", "d"]) == 0.5


# -- token posterior ----------------------------------------------------------

def test_token_posterior_symmetry():
    assert token_posterior(0.0, 0.0) == 0.5


def test_token_posterior_closed_form():
    assert token_posterior(0.0, math.log(3.0)) == pytest.approx(0.75, abs=1e-12)


def test_token_posterior_no_overflow():
    assert token_posterior(1000.0, 1000.0) == 0.5
    assert token_posterior(-1000.0, 1000.0) == pytest.approx(1.0)


def test_token_posterior_shift_invariance():
    rng = random.Random(6)
    for _ in range(200):
        # Dyadic logits and integer shifts keep the additions exact, so
        # only the softmax arithmetic is being probed.
        zr = rng.randint(-8000, 8000) / 1024.0
        zf = rng.randint(-8000, 8000) / 1024.0
        base = token_posterior(zr, zf)
        for shift in (1.0, -17.0, 4096.0, 1e6, -1e6):
            assert token_posterior(zr + shift, zf + shift) == pytest.approx(base, abs=1e-12)


# -- EER / minDCF --------------------------------------------------------------

def trial(score, spoof):
    return ScoredTrial(score=score, label=TrialLabel.SPOOF if spoof else TrialLabel.BONAFIDE)


def test_eer_perfect_separation():
    trials = [trial(s, False) for s in (-3, -2, -1)] + [trial(s, True) for s in (1, 2, 3)]
    assert eer(trials) == 0.0


def test_eer_degenerate_equal_scores():
    trials = [trial(0.0, False), trial(0.0, True)]
    assert eer(trials) == pytest.approx(0.5)


def test_eer_label_swap_relation():
    rng = random.Random(8)
    for _ in range(50):
        trials = oracles.random_trials(rng, rng.randint(4, 30))
        swapped = [
            ScoredTrial(
                score=t.score,
                label=TrialLabel.BONAFIDE if t.label is TrialLabel.SPOOF else TrialLabel.SPOOF,
            )
            for t in trials
        ]
        assert eer(swapped) == pytest.approx(1.0 - eer(trials), abs=1e-9)


def test_eer_random_matches_oracle():
    rng = random.Random(9)
    for _ in range(100):
        trials = oracles.random_trials(rng, rng.randint(2, 50))
        got = eer(trials)
        assert got == pytest.approx(oracles.naive_eer(trials), abs=1e-9)
        assert 0.0 <= got <= 1.0


def test_min_dcf_perfect_separation():
    trials = [trial(-1, False), trial(-2, False), trial(1, True), trial(2, True)]
    assert min_dcf(trials) == 0.0


def test_min_dcf_bounded_by_trivial_system():
    rng = random.Random(10)
    for _ in range(50):
        trials = oracles.random_trials(rng, rng.randint(2, 40))
        assert min_dcf(trials) <= 1.0 + 1e-12


def test_min_dcf_random_matches_oracle():
    rng = random.Random(12)
    params = DcfParams()
    for _ in range(100):
        trials = oracles.random_trials(rng, rng.randint(2, 50))
        got = min_dcf(trials, params)
        expected = oracles.naive_min_dcf(
            trials, c_miss=params.c_miss, c_fa=params.c_fa, p_target=params.p_target
        )
        assert got == pytest.approx(expected, abs=1e-9)


def test_eer_min_dcf_monotone_transform_invariant():
    rng = random.Random(14)
    for _ in range(100):
        trials = oracles.random_trials(rng, rng.randint(4, 40))
        base_eer = eer(trials)
        base_dcf = min_dcf(trials)
        for transform in (lambda s: 3.0 * s + 2.0, lambda s: s**3):
            mapped = [ScoredTrial(score=transform(t.score), label=t.label) for t in trials]
            assert eer(mapped) == pytest.approx(base_eer, abs=1e-9)
            assert min_dcf(mapped) == pytest.approx(base_dcf, abs=1e-9)


def test_dcf_params_validation():
    with pytest.raises(ValueError):
        DcfParams(p_target=0.0)
    with pytest.raises(ValueError):
        DcfParams(c_miss=-1.0)
    with pytest.raises(ValueError):
        DcfParams(c_miss=0.0, c_fa=1.0)  # normalizer collapses to zero


def test_scored_trial_rejects_non_finite():
    with pytest.raises(ValueError):
        ScoredTrial(score=float("nan"), label=TrialLabel.SPOOF)


def test_eer_needs_both_labels():
    with pytest.raises(ValueError):
        eer([trial(1.0, True)])


def test_load_trials(tmp_path):
    import json

    path = tmp_path / "scores.jsonl"
    rows = [
        {"id": "t1", "score": 0.9, "label": "spoof"},
        {"id": "t2", "score": 0.1, "label": "bonafide"},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    trials = load_trials(path)
    assert [t.label for t in trials] == [TrialLabel.SPOOF, TrialLabel.BONAFIDE]
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "t3", "score": 0.5, "label": "other"}\n')
    with pytest.raises(ValueError):
        load_trials(bad)


def test_bounded_metrics_on_fuzzed_text():
    rng = random.Random(15)
    for _ in range(100):
        cand = TokenizedText(rand_tokens(rng, 0, 10))
        ref = TokenizedText(rand_tokens(rng, 0, 10))
        if ref.tokens:
            assert 0.0 <= bleu4(cand, [ref]) <= 1.0 + 1e-12
        assert 0.0 <= rouge_l(cand, ref) <= 1.0 + 1e-12
        assert 0.0 <= meteor_lite(cand, ref) <= 1.0 + 1e-12
