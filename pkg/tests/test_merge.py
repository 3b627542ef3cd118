import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lopt import (
    ChunkResult,
    MatchFailedError,
    MatchResult,
    MergeConfig,
    MergeError,
    ParallelEngine,
    Tokenizer,
    TokenizerConfig,
    WorkerPoolConfig,
    lopt_tokenize,
    match_overlap,
    merge_all,
    random_bpe_tokenizer,
    split,
)
from lopt.engine import spans_to_array
from lopt.vocab import random_wordpiece_vocab

from oracles import brute_match, random_pair, random_text


def cr(index, start, length, spans):
    return ChunkResult(index, start, length, np.array(spans, dtype=np.int64).reshape(-1, 3))


LEFT = cr(1, 0, 6, [(11, 0, 3), (3, 3, 4), (12, 4, 6)])
RIGHT = cr(2, 4, 4, [(12, 0, 2), (5, 2, 4)])


def lrn(m):
    return (m.l, m.r, m.n_o)


def test_match_single_token():
    assert lrn(match_overlap(LEFT, RIGHT, MergeConfig(min_overlap_tokens=1), chunk_len=4)) == (2, 0, 1)


def test_match_below_threshold():
    m = match_overlap(LEFT, RIGHT, MergeConfig(min_overlap_tokens=2), chunk_len=4)
    assert m.n_o == 0 and m.run_len == 1


def test_match_end_misaligned():
    left = cr(1, 0, 6, [(9, 4, 6)])
    right = cr(2, 4, 4, [(3, 0, 1), (3, 1, 2)])
    assert match_overlap(left, right, MergeConfig(min_overlap_tokens=1)).n_o == 0


def test_match_requires_equal_ids():
    left = cr(1, 0, 6, [(9, 4, 5), (8, 5, 6)])
    right = cr(2, 4, 4, [(9, 0, 1), (7, 1, 2)])
    assert lrn(match_overlap(left, right, MergeConfig(min_overlap_tokens=1))) == (0, 0, 1)
    assert match_overlap(left, right, MergeConfig(min_overlap_tokens=2)).n_o == 0


def test_match_offset_precondition():
    with pytest.raises(MergeError, match="offset"):
        match_overlap(LEFT, RIGHT, MergeConfig(), chunk_len=3)
    with pytest.raises(MergeError):
        match_overlap(RIGHT, LEFT, MergeConfig())


def test_match_rightmost_on_ties():
    # two aligned single-token runs separated by a disagreement
    left = cr(1, 0, 10, [(1, 4, 5), (2, 5, 6), (3, 6, 7)])
    right = cr(2, 4, 6, [(1, 0, 1), (9, 1, 2), (3, 2, 3)])
    assert lrn(match_overlap(left, right, MergeConfig(min_overlap_tokens=1))) == (2, 2, 1)


def test_strict_chars():
    left = cr(1, 0, 10, [(1, 4, 5), (2, 5, 6)])
    right = cr(2, 4, 6, [(1, 0, 1), (2, 1, 2)])
    strict = MergeConfig(min_overlap_tokens=2, strict_min_chars=True)
    assert match_overlap(left, right, strict, max_token_char_len=1).n_o == 2
    assert match_overlap(left, right, strict, max_token_char_len=2).n_o == 0
    with pytest.raises(ValueError):
        match_overlap(left, right, strict)


def test_merge_two_chunks():
    # A B C | C' D with C == C' globally
    left = cr(1, 0, 6, [(1, 0, 2), (2, 2, 4), (3, 4, 6)])
    right = cr(2, 4, 4, [(3, 0, 2), (4, 2, 4)])
    out = merge_all([left, right], [MatchResult(2, 0, 1)])
    assert out.tolist() == [[1, 0, 2], [2, 2, 4], [3, 4, 6], [4, 6, 8]]


def test_merge_single_chunk_identity():
    only = cr(1, 0, 6, [(1, 0, 2), (2, 2, 6)])
    assert merge_all([only], []).tolist() == only.spans.tolist()
    assert merge_all([], []).shape == (0, 3)


def test_merge_refuses_failed_match():
    with pytest.raises(MergeError, match="no valid overlap"):
        merge_all([LEFT, RIGHT], [MatchResult(0, 0, 0)])
    with pytest.raises(MergeError):
        merge_all([LEFT, RIGHT], [])


def test_toy_three_chunks(toybpe):
    text = "abcabcabcabc"
    oracle = spans_to_array(toybpe.tokenize(text))
    plan, chunks = split(text, 4, 4)
    assert plan.n_chunks == 3
    results = [ChunkResult(c.index, c.global_start, len(c.text), spans_to_array(toybpe.tokenize(c.text))) for c in chunks]
    matches = [match_overlap(a, b, MergeConfig(), chunk_len=4) for a, b in zip(results, results[1:])]
    # chunk 2 starts mid-"abc", so at L_c=4 its pieces never line up with chunk 1's
    assert [m.n_o for m in matches] == [0, 0]
    with ParallelEngine(toybpe, WorkerPoolConfig(2, backend="thread")) as eng:
        out = lopt_tokenize(text, toybpe, 4, 4, engine=eng)
    assert np.array_equal(out.spans, oracle)
    assert out.stats.doublings >= 1


def test_toy_three_chunks_spaced(toybpe):
    text = "abc abc abc abc abc abc"
    oracle = spans_to_array(toybpe.tokenize(text))
    plan, chunks = split(text, 8, 8)
    results = [ChunkResult(c.index, c.global_start, len(c.text), spans_to_array(toybpe.tokenize(c.text))) for c in chunks]
    matches = [match_overlap(a, b, MergeConfig(), chunk_len=8) for a, b in zip(results, results[1:])]
    assert all(m.n_o >= 2 for m in matches)
    assert np.array_equal(merge_all(results, matches, plan), oracle)


def thread_engine(tok, m=4):
    return ParallelEngine(tok, WorkerPoolConfig(m, backend="thread"))


def test_lopt_single_chunk(toybpe):
    with thread_engine(toybpe, 1) as eng:
        out = lopt_tokenize("abc de abd", toybpe, engine=eng)
    assert out.tokens == toybpe.tokenize("abc de abd")
    assert out.stats.doublings == 0 and not out.stats.fell_back and out.stats.n_chunks == 1


def test_lopt_empty(toybpe):
    out = lopt_tokenize("", toybpe, pool=WorkerPoolConfig(2, backend="thread"))
    assert len(out) == 0 and out.tokens == []


def find_doubling_case():
    """Search seeded random cases for one whose first split fails a boundary."""
    for seed in range(500):
        rng = random.Random(seed)
        tok = random_bpe_tokenizer(seed, 3, 30)
        text = random_text(rng, "abc", 400, extra=" ")
        with thread_engine(tok) as eng:
            out = lopt_tokenize(text, tok, 40, 8, engine=eng)
        if out.stats.doublings >= 1 and not out.stats.fell_back:
            return tok, text, out
    raise AssertionError("no doubling case found")


def test_lopt_recovers_by_doubling():
    tok, text, out = find_doubling_case()
    assert out.stats.doublings >= 1
    assert out.stats.final_chunk_len > 40
    assert np.array_equal(out.spans, spans_to_array(tok.tokenize(text)))


def test_lopt_fallback_and_failure_reporting():
    tok, text, _ = find_doubling_case()
    with thread_engine(tok) as eng:
        fb = lopt_tokenize(text, tok, 40, 8, merge_config=MergeConfig(max_doublings=0), engine=eng)
        assert fb.stats.fell_back
        assert np.array_equal(fb.spans, spans_to_array(tok.tokenize(text)))
        with pytest.raises(MatchFailedError) as info:
            lopt_tokenize(text, tok, 40, 8, merge_config=MergeConfig(max_doublings=0, fallback=False), engine=eng)
    assert 0 in info.value.stats.overlaps


def test_lopt_overlap_longer_than_chunk(toybpe):
    text = "abc de " * 40
    with thread_engine(toybpe) as eng:
        out = lopt_tokenize(text, toybpe, 5, 30, engine=eng)
    assert np.array_equal(out.spans, spans_to_array(toybpe.tokenize(text)))


# ---- properties -----------------------------------------------------------


def check_against_oracle(left, right, min_tokens):
    m = match_overlap(left, right, MergeConfig(min_overlap_tokens=min_tokens))
    lg = (left.spans + (0, left.global_start, left.global_start)).tolist()
    rg = (right.spans + (0, right.global_start, right.global_start)).tolist()
    i, j, k = brute_match(lg, rg, right.global_start, left.global_start + left.length, min_tokens)
    assert m.n_o == k
    if k:
        assert (m.l, m.r) == (i, j)
        for d in range(k):
            assert lg[m.l + d] == rg[m.r + d]
    return m


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_match_equals_bruteforce(seed, min_tokens):
    pair = random_pair(random.Random(seed))
    if pair is not None:
        check_against_oracle(*pair, min_tokens)


@given(seed=st.integers(0, 10**6), n=st.integers(0, 1500), workers=st.sampled_from([2, 3, 8, 32]), lo=st.sampled_from([None, 4, 16]))
def test_lossless_bpe(seed, n, workers, lo):
    rng = random.Random(seed)
    tok = random_bpe_tokenizer(seed, rng.randint(2, 8), rng.randint(0, 60), pretokenizer=rng.choice(["whitespace", "none"]))
    text = random_text(rng, "abcdefgh"[: rng.randint(2, 8)], n)
    with thread_engine(tok, workers) as eng:
        out = lopt_tokenize(text, tok, overlap_len=lo, engine=eng)
    assert np.array_equal(out.spans, spans_to_array(tok.tokenize(text)))


@given(seed=st.integers(0, 10**6), n=st.integers(0, 1500), workers=st.sampled_from([2, 8, 32]))
def test_lossless_wordpiece(seed, n, workers):
    rng = random.Random(seed)
    vocab = random_wordpiece_vocab(seed, rng.randint(2, 6), rng.randint(0, 40))
    tok = Tokenizer(vocab, TokenizerConfig(algorithm="wordpiece", pretokenizer=rng.choice(["whitespace", "punct"]), whole_word_unk=rng.random() < 0.7))
    text = random_text(rng, "abcdef"[: rng.randint(2, 6)], n)
    with thread_engine(tok, workers) as eng:
        out = lopt_tokenize(text, tok, engine=eng)
    assert np.array_equal(out.spans, spans_to_array(tok.tokenize(text)))


@given(seed=st.integers(0, 10**6), n=st.integers(0, 1500))
def test_strict_precondition_alone_is_lossless(seed, n):
    rng = random.Random(seed)
    tok = random_bpe_tokenizer(seed, rng.randint(2, 8), rng.randint(0, 60), pretokenizer=rng.choice(["whitespace", "none"]))
    text = random_text(rng, "abcdefgh"[: rng.randint(2, 8)], n)
    cfg = MergeConfig(strict_min_chars=True, max_doublings=0, fallback=False)
    with thread_engine(tok, 8) as eng:
        try:
            out = lopt_tokenize(text, tok, overlap_len=rng.choice([None, 8, 24]), merge_config=cfg, engine=eng)
        except MatchFailedError:
            return
    assert np.array_equal(out.spans, spans_to_array(tok.tokenize(text)))
