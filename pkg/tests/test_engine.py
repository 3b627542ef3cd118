import os
import random
import time
from dataclasses import dataclass

import numpy as np
import pytest

from lopt import ParallelEngine, Tokenizer, WorkerPoolConfig, random_bpe_tokenizer, split, tokenize_chunks_parallel
from lopt.engine import ChunkTokenizationError, spans_to_array

from oracles import random_text


@pytest.fixture(scope="module")
def tok():
    return random_bpe_tokenizer(11, 8, 60)


@pytest.fixture(scope="module")
def chunks():
    text = random_text(random.Random(5), "abcdefgh", 3000)
    return split(text, 1000, 64)[1]


def serial(tok, chunks):
    return [spans_to_array(tok.tokenize(c.text)) for c in chunks]


def same(results, expected):
    return len(results) == len(expected) and all(np.array_equal(r.spans, e) for r, e in zip(results, expected))


def test_pool_of_one_is_serial(tok, chunks):
    assert len(chunks) == 3
    out = tokenize_chunks_parallel(chunks, tok, WorkerPoolConfig(1, backend="thread"))
    assert same(out, serial(tok, chunks))
    assert [r.chunk_index for r in out] == [1, 2, 3]
    assert [r.global_start for r in out] == [0, 1000, 2000]


@pytest.mark.parametrize("backend", ["thread", "process"])
def test_pool_size_does_not_change_output(tok, chunks, backend):
    one = tokenize_chunks_parallel(chunks, tok, WorkerPoolConfig(1, backend=backend))
    eight = tokenize_chunks_parallel(chunks, tok, WorkerPoolConfig(8, backend=backend))
    assert same(one, serial(tok, chunks))
    assert same(eight, serial(tok, chunks))


def test_engine_reuse_and_tokens_view(tok, chunks):
    with ParallelEngine(tok, WorkerPoolConfig(2)) as eng:
        a = eng.map(chunks)
        b = tokenize_chunks_parallel(chunks, tok, engine=eng)
    assert same(a, serial(tok, chunks)) and same(b, serial(tok, chunks))
    assert a[0].tokens == tok.tokenize(chunks[0].text)


def test_engine_rejects_other_tokenizer(tok, chunks):
    other = random_bpe_tokenizer(12, 8, 60)
    with ParallelEngine(tok, WorkerPoolConfig(1, backend="thread")) as eng:
        with pytest.raises(ValueError):
            tokenize_chunks_parallel(chunks, other, engine=eng)


@dataclass(frozen=True)
class Exploding(Tokenizer):
    def tokenize(self, text):
        if "!" in text:
            raise RuntimeError("boom")
        return super().tokenize(text)


def test_worker_failure_names_chunk(tok):
    bad = Exploding(tok.vocab, tok.config, tok.merges)
    _, chunks = split("aaaa" * 10 + "!" + "bbbb" * 10, 20, 4)
    with pytest.raises(ChunkTokenizationError) as info:
        tokenize_chunks_parallel(chunks, bad, WorkerPoolConfig(4, backend="thread"))
    assert info.value.chunk_index == 2
    assert "chunk 2" in str(info.value)


def test_config_validation():
    with pytest.raises(ValueError):
        WorkerPoolConfig(0)
    with pytest.raises(ValueError):
        WorkerPoolConfig(2, backend="gpu")


@pytest.mark.slow
@pytest.mark.skipif((os.cpu_count() or 1) < 8, reason="needs an 8-core host")
def test_parallel_speedup_on_8_cores(tok):
    text = random_text(random.Random(1), "abcdefgh", 1_000_000)
    _, chunks = split(text, len(text) // 64, 64)
    timings = {}
    for m in (1, 8):
        with ParallelEngine(tok, WorkerPoolConfig(m)) as eng:
            eng.map(chunks)
            t0 = time.perf_counter()
            eng.map(chunks)
            timings[m] = time.perf_counter() - t0
    assert timings[8] / timings[1] < 0.5
