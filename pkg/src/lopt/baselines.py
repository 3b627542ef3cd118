"""Prior-art parallel tokenizers used as comparators.

Neither is lossless: the delimiter split concatenates chunk results as-is,
and the LCS merge aligns chunks by token ids alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .chunking import Chunk, default_chunk_len, split
from .engine import ParallelEngine, WorkerPoolConfig
from .tokenizers import Tokenizer, TokenSpan

DELIMITERS = {"space": " ", "comma": ",", "period": "."}


@dataclass(frozen=True)
class DelimiterConfig:
    delimiter: str = " "
    target_chunk_len: int = 4096

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ValueError("delimiter must be a single character")
        if self.target_chunk_len < 1:
            raise ValueError("target_chunk_len must be >= 1")


@dataclass(frozen=True)
class LcsConfig:
    overlap_len: int = 64
    # extra tokens searched beyond those touching the overlap region
    slack: int = 8

    def __post_init__(self):
        if self.overlap_len < 1 or self.slack < 0:
            raise ValueError("overlap_len must be >= 1 and slack >= 0")


def delimiter_split(text: str, config: DelimiterConfig) -> List[Chunk]:
    """Cut at the first delimiter at or after each next multiple of the target length.

    The delimiter starts the following chunk. Chunks do not overlap.
    """
    step = config.target_chunk_len
    chunks = []
    start = 0
    n = len(text)
    while start < n:
        target = (start // step + 1) * step
        cut = text.find(config.delimiter, target) if target < n else -1
        if cut == -1:
            cut = n
        chunks.append(Chunk(len(chunks) + 1, start, text[start:cut]))
        start = cut
    return chunks


def delimiter_tokenize_parallel(
    text: str,
    tokenizer: Tokenizer,
    config: DelimiterConfig,
    pool: Optional[WorkerPoolConfig] = None,
    engine: Optional[ParallelEngine] = None,
) -> np.ndarray:
    """Returns an ``(n, 3)`` array of (id, start, end) in global coordinates."""
    if engine is None:
        with ParallelEngine(tokenizer, pool) as eng:
            return delimiter_tokenize_parallel(text, tokenizer, config, engine=eng)
    chunks = delimiter_split(text, config)
    if not chunks:
        return np.empty((0, 3), dtype=np.int64)
    results = engine.map(chunks)
    return np.concatenate([r.spans + (0, r.global_start, r.global_start) for r in results])


def _longest_common_run(a: Sequence[int], b: Sequence[int]) -> Tuple[int, int, int]:
    """(i, j, k): ``a[i:i+k] == b[j:j+k]`` with k maximal; first found on ties."""
    best = (0, 0, 0)
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                k = prev[j - 1] + 1
                cur[j] = k
                if k > best[2]:
                    best = (i - k, j - k, k)
        prev = cur
    return best


def _lcs_cut(left: Sequence[TokenSpan], right: Sequence[TokenSpan], config: LcsConfig) -> Optional[Tuple[int, int]]:
    """Index to keep left up to, and index to resume right from; None if no common run."""
    if not left or not right:
        return None
    left_end = left[-1][2]
    tail = 0
    while tail < len(left) and left[tail][2] <= left_end - config.overlap_len:
        tail += 1
    tail = max(0, tail - config.slack)
    head = 0
    while head < len(right) and right[head][1] < config.overlap_len:
        head += 1
    head = min(len(right), head + config.slack)
    i, j, k = _longest_common_run([t[0] for t in left[tail:]], [t[0] for t in right[:head]])
    if k == 0:
        return None
    return tail + i + k, j + k


def lcs_overlap_merge(left_tokens: Sequence[TokenSpan], right_tokens: Sequence[TokenSpan], config: LcsConfig) -> List[int]:
    cut = _lcs_cut(left_tokens, right_tokens, config)
    left_ids = [t[0] for t in left_tokens]
    right_ids = [t[0] for t in right_tokens]
    if cut is None:
        return left_ids + right_ids
    return left_ids[: cut[0]] + right_ids[cut[1]:]


def lcs_tokenize_parallel(
    text: str,
    tokenizer: Tokenizer,
    chunk_len: Optional[int] = None,
    overlap_len: int = 64,
    pool: Optional[WorkerPoolConfig] = None,
    config: Optional[LcsConfig] = None,
    engine: Optional[ParallelEngine] = None,
) -> List[int]:
    if engine is None:
        with ParallelEngine(tokenizer, pool) as eng:
            return lcs_tokenize_parallel(text, tokenizer, chunk_len, overlap_len, config=config, engine=eng)
    if not text:
        return []
    config = config or LcsConfig(overlap_len=overlap_len)
    chunk_len = chunk_len or default_chunk_len(len(text), engine.pool.pool_size)
    _, chunks = split(text, chunk_len, overlap_len)
    lists = [r.spans.tolist() for r in engine.map(chunks)]
    out: List[int] = []
    start = 0
    for k in range(len(lists)):
        cur = lists[k]
        if k + 1 < len(lists):
            cut = _lcs_cut(cur, lists[k + 1], config)
            if cut is None:
                out.extend(t[0] for t in cur[start:])
                start = 0
            else:
                out.extend(t[0] for t in cur[start : cut[0]])
                start = cut[1]
        else:
            out.extend(t[0] for t in cur[start:])
    return out
