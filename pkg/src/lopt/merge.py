"""Position-aware overlap matching, concatenation, and the full split/tokenize/merge loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .chunking import ChunkPlan, default_chunk_len, default_overlap_len, double_chunk_len, split
from .engine import ChunkResult, ParallelEngine, WorkerPoolConfig, spans_to_array
from .tokenizers import Tokenizer, TokenSpan


class MergeError(ValueError):
    pass


class MatchFailedError(RuntimeError):
    """Raised only when sequential fallback is disabled and a boundary cannot be matched."""

    def __init__(self, stats: "LoptStats"):
        super().__init__(
            f"overlap match failed at chunk_len={stats.final_chunk_len} "
            f"after {stats.doublings} doublings (overlaps: {stats.overlaps})"
        )
        self.stats = stats


@dataclass(frozen=True)
class MatchResult:
    l: int
    r: int
    n_o: int
    # longest aligned run found, even when it was rejected
    run_len: int = 0
    run_chars: int = 0


@dataclass(frozen=True)
class MergeConfig:
    min_overlap_tokens: int = 2
    strict_min_chars: bool = False
    max_doublings: int = 4
    fallback: bool = True

    def __post_init__(self):
        if self.min_overlap_tokens < 1:
            raise ValueError("min_overlap_tokens must be >= 1")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be >= 0")


@dataclass
class LoptStats:
    doublings: int = 0
    fell_back: bool = False
    final_chunk_len: int = 0
    n_chunks: int = 0
    overlaps: List[int] = field(default_factory=list)


@dataclass
class LoptOutput:
    spans: np.ndarray  # (n, 3) int64: id, start, end in global coordinates
    stats: LoptStats

    @property
    def ids(self) -> List[int]:
        return self.spans[:, 0].tolist()

    @property
    def tokens(self) -> List[TokenSpan]:
        return [TokenSpan(*row) for row in self.spans.tolist()]

    def __len__(self) -> int:
        return len(self.spans)


def match_overlap(
    left: ChunkResult,
    right: ChunkResult,
    config: Optional[MergeConfig] = None,
    *,
    chunk_len: Optional[int] = None,
    max_token_char_len: Optional[int] = None,
) -> MatchResult:
    """Longest run of consecutive token pairs with identical global span and id.

    Only the region both chunks cover, ``[right.global_start, left end)``, is
    scanned, with two pointers over the start-sorted lists. Among runs of equal
    length the rightmost wins.
    """
    config = config or MergeConfig()
    ls, rs = left.global_start, right.global_start
    if rs <= ls or (chunk_len is not None and rs - ls != chunk_len):
        raise MergeError(
            f"chunk offset mismatch: right starts at {rs}, left at {ls}, chunk_len={chunk_len}"
        )
    if config.strict_min_chars and max_token_char_len is None:
        raise ValueError("strict_min_chars needs max_token_char_len")
    left_end = ls + left.length
    lo = int(np.searchsorted(left.spans[:, 1], rs - ls, side="left"))
    hi = int(np.searchsorted(right.spans[:, 2], left_end - rs, side="right"))
    L = (left.spans[lo:] + (0, ls, ls)).tolist()
    R = (right.spans[:hi] + (0, rs, rs)).tolist()

    i = j = 0
    run = best = 0
    run_i = run_j = best_i = best_j = 0
    while i < len(L) and j < len(R):
        a, b = L[i], R[j]
        if a[1] < b[1]:
            i += 1
            run = 0
        elif a[1] > b[1]:
            j += 1
            run = 0
        else:
            if a == b:
                if run == 0:
                    run_i, run_j = i, j
                run += 1
                if run >= best:
                    best, best_i, best_j = run, run_i, run_j
            else:
                run = 0
            i += 1
            j += 1

    chars = L[best_i + best - 1][2] - L[best_i][1] if best else 0
    ok = best >= config.min_overlap_tokens
    if ok and config.strict_min_chars:
        ok = chars > max_token_char_len
    return MatchResult(lo + best_i, best_j, best if ok else 0, best, chars)


def merge_all(results: Sequence[ChunkResult], matches: Sequence[MatchResult], plan: Optional[ChunkPlan] = None) -> np.ndarray:
    """Keep chunk 1 up to the end of its overlap run, chunk k from after the previous run
    to the end of its next run, and the last chunk from after its run; rebase to global."""
    if len(matches) != max(0, len(results) - 1):
        raise MergeError(f"{len(results)} chunk results need {len(results) - 1} matches, got {len(matches)}")
    if plan is not None and plan.n_chunks != len(results):
        raise MergeError("plan and results disagree on chunk count")
    parts = []
    lo = 0
    for k, res in enumerate(results):
        if k < len(matches):
            m = matches[k]
            if m.n_o == 0:
                raise MergeError(f"boundary {k + 1}/{k + 2} has no valid overlap; merge refused")
            hi = m.l + m.n_o
        else:
            hi = len(res.spans)
        if hi < lo:
            raise MergeError(f"overlap runs cross inside chunk {res.chunk_index}")
        g = res.global_start
        parts.append(res.spans[lo:hi] + (0, g, g))
        if k < len(matches):
            lo = matches[k].r + matches[k].n_o
    if not parts:
        return np.empty((0, 3), dtype=np.int64)
    return np.concatenate(parts)


def _runs_ordered(results: Sequence[ChunkResult], matches: Sequence[MatchResult]) -> bool:
    return all(matches[k].l + matches[k].n_o >= matches[k - 1].r + matches[k - 1].n_o for k in range(1, len(matches)))


def lopt_tokenize(
    text: str,
    tokenizer: Tokenizer,
    chunk_len: Optional[int] = None,
    overlap_len: Optional[int] = None,
    pool: Optional[WorkerPoolConfig] = None,
    merge_config: Optional[MergeConfig] = None,
    engine: Optional[ParallelEngine] = None,
) -> LoptOutput:
    """Tokenize ``text`` in parallel chunks; the result equals ``tokenizer.tokenize(text)``.

    On any failed boundary the chunk length is doubled and everything is
    re-split and re-tokenized; after ``max_doublings`` (or once one chunk
    would span the text) it falls back to sequential tokenization.
    """
    if engine is None:
        with ParallelEngine(tokenizer, pool) as eng:
            return lopt_tokenize(text, tokenizer, chunk_len, overlap_len, merge_config=merge_config, engine=eng)
    cfg = merge_config or MergeConfig()
    n = len(text)
    stats = LoptStats()
    if n == 0:
        return LoptOutput(np.empty((0, 3), dtype=np.int64), stats)
    maxlen = tokenizer.max_token_char_len
    L_o = overlap_len or default_overlap_len(maxlen)
    L_c = chunk_len or default_chunk_len(n, engine.pool.pool_size)
    while True:
        stats.final_chunk_len = L_c
        plan, chunks = split(text, L_c, L_o)
        stats.n_chunks = plan.n_chunks
        results = engine.map(chunks)
        matches = [
            match_overlap(results[k], results[k + 1], cfg, chunk_len=L_c, max_token_char_len=maxlen)
            for k in range(len(results) - 1)
        ]
        stats.overlaps = [m.n_o for m in matches]
        if all(m.n_o > 0 for m in matches) and _runs_ordered(results, matches):
            return LoptOutput(merge_all(results, matches, plan), stats)
        if stats.doublings >= cfg.max_doublings:
            break
        L_c, whole = double_chunk_len(L_c, n)
        stats.doublings += 1
        if whole and cfg.fallback:
            break
    if not cfg.fallback:
        raise MatchFailedError(stats)
    stats.fell_back = True
    stats.overlaps = []
    return LoptOutput(spans_to_array(tokenizer.tokenize(text)), stats)


class LoptTokenizer:
    """A tokenizer bound to a running worker pool, with fixed split/merge settings."""

    def __init__(
        self,
        tokenizer: Tokenizer,
        workers: int = 32,
        chunk_len: Optional[int] = None,
        overlap_len: Optional[int] = None,
        merge_config: Optional[MergeConfig] = None,
        backend: str = "process",
    ):
        self.tokenizer = tokenizer
        self.chunk_len = chunk_len
        self.overlap_len = overlap_len
        self.merge_config = merge_config or MergeConfig()
        self.engine = ParallelEngine(tokenizer, WorkerPoolConfig(workers, backend=backend))

    def __enter__(self) -> "LoptTokenizer":
        self.engine.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        self.engine.close()

    def tokenize(self, text: str, chunk_len: Optional[int] = None) -> LoptOutput:
        return lopt_tokenize(
            text,
            self.tokenizer,
            chunk_len or self.chunk_len,
            self.overlap_len,
            merge_config=self.merge_config,
            engine=self.engine,
        )
