"""Overlapping fixed-stride text split and the chunk-length policy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

DEFAULT_MIN_OVERLAP_CHARS = 64


@dataclass(frozen=True)
class ChunkPlan:
    chunk_len: int
    overlap_len: int
    n_chunks: int
    text_len: int


@dataclass(frozen=True)
class Chunk:
    index: int  # 1-based
    global_start: int
    text: str

    @property
    def global_end(self) -> int:
        return self.global_start + len(self.text)


def split(text: str, chunk_len: int, overlap_len: int) -> Tuple[ChunkPlan, List[Chunk]]:
    """Chunk ``i`` (1-based) is ``text[chunk_len*(i-1) : chunk_len*i + overlap_len]``.

    Empty trailing chunks are not emitted; empty text yields no chunks.
    """
    if chunk_len < 1 or overlap_len < 1:
        raise ValueError(f"chunk_len and overlap_len must be >= 1, got {chunk_len}, {overlap_len}")
    n = len(text)
    n_chunks = math.ceil(n / chunk_len)
    chunks = [
        Chunk(i + 1, i * chunk_len, text[i * chunk_len : (i + 1) * chunk_len + overlap_len])
        for i in range(n_chunks)
    ]
    return ChunkPlan(chunk_len, overlap_len, n_chunks, n), chunks


def default_chunk_len(text_len: int, workers: int) -> int:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return max(1, math.ceil(text_len / workers))


def default_overlap_len(max_token_char_len: int) -> int:
    return max(DEFAULT_MIN_OVERLAP_CHARS, 2 * max_token_char_len)


def double_chunk_len(chunk_len: int, text_len: int) -> Tuple[int, bool]:
    """Return the doubled chunk length and whether it now spans the whole text."""
    if chunk_len < 1:
        raise ValueError("chunk_len must be >= 1")
    new = min(2 * chunk_len, text_len)
    return new, new >= text_len
