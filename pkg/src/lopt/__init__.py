"""Lossless parallel tokenization: split into overlapping chunks, tokenize in
parallel, merge on character-position-aligned overlap tokens."""

from .chunking import Chunk, ChunkPlan, default_chunk_len, default_overlap_len, double_chunk_len, split
from .engine import ChunkResult, ParallelEngine, WorkerPoolConfig, tokenize_chunks_parallel
from .merge import (
    LoptOutput,
    LoptStats,
    LoptTokenizer,
    MatchFailedError,
    MatchResult,
    MergeConfig,
    MergeError,
    lopt_tokenize,
    match_overlap,
    merge_all,
)
from .tokenizers import (
    PreToken,
    Tokenizer,
    TokenizerConfig,
    TokenSpan,
    gen_random_tokenizer,
    pretokenize,
    random_bpe_tokenizer,
    tokenize,
    tokenize_bpe,
    tokenize_wordpiece,
)
from .vocab import MergeTable, Vocabulary, VocabError, load_bpe, load_wordpiece, toy_bpe, toy_wordpiece

__version__ = "0.1.0"
