"""Fixed-size worker pool that tokenizes chunks concurrently, results in chunk order."""

from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .chunking import Chunk
from .tokenizers import Tokenizer, TokenSpan

DEFAULT_POOL_SIZE = 32


class ChunkTokenizationError(RuntimeError):
    def __init__(self, chunk_index: int, cause: BaseException):
        super().__init__(f"tokenizing chunk {chunk_index} failed: {cause!r}")
        self.chunk_index = chunk_index


@dataclass(frozen=True)
class WorkerPoolConfig:
    pool_size: int = DEFAULT_POOL_SIZE
    backend: str = "process"  # "process" | "thread"
    queue_policy: str = "fifo"

    def __post_init__(self):
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if self.backend not in ("process", "thread"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.queue_policy != "fifo":
            raise ValueError(f"unsupported queue policy {self.queue_policy!r}")


@dataclass(frozen=True)
class ChunkResult:
    """Tokens of one chunk as an ``(n, 3)`` int64 array of (id, start, end), chunk-local."""

    chunk_index: int
    global_start: int
    length: int
    spans: np.ndarray

    @property
    def tokens(self) -> List[TokenSpan]:
        return [TokenSpan(*row) for row in self.spans.tolist()]

    def __len__(self) -> int:
        return len(self.spans)


def spans_to_array(tokens: Sequence[TokenSpan]) -> np.ndarray:
    return np.array(tokens, dtype=np.int64).reshape(-1, 3)


_worker_tokenizer: Optional[Tokenizer] = None


def _init_worker(tokenizer: Tokenizer) -> None:
    global _worker_tokenizer
    _worker_tokenizer = tokenizer


def _tokenize_in_worker(text: str) -> np.ndarray:
    return spans_to_array(_worker_tokenizer.tokenize(text))


def _noop() -> int:
    return 0


class ParallelEngine:
    """Owns the pool; reuse one instance across calls so worker start-up is paid once.

    Not re-entrant: call from one thread at a time.
    """

    def __init__(self, tokenizer: Tokenizer, pool: Optional[WorkerPoolConfig] = None):
        self.tokenizer = tokenizer
        self.pool = pool or WorkerPoolConfig()
        self._executor: Optional[Executor] = None

    def start(self) -> "ParallelEngine":
        if self._executor is not None:
            return self
        m = self.pool.pool_size
        if self.pool.backend == "thread":
            self._executor = ThreadPoolExecutor(max_workers=m)
            return self
        self._executor = ProcessPoolExecutor(
            max_workers=m,
            mp_context=mp.get_context("forkserver"),
            initializer=_init_worker,
            initargs=(self.tokenizer,),
        )
        # spawn every worker now so later timings exclude start-up
        for f in [self._executor.submit(_noop) for _ in range(m)]:
            f.result()
        return self

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    def __enter__(self) -> "ParallelEngine":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    def map(self, chunks: Sequence[Chunk]) -> List[ChunkResult]:
        self.start()
        if self.pool.backend == "thread":
            tok = self.tokenizer
            futures = [self._executor.submit(lambda t=c.text: spans_to_array(tok.tokenize(t))) for c in chunks]
        else:
            futures = [self._executor.submit(_tokenize_in_worker, c.text) for c in chunks]
        results: List[Optional[ChunkResult]] = [None] * len(chunks)
        for pos, (chunk, fut) in enumerate(zip(chunks, futures)):
            try:
                arr = fut.result()
            except Exception as e:
                for f in futures:
                    f.cancel()
                raise ChunkTokenizationError(chunk.index, e) from e
            results[pos] = ChunkResult(chunk.index, chunk.global_start, len(chunk.text), arr)
        return results


def tokenize_chunks_parallel(
    chunks: Sequence[Chunk],
    tokenizer: Tokenizer,
    pool: Optional[WorkerPoolConfig] = None,
    engine: Optional[ParallelEngine] = None,
) -> List[ChunkResult]:
    """Tokenize every chunk on at most ``pool_size`` workers.

    Pass a running ``engine`` to reuse its pool; otherwise a temporary pool is
    created and torn down around this call.
    """
    if engine is not None:
        if engine.tokenizer is not tokenizer and engine.tokenizer != tokenizer:
            raise ValueError("engine was built for a different tokenizer")
        return engine.map(chunks)
    with ParallelEngine(tokenizer, pool) as eng:
        return eng.map(chunks)
