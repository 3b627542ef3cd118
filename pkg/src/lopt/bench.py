"""Latency / exact-match benchmark against the sequential oracle, sweeps and report output."""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .baselines import DELIMITERS, DelimiterConfig, LcsConfig, delimiter_tokenize_parallel, lcs_tokenize_parallel
from .chunking import default_chunk_len, default_overlap_len
from .corpus import Corpus
from .engine import ParallelEngine, WorkerPoolConfig
from .merge import MergeConfig, lopt_tokenize
from .tokenizers import Tokenizer

log = logging.getLogger(__name__)

METHODS = ("seq", "lopt", "delim-space", "delim-comma", "delim-period", "lcs")
SWEEP_AXES = ("chunk_len", "workers", "batch", "seq_len", "overlap_len")
CSV_COLUMNS = ("doc_id", "method", "config", "latency_ms", "token_count", "exact_match")


@dataclass(frozen=True)
class BenchParams:
    workers: int = 32
    chunk_len: Optional[int] = None
    overlap_len: Optional[int] = None
    min_overlap_tokens: int = 2
    strict_chars: bool = False
    max_doublings: int = 4
    backend: str = "process"
    batch: int = 1

    def fingerprint(self, method: str) -> str:
        if method == "seq":
            return "seq"
        parts = [f"workers={self.workers}", f"chunk_len={self.chunk_len or 'auto'}"]
        if method in ("lopt", "lcs"):
            parts.append(f"overlap_len={self.overlap_len or 'auto'}")
        if method == "lopt":
            parts.append(f"min_tokens={self.min_overlap_tokens}")
            if self.strict_chars:
                parts.append("strict")
        if self.batch != 1:
            parts.append(f"batch={self.batch}")
        return ";".join(parts)


@dataclass
class BenchRow:
    doc_id: str
    method: str
    config: str
    latency_ms: float
    token_count: int
    exact_match: bool


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)
    errors: List[Dict[str, str]] = field(default_factory=list)

    def aggregates(self) -> Dict[str, Dict[str, float]]:
        groups: Dict[str, List[BenchRow]] = {}
        for r in self.rows:
            groups.setdefault(f"{r.method}|{r.config}", []).append(r)
        return {
            key: {
                "mean_latency_ms": statistics.fmean(r.latency_ms for r in rows),
                "accuracy": sum(r.exact_match for r in rows) / len(rows),
                "n": len(rows),
            }
            for key, rows in groups.items()
        }

    def accuracy(self, method: str) -> float:
        rows = [r for r in self.rows if r.method == method]
        if not rows:
            raise KeyError(method)
        return sum(r.exact_match for r in rows) / len(rows)

    def median_latency(self, method: str) -> float:
        return statistics.median(r.latency_ms for r in self.rows if r.method == method)

    def extend(self, other: "BenchReport") -> None:
        self.rows.extend(other.rows)
        self.errors.extend(other.errors)

    def to_dict(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "aggregates": self.aggregates(),
            "errors": self.errors,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BenchReport":
        return cls([BenchRow(**r) for r in d["rows"]], list(d.get("errors", [])))


def emit_report(report: BenchReport, fmt: str, path) -> Path:
    path = Path(path)
    if fmt == "json":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.rows:
            w.writerow([r.doc_id, r.method, r.config, repr(r.latency_ms), r.token_count, "true" if r.exact_match else "false"])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path.write_text(text, encoding="utf-8")
    return path


def read_csv_report(path) -> BenchReport:
    with open(path, newline="", encoding="utf-8") as f:
        rows = [
            BenchRow(r["doc_id"], r["method"], r["config"], float(r["latency_ms"]), int(r["token_count"]), r["exact_match"] == "true")
            for r in csv.DictReader(f)
        ]
    return BenchReport(rows)


def _time_median(fn: Callable[[], object], repeats: int):
    fn()  # warm-up, excluded
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times), out


def _ids(out) -> List[int]:
    if isinstance(out, np.ndarray):
        return out[:, 0].tolist()
    if out and isinstance(out[0], tuple):
        return [t[0] for t in out]
    return list(out)


def make_runner(method: str, tokenizer: Tokenizer, params: BenchParams, engine: ParallelEngine) -> Callable[[str], object]:
    """Callable mapping one text to that method's output (ids, spans or both)."""
    merge_cfg = MergeConfig(
        min_overlap_tokens=params.min_overlap_tokens,
        strict_min_chars=params.strict_chars,
        max_doublings=params.max_doublings,
    )
    overlap = params.overlap_len or default_overlap_len(tokenizer.max_token_char_len)

    def chunk_len(text: str) -> int:
        return params.chunk_len or default_chunk_len(len(text), params.workers)

    if method == "seq":
        return tokenizer.tokenize
    if method == "lopt":
        return lambda s: lopt_tokenize(s, tokenizer, params.chunk_len, overlap, merge_config=merge_cfg, engine=engine).spans
    if method.startswith("delim-"):
        delim = DELIMITERS[method.split("-", 1)[1]]
        return lambda s: delimiter_tokenize_parallel(s, tokenizer, DelimiterConfig(delim, chunk_len(s)), engine=engine)
    if method == "lcs":
        return lambda s: lcs_tokenize_parallel(s, tokenizer, chunk_len(s), overlap, config=LcsConfig(overlap), engine=engine)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def run_benchmark(
    corpus: Corpus,
    methods: Sequence[str],
    tokenizer: Tokenizer,
    params: Optional[BenchParams] = None,
    repeats: int = 5,
    engine: Optional[ParallelEngine] = None,
) -> BenchReport:
    """Median-of-``repeats`` latency per doc and method, plus exact match vs the oracle.

    The oracle is computed once per doc (its timing is the ``seq`` row) and
    comparison happens outside the timed region.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    params = params or BenchParams()
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    if engine is None:
        with ParallelEngine(tokenizer, WorkerPoolConfig(params.workers, backend=params.backend)) as eng:
            return run_benchmark(corpus, methods, tokenizer, params, repeats, eng)
    runners = {m: make_runner(m, tokenizer, params, engine) for m in methods if m != "seq"}
    report = BenchReport()
    b = params.batch
    for doc_id, texts in _batches(corpus, b):
        seq_ms, seq_out = _time_median(lambda: [tokenizer.tokenize(t) for t in texts], repeats)
        oracle = [_ids(o) for o in seq_out]
        n_tokens = sum(len(o) for o in oracle)
        if "seq" in methods:
            report.rows.append(BenchRow(doc_id, "seq", params.fingerprint("seq"), seq_ms, n_tokens, True))
        for m, run in runners.items():
            try:
                ms, outs = _time_median(lambda: [run(t) for t in texts], repeats)
            except Exception as e:
                log.exception("method %s failed on %s", m, doc_id)
                report.errors.append({"doc_id": doc_id, "method": m, "error": repr(e)})
                continue
            got = [_ids(o) for o in outs]
            report.rows.append(
                BenchRow(doc_id, m, params.fingerprint(m), ms, sum(len(g) for g in got), got == oracle)
            )
    return report


def _batches(corpus: Corpus, b: int):
    if b == 1:
        for doc_id, text in corpus.docs:
            yield doc_id, [text]
        return
    docs = corpus.docs
    for start in range(0, len(docs), b):
        group = [docs[(start + k) % len(docs)] for k in range(b)]
        yield "+".join(d for d, _ in group), [t for _, t in group]


def _prefix_corpus(corpus: Corpus, length: int) -> Corpus:
    long_docs = [(d, t[:length]) for d, t in corpus.docs if len(t) >= length]
    if long_docs:
        return Corpus([(f"{d}[:{length}]", t) for d, t in long_docs], corpus.source)
    joined = "\n".join(t for _, t in corpus.docs)
    return Corpus([(f"joined[:{length}]", joined[:length])], corpus.source)


def sweep(
    axis: str,
    values: Sequence[int],
    params: BenchParams,
    corpus: Corpus,
    tokenizer: Tokenizer,
    methods: Sequence[str] = ("seq", "lopt"),
    repeats: int = 5,
) -> BenchReport:
    """One benchmark section per value of ``axis``; every row's config names the value."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if not values:
        raise ValueError("sweep needs at least one value")
    report = BenchReport()
    engine = None
    try:
        for v in values:
            p = params
            sub = corpus
            if axis == "seq_len":
                sub = _prefix_corpus(corpus, v)
            else:
                p = replace(params, **{axis: v})
            if engine is None or engine.pool.pool_size != p.workers:
                if engine is not None:
                    engine.close()
                engine = ParallelEngine(tokenizer, WorkerPoolConfig(p.workers, backend=p.backend)).start()
            section = run_benchmark(sub, methods, tokenizer, p, repeats, engine)
            for r in section.rows:
                r.config = f"{axis}={v}|{r.config}"
            report.extend(section)
    finally:
        if engine is not None:
            engine.close()
    return report
