"""Command line: ``lopt bench`` and ``lopt tokenize``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .bench import METHODS, SWEEP_AXES, BenchParams, emit_report, run_benchmark, sweep
from .corpus import gen_corpus, load_corpus
from .merge import MergeConfig, lopt_tokenize
from .tokenizers import BPE, PRETOKENIZERS, WORDPIECE, Tokenizer, TokenizerConfig
from .vocab import load_bpe, load_wordpiece, random_bpe_tables, toy_bpe, toy_wordpiece


def parse_tokenizer(spec: str, pretokenizer: Optional[str] = None, lowercase: bool = False) -> Tokenizer:
    """``bpe:VOCAB:MERGES``, ``wp:VOCAB``, ``toy-bpe``, ``toy-wp``, ``words`` or ``random:SEED:ALPHABET:MERGES``."""
    kind, _, rest = spec.partition(":")
    if kind == "bpe":
        vocab_file, sep, merges_file = rest.partition(":")
        if not sep:
            raise ValueError("bpe tokenizer needs bpe:VOCAB:MERGES")
        vocab, merges = load_bpe(vocab_file, merges_file)
        return Tokenizer(vocab, TokenizerConfig(BPE, lowercase, pretokenizer), merges)
    if kind == "wp":
        return Tokenizer(load_wordpiece(rest), TokenizerConfig(WORDPIECE, lowercase, pretokenizer))
    if kind == "toy-bpe":
        vocab, merges = toy_bpe()
        return Tokenizer(vocab, TokenizerConfig(BPE, lowercase, pretokenizer), merges)
    if kind == "toy-wp":
        return Tokenizer(toy_wordpiece(), TokenizerConfig(WORDPIECE, lowercase, pretokenizer))
    if kind == "words":
        from .corpus import natural_word_tokenizer

        return natural_word_tokenizer(pretokenizer or "none")
    if kind == "random":
        seed, alpha, n_merges = (int(x) for x in rest.split(":"))
        vocab, merges = random_bpe_tables(seed, alpha, n_merges)
        return Tokenizer(vocab, TokenizerConfig(BPE, lowercase, pretokenizer), merges)
    raise ValueError(f"unrecognised tokenizer spec {spec!r}")


def _add_tokenizer_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tokenizer", required=True, help="bpe:VOCAB:MERGES | wp:VOCAB | toy-bpe | toy-wp | words | random:SEED:ALPHABET:MERGES")
    p.add_argument("--pretokenizer", choices=PRETOKENIZERS, default=None)
    p.add_argument("--lowercase", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lopt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="latency and exact-match accuracy vs the sequential tokenizer")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="directory of .txt files or a .jsonl file")
    src.add_argument("--gen", help="KIND:SIZE:SEED synthetic corpus")
    _add_tokenizer_args(b)
    b.add_argument("--method", default="seq,lopt", help=f"comma list from {','.join(METHODS)}")
    b.add_argument("--workers", type=int, default=32)
    b.add_argument("--chunk-len", type=int, default=None)
    b.add_argument("--overlap-len", type=int, default=None)
    b.add_argument("--min-overlap-tokens", type=int, default=2)
    b.add_argument("--strict-chars", action="store_true")
    b.add_argument("--max-doublings", type=int, default=4)
    b.add_argument("--backend", choices=("process", "thread"), default="process")
    b.add_argument("--batch", type=int, default=1)
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--sweep", default=None, help=f"AXIS=V1,V2,... with AXIS in {','.join(SWEEP_AXES)}")
    b.add_argument("--out", default=None)
    b.add_argument("--format", choices=("csv", "json"), default="csv")

    t = sub.add_parser("tokenize", help="tokenize one text and print ids")
    _add_tokenizer_args(t)
    t.add_argument("text", nargs="?", help="text to tokenize (default: read --file or stdin)")
    t.add_argument("--file", default=None)
    t.add_argument("--spans", action="store_true", help="print id start end per line")
    t.add_argument("--parallel", action="store_true", help="use the parallel pipeline")
    t.add_argument("--workers", type=int, default=32)
    t.add_argument("--chunk-len", type=int, default=None)
    t.add_argument("--overlap-len", type=int, default=None)
    return parser


def _cmd_bench(args) -> int:
    tok = parse_tokenizer(args.tokenizer, args.pretokenizer, args.lowercase)
    if args.corpus:
        corpus = load_corpus(args.corpus)
    else:
        kind, size, seed = args.gen.split(":")
        corpus = gen_corpus(kind, int(size), int(seed))
    methods = [m.strip() for m in args.method.split(",") if m.strip()]
    params = BenchParams(
        workers=args.workers,
        chunk_len=args.chunk_len,
        overlap_len=args.overlap_len,
        min_overlap_tokens=args.min_overlap_tokens,
        strict_chars=args.strict_chars,
        max_doublings=args.max_doublings,
        backend=args.backend,
        batch=args.batch,
    )
    if args.sweep:
        axis, _, vals = args.sweep.partition("=")
        report = sweep(axis, [int(v) for v in vals.split(",")], params, corpus, tok, methods, args.repeats)
    else:
        report = run_benchmark(corpus, methods, tok, params, args.repeats)
    for key, agg in sorted(report.aggregates().items()):
        print(f"{key:60s} latency={agg['mean_latency_ms']:10.2f}ms accuracy={agg['accuracy']:.3f} n={agg['n']}")
    if args.out:
        emit_report(report, args.format, args.out)
    for err in report.errors:
        print(f"error: {err['method']} on {err['doc_id']}: {err['error']}", file=sys.stderr)
    return 1 if report.errors else 0


def _cmd_tokenize(args) -> int:
    tok = parse_tokenizer(args.tokenizer, args.pretokenizer, args.lowercase)
    if args.text is not None:
        text = args.text
    elif args.file:
        text = Path(args.file).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    if args.parallel:
        from .engine import WorkerPoolConfig

        out = lopt_tokenize(text, tok, args.chunk_len, args.overlap_len, pool=WorkerPoolConfig(args.workers), merge_config=MergeConfig())
        rows = out.spans.tolist()
    else:
        rows = [list(t) for t in tok.tokenize(text)]
    if args.spans:
        for tid, s, e in rows:
            print(tid, s, e)
    else:
        print(json.dumps([r[0] for r in rows]))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_tokenize(args)
    except (ValueError, OSError) as e:
        print(f"lopt: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
