"""Latency of lopt against sequential tokenization along one axis.

    python scripts/sweep.py chunk_len --chars 1000000 --workers 8
    python scripts/sweep.py workers --values 1,2,4,8,16,32
    python scripts/sweep.py seq_len --values 10000,100000,1000000
    python scripts/sweep.py batch --values 1,2,4,8 --chars 400000
"""

import argparse
import statistics

from lopt.bench import BenchParams, emit_report, sweep
from lopt.corpus import gen_corpus, natural_word_tokenizer


def default_values(axis, n, workers):
    if axis == "chunk_len":
        # 16-point log grid centred on one chunk per worker
        return [max(1, round(n / workers * 2 ** (k / 3))) for k in range(-8, 8)]
    if axis == "workers":
        return [1, 2, 4, 8, 16, 32]
    if axis == "seq_len":
        return [n // 100, n // 10, n]
    if axis == "batch":
        return [1, 2, 4, 8]
    return [64, 128, 256, 512]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("axis", choices=["chunk_len", "workers", "seq_len", "batch", "overlap_len"])
    ap.add_argument("--values", help="comma separated; a sensible grid is used when omitted")
    ap.add_argument("--chars", type=int, default=1_000_000)
    ap.add_argument("--kind", default="natural")
    ap.add_argument("--workers", type=int, default=8)
    ap.add_argument("--backend", default="process", choices=["process", "thread"])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    doc_chars = args.chars if args.axis != "batch" else max(1, args.chars // 8)
    corpus = gen_corpus(args.kind, args.chars, args.seed, doc_chars=doc_chars)
    values = [int(v) for v in args.values.split(",")] if args.values else default_values(args.axis, args.chars, args.workers)
    tok = natural_word_tokenizer("whitespace")
    report = sweep(args.axis, values, BenchParams(workers=args.workers, backend=args.backend), corpus, tok, ("seq", "lopt"), args.repeats)

    print(f"{args.axis:>12s} {'seq ms':>10s} {'lopt ms':>10s} {'ratio':>7s} {'exact':>6s}")
    for v in values:
        tag = f"{args.axis}={v}|"
        rows = [r for r in report.rows if r.config.startswith(tag)]
        seq = statistics.median(r.latency_ms for r in rows if r.method == "seq")
        par = statistics.median(r.latency_ms for r in rows if r.method == "lopt")
        exact = all(r.exact_match for r in rows)
        print(f"{v:12d} {seq:10.1f} {par:10.1f} {par / seq:7.2f} {str(exact):>6s}")
    if args.out:
        emit_report(report, "json" if args.out.endswith(".json") else "csv", args.out)


if __name__ == "__main__":
    main()
