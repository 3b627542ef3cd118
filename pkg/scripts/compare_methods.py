"""Accuracy and latency of every chunking method on the generated corpora.

    python scripts/compare_methods.py --chars 200000 --workers 8 --out results/compare.csv
"""

import argparse

from lopt import ParallelEngine, WorkerPoolConfig, random_bpe_tokenizer
from lopt.bench import METHODS, BenchParams, BenchReport, emit_report, run_benchmark
from lopt.corpus import GEN_KINDS, gen_corpus, natural_word_tokenizer


def tokenizer_for(kind):
    # word tokens with a trailing delimiter only make sense on word-like text
    if kind == "natural":
        return natural_word_tokenizer("none")
    return random_bpe_tokenizer(3, 29, 600)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--chars", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=8)
    ap.add_argument("--backend", default="process", choices=["process", "thread"])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--kinds", default=",".join(GEN_KINDS))
    ap.add_argument("--out")
    args = ap.parse_args()

    params = BenchParams(workers=args.workers, backend=args.backend)
    full = BenchReport()
    print(f"{'corpus':16s} {'method':14s} {'accuracy':>8s} {'median ms':>10s}")
    for kind in args.kinds.split(","):
        tok = tokenizer_for(kind)
        corpus = gen_corpus(kind, args.chars, args.seed)
        with ParallelEngine(tok, WorkerPoolConfig(args.workers, backend=args.backend)) as eng:
            report = run_benchmark(corpus, METHODS, tok, params, args.repeats, eng)
        for m in METHODS:
            if any(r.method == m for r in report.rows):
                print(f"{kind:16s} {m:14s} {report.accuracy(m):8.3f} {report.median_latency(m):10.1f}")
        for r in report.rows:
            r.config = f"corpus={kind}|{r.config}"
        full.extend(report)
    if args.out:
        emit_report(full, "json" if args.out.endswith(".json") else "csv", args.out)


if __name__ == "__main__":
    main()
