"""Corpus loading and reproducible synthetic corpora."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from .tokenizers import BPE, Tokenizer, TokenizerConfig
from .vocab import word_bpe_tables

GEN_KINDS = ("repetition", "delimiter-dense", "no-delimiter", "mixed-unicode", "natural")

_WORDS = (
    "the of and to in is was that for it with as his on be at by had this not are but from or "
    "have an they which one you were her all she there would their we him been has when who will "
    "more no if out so said what up its about into than them can only other new some could time "
    "these two may then do first any my now such like our over man me even most made after also "
    "did many before must through back years where much your way well down should because each "
    "just those people how too little state good very make world still own see men work long get "
    "here between both life being under never day same another know while last might us great old "
    "year off come since against go came right used take three abcde cabbage decade faced jade"
).split()

_UNICODE_POOL = "éèàçüößñøåæ" "αβγδεζηθλμπσς" "中文字符测试长文本分词" "あいうえおかきくけこ" "😀🚀✨"


class CorpusError(ValueError):
    pass


@dataclass
class Corpus:
    docs: List[Tuple[str, str]]
    source: str = ""

    def __post_init__(self):
        ids = [d for d, _ in self.docs]
        if len(set(ids)) != len(ids):
            raise CorpusError("duplicate doc ids")

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)

    @property
    def total_chars(self) -> int:
        return sum(len(t) for _, t in self.docs)


def load_corpus(path, fmt: Optional[str] = None) -> Corpus:
    """``plain-dir``: every ``*.txt`` file in a directory (sorted by name); ``jsonl``: rows with a ``text`` field."""
    path = Path(path)
    if fmt is None:
        fmt = "plain-dir" if path.is_dir() else "jsonl"
    if fmt == "plain-dir":
        if not path.is_dir():
            raise CorpusError(f"{path} is not a directory")
        files = sorted(p for p in path.iterdir() if p.suffix == ".txt" and p.is_file())
        return Corpus([(p.name, p.read_text(encoding="utf-8")) for p in files], str(path))
    if fmt != "jsonl":
        raise CorpusError(f"unknown corpus format {fmt!r}")
    docs = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise CorpusError(f"cannot read {path}: {e}") from e
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({e.msg})") from e
            if not isinstance(row, dict) or not isinstance(row.get("text"), str):
                raise CorpusError(f"{path}:{lineno}: row has no string 'text' field")
            doc_id = str(row.get("id", f"{path.stem}-{lineno}"))
            docs.append((doc_id, row["text"]))
    return Corpus(docs, str(path))


def _natural(rng: random.Random, n: int, punct_rate: float) -> str:
    out = []
    size = 0
    cap = True
    while size < n:
        w = rng.choice(_WORDS)
        if cap:
            w = w.capitalize()
            cap = False
        r = rng.random()
        if r < punct_rate:
            w += ","
        elif r < 2 * punct_rate:
            w += "."
            cap = True
        out.append(w)
        size += len(w) + 1
    return " ".join(out)[:n]


def _repetition(rng: random.Random, n: int) -> str:
    parts = []
    size = 0
    while size < n:
        if rng.random() < 0.6:
            motif = "".join(rng.choice("abcdehl") for _ in range(rng.randint(1, 3)))
            sep = rng.choice(["", " ", "", ", "])
            piece = sep.join([motif] * rng.randint(8, 120))
        else:
            piece = _natural(rng, rng.randint(20, 200), 0.05)
        parts.append(piece)
        size += len(piece) + 1
    return " ".join(parts)[:n]


def _no_delimiter(rng: random.Random, n: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    out = []
    size = 0
    while size < n:
        w = rng.choice(_WORDS) if rng.random() < 0.7 else rng.choice(letters)
        out.append(w)
        size += len(w)
    return "".join(out)[:n]


def _mixed_unicode(rng: random.Random, n: int) -> str:
    out = []
    size = 0
    while size < n:
        r = rng.random()
        if r < 0.5:
            w = rng.choice(_WORDS)
        elif r < 0.9:
            w = "".join(rng.choice(_UNICODE_POOL) for _ in range(rng.randint(1, 8)))
        else:
            w = rng.choice(_WORDS) + rng.choice(_UNICODE_POOL)
        out.append(w)
        size += len(w) + 1
    return " ".join(out)[:n]


def gen_corpus(kind: str, total_chars: int, seed: int, doc_chars: int = 20000) -> Corpus:
    """Synthetic documents of about ``doc_chars`` each, ``total_chars`` overall."""
    if total_chars < 1:
        raise CorpusError("total_chars must be >= 1")
    if kind not in GEN_KINDS:
        raise CorpusError(f"unknown corpus kind {kind!r}; choose from {GEN_KINDS}")
    rng = random.Random(f"{kind}:{seed}")
    docs = []
    remaining = total_chars
    while remaining > 0:
        n = min(doc_chars, remaining)
        if kind == "repetition":
            text = _repetition(rng, n)
        elif kind == "delimiter-dense":
            text = _natural(rng, n, 0.3)
        elif kind == "natural":
            text = _natural(rng, n, 0.06)
        elif kind == "no-delimiter":
            text = _no_delimiter(rng, n)
        else:
            text = _mixed_unicode(rng, n)
        docs.append((f"{kind}-{seed}-{len(docs):04d}", text))
        remaining -= n
    return Corpus(docs, f"gen:{kind}:{total_chars}:{seed}")


def natural_word_tokenizer(pretokenizer: str = "none") -> Tokenizer:
    """BPE over the generator's word list (plain and capitalized) whose tokens absorb
    trailing spaces and punctuation; pairs with the ``natural`` corpora."""
    vocab, merges = word_bpe_tables(list(_WORDS) + [w.capitalize() for w in _WORDS])
    return Tokenizer(vocab, TokenizerConfig(BPE, pretokenizer=pretokenizer), merges)
