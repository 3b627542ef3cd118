"""Reference sequential tokenizers (BPE, WordPiece) with exact character offsets.

Offsets are Unicode code-point indices into the input string. These are both
the worker kernel of the parallel pipeline and the sequential oracle it is
checked against.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import regex

from .vocab import MergeTable, Vocabulary, random_bpe_tables

BPE = "bpe"
WORDPIECE = "wordpiece"
PRETOKENIZERS = ("whitespace", "punct", "none")

# words longer than this go through the heap-based merge loop
_LONG_WORD = 48

_PUNCT = r"[\p{P}!-/:-@\[-`{-~]"
_WS_RE = regex.compile(r"\S+")
_PUNCT_RE = regex.compile(rf"{_PUNCT}|(?:(?!{_PUNCT})\S)+")


class TokenSpan(NamedTuple):
    id: int
    start: int
    end: int


class PreToken(NamedTuple):
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenizerConfig:
    algorithm: str = BPE
    lowercase: bool = False
    pretokenizer: Optional[str] = None
    byte_fallback: bool = False
    whole_word_unk: bool = True
    normalization: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in (BPE, WORDPIECE):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.pretokenizer is None:
            # BERT-style: punctuation and spaces are separate units
            default = "punct" if self.algorithm == WORDPIECE else "whitespace"
            object.__setattr__(self, "pretokenizer", default)
        if self.pretokenizer not in PRETOKENIZERS:
            raise ValueError(f"unknown pretokenizer {self.pretokenizer!r}")
        if self.normalization is not None:
            # NFC/NFKC and friends can change string length, which breaks offsets
            raise ValueError(
                f"normalization {self.normalization!r} is not offset-preserving; "
                "only per-character lowercasing is supported"
            )


class _LowerTable(dict):
    def __missing__(self, code):
        low = chr(code).lower()
        val = low if len(low) == 1 else chr(code)
        self[code] = val
        return val


_LOWER = _LowerTable()


def normalize(text: str, config: TokenizerConfig) -> str:
    if not config.lowercase:
        return text
    if text.isascii():
        return text.lower()
    # per code point; str.lower() is context-sensitive for final sigma
    return text.translate(_LOWER)


def pretokenize(text: str, config: TokenizerConfig) -> List[PreToken]:
    """Split (already normalized) text into words with exact spans."""
    mode = config.pretokenizer
    if mode == "none":
        return [PreToken(text, 0, len(text))] if text else []
    pattern = _PUNCT_RE if mode == "punct" else _WS_RE
    return [PreToken(m.group(), m.start(), m.end()) for m in pattern.finditer(text)]


def bpe_word(word: str, merges: MergeTable) -> List[str]:
    """Merge a word's characters by rank, all occurrences of the best pair per round."""
    if len(word) > _LONG_WORD:
        return _bpe_word_heap(word, merges.ranks)
    ranks = merges.ranks
    pieces = list(word)
    while len(pieces) > 1:
        best = None
        best_rank = None
        for pair in zip(pieces, pieces[1:]):
            r = ranks.get(pair)
            if r is not None and (best_rank is None or r < best_rank):
                best, best_rank = pair, r
        if best is None:
            break
        a, b = best
        merged = a + b
        out = []
        i, n = 0, len(pieces)
        while i < n:
            if i < n - 1 and pieces[i] == a and pieces[i + 1] == b:
                out.append(merged)
                i += 2
            else:
                out.append(pieces[i])
                i += 1
        pieces = out
    return pieces


def _bpe_word_heap(word: str, ranks) -> List[str]:
    # Same semantics as the round loop in bpe_word, O(n log n): each round pops
    # every queued occurrence of the current minimum rank and merges them left
    # to right. A merge never recreates the pair it consumed, so pairs created
    # during a round always belong to a later round.
    n = len(word)
    piece = list(word)
    nxt = list(range(1, n + 1))
    prv = list(range(-1, n - 1))
    heap = []
    for i in range(n - 1):
        r = ranks.get((word[i], word[i + 1]))
        if r is not None:
            heap.append((r, i, word[i], word[i + 1]))
    heapq.heapify(heap)
    while heap:
        rank = heap[0][0]
        batch = []
        while heap and heap[0][0] == rank:
            batch.append(heapq.heappop(heap))
        batch.sort(key=lambda e: e[1])
        for _, i, a, b in batch:
            j = nxt[i]
            if piece[i] != a or j >= n or piece[j] != b:
                continue
            piece[i] = a + b
            piece[j] = None
            k = nxt[j]
            nxt[i] = k
            if k < n:
                prv[k] = i
            p = prv[i]
            if p >= 0:
                r = ranks.get((piece[p], piece[i]))
                if r is not None:
                    heapq.heappush(heap, (r, p, piece[p], piece[i]))
            if k < n:
                r = ranks.get((piece[i], piece[k]))
                if r is not None:
                    heapq.heappush(heap, (r, i, piece[i], piece[k]))
    out = []
    i = 0
    while i < n:
        out.append(piece[i])
        i = nxt[i]
    return out


def tokenize_bpe(text: str, vocab: Vocabulary, merges: MergeTable, config: TokenizerConfig) -> List[TokenSpan]:
    text = normalize(text, config)
    entries = vocab.entries
    unk = vocab.unk_id
    fuse_unk = not config.byte_fallback
    out: List[TokenSpan] = []
    for word, off, _ in pretokenize(text, config):
        pos = off
        prev_unk = False
        for p in bpe_word(word, merges):
            end = pos + len(p)
            tid = entries.get(p)
            if tid is None:
                if fuse_unk and prev_unk:
                    out[-1] = TokenSpan(unk, out[-1].start, end)
                else:
                    out.append(TokenSpan(unk, pos, end))
                prev_unk = True
            else:
                out.append(TokenSpan(tid, pos, end))
                prev_unk = False
            pos = end
    return out


def tokenize_wordpiece(text: str, vocab: Vocabulary, config: TokenizerConfig) -> List[TokenSpan]:
    text = normalize(text, config)
    entries = vocab.entries
    prefix = vocab.continuation_prefix
    maxlen = vocab.max_token_char_len
    unk = vocab.unk_id
    out: List[TokenSpan] = []
    for word, off, word_end in pretokenize(text, config):
        n = len(word)
        start = 0
        pieces = []
        failed = False
        while start < n:
            end = min(n, start + maxlen)
            tid = None
            while end > start:
                sub = word[start:end]
                tid = entries.get(prefix + sub if start else sub)
                if tid is not None:
                    break
                end -= 1
            if tid is None:
                if config.whole_word_unk:
                    failed = True
                    break
                tid, end = unk, start + 1
            pieces.append(TokenSpan(tid, off + start, off + end))
            start = end
        if failed:
            out.append(TokenSpan(unk, off, word_end))
        else:
            out.extend(pieces)
    return out


@dataclass(frozen=True)
class Tokenizer:
    """An immutable (vocab, merges, config) bundle; safe to share across workers."""

    vocab: Vocabulary
    config: TokenizerConfig
    merges: Optional[MergeTable] = None

    def __post_init__(self):
        if self.config.algorithm == BPE:
            if self.merges is None:
                raise ValueError("BPE tokenizer needs a merge table")
            self.merges.validate(self.vocab)

    @property
    def max_token_char_len(self) -> int:
        return self.vocab.max_token_char_len

    def tokenize(self, text: str) -> List[TokenSpan]:
        if self.config.algorithm == BPE:
            return tokenize_bpe(text, self.vocab, self.merges, self.config)
        return tokenize_wordpiece(text, self.vocab, self.config)

    def encode(self, text: str) -> List[int]:
        return [t.id for t in self.tokenize(text)]


def tokenize(text: str, tokenizer: Tokenizer) -> List[TokenSpan]:
    return tokenizer.tokenize(text)


def gen_random_tokenizer(
    seed: int,
    alphabet_size: int,
    n_merges: int,
    pretokenizer: str = "whitespace",
    alphabet: Optional[str] = None,
) -> Tuple[Vocabulary, MergeTable, TokenizerConfig]:
    """Reproducible random BPE tokenizer for property tests."""
    vocab, merges = random_bpe_tables(seed, alphabet_size, n_merges, alphabet=alphabet)
    return vocab, merges, TokenizerConfig(algorithm=BPE, pretokenizer=pretokenizer)


def random_bpe_tokenizer(seed: int, alphabet_size: int, n_merges: int, **kw) -> Tokenizer:
    vocab, merges, config = gen_random_tokenizer(seed, alphabet_size, n_merges, **kw)
    return Tokenizer(vocab, config, merges)
