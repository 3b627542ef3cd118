"""Vocabulary and merge-table types, file loaders and toy fixtures."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Tuple

UNK_CANDIDATES = ("[UNK]", "<unk>", "<|unk|>")

# alphabet pool for generated tokenizers; ascii letters first so small
# alphabets stay readable in failing test output. Sizes above 26 add the
# delimiters, so merges can build tokens that straddle them.
_ALPHABET_POOL = "abcdefghijklmnopqrstuvwxyz ,.ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"


class VocabError(ValueError):
    """Malformed vocabulary or merges input."""


@dataclass(frozen=True)
class Vocabulary:
    entries: Mapping[str, int]
    unk_id: int
    continuation_prefix: str = ""
    max_token_char_len: int = field(default=0)

    def __post_init__(self):
        if not self.entries:
            raise VocabError("vocabulary is empty")
        ids = list(self.entries.values())
        if len(set(ids)) != len(ids):
            raise VocabError("duplicate token ids in vocabulary")
        if any(i < 0 for i in ids):
            raise VocabError("token ids must be non-negative")
        if self.unk_id not in set(ids):
            raise VocabError(f"unk id {self.unk_id} is not in the vocabulary")
        computed = _max_token_char_len(self.entries, self.unk_id, self.continuation_prefix)
        if self.max_token_char_len == 0:
            object.__setattr__(self, "max_token_char_len", computed)
        elif self.max_token_char_len != computed:
            raise VocabError(
                f"max_token_char_len={self.max_token_char_len} but entries give {computed}"
            )

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def get(self, token: str, default=None):
        return self.entries.get(token, default)

    def id_to_token(self) -> Dict[int, str]:
        return {i: t for t, i in self.entries.items()}


def _max_token_char_len(entries: Mapping[str, int], unk_id: int, prefix: str) -> int:
    # the unk entry never matches text, so it does not bound span lengths
    best = 1
    for tok, i in entries.items():
        if i == unk_id:
            continue
        if prefix and tok.startswith(prefix) and len(tok) > len(prefix):
            tok = tok[len(prefix):]
        best = max(best, len(tok))
    return best


@dataclass(frozen=True)
class MergeTable:
    """BPE merges; a lower rank merges earlier."""

    ranks: Mapping[Tuple[str, str], int]

    def __len__(self) -> int:
        return len(self.ranks)

    def get(self, left: str, right: str) -> Optional[int]:
        return self.ranks.get((left, right))

    def validate(self, vocab: Vocabulary) -> None:
        if len(set(self.ranks.values())) != len(self.ranks):
            raise VocabError("merge ranks are not unique")
        for (left, right), rank in self.ranks.items():
            for piece in (left, right, left + right):
                if piece not in vocab:
                    raise VocabError(
                        f"dangling merge at rank {rank}: {piece!r} not in vocabulary"
                    )


def _find_unk(entries: Mapping[str, int], unk_token: Optional[str]) -> int:
    if unk_token is not None:
        if unk_token not in entries:
            raise VocabError(f"unk token {unk_token!r} not in vocabulary")
        return entries[unk_token]
    for cand in UNK_CANDIDATES:
        if cand in entries:
            return entries[cand]
    raise VocabError(f"no unk token found (looked for {', '.join(UNK_CANDIDATES)})")


def parse_merges(lines: Iterable[str]) -> MergeTable:
    ranks: Dict[Tuple[str, str], int] = {}
    rank = 0
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line or (lineno == 1 and line.startswith("#version")):
            continue
        parts = line.split(" ")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise VocabError(f"merges line {lineno}: expected 'left right', got {line!r}")
        pair = (parts[0], parts[1])
        if pair in ranks:
            raise VocabError(f"merges line {lineno}: duplicate merge {line!r}")
        ranks[pair] = rank
        rank += 1
    return MergeTable(ranks)


def load_bpe(vocab_file, merges_file, unk_token: Optional[str] = None) -> Tuple[Vocabulary, MergeTable]:
    """Load a HF-style ``vocab.json`` + ``merges.txt`` pair."""
    try:
        raw = json.loads(Path(vocab_file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise VocabError(f"{vocab_file}: invalid JSON ({e})") from e
    if not isinstance(raw, dict):
        raise VocabError(f"{vocab_file}: expected a JSON object of token -> id")
    for tok, i in raw.items():
        if not isinstance(i, int) or isinstance(i, bool):
            raise VocabError(f"{vocab_file}: id for {tok!r} is not an integer")
    vocab = Vocabulary(entries=dict(raw), unk_id=_find_unk(raw, unk_token))
    with open(merges_file, encoding="utf-8") as f:
        merges = parse_merges(f)
    merges.validate(vocab)
    return vocab, merges


def load_wordpiece(vocab_file, unk_token: str = "[UNK]", prefix: str = "##") -> Vocabulary:
    """Load a BERT-style vocab.txt (one token per line, id = line index)."""
    entries: Dict[str, int] = {}
    with open(vocab_file, encoding="utf-8") as f:
        for i, line in enumerate(f):
            tok = line.rstrip("\r\n")
            if tok in entries:
                raise VocabError(f"{vocab_file} line {i + 1}: duplicate token {tok!r}")
            entries[tok] = i
    return Vocabulary(entries=entries, unk_id=_find_unk(entries, unk_token), continuation_prefix=prefix)


def _data_path(name: str) -> Path:
    return Path(str(resources.files("lopt") / "data" / name))


def toy_bpe() -> Tuple[Vocabulary, MergeTable]:
    return load_bpe(_data_path("toybpe_vocab.json"), _data_path("toybpe_merges.txt"))


def toy_wordpiece() -> Vocabulary:
    return load_wordpiece(_data_path("toywp_vocab.txt"))


def random_bpe_tables(
    seed: int,
    alphabet_size: int,
    n_merges: int,
    alphabet: Optional[str] = None,
) -> Tuple[Vocabulary, MergeTable]:
    """Single-char base vocab plus ``n_merges`` randomly composed merges.

    Each merge joins two existing tokens into a new string, so every merge
    operand exists before the merge that uses it (as in a trained table).
    """
    if alphabet is None:
        if not 2 <= alphabet_size <= len(_ALPHABET_POOL):
            raise ValueError(f"alphabet_size must be in [2, {len(_ALPHABET_POOL)}]")
        alphabet = _ALPHABET_POOL[:alphabet_size]
    elif len(alphabet) < 2 or len(set(alphabet)) != len(alphabet):
        raise ValueError("alphabet needs at least two distinct characters")
    rng = random.Random(seed)
    tokens = list(alphabet)
    entries = {c: i for i, c in enumerate(tokens)}
    ranks: Dict[Tuple[str, str], int] = {}
    attempts = 0
    while len(ranks) < n_merges and attempts < 50 * n_merges + 100:
        attempts += 1
        # bias toward short operands so merges fire on random text
        left = _pick(rng, tokens)
        right = _pick(rng, tokens)
        new = left + right
        if new in entries or (left, right) in ranks:
            continue
        ranks[(left, right)] = len(ranks)
        entries[new] = len(entries)
        tokens.append(new)
    entries["[UNK]"] = len(entries)
    vocab = Vocabulary(entries=entries, unk_id=entries["[UNK]"])
    return vocab, MergeTable(ranks)


def _pick(rng: random.Random, tokens) -> str:
    if rng.random() < 0.5:
        return tokens[rng.randrange(len(tokens))]
    # geometric preference for early (short) tokens
    k = min(len(tokens) - 1, int(rng.expovariate(0.3)))
    return tokens[k]


def random_wordpiece_vocab(seed: int, alphabet_size: int, n_words: int, alphabet: Optional[str] = None) -> Vocabulary:
    """Random WordPiece vocabulary: all single chars (plain and ``##``) plus random multi-char pieces.

    Some single continuation pieces are dropped at random so that whole-word
    unk failures happen on random text.
    """
    if alphabet is None:
        alphabet = _ALPHABET_POOL[:alphabet_size]
    rng = random.Random(seed)
    entries: Dict[str, int] = {"[UNK]": 0}
    for c in alphabet:
        entries[c] = len(entries)
    for c in alphabet:
        if rng.random() < 0.9:
            entries["##" + c] = len(entries)
    attempts = 0
    while len(entries) < 1 + 2 * len(alphabet) + n_words and attempts < 50 * n_words + 100:
        attempts += 1
        n = rng.randint(2, 6)
        piece = "".join(rng.choice(alphabet) for _ in range(n))
        tok = ("##" + piece) if rng.random() < 0.6 else piece
        if tok not in entries:
            entries[tok] = len(entries)
    return Vocabulary(entries=entries, unk_id=0, continuation_prefix="##")


def word_bpe_tables(words: Iterable[str], suffixes: Iterable[str] = (" ", ",", ".", ", ", ". ")) -> Tuple[Vocabulary, MergeTable]:
    """Hand-built BPE tables: each word is merged left to right from its characters,
    then with each suffix, so tokens like ``"the "`` or ``"of,"`` straddle delimiters."""
    entries: Dict[str, int] = {}
    ranks: Dict[Tuple[str, str], int] = {}

    def add(tok):
        if tok not in entries:
            entries[tok] = len(entries)

    def merge(a, b):
        if (a, b) not in ranks and a + b not in entries:
            ranks[(a, b)] = len(ranks)
        add(a + b)

    words = list(dict.fromkeys(words))
    for w in words:
        for c in w:
            add(c)
    for s in suffixes:
        for c in s:
            add(c)
    for w in words:
        for k in range(1, len(w)):
            merge(w[:k], w[k])
    for w in words:
        for s in suffixes:
            if len(s) == 1:
                merge(w, s)
            else:
                merge(w + s[0], s[1:])
    add("[UNK]")
    vocab = Vocabulary(entries=entries, unk_id=entries["[UNK]"])
    return vocab, MergeTable(ranks)
