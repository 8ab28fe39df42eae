"""Lexicon, grammar and corpus containers with their text/JSONL formats."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import InputError
from .phoneme_core import PhonemeInventory

Pronunciation = tuple  # tuple[str, ...] of phoneme symbols
Name = tuple  # tuple[str, ...] of words


def parse_pron(text: str | Sequence[str], inventory: PhonemeInventory | None = None) -> Pronunciation:
    symbols = tuple(text.split()) if isinstance(text, str) else tuple(text)
    if not symbols:
        raise InputError("empty pronunciation")
    if inventory is not None:
        for s in symbols:
            if s not in inventory:
                raise InputError(f"unknown phoneme {s!r}")
    return symbols


def name_key(name: Name) -> str:
    return " ".join(name)


class Lexicon:
    """Word -> ordered list of pronunciations.  The first entry is canonical."""

    def __init__(self, entries: dict | None = None):
        self._entries: dict[str, list[Pronunciation]] = {}
        for word, prons in (entries or {}).items():
            for p in prons:
                self.add(word, p)

    def __contains__(self, word):
        return word in self._entries

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        return isinstance(other, Lexicon) and self._entries == other._entries

    def words(self):
        return list(self._entries)

    def prons(self, word: str) -> list[Pronunciation]:
        try:
            return list(self._entries[word])
        except KeyError:
            raise InputError(f"no pronunciation for {word}") from None

    def canonical(self, word: str) -> Pronunciation:
        return self.prons(word)[0]

    def add(self, word: str, pron: Sequence[str]) -> None:
        pron = tuple(pron)
        lst = self._entries.setdefault(word, [])
        if pron not in lst:
            lst.append(pron)

    def replace(self, word: str, prons: Iterable[Sequence[str]]) -> None:
        new = []
        for p in prons:
            p = tuple(p)
            if p not in new:
                new.append(p)
        if not new:
            raise ValueError(f"cannot set an empty pronunciation list for {word}")
        self._entries[word] = new

    def copy(self) -> "Lexicon":
        lex = Lexicon()
        lex._entries = {w: list(p) for w, p in self._entries.items()}
        return lex

    def with_added(self, word: str, pron: Sequence[str]) -> "Lexicon":
        lex = self.copy()
        lex.add(word, pron)
        return lex


def parse_lexicon(text: str, inventory: PhonemeInventory | None = None) -> Lexicon:
    """``word<2 spaces>ph ph ph`` per line; repeated words add alternates."""
    lex = Lexicon()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith(";;;"):
            continue
        word, sep, rest = line.partition("  ")
        word = word.strip()
        if not sep or not word or " " in word or not rest.strip():
            raise InputError(f"lexicon line {lineno}: expected 'word  phonemes'")
        try:
            lex.add(word, parse_pron(rest, inventory))
        except InputError as exc:
            raise InputError(f"lexicon line {lineno}: {exc}") from None
    return lex


def format_lexicon(lex: Lexicon) -> str:
    lines = []
    for word in lex:
        for p in lex.prons(word):
            lines.append(f"{word}  {' '.join(p)}")
    return "\n".join(lines) + ("\n" if lines else "")


class Grammar:
    """Ordered list of unique names (word tuples)."""

    def __init__(self, names: Iterable[Sequence[str]]):
        self.names: list[Name] = [tuple(n) for n in names]
        if not self.names:
            raise InputError("grammar must contain at least one name")
        self._index = {}
        for i, n in enumerate(self.names):
            if not n:
                raise InputError(f"grammar entry {i + 1} is empty")
            if n in self._index:
                raise InputError(f"duplicate name in grammar: {name_key(n)!r}")
            self._index[n] = i

    def __len__(self):
        return len(self.names)

    def __iter__(self) -> Iterator[Name]:
        return iter(self.names)

    def __contains__(self, name):
        return tuple(name) in self._index

    def index(self, name: Sequence[str]) -> int:
        try:
            return self._index[tuple(name)]
        except KeyError:
            raise InputError(f"name not in grammar: {name_key(name)!r}") from None

    def words(self) -> list[str]:
        seen = dict.fromkeys(w for n in self.names for w in n)
        return list(seen)

    def names_with_word(self, word: str) -> list[int]:
        return [i for i, n in enumerate(self.names) if word in n]

    def subset(self, names: Iterable[Sequence[str]]) -> "Grammar":
        return Grammar(names)


def parse_grammar(text: str) -> Grammar:
    names, seen = [], {}
    for lineno, line in enumerate(text.splitlines(), 1):
        name = tuple(line.split())
        if not name:
            continue
        if name in seen:
            raise InputError(f"grammar line {lineno}: duplicate of line {seen[name]}")
        seen[name] = lineno
        names.append(name)
    return Grammar(names)


def format_grammar(grammar: Grammar) -> str:
    return "".join(name_key(n) + "\n" for n in grammar)


@dataclass(frozen=True)
class Utterance:
    instance_id: str
    truth: Name
    observed: Pronunciation

    def __post_init__(self):
        if not self.observed:
            raise InputError(f"utterance {self.instance_id}: empty observation")


def parse_corpus(text: str, inventory: PhonemeInventory | None = None) -> list[Utterance]:
    corpus = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            utt = Utterance(str(rec["instance_id"]), tuple(rec["truth"].split()),
                            parse_pron(rec["observed"], inventory))
        except (ValueError, KeyError, AttributeError, InputError) as exc:
            raise InputError(f"corpus line {lineno}: {exc}") from None
        if utt.instance_id in seen:
            raise InputError(f"corpus line {lineno}: duplicate instance_id {utt.instance_id!r}")
        seen.add(utt.instance_id)
        corpus.append(utt)
    return corpus


def format_corpus(corpus: Iterable[Utterance]) -> str:
    return "".join(
        json.dumps({"instance_id": u.instance_id, "truth": name_key(u.truth),
                    "observed": " ".join(u.observed)}) + "\n"
        for u in corpus)


def check_corpus(corpus: Iterable[Utterance], grammar: Grammar) -> None:
    for u in corpus:
        if u.truth not in grammar:
            raise InputError(f"utterance {u.instance_id}: truth {name_key(u.truth)!r} not in grammar")
