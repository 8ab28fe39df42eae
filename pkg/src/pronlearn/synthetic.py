"""Synthetic name worlds and corpora for exercising the learner end to end."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError
from .lexicon import Grammar, Lexicon, Name, Utterance, name_key
from .phoneme_core import ConfusionMatrix, LinguisticClusters, default_clusters
from .recognizer import ChannelModel, synthesize_utterance

VOWELS = ("aa ae ah ao aw ay eh er ey ih iy ow oy uh uw").split()
CONSONANTS = ("b ch d dh f g hh jh k l m n ng p r s sh t th v w y z zh").split()


@dataclass
class Variant:
    """Speakers of ``name`` say ``word`` as ``pron`` in a ``fraction`` of instances."""
    name: Name
    word: str
    fraction: float
    pron: tuple


@dataclass
class World:
    grammar: Grammar
    lexicon: Lexicon
    variants: list[Variant] = field(default_factory=list)
    confusers: dict = field(default_factory=dict)  # variant name -> confuser name


def _random_word(rng: np.random.Generator) -> tuple:
    length = int(rng.integers(3, 6))
    start_vowel = rng.random() < 0.3
    out = []
    for k in range(length):
        vowel = (k % 2 == 0) == start_vowel
        pool = VOWELS if vowel else CONSONANTS
        out.append(pool[int(rng.integers(len(pool)))])
    return tuple(out)


def confusable_triples(m: ConfusionMatrix, clusters: LinguisticClusters, r0: float) -> dict:
    """For each phoneme p: (q, q2) with q a learnable cross-cluster variant of p
    and q2 a third-cluster phoneme that wins over p when q is heard."""
    out: dict = {}
    syms = m.inventory.symbols
    for p in syms:
        cp = clusters.cluster_of(p)
        for q in syms:
            cq = clusters.cluster_of(q)
            if cq == cp or not m(p, q) < r0:
                continue
            for q2 in syms:
                if clusters.cluster_of(q2) in (cp, cq):
                    continue
                if m(q, q2) < m(q, p):
                    out.setdefault(p, []).append((q, q2))
    return out


def make_world(m: ConfusionMatrix, n_names: int = 200, variant_fraction: float = 0.25,
               r0: float = 0.25, seed: int = 0, clusters: LinguisticClusters | None = None,
               n_given: int = 40) -> World:
    """Build a grammar where a quarter of the names are spoken with a variant.

    Each variant name gets a confuser: a name whose surname differs by a
    substitution that the variant lands closer to than the canonical form.
    Surnames are unique per name so replacing one never touches another name.
    """
    rng = np.random.default_rng(seed)
    clusters = clusters or default_clusters(m.inventory)
    triples = confusable_triples(m, clusters, r0)
    n_variant = int(round(n_names * variant_fraction))
    n_plain = n_names - 2 * n_variant
    if n_plain < 0:
        raise InputError("variant_fraction too large: every variant needs a confuser")
    lex = Lexicon()
    used = set()

    def fresh_word(prefix: str, pron=None) -> str:
        while True:
            p = pron if pron is not None else _random_word(rng)
            if p not in used:
                break
            if pron is not None:
                return ""
        used.add(p)
        word = f"{prefix}{len(lex)}"
        lex.add(word, p)
        return word

    given = [fresh_word("g") for _ in range(n_given)]
    middle = [fresh_word("mi") for _ in range(n_given // 2)]

    def first_part():
        parts = [given[int(rng.integers(len(given)))]]
        if rng.random() < 0.3:
            parts.append(middle[int(rng.integers(len(middle)))])
        return parts

    names: list[Name] = []
    variants: list[Variant] = []
    confusers: dict = {}
    while len(variants) < n_variant:
        surname_pron = _random_word(rng)
        spots = [j for j, p in enumerate(surname_pron) if p in triples]
        if not spots or surname_pron in used:
            continue
        j = spots[int(rng.integers(len(spots)))]
        q, q2 = triples[surname_pron[j]][int(rng.integers(len(triples[surname_pron[j]])))]
        var = surname_pron[:j] + (q,) + surname_pron[j + 1:]
        conf = surname_pron[:j] + (q2,) + surname_pron[j + 1:]
        if var in used or conf in used:
            continue
        head = first_part()
        w = fresh_word("s", surname_pron)
        wc = fresh_word("s", conf)
        name, conf_name = tuple(head + [w]), tuple(head + [wc])
        names.extend([name, conf_name])
        variants.append(Variant(name, w, 1.0, var))
        confusers[name] = conf_name
    for _ in range(n_plain):
        names.append(tuple(first_part() + [fresh_word("s")]))
    order = rng.permutation(len(names))
    grammar = Grammar([names[i] for i in order])
    return World(grammar, lex, variants, confusers)


def synthesize_corpus(grammar: Grammar, lex: Lexicon, variants: Sequence[Variant],
                      channel: ChannelModel, m: ConfusionMatrix, per_name: int = 4,
                      prefix: str = "") -> list[Utterance]:
    """``per_name`` utterances of every grammar name.

    For a variant covering fraction f, the first round(f * per_name) instances
    of that name use the variant pronunciation.
    """
    by_name: dict = {}
    for v in variants:
        by_name.setdefault(tuple(v.name), []).append(v)
    corpus = []
    for idx, name in enumerate(grammar):
        for k in range(per_name):
            intended = []
            for word in name:
                pron = lex.canonical(word)
                for v in by_name.get(name, ()):
                    if v.word == word and k < round(v.fraction * per_name):
                        pron = tuple(v.pron)
                intended.extend(pron)
            iid = f"{prefix}{idx:05d}-{k:02d}"
            corpus.append(synthesize_utterance(name, lex, intended, channel, m, iid))
    return corpus


def parse_variants(text: str, grammar: Grammar | None = None) -> list[Variant]:
    """Tab-separated ``name, word, fraction, phonemes``; name ``*`` means every
    grammar name containing the word."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 4:
            raise InputError(f"variants line {lineno}: expected 4 tab-separated fields")
        name, word, frac, pron = fields
        try:
            fraction = float(frac)
        except ValueError:
            raise InputError(f"variants line {lineno}: bad fraction {frac!r}") from None
        if not 0.0 <= fraction <= 1.0:
            raise InputError(f"variants line {lineno}: fraction must lie in [0, 1]")
        if name == "*":
            if grammar is None:
                raise InputError(f"variants line {lineno}: '*' needs a grammar")
            targets = [grammar.names[i] for i in grammar.names_with_word(word)]
        else:
            targets = [tuple(name.split())]
        for t in targets:
            if word not in t:
                raise InputError(f"variants line {lineno}: {word!r} not in name {name_key(t)!r}")
            out.append(Variant(t, word, fraction, tuple(pron.split())))
    return out


def format_variants(variants: Sequence[Variant]) -> str:
    return "".join(f"{name_key(v.name)}\t{v.word}\t{v.fraction:g}\t{' '.join(v.pron)}\n"
                   for v in variants)
