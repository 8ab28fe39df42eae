"""Grammar-based recognition and mono-gram scoring over a simulated channel.

The acoustic engine is replaced by a confusion-matrix score: a candidate
pronunciation scores ``exp(-lam * distance(observed, candidate))``.  List
scoring returns only the best score, never which pronunciation produced it.
"""
from __future__ import annotations

import abc
import itertools
import math
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .lexicon import Grammar, Lexicon, Name, Pronunciation, Utterance
from .phoneme_core import ConfusionMatrix
from .pron_space import INDEL_COST, batch_distance, name_pronunciation, pad_prons

MAX_NAME_PRONS = 256
NO_MATCH = None


def distance_to_score(d: float, lam: float = 1.0) -> float:
    return math.exp(-lam * float(d))


def score_pron(observed: Sequence[str], candidate: Sequence[str], m: ConfusionMatrix,
               lam: float = 1.0) -> float:
    return score_pron_list(observed, [candidate], m, lam)


def score_pron_list(observed: Sequence[str], prons: Sequence[Sequence[str]], m: ConfusionMatrix,
                    lam: float = 1.0) -> float:
    """Best score over ``prons``; the winning pronunciation is not reported."""
    if len(prons) == 0:
        raise ValueError("empty pronunciation list")
    cands, lengths = pad_prons([m.ids(p) for p in prons])
    return score_ids(m.ids(observed), cands, lengths, m.cost, lam)


def score_ids(obs: np.ndarray, cands: np.ndarray, lengths: np.ndarray | None,
              cost: np.ndarray, lam: float = 1.0, indel: float = INDEL_COST) -> float:
    """Id-level list scoring used by the hierarchical search."""
    if len(cands) == 0:
        raise ValueError("empty pronunciation list")
    return distance_to_score(batch_distance(obs, cands, lengths, cost, indel).min(), lam)


@dataclass(frozen=True)
class RecognitionResult:
    hypothesis: Name | None
    score: float | None

    def __post_init__(self):
        if (self.hypothesis is None) != (self.score is None):
            raise ValueError("score must be present iff there is a hypothesis")


def name_prons(name: Name, lex: Lexicon) -> list[Pronunciation]:
    """Every full-name pronunciation: cross product of the words' lists."""
    lists = []
    for word in name:
        if word not in lex:
            raise InputError(f"no pronunciation for {word}")
        lists.append(lex.prons(word))
    total = math.prod(len(x) for x in lists)
    if total > MAX_NAME_PRONS:
        raise InputError(f"name {' '.join(name)!r} has {total} pronunciations "
                         f"(limit {MAX_NAME_PRONS})")
    return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*lists)]


@dataclass
class PronTable:
    """All pronunciations of a set of names, padded, with the owning name slot."""
    ids: np.ndarray
    lengths: np.ndarray
    owner: np.ndarray  # slot of each row; rows are grouped by slot
    starts: np.ndarray  # first row of each slot

    @classmethod
    def build(cls, names: Sequence[Name], lex: Lexicon, m: ConfusionMatrix) -> "PronTable":
        rows, owner = [], []
        for slot, name in enumerate(names):
            for p in name_prons(name, lex):
                rows.append(m.ids(p))
                owner.append(slot)
        ids, lengths = pad_prons(rows)
        owner = np.array(owner, dtype=np.int64)
        starts = np.searchsorted(owner, np.arange(len(names)))
        return cls(ids, lengths, owner, starts)

    def min_distances(self, obs: np.ndarray, cost: np.ndarray, indel: float = INDEL_COST) -> np.ndarray:
        d = batch_distance(obs, self.ids, self.lengths, cost, indel)
        return np.minimum.reduceat(d, self.starts)


class Recognizer(abc.ABC):
    """What the learner needs from a recognition engine."""

    grammar: Grammar

    @abc.abstractmethod
    def recognize(self, u: Utterance) -> RecognitionResult:
        ...

    @abc.abstractmethod
    def score_list(self, observed: Sequence[str], prons: Sequence[Sequence[str]]) -> float:
        """Mono-gram mode: best score over a pronunciation list."""


class SimulatedRecognizer(Recognizer):
    def __init__(self, grammar: Grammar, lex: Lexicon, m: ConfusionMatrix, lam: float = 1.0,
                 reject_threshold: float = 0.0, indel: float = INDEL_COST):
        self.grammar = grammar
        self.lex = lex
        self.m = m
        self.lam = lam
        self.reject_threshold = reject_threshold
        self.indel = indel
        self.table = PronTable.build(grammar.names, lex, m)

    def name_distances(self, observed: Sequence[str]) -> np.ndarray:
        return self.table.min_distances(self.m.ids(observed), self.m.cost, self.indel)

    def decide(self, distances: np.ndarray) -> RecognitionResult:
        best = int(np.argmin(distances))  # first minimum = earliest name
        score = distance_to_score(distances[best], self.lam)
        if score < self.reject_threshold:
            return RecognitionResult(NO_MATCH, None)
        return RecognitionResult(self.grammar.names[best], score)

    def recognize(self, u: Utterance) -> RecognitionResult:
        return self.decide(self.name_distances(u.observed))

    def score_list(self, observed, prons) -> float:
        cands, lengths = pad_prons([self.m.ids(p) for p in prons])
        return score_ids(self.m.ids(observed), cands, lengths, self.m.cost, self.lam, self.indel)


def recognize(grammar: Grammar, lex: Lexicon, u: Utterance, m: ConfusionMatrix,
              reject_threshold: float = 0.0, lam: float = 1.0) -> RecognitionResult:
    return SimulatedRecognizer(grammar, lex, m, lam, reject_threshold).recognize(u)


@dataclass(frozen=True)
class ChannelModel:
    temperature: float = 10.0
    rho: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")

    def rng(self, instance_id: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(instance_id.encode())])


def corrupt(pron: Sequence[str], channel: ChannelModel, m: ConfusionMatrix,
            rng: np.random.Generator) -> Pronunciation:
    out = []
    for p in pron:
        if channel.rho > 0 and rng.random() < channel.rho:
            pid = m.inventory.id(p)
            w = np.exp(-channel.temperature * m.cost[pid])
            w[pid] = 0.0
            q = rng.choice(len(w), p=w / w.sum())
            out.append(m.inventory.symbol(q))
        else:
            out.append(p)
    return tuple(out)


def synthesize_utterance(truth: Name, lex: Lexicon, variant: Sequence[str] | None,
                         channel: ChannelModel, m: ConfusionMatrix,
                         instance_id: str) -> Utterance:
    """Speak ``truth`` (or its ``variant`` pronunciation) through the noisy channel."""
    intended = tuple(variant) if variant is not None else name_pronunciation(truth, lex)
    observed = corrupt(intended, channel, m, channel.rng(instance_id))
    return Utterance(instance_id, tuple(truth), observed)
