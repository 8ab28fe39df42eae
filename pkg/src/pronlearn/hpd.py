"""Hierarchical pronunciation determination.

The engine only reports the best score of a pronunciation list.  To recover
which candidate achieved it, the surviving candidate set is split by the
digit of one position at a time; the best-scoring segment fixes that digit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .candidate_space import (CandidateSpace, candidate_at, decode_batch, digits_to_ids,
                              id_table, phonemes_to_index)
from .lexicon import Pronunciation
from .phoneme_core import ConfusionMatrix
from .recognizer import score_ids

POLICIES = ("natural", "descending", "ascending")

# scores a batch of candidate id rows (ids, lengths) and returns only the best score
Scorer = Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True)
class DeterminationOrder:
    policy: str
    permutation: tuple[int, ...]  # table positions m, in the order they get fixed


@dataclass(frozen=True)
class CostEstimate:
    recognizer_runs: int
    prons_processed: int
    per_step: tuple[int, ...]

    def total(self, t_run: float, t_pron: float) -> float:
        return self.recognizer_runs * t_run + self.prons_processed * t_pron


def determination_order(space: CandidateSpace, policy: str = "descending") -> DeterminationOrder:
    natural = tuple(range(space.M, 0, -1))
    if policy == "natural":
        perm = natural
    elif policy == "descending":
        perm = tuple(sorted(natural, key=lambda m: -space.count(m)))
    elif policy == "ascending":
        perm = tuple(sorted(natural, key=space.count))
    else:
        raise ValueError(f"unknown order policy {policy!r}; expected one of {POLICIES}")
    return DeterminationOrder(policy, perm)


def cost_estimate(space: CandidateSpace, order: DeterminationOrder) -> CostEstimate:
    return cost_from_counts([space.count(m) for m in order.permutation])


def cost_from_counts(counts_in_order) -> CostEstimate:
    """Cost of fixing positions whose candidate counts are given in fixing order."""
    counts = list(counts_in_order)
    steps = tuple(math.prod(counts[k:]) for k in range(len(counts)))
    return CostEstimate(sum(counts), sum(steps), steps)


def list_scorer(observed: np.ndarray, m: ConfusionMatrix, lam: float = 1.0) -> Scorer:
    """Mono-gram scorer of bare candidates against an observed id sequence."""
    obs = np.asarray(observed, dtype=np.int64)
    return lambda ids, lengths: score_ids(obs, ids, lengths, m.cost, lam)


@dataclass
class StepTrace:
    position: int
    segments: list = field(default_factory=list)  # (n, phoneme, x_min, x_max, size, score)
    chosen: int = 0


@dataclass
class HPDResult:
    pron: Pronunciation
    score: float
    digits: tuple[int, ...]
    x: int
    cost: CostEstimate
    trace: list[StepTrace]


def determine_best_pron(space: CandidateSpace, scorer: Scorer, order: DeterminationOrder,
                        m: ConfusionMatrix) -> HPDResult:
    """Fix one position per round by scoring each digit's segment as a list.

    Ties between segments keep the smaller digit.  Only one segment is
    materialized at a time.
    """
    table = id_table(space, m)
    strides = space.strides
    counts = space.counts
    fixed: dict[int, int] = {}  # sequence position -> digit
    undetermined = [space.M - mm for mm in order.permutation]
    runs = 0
    steps = []
    trace = []
    best_score = None
    for mm in order.permutation:
        pos = space.M - mm
        undetermined.remove(pos)
        offset = sum(d * int(strides[p]) for p, d in fixed.items())
        grid = np.array([offset], dtype=np.int64)
        for p in undetermined:
            grid = (grid[:, None] + np.arange(counts[p], dtype=np.int64)[None, :] * strides[p]).ravel()
        step = StepTrace(mm)
        chosen, chosen_score = 0, -math.inf
        for n in range(counts[pos]):
            xs = grid + n * strides[pos]
            ids, lengths = digits_to_ids(space, decode_batch(space, xs), m, table)
            s = scorer(ids, lengths)
            runs += 1
            step.segments.append((n, space.candidates[pos][n], int(xs.min()), int(xs.max()), len(xs), s))
            if s > chosen_score:
                chosen, chosen_score = n, s
        steps.append(len(grid) * counts[pos])
        step.chosen = chosen
        fixed[pos] = chosen
        trace.append(step)
        best_score = chosen_score
    digits = tuple(fixed[p] for p in range(space.M))
    x = phonemes_to_index(space, digits)
    cost = CostEstimate(runs, sum(steps), tuple(steps))
    return HPDResult(candidate_at(space, x), best_score, digits, x, cost, trace)


def format_trace(result: HPDResult) -> str:
    lines = []
    for k, step in enumerate(result.trace, 1):
        lines.append(f"step {k}: determine p{step.position}")
        for n, ph, lo, hi, size, s in step.segments:
            mark = "*" if n == step.chosen else " "
            lines.append(f"  {mark} n{step.position}={n} ({ph or '<void>'})  x in [{lo}, {hi}]"
                         f"  size={size}  score={s:.4f}")
    lines.append(f"best: {' '.join(result.pron)}  x={result.x}  score={result.score:.4f}")
    c = result.cost
    lines.append(f"cost: runs={c.recognizer_runs}  prons={c.prons_processed}  "
                 f"per_step={list(c.per_step)}")
    return "\n".join(lines) + "\n"
