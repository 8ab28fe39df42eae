"""Candidate pronunciation pools around a baseline, with mixed-radix indexing.

Positions are numbered the way the tables print them: the leftmost phoneme is
position M and the rightmost is position 1, so position 1 is the fastest
varying digit of the pronunciation index ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .errors import InputError
from .lexicon import Pronunciation
from .phoneme_core import ConfusionMatrix

VOID = None  # deletion placeholder inside a candidate list
MAX_CANDIDATES = 2 ** 32


def phoneme_candidates(p: str, r: float, m: ConfusionMatrix) -> list[str]:
    """All ``q`` with ``m(p, q) < r``, ordered by (cost, phoneme id).

    ``p`` itself is always included, so ``r <= 0`` yields ``[p]``.
    """
    pid = m.inventory.id(p)
    row = m.cost[pid]
    keep = [q for q in range(len(row)) if row[q] < r or q == pid]
    keep.sort(key=lambda q: (row[q], q))
    return [m.inventory.symbol(q) for q in keep]


def effective_radius(length: int, r0: float, m_max: int) -> float:
    if length > m_max:
        return r0 * (m_max - 1) / (length - 1)
    return r0


@dataclass(frozen=True)
class CandidateSpace:
    base: Pronunciation
    radius: float
    candidates: tuple  # per sequence position, left to right; each a tuple of symbols/VOID

    def __post_init__(self):
        for pos, (p, cands) in enumerate(zip(self.base, self.candidates)):
            if p not in cands:
                raise ValueError(f"position {pos}: base phoneme {p!r} missing from candidates")
        if self.size > MAX_CANDIDATES:
            raise InputError(f"candidate space too large ({self.size} > 2^32); "
                             "lower the search radius or m_max")

    @property
    def M(self) -> int:
        return len(self.base)

    @property
    def counts(self) -> tuple[int, ...]:
        """N per sequence position (left to right, i.e. N_M ... N_1)."""
        return tuple(len(c) for c in self.candidates)

    @property
    def size(self) -> int:
        return prod(len(c) for c in self.candidates)

    def count(self, m: int) -> int:
        """N_m for table position ``m`` (1 = rightmost)."""
        return len(self.candidates[self.M - m])

    @property
    def strides(self) -> np.ndarray:
        """Per sequence position, the product of N over positions to its right."""
        counts = self.counts
        out = np.ones(self.M, dtype=np.int64)
        for pos in range(self.M - 2, -1, -1):
            out[pos] = out[pos + 1] * counts[pos + 1]
        return out

    def base_indices(self) -> tuple[int, ...]:
        return tuple(c.index(p) for p, c in zip(self.base, self.candidates))


def build_candidate_space(base: Sequence[str], r0: float, m_max: int, m: ConfusionMatrix,
                          allow_deletion: bool = False) -> CandidateSpace:
    if r0 < 0:
        raise ValueError("r0 must be nonnegative")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    base = tuple(base)
    if not base:
        raise ValueError("empty baseline pronunciation")
    r = effective_radius(len(base), r0, m_max)
    cands = []
    for p in base:
        lst = phoneme_candidates(p, r, m)
        if allow_deletion:
            lst.append(VOID)
        cands.append(tuple(lst))
    return CandidateSpace(base, r, tuple(cands))


def phonemes_to_index(space: CandidateSpace, n: Sequence[int]) -> int:
    """Digits ``(n_M, ..., n_1)`` to the pronunciation index ``x``."""
    if len(n) != space.M:
        raise ValueError(f"expected {space.M} indices, got {len(n)}")
    x = 0
    weight = 1
    # m runs 1..M, i.e. sequence positions from the right
    for m in range(1, space.M + 1):
        nm = n[space.M - m]
        big_n = space.count(m)
        if not 0 <= nm < big_n:
            raise IndexError(f"index n_{m}={nm} out of range [0, {big_n - 1}]")
        x += nm * weight
        weight *= big_n
    return x


def index_to_phonemes(space: CandidateSpace, x: int) -> tuple[int, ...]:
    if not 0 <= x < space.size:
        raise IndexError(f"x={x} out of range [0, {space.size - 1}]")
    digits = [0] * space.M
    weight = 1
    for m in range(1, space.M + 1):
        big_n = space.count(m)
        digits[space.M - m] = ((x - x % weight) // weight) % big_n
        weight *= big_n
    return tuple(digits)


def decode_batch(space: CandidateSpace, xs: np.ndarray) -> np.ndarray:
    """Vectorized :func:`index_to_phonemes`: (K,) indices -> (K, M) digits."""
    xs = np.asarray(xs, dtype=np.int64)
    counts = np.array(space.counts, dtype=np.int64)
    return (xs[:, None] // space.strides[None, :]) % counts[None, :]


def candidate_at(space: CandidateSpace, x: int) -> Pronunciation:
    digits = index_to_phonemes(space, x)
    out = tuple(c[n] for c, n in zip(space.candidates, digits) if c[n] is not VOID)
    if not out:
        raise InputError("empty candidate")
    return out


def id_table(space: CandidateSpace, m: ConfusionMatrix) -> list[np.ndarray]:
    """Per position, candidate phoneme ids with -1 standing for VOID."""
    return [np.array([-1 if c is VOID else m.inventory.id(c) for c in cands], dtype=np.int64)
            for cands in space.candidates]


def digits_to_ids(space: CandidateSpace, digits: np.ndarray, m: ConfusionMatrix,
                  table: list[np.ndarray] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(K, M) digits -> left-packed (K, M) phoneme ids and lengths (VOIDs dropped)."""
    table = table or id_table(space, m)
    ids = np.empty(digits.shape, dtype=np.int64)
    for pos, t in enumerate(table):
        ids[:, pos] = t[digits[:, pos]]
    void = ids < 0
    if not void.any():
        return ids, np.full(len(ids), space.M, dtype=np.int64)
    order = np.argsort(void, axis=1, kind="stable")
    ids = np.take_along_axis(ids, order, axis=1)
    lengths = space.M - void.sum(axis=1)
    if (lengths == 0).any():
        raise InputError("empty candidate")
    return ids, lengths


def outreach_distance(space: CandidateSpace, m: ConfusionMatrix) -> float:
    """Mean over positions of the costliest substitution candidate (VOIDs ignored)."""
    return position_outreach(space, m).mean()


def position_outreach(space: CandidateSpace, m: ConfusionMatrix) -> np.ndarray:
    out = np.zeros(space.M)
    for pos, (p, cands) in enumerate(zip(space.base, space.candidates)):
        out[pos] = max(m(p, q) for q in cands if q is not VOID)
    return out


def format_table(space: CandidateSpace) -> str:
    """Enumerate the space in the tabular layout: x, n_M..n_1, phoneme sequence."""
    head = ["x"] + [f"n{m}" for m in range(space.M, 0, -1)] + ["pronunciation"]
    lines = ["\t".join(head)]
    for x in range(space.size):
        digits = index_to_phonemes(space, x)
        pron = " ".join(c[n] for c, n in zip(space.candidates, digits) if c[n] is not VOID)
        lines.append("\t".join([str(x)] + [str(d) for d in digits] + [pron or "<empty>"]))
    return "\n".join(lines) + "\n"
