"""Normalized weighted Levenshtein distance and the grammar-wide name distance matrix."""
from __future__ import annotations

import hashlib
import struct
from typing import Sequence

import numpy as np

from .errors import InputError
from .lexicon import Grammar, Lexicon, Name, Pronunciation, format_grammar, format_lexicon
from .phoneme_core import ConfusionMatrix

INDEL_COST = 1.0
_CHUNK = 8192


def pron_distance(a: Sequence[str], b: Sequence[str], m: ConfusionMatrix,
                  indel: float = INDEL_COST) -> float:
    """Edit cost of ``a`` against ``b`` divided by the longer length.

    Substituting ``b[i]`` by ``a[j]`` costs ``m(a[j], b[i])``.
    """
    if not a or not b:
        raise ValueError("pronunciations must be nonempty")
    ai = m.ids(a)
    bi = m.ids(b)
    return _edit_cost(ai, bi, m.cost, indel) / max(len(ai), len(bi))


def _edit_cost(a: np.ndarray, b: np.ndarray, cost: np.ndarray, indel: float) -> float:
    # outer loop over b, inner over a; the batch kernel repeats this exact order
    prev = [j * indel for j in range(len(a) + 1)]
    for i in range(1, len(b) + 1):
        cur = [i * indel]
        col = cost[:, b[i - 1]]
        for j in range(1, len(a) + 1):
            cur.append(min(prev[j] + indel, prev[j - 1] + float(col[a[j - 1]]), cur[j - 1] + indel))
        prev = cur
    return prev[-1]


def batch_distance(obs: np.ndarray, cands: np.ndarray, lengths: np.ndarray | None,
                   cost: np.ndarray, indel: float = INDEL_COST) -> np.ndarray:
    """Distances from one observed id sequence to many candidate id rows.

    ``cands`` is (K, L), right-padded; ``lengths`` gives each row's true length
    (None means all L).  Returns a float64 array of K normalized distances,
    bit-identical to :func:`pron_distance` on each pair.
    """
    obs = np.asarray(obs, dtype=np.int64)
    cands = np.asarray(cands, dtype=np.int64)
    if cands.ndim != 2:
        raise ValueError("cands must be 2-D")
    k, width = cands.shape
    if lengths is None:
        lengths = np.full(k, width, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    out = np.empty(k, dtype=np.float64)
    for lo in range(0, k, _CHUNK):
        hi = min(lo + _CHUNK, k)
        out[lo:hi] = _batch_cost(obs, cands[lo:hi], lengths[lo:hi], cost, indel)
    return out / np.maximum(lengths, len(obs))


def _batch_cost(obs, cands, lengths, cost, indel):
    n_obs = len(obs)
    k, width = cands.shape
    safe = np.where(cands < 0, 0, cands)
    sub = cost[obs[:, None, None], safe[None, :, :]]  # (n_obs, k, width)
    prev = np.arange(n_obs + 1, dtype=np.float64)[:, None] * indel
    prev = np.repeat(prev, k, axis=1)
    cur = np.empty_like(prev)
    result = np.empty(k, dtype=np.float64)
    for i in range(1, width + 1):
        cur[0] = i * indel
        best = np.minimum(prev[1:] + indel, prev[:-1] + sub[:, :, i - 1])
        for j in range(1, n_obs + 1):
            np.minimum(best[j - 1], cur[j - 1] + indel, out=cur[j])
        done = lengths == i
        if done.any():
            result[done] = cur[n_obs, done]
        prev, cur = cur, prev
    return result


def align(a: Sequence[str], b: Sequence[str], m: ConfusionMatrix,
          indel: float = INDEL_COST) -> list[tuple[str, int | None, int | None, float]]:
    """Minimum-cost alignment of ``a`` (observed) against ``b`` (reference).

    Returns ops ``(kind, ia, ib, cost)`` in left-to-right order, with kind one
    of ``match``/``sub``/``ins`` (extra in ``a``)/``del`` (missing from ``a``).
    Ties prefer the diagonal, then deletion, then insertion.
    """
    ai, bi = m.ids(a), m.ids(b)
    na, nb = len(ai), len(bi)
    d = np.zeros((nb + 1, na + 1))
    d[0, :] = np.arange(na + 1) * indel
    d[:, 0] = np.arange(nb + 1) * indel
    for i in range(1, nb + 1):
        for j in range(1, na + 1):
            d[i, j] = min(d[i - 1, j] + indel, d[i - 1, j - 1] + m.cost[ai[j - 1], bi[i - 1]],
                          d[i, j - 1] + indel)
    ops = []
    i, j = nb, na
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            c = m.cost[ai[j - 1], bi[i - 1]]
            if d[i, j] == d[i - 1, j - 1] + c:
                kind = "match" if ai[j - 1] == bi[i - 1] else "sub"
                ops.append((kind, j - 1, i - 1, float(c)))
                i, j = i - 1, j - 1
                continue
        if i > 0 and d[i, j] == d[i - 1, j] + indel:
            ops.append(("del", None, i - 1, indel))
            i -= 1
        else:
            ops.append(("ins", j - 1, None, indel))
            j -= 1
    ops.reverse()
    return ops


def name_pronunciation(name: Name, lex: Lexicon) -> Pronunciation:
    out: list[str] = []
    for word in name:
        if word not in lex:
            raise InputError(f"no pronunciation for {word}")
        out.extend(lex.canonical(word))
    return tuple(out)


def pad_prons(prons: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([len(p) for p in prons], dtype=np.int64)
    mat = np.full((len(prons), int(lengths.max())), -1, dtype=np.int64)
    for r, p in enumerate(prons):
        mat[r, :len(p)] = p
    return mat, lengths


class NameDistanceMatrix:
    """G x G canonical-pronunciation distances, dense or computed per row on demand."""

    def __init__(self, grammar: Grammar, lex: Lexicon, m: ConfusionMatrix, lazy: bool = False):
        self.grammar = grammar
        self._ids = [m.ids(name_pronunciation(n, lex)) for n in grammar]
        self._cands, self._lengths = pad_prons(self._ids)
        self._cost = m.cost
        self.lazy = lazy
        self._rows: dict[int, np.ndarray] = {}
        self.dist: np.ndarray | None = None
        if not lazy:
            self.dist = np.vstack([self._compute_row(s) for s in range(len(grammar))])

    @classmethod
    def from_array(cls, grammar: Grammar, dist: np.ndarray) -> "NameDistanceMatrix":
        obj = cls.__new__(cls)
        obj.grammar, obj.lazy, obj._rows = grammar, False, {}
        obj.dist = np.asarray(dist, dtype=np.float64)
        return obj

    def _compute_row(self, s: int) -> np.ndarray:
        return batch_distance(self._ids[s], self._cands, self._lengths, self._cost)

    def row(self, s: int) -> np.ndarray:
        if self.dist is not None:
            return self.dist[s]
        if s not in self._rows:
            self._rows[s] = self._compute_row(s)
        return self._rows[s]

    def __getitem__(self, st):
        s, t = st
        return float(self.row(s)[t])

    def __len__(self):
        return len(self.grammar)

    def dense(self) -> np.ndarray:
        if self.dist is not None:
            return self.dist
        return np.vstack([self.row(s) for s in range(len(self.grammar))])


def build_name_distance_matrix(grammar: Grammar, lex: Lexicon, m: ConfusionMatrix,
                               lazy: bool = False) -> NameDistanceMatrix:
    return NameDistanceMatrix(grammar, lex, m, lazy=lazy)


_MAGIC = b"PLNDM\x00\x01\x00"


def inputs_checksum(grammar: Grammar, lex: Lexicon, m: ConfusionMatrix) -> bytes:
    h = hashlib.sha256()
    h.update(format_grammar(grammar).encode())
    h.update(format_lexicon(lex).encode())
    h.update(np.ascontiguousarray(m.cost).tobytes())
    return h.digest()


def save_matrix_cache(path, ndm: NameDistanceMatrix, checksum: bytes) -> None:
    dense = ndm.dense().astype("<f4")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", dense.shape[0]))
        fh.write(checksum)
        fh.write(dense.tobytes())


def load_matrix_cache(path, grammar: Grammar, checksum: bytes) -> NameDistanceMatrix | None:
    """Return the cached matrix, or None when it is stale or unreadable."""
    try:
        with open(path, "rb") as fh:
            if fh.read(len(_MAGIC)) != _MAGIC:
                return None
            (g,) = struct.unpack("<I", fh.read(4))
            if g != len(grammar) or fh.read(len(checksum)) != checksum:
                return None
            data = np.frombuffer(fh.read(), dtype="<f4")
    except (OSError, struct.error):
        return None
    if data.size != g * g:
        return None
    return NameDistanceMatrix.from_array(grammar, data.reshape(g, g))
