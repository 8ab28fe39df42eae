"""Phoneme inventory, linguistic clusters and the combined confusion matrix."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

N_PHONEMES = 39
N_CLUSTERS = 16


def _data_text(name: str) -> str:
    return resources.files("pronlearn").joinpath("data", name).read_text(encoding="utf-8")


@dataclass(frozen=True)
class PhonemeInventory:
    symbols: tuple[str, ...]
    _ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_ids", {s: i for i, s in enumerate(self.symbols)})

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._ids

    def id(self, symbol: str) -> int:
        try:
            return self._ids[symbol]
        except KeyError:
            raise InputError(f"unknown phoneme {symbol!r}") from None

    def ids(self, symbols: Iterable[str]) -> np.ndarray:
        return np.array([self.id(s) for s in symbols], dtype=np.int64)

    def symbol(self, pid: int) -> str:
        return self.symbols[pid]


def load_phoneme_set(source: str) -> PhonemeInventory:
    """Parse a one-symbol-per-line inventory; ids follow line order."""
    symbols = []
    seen = set()
    for lineno, line in enumerate(source.splitlines(), 1):
        sym = line.strip()
        if not sym:
            continue
        if not sym.isascii() or not sym.isalpha() or not sym.islower():
            raise InputError(f"line {lineno}: unknown characters in phoneme {sym!r}")
        if sym in seen:
            raise InputError(f"line {lineno}: duplicate phoneme {sym!r}")
        seen.add(sym)
        symbols.append(sym)
    if len(symbols) != N_PHONEMES:
        raise InputError(f"expected {N_PHONEMES} phonemes, got {len(symbols)}")
    return PhonemeInventory(tuple(symbols))


def default_inventory() -> PhonemeInventory:
    return load_phoneme_set(_data_text("phonemes.txt"))


@dataclass(frozen=True)
class LinguisticClusters:
    clusters: tuple[frozenset, ...]
    inventory: PhonemeInventory

    def __post_init__(self):
        if len(self.clusters) != N_CLUSTERS:
            raise InputError(f"expected {N_CLUSTERS} clusters, got {len(self.clusters)}")
        seen: set = set()
        for c in self.clusters:
            if not c:
                raise InputError("empty linguistic cluster")
            overlap = seen & c
            if overlap:
                raise InputError(f"phoneme in more than one cluster: {sorted(overlap)}")
            seen |= c
        missing = set(self.inventory.symbols) - seen
        if missing:
            raise InputError(f"phonemes not in any cluster: {sorted(missing)}")
        extra = seen - set(self.inventory.symbols)
        if extra:
            raise InputError(f"unknown phonemes in clusters: {sorted(extra)}")

    def cluster_of(self, symbol: str) -> int:
        for i, c in enumerate(self.clusters):
            if symbol in c:
                return i
        raise InputError(f"unknown phoneme {symbol!r}")


def load_clusters(source: str, inventory: PhonemeInventory) -> LinguisticClusters:
    """One cluster per line, space-separated symbols."""
    clusters = [frozenset(line.split()) for line in source.splitlines() if line.strip()]
    return LinguisticClusters(tuple(clusters), inventory)


def default_clusters(inventory: PhonemeInventory | None = None) -> LinguisticClusters:
    return load_clusters(_data_text("clusters.txt"), inventory or default_inventory())


def linguistic_matrix(clusters: LinguisticClusters) -> np.ndarray:
    """Binary matrix: 0 for same-cluster pairs (diagonal included), 1 otherwise."""
    inv = clusters.inventory
    label = np.empty(len(inv), dtype=np.int64)
    for k, c in enumerate(clusters.clusters):
        for s in c:
            label[inv.id(s)] = k
    return (label[:, None] != label[None, :]).astype(np.float64)


def load_acoustic_raw(source: str, inventory: PhonemeInventory) -> np.ndarray:
    """Read the raw log-likelihood CSV into inventory order.

    Header row holds recognized symbols; first column the true symbol.
    """
    rows = list(csv.reader(io.StringIO(source)))
    if not rows:
        raise InputError("empty acoustic table")
    header = [h.strip() for h in rows[0][1:]]
    body = [r for r in rows[1:] if r]
    n = len(inventory)
    if len(header) != n or len(body) != n:
        raise InputError(f"acoustic table must be {n}x{n}, got {len(body)}x{len(header)}")
    if sorted(header) != sorted(inventory.symbols):
        raise InputError("acoustic table header does not match the phoneme inventory")
    col = [inventory.id(h) for h in header]
    table = np.full((n, n), np.nan)
    for lineno, row in enumerate(body, 2):
        if len(row) != n + 1:
            raise InputError(f"line {lineno}: expected {n + 1} fields, got {len(row)}")
        i = inventory.id(row[0].strip())
        try:
            table[i, col] = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise InputError(f"line {lineno}: {exc}") from None
    if np.isnan(table).any():
        raise InputError("acoustic table has missing or repeated rows")
    if not np.isfinite(table).all():
        raise InputError("acoustic table has non-finite values")
    return table


def normalize_acoustic(raw: np.ndarray) -> np.ndarray:
    """Sign-flip relative to each row's diagonal and scale by the global max.

    Negative differences clamp to zero; the diagonal is exactly zero.
    """
    raw = np.asarray(raw, dtype=np.float64)
    diff = np.diag(raw)[:, None] - raw
    z = diff.max()
    if not z > 0:
        raise InputError("acoustic table has no contrast")
    cost = np.clip(diff / z, 0.0, 1.0)
    np.fill_diagonal(cost, 0.0)
    return cost


class ConfusionMatrix:
    """Phoneme substitution dissimilarity table indexed by phoneme id.

    ``cost[i, j]`` is M(p_i, p_j), laid out like the acoustic table (row =
    true phoneme, column = recognized phoneme).  Not necessarily symmetric.
    """

    def __init__(self, cost: np.ndarray, inventory: PhonemeInventory):
        cost = np.array(cost, dtype=np.float64)
        n = len(inventory)
        if cost.shape != (n, n):
            raise InputError(f"confusion matrix must be {n}x{n}, got {cost.shape}")
        if (cost < 0).any() or not np.isfinite(cost).all():
            raise InputError("confusion matrix entries must be finite and nonnegative")
        if np.diag(cost).any():
            raise InputError("confusion matrix diagonal must be zero")
        cost.setflags(write=False)
        self.cost = cost
        self.inventory = inventory

    def __call__(self, p: str, q: str) -> float:
        return float(self.cost[self.inventory.id(p), self.inventory.id(q)])

    def scaled(self, factor: float) -> "ConfusionMatrix":
        return ConfusionMatrix(self.cost * factor, self.inventory)

    def symmetrized(self) -> "ConfusionMatrix":
        return ConfusionMatrix((self.cost + self.cost.T) / 2.0, self.inventory)

    def ids(self, symbols: Sequence[str]) -> np.ndarray:
        return self.inventory.ids(symbols)


def combine(acoustic: np.ndarray, linguistic: np.ndarray,
            inventory: PhonemeInventory) -> ConfusionMatrix:
    return ConfusionMatrix(np.asarray(acoustic) * np.asarray(linguistic), inventory)


def build_confusion_matrix(phonemes: str | None = None, clusters: str | None = None,
                           acoustic: str | None = None) -> ConfusionMatrix:
    """Build from file contents, falling back to the shipped defaults."""
    inv = load_phoneme_set(phonemes) if phonemes is not None else default_inventory()
    cl = load_clusters(clusters if clusters is not None else _data_text("clusters.txt"), inv)
    raw = load_acoustic_raw(acoustic if acoustic is not None else _data_text("acoustic_raw.csv"), inv)
    return combine(normalize_acoustic(raw), linguistic_matrix(cl), inv)


def default_confusion_matrix() -> ConfusionMatrix:
    return build_confusion_matrix()
