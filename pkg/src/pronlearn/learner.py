"""Lexicon learning: errors -> regional namesets -> per-instance search -> pruning -> update."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .candidate_space import (CandidateSpace, build_candidate_space, position_outreach)
from .errors import InputError
from .hpd import POLICIES, determination_order, determine_best_pron
from .lexicon import Grammar, Lexicon, Name, Pronunciation, Utterance, check_corpus, name_key
from .phoneme_core import ConfusionMatrix
from .pron_space import (INDEL_COST, NameDistanceMatrix, align, batch_distance,
                         build_name_distance_matrix)
from .recognizer import PronTable, RecognitionResult, SimulatedRecognizer, distance_to_score

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnConfig:
    r0: float = 0.25
    m_max: int = 6
    k1: int = 3
    k2: int = 2
    order_policy: str = "descending"
    reject_threshold: float = 0.0
    lam: float = 1.0
    allow_deletion: bool = False
    verify_replacement: bool = True

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if self.m_max < 1 or self.k1 < 1 or self.k2 < 1:
            raise ValueError("m_max, k1 and k2 must be >= 1")
        if self.order_policy not in POLICIES:
            raise ValueError(f"order_policy must be one of {POLICIES}")


class Evaluator:
    """Recognition accuracy over corpus subsets under lexicon overlays.

    Baseline name distances are cached per utterance; an overlay (word ->
    replacement pronunciation list) only rescores the names that contain one
    of its words.
    """

    def __init__(self, corpus: Sequence[Utterance], grammar: Grammar, lex: Lexicon,
                 m: ConfusionMatrix, cfg: LearnConfig):
        check_corpus(corpus, grammar)
        self.corpus = list(corpus)
        self.grammar = grammar
        self.lex = lex
        self.m = m
        self.cfg = cfg
        self.recognizer = SimulatedRecognizer(grammar, lex, m, cfg.lam, cfg.reject_threshold)
        self._obs = [m.ids(u.observed) for u in self.corpus]
        self._truth = np.array([grammar.index(u.truth) for u in self.corpus], dtype=np.int64)
        self._base_rows: dict[int, np.ndarray] = {}
        self._tables: dict = {}
        self._word_names: dict[str, list[int]] = {}
        for i, name in enumerate(grammar):
            for w in dict.fromkeys(name):
                self._word_names.setdefault(w, []).append(i)
        self.by_name: dict[int, list[int]] = {}
        for k, t in enumerate(self._truth):
            self.by_name.setdefault(int(t), []).append(k)

    def names_with(self, word: str) -> list[int]:
        return self._word_names.get(word, [])

    def instances_of(self, names: Iterable[int]) -> list[int]:
        out = []
        for n in sorted(set(names)):
            out.extend(self.by_name.get(n, []))
        return out

    def base_distances(self, k: int) -> np.ndarray:
        row = self._base_rows.get(k)
        if row is None:
            row = self.recognizer.table.min_distances(self._obs[k], self.m.cost)
            self._base_rows[k] = row
        return row

    def _overlay_table(self, overlay: dict) -> tuple[list[int], PronTable | None]:
        key = tuple(sorted((w, tuple(p)) for w, p in overlay.items()))
        hit = self._tables.get(key)
        if hit is None:
            names = sorted({n for w in overlay for n in self.names_with(w)})
            table = None
            if names:
                lex = self.lex.copy()
                for w, prons in overlay.items():
                    lex.replace(w, prons)
                table = PronTable.build([self.grammar.names[n] for n in names], lex, self.m)
            hit = (names, table)
            if len(self._tables) > 4096:
                self._tables.clear()
            self._tables[key] = hit
        return hit

    def distances(self, k: int, overlay: dict | None = None) -> np.ndarray:
        row = self.base_distances(k)
        if not overlay:
            return row
        names, table = self._overlay_table(overlay)
        if table is None:
            return row
        row = row.copy()
        row[names] = table.min_distances(self._obs[k], self.m.cost)
        return row

    def result(self, k: int, overlay: dict | None = None) -> RecognitionResult:
        return self.recognizer.decide(self.distances(k, overlay))

    def correct(self, instances: Sequence[int], overlay: dict | None = None) -> np.ndarray:
        out = np.zeros(len(instances), dtype=bool)
        for j, k in enumerate(instances):
            res = self.result(k, overlay)
            out[j] = res.hypothesis is not None and self.grammar.index(res.hypothesis) == self._truth[k]
        return out

    def accuracy(self, instances: Sequence[int], overlay: dict | None = None) -> float:
        if not instances:
            return 0.0
        return float(self.correct(instances, overlay).mean())


@dataclass
class ErrorSet:
    entries: list  # (Utterance, hypothesis Name or None)

    def __len__(self):
        return len(self.entries)

    def by_name(self) -> dict[Name, list]:
        out: dict = {}
        for u, hyp in self.entries:
            out.setdefault(u.truth, []).append((u, hyp))
        return out


def collect_errors(corpus, grammar, lex, m, cfg: LearnConfig,
                   evaluator: Evaluator | None = None) -> ErrorSet:
    ev = evaluator or Evaluator(corpus, grammar, lex, m, cfg)
    entries = []
    for k, u in enumerate(ev.corpus):
        res = ev.result(k)
        if res.hypothesis != u.truth:
            entries.append((u, res.hypothesis))
    return ErrorSet(entries)


@dataclass(frozen=True)
class RegionalNameset:
    target: int
    members: frozenset
    radius_used: float


def word_space(word_pron: Sequence[str], cfg: LearnConfig, m: ConfusionMatrix) -> CandidateSpace:
    return build_candidate_space(word_pron, cfg.r0, cfg.m_max, m, cfg.allow_deletion)


def name_outreach(name: Name, lex: Lexicon, cfg: LearnConfig, m: ConfusionMatrix) -> float:
    """Outreach of the concatenated word spaces: a length-weighted mean of word outreach."""
    per_position = np.concatenate([position_outreach(word_space(lex.canonical(w), cfg, m), m)
                                   for w in name])
    return float(per_position.mean())


def regional_nameset(target: int, d_t: float, ndm: NameDistanceMatrix) -> RegionalNameset:
    row = ndm.row(target)
    members = set(np.flatnonzero(row <= d_t).tolist())
    members.add(target)
    return RegionalNameset(target, frozenset(members), d_t)


def identify_error_words(truth: Name, lex: Lexicon, u: Utterance, m: ConfusionMatrix) -> list[int]:
    """Word positions (0-based) whose aligned edit cost is above the name's mean.

    The costliest word is always flagged; ties go to the last word.
    """
    canon = []
    owner = []
    for w_idx, word in enumerate(truth):
        p = lex.canonical(word)
        canon.extend(p)
        owner.extend([w_idx] * len(p))
    costs = np.zeros(len(truth))
    last = None
    pending = 0.0  # insertions before the first reference phoneme
    for kind, _, ib, c in align(u.observed, canon, m):
        if ib is not None:
            last = owner[ib]
            costs[last] += c + pending
            pending = 0.0
        elif last is None:
            pending += c
        else:
            costs[last] += c
    if pending:
        costs[-1] += pending
    top = len(costs) - 1 - int(np.argmax(costs[::-1]))
    flagged = set(np.flatnonzero(costs > costs.mean()).tolist())
    flagged.add(top)
    return sorted(flagged)


def _embed(prefix: np.ndarray, ids: np.ndarray, lengths: np.ndarray,
           suffix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k, width = ids.shape
    if (lengths == width).all():
        parts = [np.broadcast_to(prefix, (k, len(prefix))), ids, np.broadcast_to(suffix, (k, len(suffix)))]
        return np.hstack(parts), np.full(k, len(prefix) + width + len(suffix), dtype=np.int64)
    out = np.full((k, len(prefix) + width + len(suffix)), -1, dtype=np.int64)
    out[:, :len(prefix)] = prefix
    out[:, len(prefix):len(prefix) + width] = ids
    cols = len(prefix) + lengths[:, None] + np.arange(len(suffix))[None, :]
    np.put_along_axis(out, cols, np.broadcast_to(suffix, cols.shape), axis=1)
    return out, len(prefix) + lengths + len(suffix)


def embedded_scorer(u: Utterance, truth: Name, word_pos: int, lex: Lexicon,
                    m: ConfusionMatrix, lam: float = 1.0):
    """Mono-gram scorer: candidate word prons placed inside the canonical name."""
    prefix = m.ids([p for w in truth[:word_pos] for p in lex.canonical(w)])
    suffix = m.ids([p for w in truth[word_pos + 1:] for p in lex.canonical(w)])
    obs = m.ids(u.observed)

    def scorer(ids, lengths):
        full, full_len = _embed(prefix, ids, lengths, suffix)
        return distance_to_score(batch_distance(obs, full, full_len, m.cost, INDEL_COST).min(), lam)

    return scorer


def learn_instance(u: Utterance, word_pos: int, truth: Name, lex: Lexicon, cfg: LearnConfig,
                   m: ConfusionMatrix):
    """Best candidate for one word of one misrecognized utterance: (P*, score, HPDResult)."""
    space = word_space(lex.canonical(truth[word_pos]), cfg, m)
    order = determination_order(space, cfg.order_policy)
    res = determine_best_pron(space, embedded_scorer(u, truth, word_pos, lex, m, cfg.lam), order, m)
    return res.pron, res.score, res


def accuracy_increment(p_star: Sequence[str], word: str, instances: Sequence[int],
                       ev: Evaluator) -> float:
    """Accuracy gain on ``instances`` from adding ``p_star`` to ``word``'s list."""
    prons = ev.lex.prons(word)
    if tuple(p_star) in prons:
        return 0.0
    overlay = {word: prons + [tuple(p_star)]}
    return ev.accuracy(instances, overlay) - ev.accuracy(instances)


@dataclass
class LearnedEntry:
    word: str
    pron: Pronunciation
    gain: float
    instance_id: str
    order: int = 0  # position of the source instance within its name's errors


def select_top(entries: list[LearnedEntry], k: int) -> list[LearnedEntry]:
    """Dedup by (word, pron) keeping the max gain, sort by gain, keep k positive entries."""
    best: dict = {}
    for e in entries:
        key = (e.word, e.pron)
        cur = best.get(key)
        if cur is None or e.gain > cur.gain or (e.gain == cur.gain and e.order < cur.order):
            best[key] = e
    kept = sorted(best.values(), key=lambda e: (-e.gain, e.order))
    return [e for e in kept if e.gain > 0][:k]


@dataclass
class NameReport:
    name: str
    error_instances: list
    outreach: float
    regional_size: int
    learned: list = field(default_factory=list)
    recognizer_runs: int = 0
    prons_processed: int = 0


def learn_name(target: int, errors: list, ev: Evaluator, ndm: NameDistanceMatrix,
               cfg: LearnConfig) -> tuple[list[LearnedEntry], NameReport]:
    name = ev.grammar.names[target]
    d_t = name_outreach(name, ev.lex, cfg, ev.m)
    dr = regional_nameset(target, d_t, ndm)
    dr_instances = ev.instances_of(dr.members)
    report = NameReport(name_key(name), [u.instance_id for u, _ in errors], d_t, len(dr.members))
    entries = []
    for order, (u, _) in enumerate(errors):
        for word_pos in identify_error_words(name, ev.lex, u, ev.m):
            word = name[word_pos]
            p_star, _, res = learn_instance(u, word_pos, name, ev.lex, cfg, ev.m)
            report.recognizer_runs += res.cost.recognizer_runs
            report.prons_processed += res.cost.prons_processed
            gain = accuracy_increment(p_star, word, dr_instances, ev)
            entries.append(LearnedEntry(word, p_star, gain, u.instance_id, order))
    kept = select_top(entries, cfg.k1)
    report.learned = [{"word": e.word, "pron": " ".join(e.pron), "gain": e.gain,
                       "instance_id": e.instance_id} for e in kept]
    return kept, report


def prune_per_word(word: str, prons: Sequence[Pronunciation], ev: Evaluator,
                   cfg: LearnConfig) -> tuple[list[tuple[Pronunciation, float]], int]:
    """Rescore candidates on every name containing ``word``; keep the top k2 positive ones."""
    dw = ev.names_with(word)
    instances = ev.instances_of(dw)
    scored = [(tuple(p), accuracy_increment(p, word, instances, ev)) for p in prons]
    scored.sort(key=lambda t: -t[1])  # stable: earlier candidates win ties
    return [t for t in scored if t[1] > 0][:cfg.k2], len(dw)


def apply_learned(lex: Lexicon, learned: dict) -> Lexicon:
    """Replace each learned word's list; words with empty lists keep the baseline."""
    out = lex.copy()
    for word, prons in learned.items():
        if prons:
            out.replace(word, prons)
    return out


def verify_replacements(learned: dict, ev: Evaluator) -> dict:
    """Keep a word's replacement only if it beats the baseline on its own names.

    Checked one word at a time in sorted order, against the other surviving
    replacements, so interactions between learned words are accounted for.
    """
    kept = {w: list(p) for w, p in learned.items() if p}
    for word in sorted(kept):
        instances = ev.instances_of(ev.names_with(word))
        with_it = ev.accuracy(instances, kept)
        without = {w: p for w, p in kept.items() if w != word}
        if with_it <= ev.accuracy(instances, without):
            del kept[word]
    return kept


# process-pool plumbing: the evaluator is shipped once per worker
_WORKER: dict = {}


def _init_worker(ev, ndm, cfg):
    _WORKER.update(ev=ev, ndm=ndm, cfg=cfg)


def _learn_task(args):
    target, errors = args
    try:
        return target, learn_name(target, errors, _WORKER["ev"], _WORKER["ndm"], _WORKER["cfg"]), None
    except (InputError, ValueError) as exc:
        return target, None, str(exc)


def learn_all(corpus, grammar: Grammar, lex: Lexicon, m: ConfusionMatrix, cfg: LearnConfig,
              ndm: NameDistanceMatrix | None = None, jobs: int = 1):
    """Run the whole pass.  Returns (updated lexicon, report dict, timing dict)."""
    t0 = time.perf_counter()
    ev = Evaluator(corpus, grammar, lex, m, cfg)
    errors = collect_errors(corpus, grammar, lex, m, cfg, ev)
    t_errors = time.perf_counter()
    log.info("baseline: %d/%d utterances misrecognized", len(errors), len(ev.corpus))
    if ndm is None:
        ndm = build_name_distance_matrix(grammar, lex, m, lazy=True)
    tasks = sorted(((grammar.index(n), errs) for n, errs in errors.by_name().items()),
                   key=lambda t: t[0])
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(ev, ndm, cfg)) as pool:
            results = list(pool.map(_learn_task, tasks))
    else:
        _init_worker(ev, ndm, cfg)
        results = [_learn_task(t) for t in tasks]
    t_names = time.perf_counter()

    name_reports, failures = [], []
    per_word: dict[str, list[Pronunciation]] = {}
    for target, out, err in results:
        if err is not None:
            failures.append({"name": name_key(grammar.names[target]), "error": err})
            continue
        kept, rep = out
        name_reports.append(asdict(rep))
        for e in kept:
            lst = per_word.setdefault(e.word, [])
            if e.pron not in lst:
                lst.append(e.pron)

    word_reports = []
    final: dict[str, list[Pronunciation]] = {}
    for word in sorted(per_word):
        kept, dw_size = prune_per_word(word, per_word[word], ev, cfg)
        final[word] = [p for p, _ in kept]
        word_reports.append({"word": word, "names_with_word": dw_size,
                             "candidates": [" ".join(p) for p in per_word[word]],
                             "final": [{"pron": " ".join(p), "gain": g} for p, g in kept]})
    accepted = verify_replacements(final, ev) if cfg.verify_replacement else \
        {w: p for w, p in final.items() if p}
    for wr in word_reports:
        wr["applied"] = wr["word"] in accepted
    new_lex = apply_learned(lex, accepted)
    t_done = time.perf_counter()

    report = {
        "config": asdict(cfg),
        "totals": {
            "utterances": len(ev.corpus),
            "baseline_errors": len(errors),
            "target_names": len(tasks),
            "words_with_candidates": len(per_word),
            "words_updated": len(accepted),
            "recognizer_runs": sum(r["recognizer_runs"] for r in name_reports),
            "prons_processed": sum(r["prons_processed"] for r in name_reports),
        },
        "names": name_reports,
        "words": word_reports,
        "failures": failures,
    }
    timing = {"collect_errors_s": t_errors - t0, "learn_names_s": t_names - t_errors,
              "prune_and_apply_s": t_done - t_names, "total_s": t_done - t0}
    return new_lex, report, timing
