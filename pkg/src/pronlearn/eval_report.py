"""Name error rate evaluation and nested grammar-size sweeps."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError
from .lexicon import Grammar, Lexicon, Utterance, check_corpus, name_key
from .phoneme_core import ConfusionMatrix
from .recognizer import SimulatedRecognizer


@dataclass
class EvalResult:
    total_instances: int
    incorrect_instances: int
    unique_names: int
    unique_incorrect: int
    ner: float
    log: list = field(default_factory=list, repr=False)  # (instance_id, truth, hypothesis, score, ok)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("log")
        return d


def error_reduction_rate(ner_base: float, ner_learned: float) -> float:
    """Relative NER reduction in percent; NaN when the baseline has no errors."""
    if ner_base == 0:
        return float("nan")
    return 100.0 * (ner_base - ner_learned) / ner_base


def evaluate(corpus: Sequence[Utterance], grammar: Grammar, lex: Lexicon, m: ConfusionMatrix,
             reject_threshold: float = 0.0, lam: float = 1.0) -> EvalResult:
    check_corpus(corpus, grammar)
    rec = SimulatedRecognizer(grammar, lex, m, lam, reject_threshold)
    log = []
    names, wrong_names = set(), set()
    wrong = 0
    for u in corpus:
        res = rec.recognize(u)
        ok = res.hypothesis == u.truth
        names.add(u.truth)
        if not ok:
            wrong += 1
            wrong_names.add(u.truth)
        hyp = name_key(res.hypothesis) if res.hypothesis is not None else "NO_MATCH"
        log.append((u.instance_id, name_key(u.truth), hyp, res.score, ok))
    total = len(corpus)
    ner = 100.0 * wrong / total if total else 0.0
    return EvalResult(total, wrong, len(names), len(wrong_names), ner, log)


@dataclass
class SweepResult:
    sizes: list
    base: list
    learned: list
    err: list
    order: list  # shuffled grammar order; C_G is its first G names

    def subset(self, g: int) -> list:
        return self.order[:g]


def nested_subsets(grammar: Grammar, sizes: Sequence[int], seed: int) -> list[list]:
    sizes = list(sizes)
    if sizes != sorted(sizes) or not sizes or sizes[0] < 1:
        raise InputError("sizes must be ascending positive integers")
    if sizes[-1] > len(grammar):
        raise InputError(f"size {sizes[-1]} exceeds grammar size {len(grammar)}")
    order = np.random.default_rng(seed).permutation(len(grammar))
    return [[grammar.names[i] for i in order[:g]] for g in sizes]


def grammar_sweep(corpus: Sequence[Utterance], grammar: Grammar, sizes: Sequence[int], seed: int,
                  lex_base: Lexicon, lex_learned: Lexicon | None, m: ConfusionMatrix,
                  reject_threshold: float = 0.0, lam: float = 1.0) -> SweepResult:
    subsets = nested_subsets(grammar, sizes, seed)
    base, learned, err = [], [], []
    for names in subsets:
        sub = Grammar(names)
        members = set(sub.names)
        part = [u for u in corpus if u.truth in members]
        b = evaluate(part, sub, lex_base, m, reject_threshold, lam)
        base.append(b)
        if lex_learned is not None:
            lr = evaluate(part, sub, lex_learned, m, reject_threshold, lam)
            learned.append(lr)
            err.append(error_reduction_rate(b.ner, lr.ner))
    order = [name_key(n) for n in subsets[-1]]
    return SweepResult(list(sizes), base, learned, err, order)


def _pct(v: float) -> str:
    return "nan" if v != v else f"{v:.2f}"


def sweep_table_csv(sweep: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric"] + [str(g) for g in sweep.sizes])
    w.writerow(["ner_base"] + [_pct(r.ner) for r in sweep.base])
    if sweep.learned:
        w.writerow(["ner_learned"] + [_pct(r.ner) for r in sweep.learned])
        w.writerow(["err"] + [_pct(e) for e in sweep.err])
    return buf.getvalue()


def sweep_json(sweep: SweepResult, extra: dict | None = None) -> str:
    doc = {
        "sizes": sweep.sizes,
        "base": [r.summary() for r in sweep.base],
        "learned": [r.summary() for r in sweep.learned],
        "err": [None if e != e else e for e in sweep.err],
        "grammar_order": sweep.order,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def instance_log_tsv(result: EvalResult, label: str = "") -> str:
    lines = ["instance_id\ttruth\thypothesis\tscore\tcorrect" + ("\tlexicon" if label else "")]
    for iid, truth, hyp, score, ok in result.log:
        s = "" if score is None else f"{score:.6f}"
        row = f"{iid}\t{truth}\t{hyp}\t{s}\t{int(ok)}"
        lines.append(row + (f"\t{label}" if label else ""))
    return "\n".join(lines) + "\n"
