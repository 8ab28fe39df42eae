import json
import math

import numpy as np
import pytest

from pronlearn.errors import InputError
from pronlearn.eval_report import (error_reduction_rate, evaluate, grammar_sweep,
                                   instance_log_tsv, nested_subsets, sweep_json,
                                   sweep_table_csv)
from pronlearn.lexicon import Grammar, Lexicon, Utterance
from pronlearn.pron_space import name_pronunciation
from pronlearn.recognizer import ChannelModel
from pronlearn.synthetic import make_world, synthesize_corpus


def _toy():
    lex = Lexicon({"tom": [("t", "aa", "m")], "paine": [("p", "ey", "n")],
                   "pern": [("p", "er", "n")], "kim": [("k", "ih", "m")]})
    grammar = Grammar([("tom", "paine"), ("tom", "pern"), ("kim",)])
    return lex, grammar


def test_ner_counts(cm):
    lex, grammar = _toy()
    clean = [Utterance(f"c{i}", n, name_pronunciation(n, lex)) for i, n in enumerate(grammar)]
    r = evaluate(clean, grammar, lex, cm)
    assert (r.total_instances, r.incorrect_instances, r.ner) == (3, 0, 0.0)
    bad = clean + [Utterance("v", ("tom", "paine"), ("t", "aa", "m", "p", "ih", "n"))]
    r = evaluate(bad, grammar, lex, cm)
    assert r.ner == 25.0 and r.unique_incorrect == 1 and r.unique_names == 3
    # the log alone reproduces the counts
    assert sum(not row[4] for row in r.log) == r.incorrect_instances
    assert len({row[1] for row in r.log if not row[4]}) == r.unique_incorrect
    assert r.log[-1][2] == "tom pern"


def test_reject_threshold_counts_as_error(cm):
    lex, grammar = _toy()
    u = [Utterance("v", ("kim",), ("k", "ih", "n"))]
    assert evaluate(u, grammar, lex, cm, reject_threshold=0.0).ner == 0.0
    r = evaluate(u, grammar, lex, cm, reject_threshold=1.0)
    assert r.ner == 100.0 and r.log[0][2] == "NO_MATCH"
    assert "NO_MATCH" in instance_log_tsv(r)


def test_error_reduction_rate():
    assert error_reduction_rate(14.10, 8.16) == pytest.approx(42.13, abs=0.05)
    assert error_reduction_rate(10.0, 10.0) == 0.0
    assert error_reduction_rate(5.0, 10.0) == -100.0
    assert math.isnan(error_reduction_rate(0.0, 0.0))


def test_nested_subsets():
    grammar = Grammar([(f"n{i}",) for i in range(50)])
    subs = nested_subsets(grammar, [5, 20, 50], seed=3)
    assert [len(s) for s in subs] == [5, 20, 50]
    assert subs[1][:5] == subs[0] and subs[2][:20] == subs[1]
    assert set(subs[2]) == set(grammar.names)
    assert nested_subsets(grammar, [5, 20], seed=3)[0] == subs[0]
    with pytest.raises(InputError):
        nested_subsets(grammar, [5, 51], seed=0)
    with pytest.raises(InputError):
        nested_subsets(grammar, [20, 5], seed=0)


def test_single_size_sweep_and_outputs(cm):
    lex, grammar = _toy()
    corpus = [Utterance("v", ("tom", "paine"), ("t", "aa", "m", "p", "ih", "n")),
              Utterance("k", ("kim",), ("k", "ih", "m"))]
    learned = lex.copy()
    learned.add("paine", ("p", "ih", "n"))
    sw = grammar_sweep(corpus, grammar, [3], 0, lex, learned, cm)
    assert sw.base[0].ner == 50.0 and sw.learned[0].ner == 0.0 and sw.err == [100.0]
    csv_text = sweep_table_csv(sw)
    assert csv_text == "metric,3\nner_base,50.00\nner_learned,0.00\nerr,100.00\n"
    doc = json.loads(sweep_json(sw, {"seed": 0}))
    assert doc["sizes"] == [3] and doc["seed"] == 0 and len(doc["grammar_order"]) == 3


def test_error_rate_grows_with_grammar_size(cm):
    small, large = [], []
    for seed in range(5):
        w = make_world(cm, n_names=120, seed=seed)
        corpus = synthesize_corpus(w.grammar, w.lexicon, w.variants,
                                   ChannelModel(rho=0.1, seed=seed), cm, per_name=2)
        sw = grammar_sweep(corpus, w.grammar, [15, 120], seed, w.lexicon, None, cm)
        small.append(sw.base[0].ner)
        large.append(sw.base[1].ner)
    assert np.mean(large) > np.mean(small)
