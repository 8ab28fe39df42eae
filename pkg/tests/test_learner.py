import json

import numpy as np
import pytest

from pronlearn.candidate_space import candidate_at
from pronlearn.learner import (Evaluator, LearnConfig, LearnedEntry, accuracy_increment,
                               apply_learned, collect_errors, embedded_scorer,
                               identify_error_words, learn_all, learn_instance, prune_per_word,
                               regional_nameset, select_top, word_space)
from pronlearn.lexicon import Grammar, Lexicon, Utterance, format_lexicon, parse_lexicon
from pronlearn.pron_space import build_name_distance_matrix, name_pronunciation
from pronlearn.recognizer import score_pron

CFG = LearnConfig(r0=0.2)
WORDS = {"tom": "t aa m", "paine": "p ey n", "kim": "k ih m", "lee": "l iy",
         "sam": "s ae m", "ray": "r ey", "dunn": "d ah n", "ruiz": "r uw iy z"}


def toy_lexicon(**extra):
    lex = Lexicon()
    for w, p in {**WORDS, **extra}.items():
        lex.add(w, p.split())
    return lex


def utt(iid, truth, observed):
    return Utterance(iid, tuple(truth), tuple(observed.split()))


def clean_corpus(grammar, lex, per_name=2):
    return [Utterance(f"{i}-{k}", n, name_pronunciation(n, lex))
            for i, n in enumerate(grammar) for k in range(per_name)]


GRAMMAR = Grammar([("tom", "paine"), ("kim", "lee"), ("sam", "ray"), ("tom", "lee"),
                   ("dunn", "ruiz")])


def test_no_errors_on_clean_corpus(cm):
    lex = toy_lexicon()
    corpus = clean_corpus(GRAMMAR, lex)
    assert len(collect_errors(corpus, GRAMMAR, lex, cm, CFG)) == 0
    new_lex, report, timing = learn_all(corpus, GRAMMAR, lex, cm, CFG)
    assert report["totals"]["baseline_errors"] == 0
    assert format_lexicon(new_lex) == format_lexicon(lex)
    assert set(timing) and all(v >= 0 for v in timing.values())


def test_collision_is_collected(cm):
    lex = toy_lexicon(pyng="p iy ng")
    grammar = Grammar([("tom", "paine"), ("tom", "pyng")])
    corpus = [utt("a", ("tom", "paine"), "t aa m p iy ng")]
    errs = collect_errors(corpus, grammar, lex, cm, CFG)
    assert len(errs) == 1 and errs.entries[0][1] == ("tom", "pyng")
    assert list(errs.by_name()) == [("tom", "paine")]


def test_regional_nameset(cm):
    lex = toy_lexicon()
    grammar = Grammar([("tom",), ("sam",), ("ruiz",)])
    ndm = build_name_distance_matrix(grammar, lex, cm)
    assert regional_nameset(0, 0.0, ndm).members == {0}
    near = ndm[0, 1]
    assert 0 < near < ndm[0, 2]
    assert regional_nameset(0, near, ndm).members == {0, 1}
    assert regional_nameset(0, ndm[0, 2], ndm).members == {0, 1, 2}


def test_identify_error_words(cm):
    lex = toy_lexicon()
    truth = ("tom", "paine")
    assert identify_error_words(truth, lex, utt("a", truth, "t aa m p iy ng"), cm) == [1]
    assert identify_error_words(truth, lex, utt("b", truth, "t aa m p ey n"), cm) == [1]
    assert identify_error_words(truth, lex, utt("c", truth, "s uw z p ey n"), cm) == [0]
    three = ("kim", "tom", "paine")
    u = utt("d", three, "z uw th t aa m z uw th")
    assert identify_error_words(three, lex, u, cm) == [0, 2]


def test_learn_instance_recovers_variant(cm):
    lex = toy_lexicon()
    truth = ("tom", "paine")
    u = utt("a", truth, "t aa m p iy ng")
    pron, score, res = learn_instance(u, 1, truth, lex, CFG, cm)
    assert score == 1.0
    assert score_pron(("p", "iy", "ng"), pron, cm) == 1.0
    space = word_space(lex.canonical("paine"), CFG, cm)
    assert res.cost.recognizer_runs == sum(space.counts)


def test_learn_instance_matches_exhaustive_search(cm):
    lex = toy_lexicon()
    rng = np.random.default_rng(3)
    syms = cm.inventory.symbols
    truth = ("kim", "paine")
    space = word_space(lex.canonical("paine"), CFG, cm)
    for k in range(10):
        obs = "k ih m " + " ".join(syms[i] for i in rng.integers(0, 39, int(rng.integers(2, 5))))
        u = utt(str(k), truth, obs)
        _, score, _ = learn_instance(u, 1, truth, lex, CFG, cm)
        brute = max(score_pron(u.observed, ("k", "ih", "m") + candidate_at(space, x), cm)
                    for x in range(space.size))
        assert score == brute


def test_single_candidate_space(cm):
    from pronlearn.candidate_space import CandidateSpace
    from pronlearn.hpd import determination_order, determine_best_pron
    space = CandidateSpace(("p", "ey"), 0.0, (("p",), ("ey",)))
    res = determine_best_pron(space, lambda ids, lengths: 0.5,
                              determination_order(space, "natural"), cm)
    assert res.pron == ("p", "ey") and res.x == 0


def test_embedded_scorer_handles_padding(cm):
    lex = toy_lexicon()
    truth = ("kim", "paine", "lee")
    u = utt("a", truth, "k ih m p ey l iy")
    scorer = embedded_scorer(u, truth, 1, lex, cm)
    ids = np.array([cm.ids(("p", "ey", "n")), list(cm.ids(("p", "ey"))) + [-1]])
    assert scorer(ids, np.array([3, 2])) == 1.0
    assert scorer(ids[:1], np.array([3])) < 1.0


def test_accuracy_increment(cm):
    lex = toy_lexicon(pyng="p iy ng")
    grammar = Grammar([("tom", "paine"), ("kim", "lee"), ("tom", "pyng")])
    corpus = [utt("a", ("tom", "paine"), "t aa m p iy n"),
              utt("b", ("kim", "lee"), "k ih m l iy"),
              utt("c", ("tom", "pyng"), "t aa m p iy ng")]
    ev = Evaluator(corpus, grammar, lex, cm, CFG)
    assert accuracy_increment(("p", "iy", "n"), "paine", [0, 1], ev) == pytest.approx(0.5)
    assert accuracy_increment(("p", "ey", "n"), "paine", [0, 1], ev) == 0.0
    # learning the neighbour's exact pron steals its utterance (earliest name wins ties)
    assert accuracy_increment(("p", "iy", "ng"), "paine", [0, 1, 2], ev) <= 0


def test_select_top():
    e = [LearnedEntry("w", ("a",), 0.2, "i1", 0), LearnedEntry("w", ("a",), 0.5, "i2", 1),
         LearnedEntry("w", ("b",), 0.3, "i3", 2), LearnedEntry("w", ("c",), 0.3, "i4", 3),
         LearnedEntry("w", ("d",), 0.0, "i5", 4)]
    top = select_top(e, 3)
    assert [(t.pron, t.gain) for t in top] == [(("a",), 0.5), (("b",), 0.3), (("c",), 0.3)]
    assert len(select_top(e, 1)) == 1
    assert select_top([LearnedEntry("w", ("x",), -0.1, "i", 0)], 3) == []


def test_prune_and_apply(cm):
    lex = toy_lexicon()
    lex.add("pern", ("p", "er", "n"))
    grammar = Grammar([("tom", "paine"), ("kim", "paine"), ("tom", "pern"), ("kim", "lee")])
    corpus = [utt("a", ("tom", "paine"), "t aa m p ih n"),
              utt("b", ("kim", "paine"), "k ih m p ih n"),
              utt("c", ("kim", "lee"), "k ih m l iy")]
    ev = Evaluator(corpus, grammar, lex, cm, CFG)
    assert ev.accuracy([0, 1, 2]) == pytest.approx(2 / 3)
    cands = [("s", "ae", "m"), ("p", "ih", "n"), ("p", "ey", "n")]
    kept, dw = prune_per_word("paine", cands, ev, CFG)
    assert dw == 2
    assert kept == [(("p", "ih", "n"), pytest.approx(0.5))]
    new = apply_learned(lex, {"paine": [p for p, _ in kept], "tom": []})
    assert new.prons("paine") == [("p", "ih", "n")]
    assert new.prons("tom") == lex.prons("tom")
    assert lex.prons("paine") == [("p", "ey", "n")]
    assert parse_lexicon(format_lexicon(new)).prons("paine") == [("p", "ih", "n")]


def _variant_setup():
    lex = toy_lexicon(pern="p er n")
    grammar = Grammar([("tom", "paine"), ("tom", "pern"), ("kim", "lee"), ("sam", "ray")])
    corpus = [utt(f"v{k}", ("tom", "paine"), "t aa m p ih n") for k in range(3)]
    corpus += [utt("n0", ("tom", "pern"), "t aa m p er n"),
               utt("n1", ("kim", "lee"), "k ih m l iy"),
               utt("n2", ("sam", "ray"), "s ae m r ey")]
    return lex, grammar, corpus


def test_learn_all_fixes_single_name(cm):
    from pronlearn.eval_report import evaluate
    lex, grammar, corpus = _variant_setup()
    assert evaluate(corpus, grammar, lex, cm).incorrect_instances == 3
    new_lex, report, _ = learn_all(corpus, grammar, lex, cm, CFG)
    assert evaluate(corpus, grammar, new_lex, cm).ner == 0.0
    assert report["totals"]["baseline_errors"] == 3
    assert new_lex.prons("tom") == lex.prons("tom")


def test_learn_all_deterministic_and_parallel(cm):
    lex, grammar, corpus = _variant_setup()
    a = learn_all(corpus, grammar, lex, cm, CFG)
    b = learn_all(corpus, grammar, lex, cm, CFG)
    c = learn_all(corpus, grammar, lex, cm, CFG, jobs=2)
    dump = lambda r: json.dumps(r, sort_keys=True)  # noqa: E731
    assert dump(a[1]) == dump(b[1]) == dump(c[1])
    assert format_lexicon(a[0]) == format_lexicon(c[0])


def test_config_validation():
    with pytest.raises(ValueError):
        LearnConfig(r0=0)
    with pytest.raises(ValueError):
        LearnConfig(order_policy="sideways")
    with pytest.raises(ValueError):
        LearnConfig(k1=0)
