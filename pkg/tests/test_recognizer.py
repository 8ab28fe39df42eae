import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_matrix
from pronlearn.candidate_space import candidate_at
from pronlearn.errors import InputError
from pronlearn.lexicon import Grammar, Lexicon, Utterance
from pronlearn.pron_space import name_pronunciation, pron_distance
from pronlearn.recognizer import (MAX_NAME_PRONS, ChannelModel, RecognitionResult,
                                  SimulatedRecognizer, name_prons, recognize, score_pron,
                                  score_pron_list, synthesize_utterance)

MINI = ("p", "t", "iy", "ah", "s", "m")
prons = st.lists(st.sampled_from(MINI), min_size=1, max_size=5).map(tuple)


def test_score_examples(cm):
    p = ("p", "ey", "n")
    assert score_pron(p, p, cm) == 1.0
    d = pron_distance(("t", "iy"), ("t", "aa", "m"), cm)
    assert score_pron(("t", "iy"), ("t", "aa", "m"), cm, lam=1.0) == pytest.approx(math.exp(-d))
    assert math.exp(-0.5) == pytest.approx(0.6065, abs=1e-4)


@settings(max_examples=100, deadline=None)
@given(prons, prons, prons)
def test_score_order_follows_distance(o, a, b):
    m = random_matrix(1)
    da, db = pron_distance(o, a, m), pron_distance(o, b, m)
    sa, sb = score_pron(o, a, m), score_pron(o, b, m)
    assert 0 < sa <= 1 and 0 < sb <= 1
    if da < db:
        assert sa >= sb
    assert (sa == 1.0) == (da == 0.0)


@settings(max_examples=100, deadline=None)
@given(prons, st.lists(prons, min_size=1, max_size=6), st.lists(prons, min_size=1, max_size=6))
def test_segmentation_identity(o, A, B):
    m = random_matrix(2)
    assert score_pron_list(o, A + B, m) == max(score_pron_list(o, A, m), score_pron_list(o, B, m))


def test_list_scoring(cm, paine):
    o = ("p", "ey", "n")
    assert score_pron_list(o, [("t", "iy")], cm) == score_pron(o, ("t", "iy"), cm)
    assert score_pron_list(o, [("t", "iy"), o], cm) == 1.0
    with pytest.raises(ValueError):
        score_pron_list(o, [], cm)
    observed = ("b", "ih", "m")
    cands = [candidate_at(paine, x) for x in range(paine.size)]
    assert score_pron_list(observed, cands, cm) == max(score_pron(observed, c, cm) for c in cands)


def _world():
    lex = Lexicon()
    for w, p in {"tom": "t aa m", "paine": "p ey n", "kim": "k ih m", "lee": "l iy",
                 "sam": "s ae m", "ray": "r ey"}.items():
        lex.add(w, p.split())
    grammar = Grammar([("tom", "paine"), ("kim", "lee"), ("sam", "ray"), ("tom", "lee")])
    return lex, grammar


def test_recognize_exact_and_reject(cm):
    lex, grammar = _world()
    u = Utterance("u1", ("kim", "lee"), name_pronunciation(("kim", "lee"), lex))
    res = recognize(grammar, lex, u, cm, 0.0)
    assert res == RecognitionResult(("kim", "lee"), 1.0)
    noisy = Utterance("u2", ("kim", "lee"), ("k", "ih", "m", "l", "ah"))
    assert recognize(grammar, lex, noisy, cm, 1.0).hypothesis is None
    with pytest.raises(ValueError):
        RecognitionResult(None, 0.5)


def test_recognize_tie_goes_to_earliest(cm):
    lex, _ = _world()
    lex.add("payne", ("p", "ey", "n"))
    grammar = Grammar([("tom", "payne"), ("tom", "paine")])
    u = Utterance("u", ("tom", "paine"), ("t", "aa", "m", "p", "ey", "n"))
    assert recognize(grammar, lex, u, cm).hypothesis == ("tom", "payne")


def test_recognize_matches_exhaustive_scoring(cm):
    rng = np.random.default_rng(4)
    syms = cm.inventory.symbols
    lex = Lexicon()
    words = [f"w{i}" for i in range(12)]
    for w in words:
        for _ in range(int(rng.integers(1, 3))):
            lex.add(w, [syms[i] for i in rng.integers(0, 39, int(rng.integers(2, 5)))])
    names = set()
    while len(names) < 20:
        names.add(tuple(rng.choice(words, int(rng.integers(1, 4)), replace=False)))
    grammar = Grammar(sorted(names))
    rec = SimulatedRecognizer(grammar, lex, cm)
    for k in range(30):
        obs = tuple(syms[i] for i in rng.integers(0, 39, int(rng.integers(2, 10))))
        best, best_score = None, -1.0
        for name in grammar:
            for combo in itertools.product(*(lex.prons(w) for w in name)):
                s = score_pron(obs, tuple(itertools.chain(*combo)), cm)
                if s > best_score:
                    best, best_score = name, s
        res = rec.recognize(Utterance(str(k), grammar.names[0], obs))
        assert res.hypothesis == best and res.score == best_score


def test_adding_pron_never_lowers_score(cm):
    lex, grammar = _world()
    u = Utterance("u", ("tom", "paine"), ("t", "aa", "m", "p", "iy", "ng"))
    before = SimulatedRecognizer(grammar, lex, cm).name_distances(u.observed)
    lex.add("paine", ("p", "iy", "ng"))
    after = SimulatedRecognizer(grammar, lex, cm).name_distances(u.observed)
    assert (after <= before).all() and after[0] == 0.0


def test_cross_product_cap(cm):
    lex = Lexicon()
    for i in range(17):
        lex.add("a", ("t", "aa", cm.inventory.symbols[i]))
        lex.add("b", ("p", "iy", cm.inventory.symbols[i]))
    assert len(name_prons(("a",), lex)) == 17
    with pytest.raises(InputError, match=str(MAX_NAME_PRONS)):
        name_prons(("a", "b"), lex)


def test_synthesis(cm):
    lex, _ = _world()
    name = ("tom", "paine")
    quiet = ChannelModel(rho=0.0, seed=1)
    assert synthesize_utterance(name, lex, None, quiet, cm, "x").observed == \
        name_pronunciation(name, lex)
    variant = ("t", "aa", "m", "p", "iy", "ng")
    assert synthesize_utterance(name, lex, variant, quiet, cm, "x").observed == variant
    noisy = ChannelModel(rho=0.1, seed=7)
    a = [synthesize_utterance(name, lex, None, noisy, cm, f"i{k}").observed for k in range(50)]
    b = [synthesize_utterance(name, lex, None, noisy, cm, f"i{k}").observed for k in range(50)]
    assert a == b
    assert any(o != name_pronunciation(name, lex) for o in a)


def test_channel_prefers_cheap_substitutions(cm):
    lex = Lexicon({"x": [("ey",) * 40]})
    ch = ChannelModel(temperature=10.0, rho=0.5, seed=3)
    obs = synthesize_utterance(("x",), lex, None, ch, cm, "z").observed
    changed = [q for q in obs if q != "ey"]
    assert changed and np.mean([cm("ey", q) for q in changed]) < np.mean(cm.cost[cm.inventory.id("ey")])
