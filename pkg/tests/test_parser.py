import math

import numpy as np
import pytest
from conftest import WEIGHTED

from lcgram.analysis import select_L
from lcgram.grammar import parse_grammar
from lcgram.oracle import enumerate_parses, enumerate_strings, random_pcfg
from lcgram.parser import (
    NO_PARSE,
    CKYParser,
    ParseError,
    UnknownTokenError,
    cky_parse,
    format_parse,
    parse_corpus,
    read_sentences,
)
from lcgram.transform import FACTORS, TransformOptions, lc_transform
from lcgram.treetransform import lc_tree_detransform
from lcgram.trees import tree_productions, write_tree


def tree_logw(g, t):
    return sum(k * math.log(g.weight(p)) for p, k in tree_productions(t).items())


@pytest.fixture
def weighted_left_branching():
    return parse_grammar(WEIGHTED["left_branching"])


def test_best_parse(weighted_left_branching):
    tree, logw = cky_parse(weighted_left_branching, "b a a".split())
    assert write_tree(tree) == "(S (S (S b) a) a)"
    assert logw == pytest.approx(math.log(0.096), abs=1e-12)


def test_no_parse(weighted_left_branching):
    assert cky_parse(weighted_left_branching, ["a", "b"]) is None
    assert format_parse(None) == NO_PARSE


def test_unknown_token(weighted_left_branching):
    with pytest.raises(UnknownTokenError, match="unknown token"):
        cky_parse(weighted_left_branching, ["b", "zzz"])


def test_empty_sentence(weighted_left_branching):
    with pytest.raises(ParseError):
        cky_parse(weighted_left_branching, [])


def test_ambiguous_sentence():
    g = parse_grammar(WEIGHTED["ambiguous"])
    tree, logw = cky_parse(g, ["a", "a", "a"])
    assert logw == pytest.approx(math.log(0.03456), abs=1e-12)
    assert tree_logw(g, tree) == pytest.approx(logw, abs=1e-12)
    total = sum(w for _, w in enumerate_parses(g, ["a", "a", "a"]))
    assert total == pytest.approx(0.06912, abs=1e-12)


def test_parse_is_deterministic():
    g = parse_grammar(WEIGHTED["ambiguous"])
    parser = CKYParser(g)
    first = parser.parse(["a"] * 5)
    assert all(parser.parse(["a"] * 5) == first for _ in range(3))


def _check_viterbi(g, max_len):
    parser = CKYParser(g)
    for s in sorted(enumerate_strings(g, max_len)):
        best = max(w for _, w in enumerate_parses(g, s))
        tree, logw = parser.parse(list(s))
        assert logw == pytest.approx(math.log(best), abs=1e-9)
        assert tree_logw(g, tree) == pytest.approx(logw, abs=1e-9)


def test_viterbi_matches_enumeration(weighted_grammar):
    _check_viterbi(weighted_grammar, 6)


def test_viterbi_on_random_pcfgs():
    rng = np.random.default_rng(17)
    for _ in range(10):
        _check_viterbi(random_pcfg(rng), 4)


def test_epsilon_productions_are_restored(weighted_left_branching):
    g = weighted_left_branching
    out = lc_transform(g, select_L(g, "l0"), TransformOptions(weighted=True)).grammar
    tree, logw = cky_parse(out, "b a a".split())
    assert write_tree(tree) == "(S b (LC(S;S) a (LC(S;S) a (LC(S;S) EPS))))"
    assert logw == pytest.approx(math.log(0.096), abs=1e-12)


@pytest.mark.parametrize("epsilon", ["keep", "one_step"])
@pytest.mark.parametrize("factor", FACTORS)
def test_transformed_parser_simulates_source(weighted_grammar, factor, epsilon):
    g = weighted_grammar
    opts = TransformOptions(factor=factor, epsilon=epsilon, weighted=True)
    out = lc_transform(g, select_L(g, "l0"), opts).grammar
    source, target = CKYParser(g), CKYParser(out)
    for s in sorted(enumerate_strings(g, 5)):
        _, want = source.parse(list(s))
        tree, logw = target.parse(list(s))
        assert logw == pytest.approx(want, abs=1e-9)
        assert tree_logw(g, lc_tree_detransform(tree, opts)) == pytest.approx(want, abs=1e-9)


def test_parse_corpus_marks_unknown_tokens(weighted_left_branching, caplog):
    results = parse_corpus(weighted_left_branching, read_sentences("b a\n\nb q\na\n"))
    assert len(results) == 3
    assert results[0] is not None
    assert results[1] is None
    assert results[2] is None
    assert "no parse" in caplog.text


def test_format_parse(weighted_left_branching):
    line = format_parse(cky_parse(weighted_left_branching, ["b"]))
    tree, logw = line.split("\t")
    assert tree == "(S b)"
    assert float(logw) == pytest.approx(math.log(0.6))


def test_unary_ties_go_to_the_earlier_rule():
    # S -> B is found a round before S -> A; both score 0.5
    g = parse_grammar("%start S\n1.0 A -> C\n1.0 B -> a\n1.0 C -> a\n0.5 S -> A\n0.5 S -> B\n")
    tree, logw = cky_parse(g, ["a"])
    assert write_tree(tree) == "(S (A (C a)))"
    assert logw == pytest.approx(math.log(0.5))


def test_unit_weight_unary_cycle_keeps_finite_trees():
    g = parse_grammar("S -> A\nA -> S\nA -> a\n")
    tree, logw = cky_parse(g, ["a"])
    assert write_tree(tree) == "(S (A a))"
    assert logw == 0.0
