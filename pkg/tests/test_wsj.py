"""Treebank-scale checks; run with ``pytest --wsj-dir DIR`` where DIR holds
preprocessed ``train/`` (sections 2-21) and ``test/`` (section 23) trees."""
import os

import pytest

from lcgram.analysis import AllProductions, select_L, unary_cycle_classes
from lcgram.eval import corpus_grammar, missing_productions
from lcgram.transform import TransformOptions, lc_transform
from lcgram.treebank import read_corpus
from lcgram.unary import remove_unary_cycles


@pytest.fixture(scope="module")
def wsj(wsj_dir):
    train = read_corpus(os.path.join(wsj_dir, "train"))
    test = read_corpus(os.path.join(wsj_dir, "test"))
    return train, test


@pytest.fixture(scope="module")
def wsj_grammar(wsj):
    train, _ = wsj
    g = corpus_grammar(train, train[0].label)
    return remove_unary_cycles(g, weighted=False)


def test_grammar_sizes(wsj_grammar):
    g = wsj_grammar
    assert len(g) == 15040
    assert len(lc_transform(g, AllProductions()).grammar) == 346344
    l0 = select_L(g, "l0")
    assert len(lc_transform(g, l0, TransformOptions(factor="td_lc")).grammar) == 21364


def test_missing_productions(wsj):
    train, test = wsj
    seen = corpus_grammar(train, train[0].label)
    classes = unary_cycle_classes(seen)
    l0 = select_L(remove_unary_cycles(seen, weighted=False), "l0")
    plain = missing_productions(train, test, None, cyclic=classes, classes=classes)
    factored = missing_productions(train, test, l0, TransformOptions(factor="td_lc"), classes, classes)
    assert len(plain) == 514
    assert len(factored) == 522
