import numpy as np
import pytest

from lcgram.grammar import nonterminal, parse_grammar, terminal
from lcgram.trees import TreeError, tree_yield
from lcgram.treebank import TreebankError, load_pos, mini_grammar, mini_treebank, read_corpus, split_corpus, tree_files


def test_mini_grammar_is_proper():
    g = mini_grammar()
    assert g.start == nonterminal("S")
    assert g.is_proper()
    assert g.pos_tags == g.terminals


def test_mini_treebank_is_deterministic():
    assert mini_treebank(30, seed=4) == mini_treebank(30, seed=4)
    assert mini_treebank(30, seed=4) != mini_treebank(30, seed=5)


def test_mini_treebank_yields_are_pos_tags():
    g = mini_grammar()
    for t in mini_treebank(50, seed=0, max_depth=8):
        assert t.label == g.start
        assert set(tree_yield(t)) <= g.terminals


def test_read_corpus_walks_directories(tmp_path):
    (tmp_path / "sub").mkdir()
    (tmp_path / "b.mrg").write_text("(S b)\n", encoding="utf-8")
    (tmp_path / "sub" / "a.tree").write_text("(S a)\n(S c)\n", encoding="utf-8")
    (tmp_path / "notes.md").write_text("(S ignored)\n", encoding="utf-8")
    files = list(tree_files(str(tmp_path)))
    assert files == sorted(files)
    assert len(files) == 2
    trees = read_corpus(str(tmp_path))
    assert sorted(tree_yield(t)[0].name for t in trees) == ["a", "b", "c"]


def test_read_corpus_single_file(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("(S a)\n", encoding="utf-8")
    assert len(read_corpus(str(path))) == 1


def test_read_corpus_errors_name_the_file(tmp_path):
    path = tmp_path / "bad.mrg"
    path.write_text("(S a\n", encoding="utf-8")
    with pytest.raises(TreeError, match="bad.mrg"):
        read_corpus(str(tmp_path))
    with pytest.raises(TreeError, match="no such file"):
        read_corpus(str(tmp_path / "missing"))


def test_split_corpus():
    trees = mini_treebank(100, seed=0, max_depth=6)
    train, test = split_corpus(trees, np.random.default_rng(1), 0.1)
    assert len(test) == 10
    assert len(train) == 90
    index = {id(t): i for i, t in enumerate(trees)}
    assert [index[id(t)] for t in test] == sorted(index[id(t)] for t in test)
    assert {id(t) for t in train} | {id(t) for t in test} == set(index)


def test_split_corpus_fraction():
    with pytest.raises(TreebankError, match="test_fraction"):
        split_corpus([], np.random.default_rng(0), 1.5)


def test_load_pos(tmp_path):
    path = tmp_path / "pos.txt"
    path.write_text("D N\nV\n", encoding="utf-8")
    assert load_pos(str(path)) == [terminal("D"), terminal("N"), terminal("V")]
    g = parse_grammar("S -> D V\nD -> d\nV -> v\n")
    assert load_pos(str(path), g) == [nonterminal("D"), terminal("N"), nonterminal("V")]
