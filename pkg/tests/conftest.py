import pytest

from lcgram.grammar import parse_grammar

GRAMMARS = {
    "left_branching": "S -> S a\nS -> b\n",
    "np_pp": "%start NP\nNP -> NP PP\nNP -> d n\nPP -> p NP\n",
    "mutual": "S -> A x\nA -> S y\nA -> z\n",
    "expr": "E -> E plus T\nE -> T\nT -> T times F\nT -> F\nF -> lp E rp\nF -> x\n",
}

WEIGHTED = {
    "left_branching": "0.4 S -> S a\n0.6 S -> b\n",
    "ambiguous": "0.4 S -> S S\n0.6 S -> a\n",
    "np_pp": "%start NP\n0.3 NP -> NP PP\n0.7 NP -> d n\n1.0 PP -> p NP\n",
    "mutual": "1.0 S -> A x\n0.3 A -> S y\n0.7 A -> z\n",
    "tagged": "%start S\n%pos d n v\n1.0 S -> NP VP\n0.2 NP -> NP VP\n0.5 NP -> d n\n0.3 NP -> n\n0.6 VP -> v NP\n0.4 VP -> v\n",
}

# A -> B -> A is a unary cycle; the language is (a|b) a*
CYCLIC = "%start A\n0.3 A -> B\n0.2 A -> A a\n0.5 A -> a\n0.6 B -> A\n0.4 B -> b\n"


def pytest_addoption(parser):
    parser.addoption("--wsj-dir", default=None, help="Preprocessed WSJ treebank with train/ and test/ subdirectories")


@pytest.fixture(scope="session")
def wsj_dir(request):
    path = request.config.getoption("--wsj-dir")
    if not path:
        pytest.skip("needs --wsj-dir")
    return path


@pytest.fixture(params=sorted(GRAMMARS))
def fixture_grammar(request):
    return parse_grammar(GRAMMARS[request.param])


@pytest.fixture(params=sorted(WEIGHTED))
def weighted_grammar(request):
    return parse_grammar(WEIGHTED[request.param])


@pytest.fixture
def left_branching():
    return parse_grammar(GRAMMARS["left_branching"])


@pytest.fixture
def np_pp():
    return parse_grammar(GRAMMARS["np_pp"])
