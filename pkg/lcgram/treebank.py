"""Tree corpora on disk and the bundled synthetic mini-treebank."""
import logging
import os
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .grammar import Grammar, LcgramError, Symbol, nonterminal, parse_grammar, terminal
from .oracle import random_tree
from .trees import ParseTree, TreeError, read_trees

log = logging.getLogger(__name__)

TREE_EXTENSIONS = (".mrg", ".tree", ".trees", ".txt")
MINI_GRAMMAR = os.path.join(os.path.dirname(__file__), "data", "mini.gr")


class TreebankError(LcgramError):
    pass


def tree_files(src: str) -> Iterator[str]:
    """Tree files under ``src`` (a file or a directory), in sorted path order."""
    if os.path.isfile(src):
        yield src
        return
    if not os.path.isdir(src):
        raise TreeError(f"no such file or directory: {src}")
    paths = []
    for root, _, files in os.walk(src):
        for f in files:
            if os.path.splitext(f)[1].lower() in TREE_EXTENSIONS:
                paths.append(os.path.join(root, f))
    yield from sorted(paths)


def read_corpus(src: str) -> List[ParseTree]:
    trees: List[ParseTree] = []
    for path in tree_files(src):
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        try:
            trees.extend(read_trees(text))
        except TreeError as e:
            raise TreeError(f"{path}: {e}") from None
    log.info("read %d trees from %s", len(trees), src)
    return trees


def load_pos(path: str, g: Optional[Grammar] = None) -> List[Symbol]:
    """Whitespace-separated POS tag names; kinds follow ``g`` when given (terminal otherwise)."""
    with open(path, "r", encoding="utf-8") as f:
        names = f.read().split()
    out = []
    for name in names:
        if g is not None and nonterminal(name) in g.nonterminals:
            out.append(nonterminal(name))
        else:
            out.append(terminal(name))
    return out


def mini_grammar() -> Grammar:
    with open(MINI_GRAMMAR, "r", encoding="utf-8") as f:
        return parse_grammar(f.read(), path=MINI_GRAMMAR)


def mini_treebank(n: int = 200, seed: int = 0, max_depth: int = 10) -> List[ParseTree]:
    """``n`` trees sampled from the bundled grammar with a seeded generator."""
    g = mini_grammar()
    rng = np.random.default_rng(seed)
    return [random_tree(g, rng, max_depth=max_depth, weighted=True) for _ in range(n)]


def split_corpus(
    trees: Sequence[ParseTree],
    rng: np.random.Generator,
    test_fraction: float = 0.1,
) -> Tuple[List[ParseTree], List[ParseTree]]:
    """Random train/test split; both halves keep corpus order."""
    if not 0 < test_fraction < 1:
        raise TreebankError(f"test_fraction must lie strictly between 0 and 1, got {test_fraction}")
    n_test = max(1, int(round(len(trees) * test_fraction)))
    test_idx = set(int(i) for i in rng.choice(len(trees), size=n_test, replace=False))
    train = [t for i, t in enumerate(trees) if i not in test_idx]
    test = [t for i, t in enumerate(trees) if i in test_idx]
    return train, test
