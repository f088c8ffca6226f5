"""Penn-style bracketed parse trees over grammar Symbols."""
from collections import Counter
from dataclasses import dataclass
from io import StringIO
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import regex
from nltk import Tree
from nltk.corpus.reader.util import read_sexpr_block

from .grammar import EPS, GrammarError, LcgramError, Production, Symbol, nonterminal, parse_symbol, terminal


class TreeError(LcgramError):
    def __init__(self, message: str, position: Optional[int] = None, path: Optional[Sequence[int]] = None):
        self.position = position
        self.path = tuple(path) if path is not None else None
        if position is not None:
            message = f"at character {position}: {message}"
        if path is not None:
            message = f"at node {'/'.join(map(str, path)) or 'root'}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class ParseTree:
    label: Symbol
    children: Tuple["ParseTree", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __str__(self) -> str:
        return write_tree(self)

    def production(self) -> Production:
        return Production(self.label, tuple(c.label for c in self.children if c.label != EPS))

    def leaves(self) -> Iterator[Symbol]:
        if self.is_leaf:
            yield self.label
            return
        for c in self.children:
            yield from c.leaves()

    def subtrees(self) -> Iterator["ParseTree"]:
        yield self
        for c in self.children:
            yield from c.subtrees()


def leaf(sym: Symbol) -> ParseTree:
    return ParseTree(sym)


def node(label: Symbol, children: Iterable[ParseTree]) -> ParseTree:
    return ParseTree(label, tuple(children))


def epsilon_leaf() -> ParseTree:
    return ParseTree(EPS)


def tree_yield(t: ParseTree) -> Tuple[Symbol, ...]:
    """Terminal leaves left to right; epsilon markers excluded."""
    return tuple(s for s in t.leaves() if s != EPS)


def tree_productions(t: ParseTree) -> Counter:
    """One production per internal node, with multiplicity."""
    counts: Counter = Counter()
    stack = [t]
    while stack:
        n = stack.pop()
        if n.is_leaf:
            continue
        counts[n.production()] += 1
        stack.extend(n.children)
    return counts


def write_tree(t: ParseTree) -> str:
    if t.is_leaf:
        return t.label.label
    return "(" + " ".join([t.label.label, *(write_tree(c) for c in t.children)]) + ")"


def write_trees(trees: Iterable[ParseTree]) -> str:
    return "".join(write_tree(t) + "\n" for t in trees)


# ------------ Reading ------------

# derived labels carry balanced parentheses, e.g. LC(NAT(A);x)
_LABEL = r"(?:LC|PT|TD|NAT)\((?:[^\s()]|\([^\s()]*\))*\)|[^\s()]+"
_AT_INDEX = regex.compile(r"at index (\d+)")


def _bracket_groups(text: str) -> Iterator[Tuple[int, str]]:
    """Top-level bracket groups of ``text`` with their character offsets."""
    stream = StringIO(text)
    cursor = 0
    while True:
        block = read_sexpr_block(stream)
        if not block:
            return
        for group in block:
            pos = text.find(group, cursor)
            cursor = pos + len(group)
            if group.startswith(")"):
                raise TreeError("unbalanced ')'", pos)
            if not group.startswith("("):
                raise TreeError(f"token {group.split()[0]!r} outside brackets", pos)
            yield pos, group


def _parse_group(group: str, pos: int) -> Tree:
    try:
        return Tree.fromstring(group, node_pattern=_LABEL, leaf_pattern=_LABEL)
    except ValueError as e:
        message = str(e)
        if "got 'end-of-string'" in message:
            raise TreeError("unbalanced '(': tree not closed", pos) from None
        m = _AT_INDEX.search(message)
        raise TreeError(message.splitlines()[0], pos + int(m.group(1)) if m else pos) from None


def _leaf_names(t: Tree) -> set:
    # a bracketed leaf such as (b) comes back as a childless subtree
    return set(t.leaves()) | {s.label() for s in t.subtrees(lambda s: len(s) == 0)}


def _build(t, is_nt: Callable[[str], bool], pos: int) -> ParseTree:
    if isinstance(t, str):
        return epsilon_leaf() if t == EPS.name else leaf(terminal(t))
    label = t.label()
    if not label:
        raise TreeError("empty label", pos)
    if len(t) == 0:
        return leaf(terminal(label))
    try:
        sym = parse_symbol(label, is_nt)
    except GrammarError as e:
        raise TreeError(str(e), pos) from None
    if not sym.is_nonterminal:
        sym = nonterminal(label)
    return ParseTree(sym, tuple(_build(k, is_nt, pos) for k in t))


def read_trees(text: str, terminals: Optional[Iterable[str]] = None) -> List[ParseTree]:
    """Parse every bracketed tree in ``text``.

    The second argument of ``LC(D;X)`` / ``PT(C;X)`` labels is read as a
    terminal when ``X`` is among ``terminals`` or, if none are given, when
    ``X`` occurs as a leaf of the same tree.
    """
    fixed = set(terminals) if terminals is not None else None
    out = []
    for pos, group in _bracket_groups(text):
        t = _parse_group(group, pos)
        names = fixed if fixed is not None else _leaf_names(t) - {EPS.name}
        out.append(_build(t, lambda name, names=names: name not in names, pos))
    return out


def read_tree(text: str) -> ParseTree:
    trees = read_trees(text)
    if len(trees) != 1:
        raise TreeError(f"expected one tree, found {len(trees)}")
    return trees[0]
