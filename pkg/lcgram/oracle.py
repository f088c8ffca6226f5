"""Brute-force oracles for testing transforms and parsers, and random grammars.

Everything here is exponential in the worst case; the length guards keep
calls desk-sized.
"""
import logging
import math
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .analysis import is_left_recursive, prune_useless, select_L
from .grammar import Grammar, LcgramError, Production, Symbol, nonterminal, production_key, terminal
from .transform import EPSILON_MODES, FACTORS, TransformOptions, lc_transform
from .trees import ParseTree, epsilon_leaf, leaf, node

log = logging.getLogger(__name__)

MAX_STRING_LEN = 12
MAX_PARSE_LEN = 8

__all__ = [
    "OracleError",
    "enumerate_strings",
    "enumerate_parses",
    "string_probabilities",
    "is_left_recursive",
    "check_claims",
    "random_grammar",
    "random_pcfg",
    "random_tree",
    "random_trees",
]

Strings = FrozenSet[Tuple[str, ...]]


class OracleError(LcgramError):
    pass


def enumerate_strings(g: Grammar, max_len: int) -> Strings:
    """Every terminal string of length <= ``max_len`` derivable from the start symbol.

    Strings are built shortest first, with a least fixpoint inside each
    length for unary and epsilon steps, so left recursion, unary cycles and
    epsilon productions all terminate.
    """
    if max_len > MAX_STRING_LEN:
        raise OracleError(f"max_len {max_len} exceeds the enumeration guard of {MAX_STRING_LEN}")
    lang: Dict[Symbol, List[Set[Tuple[str, ...]]]] = {a: [set() for _ in range(max_len + 1)] for a in g.nonterminals}

    def at(s: Symbol, n: int) -> Set[Tuple[str, ...]]:
        if s.is_terminal:
            return {(s.name,)} if n == 1 else set()
        return lang[s][n]

    def combine(rhs: Tuple[Symbol, ...], n: int) -> Set[Tuple[str, ...]]:
        if not rhs:
            return {()} if n == 0 else set()
        out: Set[Tuple[str, ...]] = set()
        for k in range(n + 1):
            heads = at(rhs[0], k)
            if not heads:
                continue
            tails = combine(rhs[1:], n - k)
            out.update(h + t for h in heads for t in tails)
        return out

    for n in range(max_len + 1):
        changed = True
        while changed:
            changed = False
            for p in g.productions:
                new = combine(p.rhs, n) - lang[p.lhs][n]
                if new:
                    lang[p.lhs][n] |= new
                    changed = True
    if g.start not in lang:
        return frozenset()
    return frozenset(s for level in lang[g.start] for s in level)


def _min_lengths(g: Grammar) -> Dict[Symbol, float]:
    best: Dict[Symbol, float] = {a: math.inf for a in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            n = sum(1 if s.is_terminal else best[s] for s in p.rhs)
            if n < best[p.lhs]:
                best[p.lhs] = n
                changed = True
    return best


def enumerate_parses(
    g: Grammar,
    tokens: Sequence[Union[str, Symbol]],
    max_len: int = MAX_PARSE_LEN,
) -> List[Tuple[ParseTree, float]]:
    """All parses of ``tokens`` rooted at the start symbol, with their weights."""
    toks = tuple(t if isinstance(t, Symbol) else terminal(t) for t in tokens)
    if len(toks) > max_len:
        raise OracleError(f"sentence of length {len(toks)} exceeds the enumeration guard of {max_len}")
    minlen = _min_lengths(g)
    memo: Dict[Tuple[Symbol, int, int], List[Tuple[ParseTree, float]]] = {}
    active: Set[Tuple[Symbol, int, int]] = set()

    def size(s: Symbol) -> float:
        return 1 if s.is_terminal else minlen[s]

    def trees(sym: Symbol, i: int, j: int) -> List[Tuple[ParseTree, float]]:
        if sym.is_terminal:
            return [(leaf(sym), 1.0)] if j == i + 1 and toks[i] == sym else []
        key = (sym, i, j)
        if key in memo:
            return memo[key]
        if key in active:
            raise OracleError(f"{sym} derives itself over span {i}-{j}: unary or epsilon cycle")
        active.add(key)
        out = []
        for p in g.by_lhs.get(sym, ()):
            if not p.rhs:
                if i == j:
                    out.append((node(sym, [epsilon_leaf()]), p.weight))
                continue
            for kids, w in sequences(p.rhs, 0, i, j):
                out.append((node(sym, kids), w * p.weight))
        active.discard(key)
        memo[key] = out
        return out

    def sequences(rhs: Tuple[Symbol, ...], k: int, i: int, j: int) -> List[Tuple[List[ParseTree], float]]:
        if k == len(rhs):
            return [([], 1.0)] if i == j else []
        rest = sum(size(s) for s in rhs[k + 1:])
        if rest > j - i:
            return []
        out = []
        for m in range(i + int(min(size(rhs[k]), j - i)), j - int(rest) + 1):
            heads = trees(rhs[k], i, m)
            if not heads:
                continue
            for tail, w_tail in sequences(rhs, k + 1, m, j):
                out.extend(([t] + tail, w * w_tail) for t, w in heads)
        return out

    return trees(g.start, 0, len(toks))


def string_probabilities(g: Grammar, max_len: int) -> Dict[Tuple[str, ...], float]:
    """Total weight of every string up to ``max_len``, summed over its parses."""
    if max_len > MAX_PARSE_LEN:
        raise OracleError(f"max_len {max_len} exceeds the parse enumeration guard of {MAX_PARSE_LEN}")
    return {s: sum(w for _, w in enumerate_parses(g, s)) for s in sorted(enumerate_strings(g, max_len))}


# ------------ Random grammars and trees ------------

def random_grammar(
    rng: np.random.Generator,
    max_nonterminals: int = 8,
    max_productions: int = 25,
    n_terminals: int = 3,
    max_rhs: int = 3,
    attempts: int = 100,
) -> Grammar:
    """A random epsilon-free grammar without unary cycles, pruned of useless productions.

    Unary productions ``Ni -> Nj`` only go to higher indices, so unary chains
    form a DAG; first symbols are biased toward nonterminals so left
    recursion is common.
    """
    ts = [terminal(chr(ord("a") + i)) for i in range(n_terminals)]
    for _ in range(attempts):
        k = int(rng.integers(2, max_nonterminals + 1))
        nts = [nonterminal(f"N{i}") for i in range(k)]
        prods = set()
        for _ in range(int(rng.integers(k, max_productions + 1))):
            lhs = int(rng.integers(k))
            length = int(rng.integers(1, max_rhs + 1))
            rhs = []
            for pos in range(length):
                if rng.random() < (0.6 if pos == 0 else 0.4):
                    rhs.append(nts[int(rng.integers(k))])
                else:
                    rhs.append(ts[int(rng.integers(n_terminals))])
            if length == 1 and rhs[0].is_nonterminal and nts.index(rhs[0]) <= lhs:
                continue
            prods.add(Production(nts[lhs], tuple(rhs)))
        g = prune_useless(Grammar.build(sorted(prods, key=str), nts[0]))
        if len(g) >= 2:
            return g
    raise OracleError(f"no usable random grammar in {attempts} attempts")


def random_pcfg(rng: np.random.Generator, **kwargs) -> Grammar:
    """random_grammar with per-LHS weights drawn from a flat Dirichlet."""
    g = random_grammar(rng, **kwargs)
    prods = []
    for lhs in sorted(g.by_lhs):
        group = g.by_lhs[lhs]
        weights = rng.dirichlet(np.ones(len(group)))
        prods.extend(p.with_weight(float(w)) for p, w in zip(group, weights))
    return g.with_productions(prods)


def _min_heights(g: Grammar) -> Dict[Symbol, float]:
    best: Dict[Symbol, float] = {a: math.inf for a in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            h = 1 + max((0 if s.is_terminal else best[s] for s in p.rhs), default=0)
            if h < best[p.lhs]:
                best[p.lhs] = h
                changed = True
    return best


def random_tree(g: Grammar, rng: np.random.Generator, max_depth: int = 12, weighted: Optional[bool] = None) -> ParseTree:
    """Sample a tree top-down, choosing only productions that can finish within ``max_depth``."""
    heights = _min_heights(g)
    if heights.get(g.start, math.inf) > max_depth:
        raise OracleError(f"no tree of depth <= {max_depth} from {g.start}")
    if weighted is None:
        weighted = g.weighted

    def height(p: Production) -> float:
        return 1 + max((0 if s.is_terminal else heights[s] for s in p.rhs), default=0)

    def grow(sym: Symbol, depth: int) -> ParseTree:
        if sym.is_terminal:
            return leaf(sym)
        options = [p for p in g.by_lhs.get(sym, ()) if height(p) <= depth]
        if weighted:
            w = np.array([p.weight for p in options], dtype=float)
            choice = options[int(rng.choice(len(options), p=w / w.sum()))] if w.sum() > 0 else options[0]
        else:
            choice = options[int(rng.integers(len(options)))]
        if not choice.rhs:
            return node(sym, [epsilon_leaf()])
        return node(sym, [grow(s, depth - 1) for s in choice.rhs])

    return grow(g.start, max_depth)


def random_trees(g: Grammar, rng: np.random.Generator, n: int, max_depth: int = 12) -> List[ParseTree]:
    return [random_tree(g, rng, max_depth) for _ in range(n)]


def check_claims(g: Grammar) -> List[str]:
    """Failures of the two left-recursion claims for ``g`` (empty when both hold).

    With L = L0 no factorization or epsilon mode leaves the output left
    recursive, and dropping any single production from L0 makes it so.
    """
    failures = []
    l0 = select_L(g, "l0")
    for factor in FACTORS:
        for eps in EPSILON_MODES:
            out = lc_transform(g, l0, TransformOptions(factor=factor, epsilon=eps)).grammar
            if is_left_recursive(out):
                failures.append(f"left recursive output with L=L0, factor={factor}, epsilon={eps}")
    for p in sorted(l0, key=production_key):
        out = lc_transform(g, l0 - {p}, TransformOptions()).grammar
        if not is_left_recursive(out):
            failures.append(f"output stays non-left-recursive without {p} in L")
    return failures
