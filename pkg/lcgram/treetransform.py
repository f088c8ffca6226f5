"""The 1-to-1 tree transform matching lc_transform, and its inverse.

Each top-down node keeps its predicted label D; the left spine below it,
down to the first node whose production is top-down (or to a terminal), is
turned inside out into a right-branching chain of LC(D;X) nodes that ends
with LC(D;D) -> EPS in keep mode.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Container, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from tqdm import tqdm

from .grammar import LC_FACT, LC_PAIR, TD_PRIME, Grammar, Production, Symbol, lc_fact, lc_pair, td_prime
from .transform import TransformOptions
from .trees import EPS, ParseTree, TreeError, epsilon_leaf, node
from .unary import break_unary_cycles_tree

log = logging.getLogger(__name__)

_DERIVED_NODE = (LC_PAIR, LC_FACT, TD_PRIME)


def _is_lc(t: ParseTree, d: Symbol) -> bool:
    return not t.is_leaf and t.label.kind == LC_PAIR and t.label.args[0] == d


# ------------ Forward ------------

def _spine(n: ParseTree, L: Container[Production], grammar: Optional[Grammar], path: Tuple[int, ...]) -> List[ParseTree]:
    spine = [n]
    cur = n
    while not cur.is_leaf:
        p = cur.production()
        if grammar is not None and p not in grammar:
            raise TreeError(f"unknown production {p}", path=path + (0,) * (len(spine) - 1))
        if p not in L:
            break
        cur = cur.children[0]
        spine.append(cur)
    return spine


def _forward(n: ParseTree, L, opts: TransformOptions, grammar: Optional[Grammar], path: Tuple[int, ...]) -> ParseTree:
    if n.is_leaf:
        if n.label == EPS:
            raise TreeError("epsilon leaf in a source tree", path=path)
        return n
    d = n.label
    spine = _spine(n, L, grammar, path)
    bottom = spine[-1]
    depth = len(spine) - 1
    if bottom.is_leaf:
        head = [bottom]
    else:
        below = path + (0,) * depth
        alpha = [_forward(c, L, opts, grammar, below + (i,)) for i, c in enumerate(bottom.children)]
        head = [node(td_prime(bottom.label), alpha)] if opts.td_factored else alpha

    chain = node(lc_pair(d, d), [epsilon_leaf()])
    for i in range(depth):
        c, b = spine[i].label, spine[i + 1].label
        here = path + (0,) * i
        beta = [_forward(k, L, opts, grammar, here + (j,)) for j, k in enumerate(spine[i].children[1:], start=1)]
        if opts.lc_factored:
            kids = [node(lc_fact(c, b), beta or [epsilon_leaf()]), chain]
        else:
            kids = beta + [chain]
        chain = node(lc_pair(d, b), kids)
    return node(d, head + [chain])


def _is_1d(t: ParseTree) -> bool:
    return (
        not t.is_leaf
        and t.label.kind == LC_PAIR
        and t.label.args[0] == t.label.args[1]
        and t.children == (epsilon_leaf(),)
    )


def _drop_one_step(t: ParseTree) -> ParseTree:
    if t.is_leaf:
        return t
    kids = [_drop_one_step(c) for c in t.children if not _is_1d(c)]
    return node(t.label, kids or [epsilon_leaf()])


def _drop_empty(t: ParseTree) -> Optional[ParseTree]:
    if t.is_leaf:
        return None if t.label == EPS else t
    kids = [k for k in map(_drop_empty, t.children) if k is not None]
    return node(t.label, kids) if kids else None


def lc_tree_transform(
    t: ParseTree,
    L: Container[Production],
    opts: TransformOptions = TransformOptions(),
    grammar: Optional[Grammar] = None,
) -> ParseTree:
    """Transform one tree; with ``grammar`` every node's production must belong to it."""
    out = _forward(t, L, opts, grammar, ())
    if opts.epsilon == "one_step":
        out = _drop_one_step(out)
    elif opts.epsilon == "full":
        out = _drop_empty(out)
        if out is None:
            raise TreeError("tree has an empty yield")
    return out


# ------------ Inverse ------------

class _Inverter:
    """Rebuilds source trees; ``full`` needs the grammar and L to recover
    unary left-corner chains whose nodes were deleted with their empty yield."""

    def __init__(self, opts: TransformOptions, grammar: Optional[Grammar], L: Optional[Container[Production]]):
        self.full = opts.epsilon == "full"
        self.unary_up: Dict[Symbol, List[Symbol]] = {}
        self.top_down: Dict[Tuple[Symbol, ...], List[Symbol]] = {}
        self.left: Dict[Tuple[Symbol, Tuple[Symbol, ...]], List[Symbol]] = {}
        if not self.full:
            return
        if grammar is None or L is None:
            raise TreeError("detransforming full epsilon-removed trees needs the source grammar and left-corner set")
        for p in grammar.productions:
            if p in L:
                if p.is_unary:
                    self.unary_up.setdefault(p.rhs[0], []).append(p.lhs)
                self.left.setdefault((p.rhs[0], p.rhs[1:]), []).append(p.lhs)
            else:
                self.top_down.setdefault(p.rhs, []).append(p.lhs)

    def unary_paths(self, d: Symbol, x: Symbol) -> List[List[Symbol]]:
        """Paths ``[d, ..., x]`` of unary left-corner productions, read top-down."""
        out: List[List[Symbol]] = []

        def up(sym: Symbol, trail: List[Symbol]) -> None:
            if sym == d:
                out.append(trail[::-1])
            for parent in self.unary_up.get(sym, ()):
                if parent not in trail:
                    up(parent, trail + [parent])

        up(x, [x])
        return out

    @staticmethod
    def one(options: list, what: str, path):
        if len(options) != 1:
            raise TreeError(f"{'no' if not options else 'ambiguous'} reconstruction of {what}", path=path)
        return options[0]

    @staticmethod
    def wrap(trail: Sequence[Symbol], t: ParseTree) -> ParseTree:
        for sym in reversed(trail[:-1]):
            t = node(sym, [t])
        return t

    def close(self, d: Symbol, cur: ParseTree, path) -> ParseTree:
        """Finish a chain that stopped at ``cur`` without reaching ``d``."""
        if cur.label == d:
            return cur
        if not self.full:
            raise TreeError(f"left-corner chain of {d} stops at {cur.label}", path=path)
        return self.wrap(self.one(self.unary_paths(d, cur.label), f"the chain {d} .. {cur.label}", path), cur)

    def child(self, c: ParseTree, path) -> ParseTree:
        if c.is_leaf:
            return c
        if c.label.kind in _DERIVED_NODE:
            raise TreeError(f"unexpected {c.label} below a top-down node", path=path)
        return self.top(c, path)

    def kids(self, cs: Sequence[ParseTree], path) -> List[ParseTree]:
        return [self.child(c, path + (i,)) for i, c in enumerate(cs) if c.label != EPS]

    def top(self, n: ParseTree, path) -> ParseTree:
        d = n.label
        kids = list(n.children)
        chain = kids.pop() if kids and _is_lc(kids[-1], d) else None
        if not kids:
            raise TreeError(f"{d} has a left-corner chain but no left corner", path=path)

        if len(kids) == 1 and not kids[0].is_leaf and kids[0].label.kind == TD_PRIME:
            bottom = node(kids[0].label.args[0], self.kids(kids[0].children, path + (0,)))
        elif chain is not None:
            x = chain.label.args[1]
            if not x.is_terminal:
                bottom = node(x, self.kids(kids, path))
            elif len(kids) == 1 and kids[0].label == x:
                bottom = kids[0]
            else:
                raise TreeError(f"{chain.label} does not match left corner {kids[0].label}", path=path)
        elif not self.full:
            # top-down production with LC(D;D) -> EPS composed away
            return node(d, self.kids(kids, path))
        else:
            alpha = self.kids(kids, path)
            options = [
                (trail, node(a, alpha))
                for a in self.top_down.get(tuple(c.label for c in alpha), ())
                for trail in self.unary_paths(d, a)
            ]
            if len(alpha) == 1 and alpha[0].is_leaf:
                options.extend((trail, alpha[0]) for trail in self.unary_paths(d, alpha[0].label))
            trail, bottom = self.one(options, f"the left corner of {d}", path)
            return self.wrap(trail, bottom)

        if chain is None:
            return self.close(d, bottom, path)
        return self.climb(d, chain, bottom, path + (len(n.children) - 1,))

    def climb(self, d: Symbol, lc: ParseTree, cur: ParseTree, path) -> ParseTree:
        while True:
            pd, b = lc.label.args
            if pd != d or b != cur.label:
                raise TreeError(f"{lc.label} does not continue the chain of {d} at {cur.label}", path=path)
            kids = list(lc.children)
            if kids == [epsilon_leaf()]:
                if b == d:
                    return cur
                if self.full:
                    raise TreeError(f"{lc.label} has an empty yield", path=path)
                # unary left-corner production D -> B with LC(D;D) -> EPS composed away
                return node(d, [cur])
            nxt = kids.pop() if kids and _is_lc(kids[-1], d) else None
            if kids and not kids[0].is_leaf and kids[0].label.kind == LC_FACT:
                pt = kids.pop(0)
                if pt.label.args[1] != b or kids:
                    raise TreeError(f"misplaced {pt.label} under {lc.label}", path=path)
                c = pt.label.args[0]
                beta = self.kids(pt.children, path + (0,))
            elif nxt is not None:
                c = nxt.label.args[1]
                beta = self.kids(kids, path)
            elif not self.full:
                c = d
                beta = self.kids(kids, path)
            else:
                beta = self.kids(kids, path)
                labels = tuple(k.label for k in beta)
                options = [(trail, lhs) for lhs in self.left.get((b, labels), ()) for trail in self.unary_paths(d, lhs)]
                trail, c = self.one(options, f"the left-corner parent of {b}", path)
                return self.wrap(trail, node(c, [cur] + beta))
            cur = node(c, [cur] + beta)
            if nxt is None:
                return self.close(d, cur, path)
            path = path + (len(lc.children) - 1,)
            lc = nxt


def lc_tree_detransform(
    t: ParseTree,
    opts: TransformOptions = TransformOptions(),
    grammar: Optional[Grammar] = None,
    left_corner: Optional[Container[Production]] = None,
) -> ParseTree:
    """Invert lc_tree_transform.

    keep and one_step trees are inverted from their labels alone; full trees
    need the source ``grammar`` and ``left_corner`` set to restore unary chains.
    """
    if t.is_leaf or t.label.kind in _DERIVED_NODE:
        raise TreeError(f"root {t.label} is not a top-down node", path=())
    return _Inverter(opts, grammar, left_corner).top(t, ())


# ------------ Corpora ------------

def _one(t: ParseTree, L, opts: TransformOptions, cyclic: FrozenSet[Symbol], classes, grammar) -> ParseTree:
    if cyclic:
        t = break_unary_cycles_tree(t, cyclic, classes)
    return lc_tree_transform(t, L, opts, grammar)


def transform_corpus(
    trees: Sequence[ParseTree],
    L: Container[Production],
    opts: TransformOptions = TransformOptions(),
    cyclic: Iterable[Symbol] = (),
    classes: Optional[Mapping[Symbol, FrozenSet[Symbol]]] = None,
    grammar: Optional[Grammar] = None,
    jobs: int = 1,
    progress: bool = False,
) -> List[ParseTree]:
    """Break unary cycles (when ``cyclic`` is given) and transform every tree, keeping order."""
    work = partial(_one, L=L, opts=opts, cyclic=frozenset(cyclic), classes=classes, grammar=grammar)
    bar = dict(total=len(trees), desc="transform", disable=not progress)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(tqdm(pool.map(work, trees, chunksize=64), **bar))
    return [work(t) for t in tqdm(trees, **bar)]
