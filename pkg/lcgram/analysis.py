"""Closure relations and left-recursion analysis over a grammar.

Every relation here is the least fixpoint of its defining edges, computed by
breadth-first search from each nonterminal, so recomputation is exact and
deterministic.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Collection, Container, Dict, FrozenSet, Iterable, Mapping, Optional, Set, Tuple

from .epsilon import nullable_symbols
from .grammar import Grammar, LcgramError, Production, Symbol

log = logging.getLogger(__name__)

MODES = ("all", "non_pos_initial", "l0", "explicit")


class AnalysisError(LcgramError):
    pass


@dataclass(frozen=True)
class PairRelation:
    """A set of ``(nonterminal, symbol)`` pairs."""

    pairs: FrozenSet[Tuple[Symbol, Symbol]]

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __le__(self, other: "PairRelation") -> bool:
        return self.pairs <= other.pairs


def _check_subset(g: Grammar, L: Iterable[Production]) -> Tuple[Production, ...]:
    prods = tuple(L)
    missing = [p for p in prods if p not in g]
    if missing:
        raise AnalysisError(f"left-corner set is not a subset of the grammar: {', '.join(map(str, missing[:5]))}")
    return prods


def _reach(sources: Iterable[Symbol], edges: Mapping[Symbol, Collection[Symbol]], reflexive: bool) -> PairRelation:
    pairs = set()
    for a in sources:
        seen: Set[Symbol] = set()
        queue = deque(edges.get(a, ()))
        while queue:
            x = queue.popleft()
            if x in seen:
                continue
            seen.add(x)
            queue.extend(edges.get(x, ()))
        if reflexive:
            seen.add(a)
        pairs.update((a, x) for x in seen)
    return PairRelation(frozenset(pairs))


def _first_edges(prods: Iterable[Production]) -> Dict[Symbol, Set[Symbol]]:
    edges: Dict[Symbol, Set[Symbol]] = {}
    for p in prods:
        if p.rhs:
            edges.setdefault(p.lhs, set()).add(p.rhs[0])
    return edges


def left_corner_relation(g: Grammar, L: Iterable[Production]) -> PairRelation:
    """``(D, X)`` such that ``D =>*_L X gamma``."""
    prods = _check_subset(g, L)
    return _reach(sorted(g.nonterminals), _first_edges(prods), reflexive=True)


def strict_left_corner_relation(g: Grammar, L: Iterable[Production]) -> PairRelation:
    """``(D, X)`` such that ``D =>*_L X gamma`` with ``gamma`` nonempty."""
    prods = _check_subset(g, L)
    edges: Dict[Symbol, Set[Tuple[Symbol, bool]]] = {}
    for p in prods:
        if p.rhs:
            edges.setdefault(p.lhs, set()).add((p.rhs[0], len(p.rhs) > 1))
    pairs = set()
    for d in sorted(g.nonterminals):
        seen: Set[Tuple[Symbol, bool]] = set()
        queue = deque([(d, False)])
        while queue:
            x, rest = queue.popleft()
            for y, more in edges.get(x, ()):
                state = (y, rest or more)
                if state not in seen:
                    seen.add(state)
                    queue.append(state)
        pairs.update((d, x) for x, rest in seen if rest)
    return PairRelation(frozenset(pairs))


def unary_chain_relation(g: Grammar, L: Iterable[Production], reflexive: bool = True) -> PairRelation:
    """``(D, X)`` such that ``D =>*_L X`` through unary productions of L.

    With ``reflexive=False`` this is ``D =>+_L X``.
    """
    prods = _check_subset(g, L)
    return _reach(sorted(g.nonterminals), _first_edges(p for p in prods if p.is_unary), reflexive)


def cyclic_nonterminals(g: Grammar) -> FrozenSet[Symbol]:
    unary = _first_edges(p for p in g.productions if p.is_unary and p.rhs[0].is_nonterminal)
    rel = _reach(sorted(unary), unary, reflexive=False)
    return frozenset(a for a, x in rel if a == x)


def unary_cycle_classes(g: Grammar) -> Dict[Symbol, FrozenSet[Symbol]]:
    """Each cyclic nonterminal mapped to the nonterminals on unary cycles through it."""
    cyclic = cyclic_nonterminals(g)
    if not cyclic:
        return {}
    rel = unary_chain_relation(g, g.productions)
    return {a: frozenset(b for b in cyclic if (a, b) in rel and (b, a) in rel) for a in sorted(cyclic)}


def left_recursive_set(g: Grammar) -> FrozenSet[Production]:
    """The left-recursive productions ``A -> B beta`` with ``B =>* A gamma``."""
    cyclic = cyclic_nonterminals(g)
    if cyclic:
        raise AnalysisError(
            f"grammar has unary cycles through {', '.join(sorted(s.label for s in cyclic))}; "
            "apply remove_unary_cycles first"
        )
    rel = left_corner_relation(g, g.productions)
    return frozenset(p for p in g.productions if p.rhs and p.rhs[0].is_nonterminal and (p.rhs[0], p.lhs) in rel)


class AllProductions:
    """Left-corner set of the standard transform: every non-epsilon production."""

    def __contains__(self, p: object) -> bool:
        return isinstance(p, Production) and bool(p.rhs)

    def __repr__(self) -> str:
        return "AllProductions()"


class NonPosInitial:
    """Productions whose first right-hand symbol is neither a terminal nor a POS tag."""

    def __init__(self, pos_tags: Iterable[Symbol]):
        self.pos_tags = frozenset(pos_tags)

    def __contains__(self, p: object) -> bool:
        if not isinstance(p, Production) or not p.rhs:
            return False
        first = p.rhs[0]
        return first.is_nonterminal and first not in self.pos_tags

    def __repr__(self) -> str:
        return f"NonPosInitial({sorted(s.label for s in self.pos_tags)})"


def left_corner_set(g: Grammar, mode: str, explicit: Optional[Iterable[Production]] = None) -> Container[Production]:
    """A membership test for L that also classifies productions outside ``g``.

    ``all`` and ``non_pos_initial`` are predicates; ``l0`` and ``explicit`` are
    fixed sets (productions outside them are top-down).
    """
    if mode == "all":
        return AllProductions()
    if mode == "non_pos_initial":
        if not g.pos_tags:
            raise AnalysisError("mode non_pos_initial needs POS tags (%pos line or --pos file)")
        return NonPosInitial(g.pos_tags)
    return select_L(g, mode, explicit)


def select_L(g: Grammar, mode: str, explicit: Optional[Iterable[Production]] = None) -> FrozenSet[Production]:
    if mode not in MODES:
        raise AnalysisError(f"unknown left-corner mode {mode!r}; expected one of {MODES}")
    if mode == "l0":
        return left_recursive_set(g)
    if mode == "explicit":
        chosen = frozenset(_check_subset(g, explicit or ()))
        if not cyclic_nonterminals(g):
            left_out = left_recursive_set(g) - chosen
            if left_out:
                log.warning(
                    "left-corner set omits %d left-recursive production(s), e.g. %s; output may be left-recursive",
                    len(left_out), min(map(str, left_out)),
                )
        return chosen
    test = left_corner_set(g, mode)
    return frozenset(p for p in g.productions if p in test)


def productive_symbols(g: Grammar) -> FrozenSet[Symbol]:
    productive: Set[Symbol] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in productive and all(s.is_terminal or s in productive for s in p.rhs):
                productive.add(p.lhs)
                changed = True
    return frozenset(productive)


def prune_useless(g: Grammar) -> Grammar:
    """Keep exactly the productions used in some terminating derivation from S."""
    productive = productive_symbols(g)
    if g.start not in productive:
        log.warning("start symbol %s derives no terminal string; grammar is empty", g.start)
        return g.with_productions(())
    usable = [p for p in g.productions if p.lhs in productive and all(s.is_terminal or s in productive for s in p.rhs)]
    by_lhs: Dict[Symbol, list] = {}
    for p in usable:
        by_lhs.setdefault(p.lhs, []).append(p)
    reached = {g.start}
    queue = deque([g.start])
    while queue:
        a = queue.popleft()
        for p in by_lhs.get(a, ()):
            for s in p.rhs:
                if s.is_nonterminal and s not in reached:
                    reached.add(s)
                    queue.append(s)
    kept = [p for p in usable if p.lhs in reached]
    if len(kept) == len(g.productions):
        return g
    return g.with_productions(kept)


def is_left_recursive(g: Grammar) -> bool:
    """True if some nonterminal derives a string beginning with itself in one or more steps.

    Nullable symbols are skipped when following left corners, so epsilon
    productions cannot hide left recursion.
    """
    nullable = nullable_symbols(g)
    edges: Dict[Symbol, Set[Symbol]] = {}
    for p in g.productions:
        for s in p.rhs:
            edges.setdefault(p.lhs, set()).add(s)
            if s not in nullable:
                break
    rel = _reach(sorted(g.nonterminals), edges, reflexive=False)
    return any(a == x for a, x in rel)

