"""Nullable symbols and composition of epsilon derivations into their consumers."""
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Set, Tuple

from .grammar import Grammar, LcgramError, Production, Symbol


class EpsilonCycleError(LcgramError):
    pass


def nullable_symbols(g: Grammar) -> FrozenSet[Symbol]:
    nullable: Set[Symbol] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in nullable and all(s in nullable for s in p.rhs):
                nullable.add(p.lhs)
                changed = True
    return frozenset(nullable)


@dataclass(frozen=True)
class EpsilonDerivation:
    """Weight of the empty string under a symbol.

    ``weight`` is the sum over all epsilon derivations, or the best one when
    computed with ``best=True``; ``production`` is the best derivation's top
    production (only meaningful with ``best=True``).
    """

    weight: float
    production: Optional[Production] = None


def epsilon_derivations(g: Grammar, best: bool = False) -> Dict[Symbol, EpsilonDerivation]:
    nullable = nullable_symbols(g)
    candidates = {
        a: [p for p in g.by_lhs.get(a, ()) if all(s in nullable for s in p.rhs)]
        for a in nullable
    }
    done: Dict[Symbol, EpsilonDerivation] = {}
    active: Set[Symbol] = set()

    def visit(a: Symbol) -> EpsilonDerivation:
        if a in done:
            return done[a]
        if a in active:
            raise EpsilonCycleError(f"epsilon derivations of {a} are cyclic")
        active.add(a)
        total, top, top_w = 0.0, None, -1.0
        for p in candidates[a]:
            w = p.weight
            for s in p.rhs:
                w *= visit(s).weight
            total += w
            if w > top_w:
                top, top_w = p, w
        active.discard(a)
        done[a] = EpsilonDerivation(top_w if best else total, top)
        return done[a]

    for a in sorted(nullable):
        visit(a)
    return done


def compose_epsilon(
    productions: Iterable[Production],
    eps_weight: Mapping[Symbol, float],
) -> Iterator[Tuple[Production, Production, Tuple[int, ...]]]:
    """Yield ``(variant, source, dropped_positions)`` for every way of erasing
    symbols listed in ``eps_weight`` from each production.

    The variant's weight is the source weight times the erased symbols'
    epsilon weights. Variants emptied by erasure are skipped.
    """
    for p in productions:
        positions = [i for i, s in enumerate(p.rhs) if s in eps_weight]
        for r in range(len(positions) + 1):
            for drop in combinations(positions, r):
                rhs = tuple(s for i, s in enumerate(p.rhs) if i not in drop)
                if not rhs and r:
                    continue
                w = p.weight
                for i in drop:
                    w *= eps_weight[p.rhs[i]]
                yield Production(p.lhs, rhs, w), p, drop
