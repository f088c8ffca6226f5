"""Unary-cycle removal for grammars and the matching chain collapse on trees.

A cyclic nonterminal ``A`` keeps no productions of its own; instead
``A -> D♮`` for every ``D`` on a unary cycle with ``A``, and ``D♮`` carries the
expansions of ``D`` that leave the cycle. With weights, ``A -> D♮`` absorbs
the total weight of all unary chains from ``A`` to ``D``.
"""
import logging
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional

import numpy as np

from .analysis import AnalysisError, unary_cycle_classes
from .grammar import NATURAL, Grammar, Production, Symbol, natural
from .trees import ParseTree, node

log = logging.getLogger(__name__)


def _chain_sums(order: List[Symbol], classes: Mapping[Symbol, FrozenSet[Symbol]], g: Grammar) -> np.ndarray:
    index = {a: i for i, a in enumerate(order)}
    w = np.zeros((len(order), len(order)))
    for a in order:
        for p in g.by_lhs.get(a, ()):
            if p.is_unary and p.rhs[0] in classes[a]:
                w[index[a], index[p.rhs[0]]] += p.weight
    radius = float(np.max(np.abs(np.linalg.eigvals(w)))) if len(order) else 0.0
    if radius >= 1.0 - 1e-12:
        raise AnalysisError(f"unary cycle weights diverge (spectral radius {radius:.6g} >= 1)")
    return np.linalg.inv(np.eye(len(order)) - w)


def remove_unary_cycles(g: Grammar, weighted: Optional[bool] = None) -> Grammar:
    classes = unary_cycle_classes(g)
    if not classes:
        return g
    if weighted is None:
        weighted = g.weighted
    order = sorted(classes)
    log.info("collapsing unary cycles through %s", ", ".join(a.label for a in order))

    exits: Dict[Symbol, List[Production]] = {
        d: [p for p in g.by_lhs.get(d, ()) if not (p.is_unary and p.rhs[0] in classes[d])]
        for d in order
    }
    z = {d: sum(p.weight for p in ps) for d, ps in exits.items()}
    sums = _chain_sums(order, classes, g) if weighted else None
    index = {a: i for i, a in enumerate(order)}

    out = [p for p in g.productions if p.lhs not in classes]
    for a in order:
        for d in sorted(classes[a]):
            if not exits[d] or (weighted and z[d] <= 0):
                continue
            w = float(sums[index[a], index[d]] * z[d]) if weighted else 1.0
            out.append(Production(a, (natural(d),), w))
    for d in order:
        if weighted and z[d] <= 0:
            continue
        for p in exits[d]:
            out.append(Production(natural(d), p.rhs, p.weight / z[d] if weighted else 1.0))
    return g.with_productions(out)


def break_unary_cycles_tree(
    t: ParseTree,
    cyclic: Iterable[Symbol],
    classes: Optional[Mapping[Symbol, FrozenSet[Symbol]]] = None,
) -> ParseTree:
    """Collapse each maximal unary chain of cyclic labels to ``X0 -> NAT(Xm)``.

    Without ``classes`` all of ``cyclic`` counts as one unary cycle.
    """
    cyclic = frozenset(cyclic)
    if not cyclic:
        return t

    def walk(n: ParseTree) -> ParseTree:
        if n.is_leaf:
            return n
        if n.label not in cyclic:
            return node(n.label, map(walk, n.children))
        members = classes[n.label] if classes is not None else cyclic
        cur = n
        while len(cur.children) == 1 and not cur.children[0].is_leaf and cur.children[0].label in members:
            cur = cur.children[0]
        return node(n.label, [node(natural(cur.label), map(walk, cur.children))])

    return walk(t)


def strip_naturals(t: ParseTree) -> ParseTree:
    """Splice out ``NAT(X)`` nodes, attaching their children to the parent."""
    if t.is_leaf:
        return t
    kids = []
    for c in t.children:
        c = strip_naturals(c)
        if not c.is_leaf and c.label.kind == NATURAL:
            kids.extend(c.children)
        else:
            kids.append(c)
    return node(t.label, kids)
