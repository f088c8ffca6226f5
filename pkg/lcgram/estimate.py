"""Relative-frequency PCFG estimation from a tree corpus."""
import logging
from typing import Iterable, List, Optional, Sequence

from nltk import Nonterminal, induce_pcfg
from nltk import Production as TreeProduction

from .grammar import Grammar, LcgramError, Production, Symbol, production_key
from .trees import ParseTree, tree_productions

log = logging.getLogger(__name__)


class EstimationError(LcgramError):
    pass


def _observed(trees: Iterable[ParseTree]) -> List[TreeProduction]:
    out = []
    for t in trees:
        for p, n in tree_productions(t).items():
            rhs = [Nonterminal(s) if s.is_nonterminal else s for s in p.rhs]
            out.extend([TreeProduction(Nonterminal(p.lhs), rhs)] * n)
    return out


def estimate_pcfg(
    corpus: Sequence[ParseTree],
    start: Symbol,
    roots: Optional[Iterable[Symbol]] = None,
    pos_tags: Iterable[Symbol] = (),
) -> Grammar:
    """Maximum-likelihood weights ``count(A -> alpha) / count(A)``.

    No smoothing: productions never observed are absent.
    """
    if not corpus:
        raise EstimationError("cannot estimate a grammar from an empty corpus")
    allowed = frozenset(roots) if roots is not None else frozenset([start])
    for i, t in enumerate(corpus):
        if t.label not in allowed:
            raise EstimationError(f"tree {i + 1} is rooted at {t.label}, expected {', '.join(sorted(s.label for s in allowed))}")
    pcfg = induce_pcfg(Nonterminal(start), _observed(corpus))
    prods = sorted(
        (
            Production(
                pp.lhs().symbol(),
                tuple(s.symbol() if isinstance(s, Nonterminal) else s for s in pp.rhs()),
                pp.prob(),
            )
            for pp in pcfg.productions()
        ),
        key=production_key,
    )
    log.info("estimated %d productions from %d trees", len(prods), len(corpus))
    return Grammar.build(prods, start, pos_tags=pos_tags)
