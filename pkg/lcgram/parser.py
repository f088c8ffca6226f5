"""Exhaustive Viterbi CKY parsing for weighted CFGs of any arity.

Productions are binarized on the fly into left-branching dotted items
``(rule, t)`` (the first ``t`` right-hand symbols recognized), so the output
trees never show the binarization. Nullable symbols are composed into their
consumers using their best epsilon derivation and re-inserted on
reconstruction.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from rapidfuzz import process
from tqdm import tqdm

from .epsilon import EpsilonCycleError, compose_epsilon, epsilon_derivations
from .grammar import Grammar, LcgramError, Production, Symbol, terminal
from .trees import ParseTree, epsilon_leaf, leaf, node, write_tree

log = logging.getLogger(__name__)

NO_PARSE = "(())"


class ParseError(LcgramError):
    pass


class UnknownTokenError(ParseError):
    pass


class _Rule(NamedTuple):
    lhs: Symbol
    rhs: Tuple[Symbol, ...]
    logw: float
    source: Production
    dropped: Tuple[int, ...]


@dataclass(frozen=True)
class _Entry:
    score: float
    rule: int
    split: int
    back: tuple

    def beats(self, other: Optional["_Entry"]) -> bool:
        if other is None or self.score > other.score:
            return True
        return self.score == other.score and (self.rule, self.split) < (other.rule, other.split)


@dataclass
class Chart:
    """Cells indexed by ``(start, end)``: complete symbols and dotted items."""

    n: int
    symbols: Dict[Tuple[int, int], Dict[Symbol, _Entry]] = field(default_factory=dict)
    items: Dict[Tuple[int, int], Dict[Tuple[int, int], _Entry]] = field(default_factory=dict)

    def cell(self, i: int, j: int) -> Dict[Symbol, _Entry]:
        return self.symbols.setdefault((i, j), {})

    def dotted(self, i: int, j: int) -> Dict[Tuple[int, int], _Entry]:
        return self.items.setdefault((i, j), {})


def _offer(table: dict, key, entry: _Entry) -> bool:
    if entry.beats(table.get(key)):
        table[key] = entry
        return True
    return False


def _suggest(token: str, known: Sequence[str]) -> str:
    match = process.extractOne(token, known, score_cutoff=60)
    return f" (did you mean {match[0]!r}?)" if match else ""


class CKYParser:
    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        try:
            self.eps = epsilon_derivations(grammar, best=True)
        except EpsilonCycleError as e:
            raise ParseError(str(e)) from None
        weights = {a: e.weight for a, e in self.eps.items()}

        self.rules: List[_Rule] = []
        for p in grammar.productions:
            for variant, source, dropped in compose_epsilon([p], weights):
                if not variant.rhs or variant.weight <= 0:
                    continue
                self.rules.append(_Rule(variant.lhs, variant.rhs, math.log(variant.weight), source, dropped))
        self.unary = [r for r, rule in enumerate(self.rules) if len(rule.rhs) == 1]
        self.starts: Dict[Symbol, List[int]] = {}
        for r, rule in enumerate(self.rules):
            if len(rule.rhs) > 1:
                self.starts.setdefault(rule.rhs[0], []).append(r)
        self.max_rounds = len(grammar.nonterminals) + len(grammar.terminals) + 1
        self._terminal_names = sorted(t.name for t in grammar.terminals)

    def _check_tokens(self, tokens: Sequence[Symbol]) -> None:
        if not tokens:
            raise ParseError("cannot parse an empty sentence")
        unknown = [t for t in tokens if t not in self.grammar.terminals]
        if unknown:
            names = sorted({t.name for t in unknown})
            raise UnknownTokenError(
                "unknown token(s): " + ", ".join(f"{n!r}{_suggest(n, self._terminal_names)}" for n in names)
            )

    def _unary_reaches(self, cell: Dict[Symbol, _Entry], sym: Symbol, target: Symbol) -> bool:
        seen = set()
        while sym not in seen:
            if sym == target:
                return True
            seen.add(sym)
            entry = cell.get(sym)
            if entry is None or entry.back[0] != "unary":
                return False
            sym = self.rules[entry.rule].rhs[0]
        return False

    def _close(self, chart: Chart, i: int, j: int) -> None:
        cell = chart.cell(i, j)
        for _ in range(self.max_rounds):
            changed = False
            for r in self.unary:
                rule = self.rules[r]
                child = cell.get(rule.rhs[0])
                if child is None:
                    continue
                cand = _Entry(child.score + rule.logw, r, -1, ("unary",))
                old = cell.get(rule.lhs)
                # a tie must not close a loop of unary back-pointers
                if old is not None and cand.score == old.score and self._unary_reaches(cell, rule.rhs[0], rule.lhs):
                    continue
                changed |= _offer(cell, rule.lhs, cand)
            if not changed:
                break
        else:
            raise ParseError("unary closure does not converge: the grammar has a unary cycle with weight above 1")
        items = chart.dotted(i, j)
        for sym, entry in list(cell.items()):
            for r in self.starts.get(sym, ()):
                _offer(items, (r, 1), _Entry(entry.score, r, -1, ("start",)))

    def _combine(self, chart: Chart, i: int, j: int) -> None:
        cell = chart.cell(i, j)
        items = chart.dotted(i, j)
        for m in range(i + 1, j):
            right = chart.symbols.get((m, j))
            if not right:
                continue
            for (r, t), left in list(chart.dotted(i, m).items()):
                rule = self.rules[r]
                nxt = right.get(rule.rhs[t])
                if nxt is None:
                    continue
                score = left.score + nxt.score
                if t + 1 == len(rule.rhs):
                    _offer(cell, rule.lhs, _Entry(score + rule.logw, r, m, ("rule",)))
                else:
                    _offer(items, (r, t + 1), _Entry(score, r, m, ("step",)))

    def chart(self, tokens: Sequence[Union[str, Symbol]]) -> Chart:
        toks = [terminal(t) if isinstance(t, str) else t for t in tokens]
        self._check_tokens(toks)
        n = len(toks)
        chart = Chart(n)
        for i, tok in enumerate(toks):
            chart.cell(i, i + 1)[tok] = _Entry(0.0, -1, -1, ("leaf",))
            self._close(chart, i, i + 1)
        for span in range(2, n + 1):
            for i in range(n - span + 1):
                self._combine(chart, i, i + span)
                self._close(chart, i, i + span)
        return chart

    def parse(self, tokens: Sequence[Union[str, Symbol]]) -> Optional[Tuple[ParseTree, float]]:
        """The best parse rooted at the start symbol and its natural-log weight, or None."""
        chart = self.chart(tokens)
        top = chart.symbols.get((0, chart.n), {}).get(self.grammar.start)
        if top is None:
            return None
        return self._build(chart, 0, chart.n, self.grammar.start), top.score

    # ------------ Reconstruction ------------

    def _empty(self, sym: Symbol) -> ParseTree:
        p = self.eps[sym].production
        return node(sym, [self._empty(s) for s in p.rhs] or [epsilon_leaf()])

    def _restore(self, rule: _Rule, kids: List[ParseTree]) -> ParseTree:
        if not rule.dropped:
            return node(rule.lhs, kids)
        it = iter(kids)
        full = [self._empty(s) if k in rule.dropped else next(it) for k, s in enumerate(rule.source.rhs)]
        return node(rule.lhs, full)

    def _build(self, chart: Chart, i: int, j: int, sym: Symbol) -> ParseTree:
        entry = chart.symbols[(i, j)][sym]
        kind = entry.back[0]
        if kind == "leaf":
            return leaf(sym)
        rule = self.rules[entry.rule]
        if kind == "unary":
            kids = [self._build(chart, i, j, rule.rhs[0])]
        else:
            kids = self._items(chart, i, entry.split, entry.rule, len(rule.rhs) - 1)
            kids.append(self._build(chart, entry.split, j, rule.rhs[-1]))
        return self._restore(rule, kids)

    def _items(self, chart: Chart, i: int, j: int, r: int, t: int) -> List[ParseTree]:
        entry = chart.items[(i, j)][(r, t)]
        rule = self.rules[r]
        if entry.back[0] == "start":
            return [self._build(chart, i, j, rule.rhs[0])]
        kids = self._items(chart, i, entry.split, r, t - 1)
        kids.append(self._build(chart, entry.split, j, rule.rhs[t - 1]))
        return kids


def cky_parse(g: Grammar, tokens: Sequence[Union[str, Symbol]]) -> Optional[Tuple[ParseTree, float]]:
    return CKYParser(g).parse(tokens)


def read_sentences(text: str) -> List[List[Symbol]]:
    """One sentence per nonblank line, whitespace-separated terminal tokens."""
    return [[terminal(tok) for tok in line.split()] for line in text.splitlines() if line.strip()]


def format_parse(result: Optional[Tuple[ParseTree, float]]) -> str:
    if result is None:
        return NO_PARSE
    tree, logw = result
    return f"{write_tree(tree)}\t{logw!r}"


def _parse_or_none(parser: CKYParser, tokens: Sequence[Symbol]) -> Optional[Tuple[ParseTree, float]]:
    try:
        return parser.parse(tokens)
    except UnknownTokenError as e:
        log.warning("no parse: %s", e)
        return None


def _parse_chunk(g: Grammar, chunk: Sequence[Sequence[Symbol]]) -> List[Optional[Tuple[ParseTree, float]]]:
    parser = CKYParser(g)
    return [_parse_or_none(parser, tokens) for tokens in chunk]


def parse_corpus(
    g: Grammar,
    sentences: Sequence[Sequence[Symbol]],
    jobs: int = 1,
    progress: bool = False,
) -> List[Optional[Tuple[ParseTree, float]]]:
    """Parse every sentence, in order; sentences with unknown tokens get None."""
    if jobs <= 1 or len(sentences) < 2:
        parser_chunks = [list(sentences)]
    else:
        size = -(-len(sentences) // jobs)
        parser_chunks = [list(sentences[k:k + size]) for k in range(0, len(sentences), size)]
    results: List[Optional[Tuple[ParseTree, float]]] = []
    bar = tqdm(total=len(sentences), desc="parse", disable=not progress)
    if len(parser_chunks) == 1:
        parser = CKYParser(g)
        for tokens in sentences:
            results.append(_parse_or_none(parser, tokens))
            bar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk, part in zip(parser_chunks, pool.map(partial(_parse_chunk, g), parser_chunks)):
                results.extend(part)
                bar.update(len(chunk))
    bar.close()
    return results
