"""Grammar representation and the plain-text grammar file format.

A grammar file holds one production per line::

    # comment
    %start S
    %pos det n
    0.4 S -> S a
    0.6 S -> b

The weight column is optional. Symbols that never occur as a left-hand side
are terminals unless a ``%nonterminals`` line says otherwise. Derived symbols
are written ``LC(D;X)``, ``TD(A)``, ``PT(C;B)`` and ``NAT(A)``.
"""
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import regex

TERMINAL = "t"
NONTERMINAL = "n"
LC_PAIR = "lc"
TD_PRIME = "td"
LC_FACT = "pt"
NATURAL = "nat"
EPSILON = "eps"

DERIVED = (LC_PAIR, TD_PRIME, LC_FACT, NATURAL)
_PREFIX = {LC_PAIR: "LC", TD_PRIME: "TD", LC_FACT: "PT", NATURAL: "NAT"}

_ARG = r"(?:NAT\([^()\s;]+\)|[^()\s;]+)"
_PAIR_TOKEN = regex.compile(rf"^(LC|PT)\(({_ARG});({_ARG})\)$")
_SINGLE_TOKEN = regex.compile(rf"^(TD)\(({_ARG})\)$|^(NAT)\(([^()\s;]+)\)$")
_NAT_ARG = regex.compile(r"^NAT\(([^()\s;]+)\)$")
_BAD_BASE = regex.compile(r"[()\s;]")
_WEIGHT = regex.compile(r"^\+?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?$")


class LcgramError(Exception):
    """Base class for every error the toolkit raises on bad input."""


class GrammarError(LcgramError):
    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ""
        if line is not None:
            where = f"{path or '<grammar>'}:{line}: "
        super().__init__(where + message)


@dataclass(frozen=True, order=True)
class Symbol:
    kind: str
    name: str = ""
    args: Tuple["Symbol", ...] = ()

    def __str__(self) -> str:
        return self.label

    @cached_property
    def label(self) -> str:
        if self.kind in DERIVED:
            return f"{_PREFIX[self.kind]}({';'.join(a.label for a in self.args)})"
        return self.name

    @property
    def is_terminal(self) -> bool:
        return self.kind == TERMINAL

    @property
    def is_nonterminal(self) -> bool:
        return self.kind not in (TERMINAL, EPSILON)

    @property
    def is_base(self) -> bool:
        return self.kind in (TERMINAL, NONTERMINAL)


EPS = Symbol(EPSILON, "EPS")


def _check_arg(sym: Symbol, nonterminal: bool, where: str) -> Symbol:
    # NAT(A) may stand in for a base nonterminal one level down.
    if sym.kind == NATURAL and where != "NAT":
        return sym
    return _check_base(sym, nonterminal, where)


def _check_base(sym: Symbol, nonterminal: bool, where: str) -> Symbol:
    if not sym.is_base:
        raise GrammarError(f"{where} takes base symbols only, got {sym}")
    if nonterminal and sym.kind != NONTERMINAL:
        raise GrammarError(f"{where} needs a nonterminal, got terminal {sym}")
    if _BAD_BASE.search(sym.name):
        raise GrammarError(f"symbol {sym.name!r} cannot appear inside {where}")
    return sym


def terminal(name: str) -> Symbol:
    return Symbol(TERMINAL, name)


def nonterminal(name: str) -> Symbol:
    return Symbol(NONTERMINAL, name)


def lc_pair(d: Symbol, x: Symbol) -> Symbol:
    return Symbol(LC_PAIR, "", (_check_arg(d, True, "LC"), _check_arg(x, False, "LC")))


def td_prime(a: Symbol) -> Symbol:
    return Symbol(TD_PRIME, "", (_check_arg(a, True, "TD"),))


def lc_fact(c: Symbol, b: Symbol) -> Symbol:
    return Symbol(LC_FACT, "", (_check_arg(c, True, "PT"), _check_arg(b, False, "PT")))


def natural(a: Symbol) -> Symbol:
    return Symbol(NATURAL, "", (_check_base(a, True, "NAT"),))


@dataclass(frozen=True)
class Production:
    """A production ``lhs -> rhs``. Equality and hashing ignore the weight."""

    lhs: Symbol
    rhs: Tuple[Symbol, ...]
    weight: float = field(default=1.0, compare=False)

    def __str__(self) -> str:
        return " ".join([str(self.lhs), "->", *map(str, self.rhs)])

    def with_weight(self, weight: float) -> "Production":
        return replace(self, weight=weight)

    @property
    def is_epsilon(self) -> bool:
        return not self.rhs

    @property
    def is_unary(self) -> bool:
        return len(self.rhs) == 1

    def symbols(self) -> Tuple[Symbol, ...]:
        return (self.lhs, *self.rhs)


def production_key(p: Production) -> Tuple[str, Tuple[str, ...]]:
    """Canonical sort key: LHS rendering, then RHS renderings."""
    return (p.lhs.label, tuple(s.label for s in p.rhs))


def _collect(symbols: Iterable[Symbol], into_v: set, into_t: set) -> None:
    for sym in symbols:
        if sym.kind == EPSILON:
            continue
        (into_t if sym.is_terminal else into_v).add(sym)
        _collect(sym.args, into_v, into_t)


@dataclass(frozen=True, eq=False)
class Grammar:
    """A (weighted) context-free grammar ``(V, T, P, S)``.

    Build instances with :meth:`Grammar.build`, which merges duplicate
    productions by summing their weights and infers ``V`` and ``T``.
    """

    productions: Tuple[Production, ...]
    start: Symbol
    nonterminals: frozenset
    terminals: frozenset
    pos_tags: frozenset = frozenset()

    @classmethod
    def build(
        cls,
        productions: Iterable[Production],
        start: Symbol,
        *,
        pos_tags: Iterable[Symbol] = (),
        nonterminals: Iterable[Symbol] = (),
        terminals: Iterable[Symbol] = (),
    ) -> "Grammar":
        merged: Dict[Production, float] = {}
        for p in productions:
            if not (p.weight >= 0 and math.isfinite(p.weight)):
                raise GrammarError(f"weight of {p} must be a nonnegative number, got {p.weight}")
            if not p.lhs.is_nonterminal:
                raise GrammarError(f"left-hand side of {p} is not a nonterminal")
            merged[p] = merged.get(p, 0.0) + p.weight
        if not start.is_nonterminal:
            raise GrammarError(f"start symbol {start} is a terminal")
        v, t = set(nonterminals), set(terminals)
        _collect([start], v, t)
        for p in merged:
            _collect(p.symbols(), v, t)
        clash = {s.name for s in v if s.is_base} & {s.name for s in t}
        if clash:
            raise GrammarError(f"symbols used both as terminal and nonterminal: {sorted(clash)}")
        prods = tuple(p.with_weight(w) for p, w in merged.items())
        return cls(prods, start, frozenset(v), frozenset(t), frozenset(pos_tags))

    def with_productions(self, productions: Iterable[Production]) -> "Grammar":
        """Same start symbol and POS tags, new production set (V and T re-inferred)."""
        prods = tuple(productions)
        g = Grammar.build(prods, self.start)
        pos = {s for s in self.pos_tags if s in g.nonterminals or s in g.terminals}
        return replace(g, pos_tags=frozenset(pos))

    @cached_property
    def _weights(self) -> Dict[Production, float]:
        return {p: p.weight for p in self.productions}

    @cached_property
    def by_lhs(self) -> Dict[Symbol, Tuple[Production, ...]]:
        out: Dict[Symbol, List[Production]] = {}
        for p in self.productions:
            out.setdefault(p.lhs, []).append(p)
        return {a: tuple(ps) for a, ps in out.items()}

    @cached_property
    def production_set(self) -> frozenset:
        return frozenset(self.productions)

    def weight(self, p: Production) -> float:
        return self._weights[p]

    def __contains__(self, p: Production) -> bool:
        return p in self._weights

    def __len__(self) -> int:
        return len(self.productions)

    @property
    def weighted(self) -> bool:
        return any(p.weight != 1.0 for p in self.productions)

    def is_proper(self, tol: float = 1e-9) -> bool:
        for prods in self.by_lhs.values():
            if abs(sum(p.weight for p in prods) - 1.0) > tol:
                return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grammar):
            return NotImplemented
        return (
            self.start == other.start
            and self.nonterminals == other.nonterminals
            and self.terminals == other.terminals
            and self.pos_tags == other.pos_tags
            and self._weights == other._weights
        )

    def __hash__(self) -> int:
        return hash((self.start, self.production_set))


# ------------ Grammar files ------------

def _parse_arg(name: str, is_nonterminal: Callable[[str], bool]) -> Symbol:
    m = _NAT_ARG.match(name)
    if m:
        return natural(nonterminal(m.group(1)))
    return nonterminal(name) if is_nonterminal(name) else terminal(name)


def parse_symbol(token: str, is_nonterminal: Callable[[str], bool]) -> Symbol:
    """Parse one symbol token; ``is_nonterminal`` classifies base names."""
    m = _PAIR_TOKEN.match(token)
    if m:
        head, first, second = m.groups()
        make = lc_pair if head == "LC" else lc_fact
        return make(_parse_arg(first, lambda _: True), _parse_arg(second, is_nonterminal))
    m = _SINGLE_TOKEN.match(token)
    if m:
        if m.group(1):
            return td_prime(_parse_arg(m.group(2), lambda _: True))
        return natural(nonterminal(m.group(4)))
    if _BAD_BASE.search(token):
        raise GrammarError(f"malformed symbol {token!r}")
    return nonterminal(token) if is_nonterminal(token) else terminal(token)


def derived_heads(token: str) -> List[str]:
    """Base names that a derived token forces to be nonterminals."""
    args: List[str] = []
    m = _PAIR_TOKEN.match(token)
    if m:
        args = [m.group(2), m.group(3)]
        if not _NAT_ARG.match(m.group(3)):
            args = args[:1]
    else:
        m = _SINGLE_TOKEN.match(token)
        if m:
            args = [m.group(2) or m.group(4)]
    names = []
    for arg in args:
        inner = _NAT_ARG.match(arg)
        names.append(inner.group(1) if inner else arg)
    return names


def parse_grammar(text: str, path: Optional[str] = None) -> Grammar:
    start_name: Optional[str] = None
    pos_names: List[str] = []
    declared_nt: List[str] = []
    declared_t: List[str] = []
    rows: List[Tuple[int, float, str, List[str]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0].startswith("%"):
            directive, args = toks[0], toks[1:]
            if directive == "%start" and len(args) == 1:
                start_name = args[0]
            elif directive == "%pos":
                pos_names.extend(args)
            elif directive == "%nonterminals":
                declared_nt.extend(args)
            elif directive == "%terminals":
                declared_t.extend(args)
            else:
                raise GrammarError(f"unknown or malformed directive {line!r}", lineno, path)
            continue
        if "->" not in toks or toks.index("->") not in (1, 2):
            raise GrammarError(f"expected '[weight] LHS -> RHS', got {line!r}", lineno, path)
        arrow = toks.index("->")
        weight = 1.0
        if arrow == 2:
            if not _WEIGHT.match(toks[0]):
                raise GrammarError(f"weight {toks[0]!r} is not a nonnegative decimal", lineno, path)
            weight = float(toks[0])
        if "->" in toks[arrow + 1:]:
            raise GrammarError(f"more than one '->' in {line!r}", lineno, path)
        rows.append((lineno, weight, toks[arrow - 1], toks[arrow + 1:]))

    nt_names = set()
    for tok in declared_nt:
        nt_names.update(derived_heads(tok) or [tok])
    for _, _, lhs, rhs in rows:
        nt_names.update(derived_heads(lhs) or [lhs])
        for tok in rhs:
            nt_names.update(derived_heads(tok))
    t_names = set(declared_t)
    both = nt_names & t_names
    if both:
        raise GrammarError(f"declared terminals used as nonterminals: {sorted(both)}", path=path)

    def is_nt(name: str) -> bool:
        return name in nt_names

    prods = []
    rhs_names = set()
    for lineno, weight, lhs, rhs in rows:
        try:
            lhs_sym = parse_symbol(lhs, is_nt)
            rhs_syms = tuple(parse_symbol(tok, is_nt) for tok in rhs)
        except GrammarError as e:
            raise GrammarError(str(e), lineno, path) from None
        rhs_names.update(rhs)
        prods.append(Production(lhs_sym, rhs_syms, weight))

    if start_name is None:
        if not rows:
            raise GrammarError("no %start directive and no productions", path=path)
        start_name = rows[0][2]
    if start_name in t_names or (start_name not in nt_names and start_name in rhs_names):
        raise GrammarError(f"start symbol {start_name} is a terminal", path=path)

    def is_nt_or_start(name: str) -> bool:
        return name in nt_names or name == start_name

    try:
        start = parse_symbol(start_name, is_nt_or_start)
        return Grammar.build(
            prods,
            start,
            pos_tags=[parse_symbol(n, is_nt) for n in pos_names],
            nonterminals=[parse_symbol(n, is_nt) for n in declared_nt],
            terminals=[terminal(n) for n in declared_t],
        )
    except GrammarError as e:
        raise GrammarError(str(e), path=path) from None


def format_weight(w: float) -> str:
    return repr(float(w))


def write_grammar(g: Grammar) -> str:
    lines = [f"%start {g.start}"]
    if g.nonterminals:
        lines.append("%nonterminals " + " ".join(sorted(s.label for s in g.nonterminals)))
    if g.terminals:
        lines.append("%terminals " + " ".join(sorted(s.label for s in g.terminals)))
    if g.pos_tags:
        lines.append("%pos " + " ".join(sorted(s.label for s in g.pos_tags)))
    weighted = g.weighted
    for p in sorted(g.productions, key=production_key):
        lines.append(f"{format_weight(p.weight)} {p}" if weighted else str(p))
    return "\n".join(lines) + "\n"


def read_grammar(path: str) -> Grammar:
    with open(path, "r", encoding="utf-8") as f:
        return parse_grammar(f.read(), path=path)
