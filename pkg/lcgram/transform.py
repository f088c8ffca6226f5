"""The selective left-corner grammar transform.

Productions in L are recognized left-corner, the rest top-down. Keep-mode
schema instances are generated first; epsilon removal is a composition pass
over them, and the result is always pruned of useless productions.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Container, Dict, List, Optional, Tuple

from .analysis import (
    PairRelation,
    cyclic_nonterminals,
    left_corner_relation,
    prune_useless,
    strict_left_corner_relation,
)
from .epsilon import EpsilonCycleError, compose_epsilon, epsilon_derivations
from .grammar import LC_PAIR, Grammar, LcgramError, Production, Symbol, format_weight, lc_fact, lc_pair, production_key, td_prime

log = logging.getLogger(__name__)

FACTORS = ("none", "td", "lc", "td_lc")
EPSILON_MODES = ("keep", "one_step", "full")

# ids of the instance a composite came from, by epsilon mode
_KEPT_FULL = {"1a": "eps_a1", "1b": "eps_b1", "1c": "eps_c1"}
_COMPOSED = {"1a": "eps_a2", "1b": "eps_b2", "1c": "eps_c2", "2a": "eps_2a", "3a": "eps_3a"}


class TransformError(LcgramError):
    pass


@dataclass(frozen=True)
class TransformOptions:
    factor: str = "none"
    epsilon: str = "keep"
    prune_links: bool = True
    moore_constraint: bool = False
    weighted: bool = False

    def __post_init__(self):
        if self.factor not in FACTORS:
            raise TransformError(f"unknown factorization {self.factor!r}; expected one of {FACTORS}")
        if self.epsilon not in EPSILON_MODES:
            raise TransformError(f"unknown epsilon mode {self.epsilon!r}; expected one of {EPSILON_MODES}")

    @property
    def td_factored(self) -> bool:
        return self.factor in ("td", "td_lc")

    @property
    def lc_factored(self) -> bool:
        return self.factor in ("lc", "td_lc")


@dataclass(frozen=True)
class SchemaInstance:
    schema_id: str
    production: Production
    origin: Optional[Production] = None


@dataclass(frozen=True)
class TransformResult:
    grammar: Grammar
    instances: Tuple[SchemaInstance, ...] = field(default=())

    def schema_counts(self) -> Counter:
        return Counter(i.schema_id for i in self.instances)


def _check_input(g: Grammar, L: Container[Production]) -> List[Production]:
    eps = [p for p in g.productions if p.is_epsilon]
    if eps:
        raise TransformError(f"grammar has epsilon productions, e.g. {eps[0]}; the transform needs an epsilon-free grammar")
    if isinstance(L, (set, frozenset, list, tuple)):
        outside = [p for p in L if p not in g]
        if outside:
            raise TransformError(f"left-corner set is not a subset of the grammar: {', '.join(map(str, outside[:5]))}")
        if any(p.is_epsilon for p in L):
            raise TransformError("left-corner set contains an epsilon production")
    chosen = [p for p in g.productions if p in L]
    if cyclic_nonterminals(g):
        log.warning(
            "grammar has unary cycles through %s; consider remove_unary_cycles before the transform",
            ", ".join(sorted(s.label for s in cyclic_nonterminals(g))),
        )
    return chosen


def _predicted(g: Grammar, left: frozenset, moore: bool) -> List[Symbol]:
    if not moore:
        return sorted(g.nonterminals)
    # prediction sites: S, non-initial symbols, and first symbols of top-down productions
    sites = {g.start}
    for p in g.productions:
        sites.update(s for s in p.rhs[0 if p not in left else 1:] if s.is_nonterminal)
    return sorted(sites)


def _keep_instances(g: Grammar, left: List[Production], opts: TransformOptions, link: Optional[PairRelation]) -> List[SchemaInstance]:
    left_set = frozenset(left)
    top_down = [p for p in g.productions if p not in left_set]

    def linked(d: Symbol, x: Symbol) -> bool:
        return link is None or (d, x) in link

    out: List[SchemaInstance] = []
    for d in _predicted(g, left_set, opts.moore_constraint):
        for w in sorted(g.terminals):
            if linked(d, w):
                out.append(SchemaInstance("1a", Production(d, (w, lc_pair(d, w)), 1.0)))
        seen_td = set()
        for p in top_down:
            if not linked(d, p.lhs):
                continue
            if opts.td_factored:
                if p.lhs not in seen_td:
                    seen_td.add(p.lhs)
                    out.append(SchemaInstance("2a", Production(d, (td_prime(p.lhs), lc_pair(d, p.lhs)), 1.0)))
            else:
                out.append(SchemaInstance("1b", Production(d, p.rhs + (lc_pair(d, p.lhs),), p.weight), p))
        seen_pt = set()
        for p in left:
            c, b = p.lhs, p.rhs[0]
            if not linked(d, c):
                continue
            if opts.lc_factored:
                if (c, b) not in seen_pt:
                    seen_pt.add((c, b))
                    out.append(SchemaInstance("3a", Production(lc_pair(d, b), (lc_fact(c, b), lc_pair(d, c)), 1.0)))
            else:
                out.append(SchemaInstance("1c", Production(lc_pair(d, b), p.rhs[1:] + (lc_pair(d, c),), p.weight), p))
        out.append(SchemaInstance("1d", Production(lc_pair(d, d), (), 1.0)))
    if opts.td_factored:
        out.extend(SchemaInstance("2b", Production(td_prime(p.lhs), p.rhs, p.weight), p) for p in top_down)
    if opts.lc_factored:
        out.extend(SchemaInstance("3b", Production(lc_fact(p.lhs, p.rhs[0]), p.rhs[1:], p.weight), p) for p in left)
    return out


def _one_step(instances: List[SchemaInstance]) -> List[SchemaInstance]:
    erased = {i.production.lhs for i in instances if i.schema_id == "1d"}
    out = []
    for inst in instances:
        if inst.schema_id == "1d":
            continue
        out.append(inst)
        p = inst.production
        if p.rhs and p.rhs[-1] in erased:
            out.append(SchemaInstance(_COMPOSED[inst.schema_id], Production(p.lhs, p.rhs[:-1], p.weight), inst.origin))
    return out


def _full(g: Grammar, instances: List[SchemaInstance]) -> List[SchemaInstance]:
    keep = Grammar.build([i.production for i in instances], g.start)
    try:
        eps = {a: e.weight for a, e in epsilon_derivations(keep).items()}
    except EpsilonCycleError as e:
        raise TransformError(f"full epsilon removal needs L without unary cycles: {e}") from None
    out = []
    for inst in instances:
        if inst.production.is_epsilon:
            continue
        for variant, _, dropped in compose_epsilon([inst.production], eps):
            if not variant.rhs:
                continue
            if dropped:
                sid = _COMPOSED.get(inst.schema_id, inst.schema_id)
            else:
                sid = _KEPT_FULL.get(inst.schema_id, inst.schema_id)
            out.append(SchemaInstance(sid, variant, inst.origin))
    return out


def _strictly_linked(instances: List[SchemaInstance], strict: PairRelation) -> List[SchemaInstance]:
    def ok(s: Symbol) -> bool:
        return s.kind != LC_PAIR or (s.args[0], s.args[1]) in strict

    return [i for i in instances if ok(i.production.lhs) and all(ok(s) for s in i.production.rhs)]


def lc_transform(
    g: Grammar,
    L: Container[Production],
    opts: TransformOptions = TransformOptions(),
) -> TransformResult:
    """Apply the selective left-corner transform of ``g`` with respect to ``L``.

    ``L`` may be any container of productions (a set, or a predicate such as
    ``AllProductions``); members outside ``g`` are ignored only for predicates,
    explicit sets must be subsets of ``g``.
    """
    left = _check_input(g, L)
    link = None
    if opts.prune_links:
        link = left_corner_relation(g, left)
    instances = _keep_instances(g, left, opts, link)

    if opts.epsilon == "one_step":
        instances = _one_step(instances)
    elif opts.epsilon == "full":
        instances = _full(g, instances)
        if opts.prune_links:
            instances = _strictly_linked(instances, strict_left_corner_relation(g, left))

    if not opts.weighted:
        instances = [replace(i, production=i.production.with_weight(1.0)) for i in instances]

    # first contributor of each production keeps the provenance; weights merge by sum
    first: Dict[Production, SchemaInstance] = {}
    for inst in instances:
        first.setdefault(inst.production, inst)
    merged = Grammar.build((i.production for i in instances), g.start)
    prods = sorted(merged.productions, key=production_key)
    if not opts.weighted:
        prods = [p.with_weight(1.0) for p in prods]
    out = prune_useless(merged.with_productions(prods))
    out = replace(out, pos_tags=frozenset(s for s in g.pos_tags if s in out.nonterminals or s in out.terminals))

    kept = tuple(replace(first[p], production=p) for p in out.productions)
    log.info("transform %s/%s: %d productions in, %d out", opts.factor, opts.epsilon, len(g), len(out))
    return TransformResult(out, kept)


def format_provenance(result: TransformResult) -> str:
    lines = []
    for inst in result.instances:
        origin = str(inst.origin) if inst.origin is not None else "-"
        row = f"{inst.schema_id}\t{inst.production}\t{origin}"
        if result.grammar.weighted:
            row += f"\t{format_weight(inst.production.weight)}"
        lines.append(row)
    return "\n".join(lines) + ("\n" if lines else "")


def write_provenance(result: TransformResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_provenance(result))
