"""Grammar size accounting: plain counts and the transform size table."""
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

from .analysis import left_corner_set
from .grammar import Grammar
from .transform import FACTORS, TransformOptions, lc_transform
from .treetransform import transform_corpus
from .trees import ParseTree, tree_productions

# short names used in table rows
MODE_NAMES = {"all": "P", "non_pos_initial": "N", "l0": "L0"}


def grammar_stats(g: Grammar) -> Dict[str, int]:
    """Counts over the symbols that occur in productions."""
    nts, ts = set(), set()
    for p in g.productions:
        for s in p.symbols():
            (ts if s.is_terminal else nts).add(s)
    return {
        "production_count": len(g.productions),
        "nonterminal_count": len(nts),
        "terminal_count": len(ts),
        "total_rhs_symbols": sum(len(p.rhs) for p in g.productions),
    }


class SizeRow(NamedTuple):
    name: str
    grammar_size: int
    tree_size: Optional[int] = None


def _row_name(mode: str, factor: str) -> str:
    name = f"LC_{MODE_NAMES.get(mode, mode)}"
    return name if factor == "none" else f"{name}({factor.replace('_', ',')})"


def size_table(
    g: Grammar,
    modes: Sequence[str] = ("all", "non_pos_initial", "l0"),
    factors: Sequence[str] = FACTORS,
    epsilon: str = "keep",
    corpus: Optional[Sequence[ParseTree]] = None,
) -> List[SizeRow]:
    """Production counts of every transform of ``g``.

    With a corpus the tree column is the number of distinct productions in
    the transformed trees, i.e. the size of the PCFG estimated from them.
    """
    rows = [SizeRow("none", len(g), len(_observed(corpus)) if corpus is not None else None)]
    for mode in modes:
        if mode == "non_pos_initial" and not g.pos_tags:
            continue
        L = left_corner_set(g, mode)
        for factor in factors:
            opts = TransformOptions(factor=factor, epsilon=epsilon)
            size = len(lc_transform(g, L, opts).grammar)
            tree_size = None
            if corpus is not None:
                tree_size = len(_observed(transform_corpus(corpus, L, opts)))
            rows.append(SizeRow(_row_name(mode, factor), size, tree_size))
    return rows


def _observed(trees: Iterable[ParseTree]) -> set:
    seen = set()
    for t in trees:
        seen.update(tree_productions(t))
    return seen


def format_size_table(rows: Sequence[SizeRow]) -> str:
    with_trees = any(r.tree_size is not None for r in rows)
    lines = ["transform\tgrammar" + ("\ttrees" if with_trees else "")]
    for r in rows:
        line = f"{r.name}\t{r.grammar_size}"
        if with_trees:
            line += f"\t{r.tree_size if r.tree_size is not None else '-'}"
        lines.append(line)
    return "\n".join(lines) + "\n"
