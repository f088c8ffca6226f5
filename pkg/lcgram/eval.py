"""PARSEVAL scoring, missing-production counts and parse coverage.

Constituents are ``(label, start, end)`` triples over internal nodes, with
the root and (optionally) preterminals left out, matched as multisets.
Corpus scores are micro-averaged; sentences without a parse are counted
separately and contribute nothing to precision or recall.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Container, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .analysis import left_corner_set, unary_cycle_classes
from .estimate import estimate_pcfg
from .grammar import Grammar, LcgramError, Production, Symbol
from .parser import parse_corpus
from .transform import TransformOptions
from .treetransform import lc_tree_detransform, transform_corpus
from .trees import EPS, ParseTree, TreeError, tree_productions, tree_yield
from .unary import break_unary_cycles_tree, remove_unary_cycles, strip_naturals

log = logging.getLogger(__name__)


class EvalError(LcgramError):
    pass


def _is_preterminal(t: ParseTree) -> bool:
    return len(t.children) == 1 and t.children[0].is_leaf and t.children[0].label != EPS


def constituents(t: ParseTree, skip_preterminals: bool = True) -> Counter:
    out: Counter = Counter()

    def walk(n: ParseTree, start: int, is_root: bool) -> int:
        if n.is_leaf:
            return start if n.label == EPS else start + 1
        end = start
        for c in n.children:
            end = walk(c, end, False)
        if not is_root and end > start and not (skip_preterminals and _is_preterminal(n)):
            out[(n.label, start, end)] += 1
        return end

    walk(t, 0, True)
    return out


@dataclass(frozen=True)
class ParsevalScore:
    matched: int
    gold: int
    test: int

    @property
    def precision(self) -> Fraction:
        return Fraction(self.matched, self.test) if self.test else Fraction(1)

    @property
    def recall(self) -> Fraction:
        return Fraction(self.matched, self.gold) if self.gold else Fraction(1)


def parseval(gold: ParseTree, test: ParseTree, skip_preterminals: bool = True) -> ParsevalScore:
    if tree_yield(gold) != tree_yield(test):
        g = " ".join(s.label for s in tree_yield(gold))
        t = " ".join(s.label for s in tree_yield(test))
        raise EvalError(f"yields differ: gold {g!r} vs test {t!r}")
    gc = constituents(gold, skip_preterminals)
    tc = constituents(test, skip_preterminals)
    return ParsevalScore(sum((gc & tc).values()), sum(gc.values()), sum(tc.values()))


@dataclass
class EvalReport:
    matched: int = 0
    gold: int = 0
    test: int = 0
    no_parse_count: int = 0
    missing_production_count: Optional[int] = None
    sentences: List[Optional[ParsevalScore]] = field(default_factory=list)

    @property
    def labelled_precision(self) -> Fraction:
        return Fraction(self.matched, self.test) if self.test else Fraction(1)

    @property
    def labelled_recall(self) -> Fraction:
        return Fraction(self.matched, self.gold) if self.gold else Fraction(1)

    def add(self, score: Optional[ParsevalScore]) -> None:
        self.sentences.append(score)
        if score is None:
            self.no_parse_count += 1
            return
        self.matched += score.matched
        self.gold += score.gold
        self.test += score.test


def evaluate_corpus(
    gold: Sequence[ParseTree],
    test: Sequence[Optional[ParseTree]],
    skip_preterminals: bool = True,
) -> EvalReport:
    """Score test trees against gold, pairwise; ``None`` marks a sentence without a parse."""
    if len(gold) != len(test):
        raise EvalError(f"{len(gold)} gold trees but {len(test)} test trees")
    report = EvalReport()
    for i, (g, t) in enumerate(zip(gold, test), start=1):
        if t is None:
            report.add(None)
            continue
        try:
            report.add(parseval(g, t, skip_preterminals))
        except EvalError as e:
            raise EvalError(f"sentence {i}: {e}") from None
    return report


def _fmt(x: Fraction) -> str:
    return f"{float(x):.4f}"


def format_report(report: EvalReport, per_sentence: bool = False) -> str:
    missing = "-" if report.missing_production_count is None else str(report.missing_production_count)
    lines = [
        "sentences\tno_parse\tmatched\tgold\ttest\tprecision\trecall\tmissing",
        "\t".join([
            str(len(report.sentences)),
            str(report.no_parse_count),
            str(report.matched),
            str(report.gold),
            str(report.test),
            _fmt(report.labelled_precision),
            _fmt(report.labelled_recall),
            missing,
        ]),
        "",
        f"sentences: {len(report.sentences)}",
        f"no_parse_count: {report.no_parse_count}",
        f"matched: {report.matched}",
        f"gold: {report.gold}",
        f"test: {report.test}",
        f"labelled_precision: {_fmt(report.labelled_precision)}",
        f"labelled_recall: {_fmt(report.labelled_recall)}",
        f"missing_production_count: {missing}",
    ]
    if per_sentence:
        lines.append("")
        for i, s in enumerate(report.sentences, start=1):
            if s is None:
                lines.append(f"{i}\tno-parse")
            else:
                lines.append(f"{i}\t{s.matched}\t{s.gold}\t{s.test}\t{_fmt(s.precision)}\t{_fmt(s.recall)}")
    return "\n".join(lines) + "\n"


# ------------ Missing productions and coverage ------------

def _observed(trees: Iterable[ParseTree]) -> FrozenSet[Production]:
    seen = set()
    for t in trees:
        seen.update(tree_productions(t))
    return frozenset(seen)


def missing_productions(
    train: Sequence[ParseTree],
    test: Sequence[ParseTree],
    L: Optional[Container[Production]] = None,
    opts: TransformOptions = TransformOptions(),
    cyclic: Iterable[Symbol] = (),
    classes: Optional[Mapping[Symbol, FrozenSet[Symbol]]] = None,
    jobs: int = 1,
) -> FrozenSet[Production]:
    """Productions of the (transformed) test trees that no (transformed) training tree has.

    ``L=None`` compares the trees as given, after cycle breaking.
    """
    if L is None:
        cyc = frozenset(cyclic)
        train_t = [break_unary_cycles_tree(t, cyc, classes) for t in train]
        test_t = [break_unary_cycles_tree(t, cyc, classes) for t in test]
    else:
        train_t = transform_corpus(train, L, opts, cyclic, classes, jobs=jobs)
        test_t = transform_corpus(test, L, opts, cyclic, classes, jobs=jobs)
    return _observed(test_t) - _observed(train_t)


@dataclass(frozen=True)
class CoverageReport:
    total: int
    failed: Tuple[int, ...]

    @property
    def no_parse_count(self) -> int:
        return len(self.failed)


def coverage_parse_report(
    g: Grammar,
    sentences: Sequence[Sequence[Symbol]],
    jobs: int = 1,
    progress: bool = False,
) -> CoverageReport:
    """Indices (0-based) of the sentences ``g`` cannot parse; unknown tokens count as no parse."""
    results = parse_corpus(g, sentences, jobs=jobs, progress=progress)
    return CoverageReport(len(sentences), tuple(i for i, r in enumerate(results) if r is None))


def format_coverage(report: CoverageReport) -> str:
    lines = [f"sentences: {report.total}", f"no_parse_count: {report.no_parse_count}"]
    lines.extend(f"no-parse\t{i + 1}" for i in report.failed)
    return "\n".join(lines) + "\n"


# ------------ Transform, estimate, parse, detransform, score ------------

def corpus_grammar(trees: Iterable[ParseTree], start: Symbol, pos_tags: Iterable[Symbol] = ()) -> Grammar:
    """Unweighted grammar of every production occurring in ``trees``."""
    return Grammar.build(sorted(_observed(trees), key=str), start, pos_tags=pos_tags)


class TrainedPCFG(NamedTuple):
    grammar: Grammar
    source: Grammar
    left_corner: Optional[Container[Production]]
    classes: Mapping[Symbol, FrozenSet[Symbol]]


def train_pcfg(
    train: Sequence[ParseTree],
    mode: Optional[str] = "l0",
    opts: TransformOptions = TransformOptions(),
    pos_tags: Iterable[Symbol] = (),
    jobs: int = 1,
    progress: bool = False,
) -> TrainedPCFG:
    """Estimate a PCFG from the transformed training trees.

    The cycle classes and the left-corner set are read off the training
    trees alone. ``source`` is their grammar with unary cycles removed, which
    the full epsilon mode needs to invert parses.
    """
    if not train:
        raise EvalError("training corpus is empty")
    start = train[0].label
    seen = corpus_grammar(train, start, pos_tags)
    classes = unary_cycle_classes(seen)
    cyclic = frozenset(classes)
    source = remove_unary_cycles(seen, weighted=False)
    if mode is None:
        L = None
        train_t = [break_unary_cycles_tree(t, cyclic, classes) for t in train]
    else:
        L = left_corner_set(source, mode)
        train_t = transform_corpus(train, L, opts, cyclic, classes, jobs=jobs, progress=progress)
    return TrainedPCFG(estimate_pcfg(train_t, start), source, L, classes)


def transform_detransform_eval(
    train: Sequence[ParseTree],
    test: Sequence[ParseTree],
    mode: Optional[str] = "l0",
    opts: TransformOptions = TransformOptions(),
    pos_tags: Iterable[Symbol] = (),
    skip_preterminals: bool = False,
    jobs: int = 1,
    progress: bool = False,
) -> EvalReport:
    """Train a PCFG on transformed trees, parse the test yields, invert and score.

    Test productions never seen in training are classified by membership in
    the training left-corner set alone. NAT nodes are spliced out of gold and
    test trees before scoring. ``mode=None`` evaluates the untransformed
    treebank grammar.
    """
    if not train or not test:
        raise EvalError("training and test corpora must both be nonempty")
    model = train_pcfg(train, mode, opts, pos_tags, jobs=jobs, progress=progress)
    L, classes = model.left_corner, model.classes
    cyclic = frozenset(classes)

    parses = parse_corpus(model.grammar, [tree_yield(t) for t in test], jobs=jobs, progress=progress)
    predicted: List[Optional[ParseTree]] = []
    for i, result in enumerate(parses, start=1):
        if result is None:
            predicted.append(None)
            continue
        tree = result[0]
        if L is not None:
            try:
                tree = lc_tree_detransform(tree, opts, grammar=model.source, left_corner=L)
            except TreeError as e:
                log.warning("sentence %d: cannot detransform the best parse: %s", i, e)
                predicted.append(None)
                continue
        predicted.append(strip_naturals(tree))

    gold = [strip_naturals(break_unary_cycles_tree(t, cyclic, classes)) for t in test]
    report = evaluate_corpus(gold, predicted, skip_preterminals)
    report.missing_production_count = len(missing_productions(train, test, L, opts, cyclic, classes, jobs=jobs))
    return report
