"""Command-line front end: analyze, transform, trees, estimate, parse, eval, oracle, sample."""
import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import yaml

from .analysis import cyclic_nonterminals, left_corner_set, select_L, unary_cycle_classes
from .estimate import estimate_pcfg
from .eval import (
    corpus_grammar,
    coverage_parse_report,
    evaluate_corpus,
    format_coverage,
    format_report,
    missing_productions,
    transform_detransform_eval,
)
from .grammar import Grammar, LcgramError, production_key, read_grammar, write_grammar
from .oracle import (
    check_claims,
    enumerate_strings,
    random_grammar,
    random_trees,
    string_probabilities,
)
from .parser import NO_PARSE, format_parse, parse_corpus, read_sentences
from .stats import format_size_table, grammar_stats, size_table
from .transform import TransformOptions, lc_transform, write_provenance
from .treebank import load_pos, mini_grammar, mini_treebank, read_corpus, split_corpus
from .treetransform import lc_tree_detransform, transform_corpus
from .trees import ParseTree, read_tree, write_trees
from .unary import break_unary_cycles_tree, remove_unary_cycles

log = logging.getLogger("lcgram")

CONFIG_PATH = os.path.join(os.path.dirname(__file__), "config.yaml")

L_MODES = {"all": "all", "non-pos": "non_pos_initial", "l0": "l0"}
# underscore spellings are accepted too
FACTOR_FLAGS = {"none": "none", "td": "td", "lc": "lc", "td-lc": "td_lc", "td_lc": "td_lc"}
EPSILON_FLAGS = {"keep": "keep", "one-step": "one_step", "one_step": "one_step", "full": "full"}


def load_config(path: str = CONFIG_PATH) -> Dict:
    cfg = {
        "max_len": 8,
        "prob_max_len": 5,
        "jobs": 1,
        "seed": 0,
        "mini_treebank": {"size": 200, "max_depth": 10, "test_fraction": 0.1},
        "random_grammar": {"nonterminals": 8, "productions": 25, "terminals": 3},
        "transform": {"L": "l0", "factor": "none", "epsilon": "keep", "prune_links": True, "moore": False},
    }
    try:
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f) or {}
                cfg.update(loaded)
    except (OSError, yaml.YAMLError) as e:
        log.warning("ignoring config %s: %s", path, e)
    return cfg


@dataclass
class RunConfig:
    command: str
    inputs: List[str] = field(default_factory=list)
    output: Optional[str] = None
    L: str = "l0"
    factor: str = "none"
    epsilon: str = "keep"
    prune_links: bool = True
    moore: bool = False
    pos: Optional[str] = None
    weighted: bool = False
    jobs: int = 1
    seed: int = 0
    max_len: int = 8

    @property
    def options(self) -> TransformOptions:
        return TransformOptions(
            factor=FACTOR_FLAGS[self.factor],
            epsilon=EPSILON_FLAGS[self.epsilon],
            prune_links=self.prune_links,
            moore_constraint=self.moore,
            weighted=self.weighted,
        )

    def echo(self) -> str:
        return "config: " + " ".join(f"{k}={v}" for k, v in asdict(self).items())


def _l_flag(value: str) -> str:
    if value in L_MODES or value == "none" or value.startswith("file:"):
        return value
    raise argparse.ArgumentTypeError(f"expected all, non-pos, l0, none or file:PATH, got {value!r}")


def build_parser(cfg: Dict) -> argparse.ArgumentParser:
    tcfg = cfg.get("transform", {})
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=None, help="Write results here instead of stdout")
    common.add_argument("--L", dest="L", type=_l_flag, default=tcfg.get("L", "l0"),
                        help="Left-corner set: all | non-pos | l0 | file:PATH (none: no transform, eval only)")
    common.add_argument("--factor", choices=list(FACTOR_FLAGS), default=tcfg.get("factor", "none").replace("_", "-"))
    common.add_argument("--epsilon", choices=list(EPSILON_FLAGS), default=tcfg.get("epsilon", "keep").replace("_", "-"))
    common.add_argument("--no-prune-links", dest="prune_links", action="store_false", default=tcfg.get("prune_links", True))
    common.add_argument("--moore", action="store_true", default=tcfg.get("moore", False), help="Apply Moore's prediction constraint")
    common.add_argument("--pos", default=None, help="File of POS tag names (for --L non-pos)")
    common.add_argument("--weighted", action="store_true", help="Carry production weights through the transform")
    common.add_argument("--jobs", type=int, default=cfg.get("jobs", 1))
    common.add_argument("--seed", type=int, default=cfg.get("seed", 0))
    common.add_argument("--max-len", type=int, default=cfg.get("max_len", 8))
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true")
    noise.add_argument("--quiet", action="store_true", help="No config echo, no progress bars")

    ap = argparse.ArgumentParser(prog="lcgram", description="Selective left-corner grammar transforms and evaluation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="Report L0, unary cycles and grammar size")
    p.add_argument("grammar")
    p.add_argument("--sizes", action="store_true", help="Also print the transform size table")
    p.add_argument("--trees", default=None, help="Corpus for the tree-estimated column of the size table")

    p = sub.add_parser("transform", parents=[common], help="Left-corner transform a grammar")
    p.add_argument("grammar")
    p.add_argument("--remove-cycles", action="store_true", help="Remove unary cycles first")
    p.add_argument("--provenance", default=None, help="Write schema provenance to this file")

    p = sub.add_parser("trees", help="Tree transforms")
    tsub = p.add_subparsers(dest="action", required=True)
    for name, helptext in (
        ("transform", "Transform a corpus"),
        ("detransform", "Invert transformed trees"),
        ("break-cycles", "Collapse unary cycles"),
    ):
        q = tsub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("trees")
        q.add_argument("--grammar", default=None, help="Grammar to select L from (default: the corpus grammar)")

    p = sub.add_parser("estimate", parents=[common], help="Relative-frequency PCFG from trees")
    p.add_argument("trees")

    p = sub.add_parser("parse", parents=[common], help="Viterbi CKY parse of one sentence per line")
    p.add_argument("grammar")
    p.add_argument("sentences")

    p = sub.add_parser("eval", help="Evaluation")
    esub = p.add_subparsers(dest="action", required=True)
    q = esub.add_parser("parseval", parents=[common], help="Labelled precision and recall")
    q.add_argument("gold")
    q.add_argument("test", help="One tree per line, or parse output (no-parse lines allowed)")
    q.add_argument("--per-sentence", action="store_true")
    q.add_argument("--keep-preterminals", action="store_true", help="Score preterminal nodes as constituents")
    q = esub.add_parser("missing", parents=[common], help="Missing productions of test trees")
    q.add_argument("train")
    q.add_argument("test")
    q = esub.add_parser("coverage", parents=[common], help="Sentences without a parse")
    q.add_argument("grammar")
    q.add_argument("sentences")
    q = esub.add_parser("pipeline", parents=[common], help="Transform, estimate, parse, detransform and score")
    q.add_argument("train", nargs="?", help="Training trees (default: the bundled mini-treebank, split)")
    q.add_argument("test", nargs="?")
    q.add_argument("--per-sentence", action="store_true")

    p = sub.add_parser("oracle", help="Enumeration checks")
    osub = p.add_subparsers(dest="action", required=True)
    q = osub.add_parser("equiv", parents=[common], help="Same strings up to --max-len")
    q.add_argument("grammar")
    q.add_argument("other")
    q = osub.add_parser("prob", parents=[common], help="String probabilities up to --max-len")
    q.add_argument("grammar")
    q.add_argument("other", nargs="?")
    q = osub.add_parser("claims", parents=[common], help="Check non-left-recursion and minimality of L0")
    q.add_argument("grammar")

    p = sub.add_parser("sample", help="Synthetic data")
    ssub = p.add_subparsers(dest="action", required=True)
    q = ssub.add_parser("mini", parents=[common], help="The bundled mini-treebank")
    q.add_argument("-n", type=int, default=cfg.get("mini_treebank", {}).get("size", 200))
    q = ssub.add_parser("grammar", parents=[common], help="A random grammar")
    q = ssub.add_parser("trees", parents=[common], help="Random trees from a grammar")
    q.add_argument("grammar")
    q.add_argument("-n", type=int, default=100)
    return ap


# ------------ Helpers ------------

def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _with_pos(g: Grammar, rc: RunConfig) -> Grammar:
    if not rc.pos:
        return g
    return Grammar.build(g.productions, g.start, pos_tags=load_pos(rc.pos, g))


def _left_corner(g: Grammar, rc: RunConfig):
    if rc.L.startswith("file:"):
        return left_corner_set(g, "explicit", read_grammar(rc.L[len("file:"):]).productions)
    return left_corner_set(g, L_MODES[rc.L])


def _read_test_trees(path: str) -> List[Optional[ParseTree]]:
    out: List[Optional[ParseTree]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.split("\t", 1)[0].strip()
            if not line:
                continue
            out.append(None if line == NO_PARSE else read_tree(line))
    return out


def _corpus_and_grammar(path: str, rc: RunConfig, grammar_path: Optional[str]):
    trees = read_corpus(path)
    if not trees:
        raise LcgramError(f"no trees in {path}")
    g = read_grammar(grammar_path) if grammar_path else corpus_grammar(trees, trees[0].label)
    return trees, _with_pos(g, rc)


# ------------ Commands ------------

def cmd_analyze(args, rc: RunConfig, cfg: Dict) -> int:
    g = _with_pos(read_grammar(args.grammar), rc)
    stats = grammar_stats(g)
    cyclic = cyclic_nonterminals(g)
    classes = {frozenset(c) for c in unary_cycle_classes(g).values()}
    lines = [f"{k}: {v}" for k, v in stats.items()]
    lines.append(f"cyclic_nonterminals: {' '.join(sorted(s.label for s in cyclic)) or '-'}")
    lines.append(f"unary_cycles: {len(classes)}")
    base = remove_unary_cycles(g) if cyclic else g
    l0 = sorted(select_L(base, "l0"), key=production_key)
    lines.append(f"L0: {len(l0)}")
    lines.extend(f"  {p}" for p in l0)
    if g.pos_tags:
        lines.append(f"N: {len(select_L(base, 'non_pos_initial'))}")
    text = "\n".join(lines) + "\n"
    if args.sizes:
        corpus = read_corpus(args.trees) if args.trees else None
        if corpus is not None and cyclic:
            corpus = [break_unary_cycles_tree(t, cyclic, unary_cycle_classes(g)) for t in corpus]
        text += "\n" + format_size_table(size_table(base, epsilon=EPSILON_FLAGS[rc.epsilon], corpus=corpus))
    _emit(text, rc.output)
    return 0


def cmd_transform(args, rc: RunConfig, cfg: Dict) -> int:
    g = _with_pos(read_grammar(args.grammar), rc)
    if args.remove_cycles:
        g = remove_unary_cycles(g)
    result = lc_transform(g, _left_corner(g, rc), rc.options)
    if args.provenance:
        write_provenance(result, args.provenance)
    _emit(write_grammar(result.grammar), rc.output)
    return 0


def cmd_trees(args, rc: RunConfig, cfg: Dict) -> int:
    trees, g = _corpus_and_grammar(args.trees, rc, args.grammar)
    classes = unary_cycle_classes(g)
    if args.action == "break-cycles":
        out = [break_unary_cycles_tree(t, classes, classes) for t in trees]
    elif args.action == "transform":
        base = remove_unary_cycles(g) if classes else g
        out = transform_corpus(trees, _left_corner(base, rc), rc.options, classes, classes,
                               jobs=rc.jobs, progress=not args.quiet)
    else:
        grammar, L = None, None
        if rc.options.epsilon == "full":
            if not args.grammar:
                raise LcgramError("detransforming --epsilon full trees needs --grammar (the source grammar)")
            grammar = remove_unary_cycles(g) if classes else g
            L = _left_corner(grammar, rc)
        out = [lc_tree_detransform(t, rc.options, grammar, L) for t in trees]
    _emit(write_trees(out), rc.output)
    return 0


def cmd_estimate(args, rc: RunConfig, cfg: Dict) -> int:
    trees = read_corpus(args.trees)
    if not trees:
        raise LcgramError(f"no trees in {args.trees}")
    pos = load_pos(rc.pos) if rc.pos else ()
    _emit(write_grammar(estimate_pcfg(trees, trees[0].label, pos_tags=pos)), rc.output)
    return 0


def cmd_parse(args, rc: RunConfig, cfg: Dict) -> int:
    g = read_grammar(args.grammar)
    with open(args.sentences, "r", encoding="utf-8") as f:
        sentences = read_sentences(f.read())
    results = parse_corpus(g, sentences, jobs=rc.jobs, progress=not args.quiet)
    _emit("".join(format_parse(r) + "\n" for r in results), rc.output)
    return 0


def cmd_eval(args, rc: RunConfig, cfg: Dict) -> int:
    if args.action == "parseval":
        gold = read_corpus(args.gold)
        report = evaluate_corpus(gold, _read_test_trees(args.test), skip_preterminals=not args.keep_preterminals)
        _emit(format_report(report, args.per_sentence), rc.output)
    elif args.action == "missing":
        train, test = read_corpus(args.train), read_corpus(args.test)
        g = _with_pos(corpus_grammar(train, train[0].label), rc)
        classes = unary_cycle_classes(g)
        base = remove_unary_cycles(g, weighted=False) if classes else g
        L = None if rc.L == "none" else _left_corner(base, rc)
        missing = sorted(missing_productions(train, test, L, rc.options, classes, classes, jobs=rc.jobs), key=production_key)
        _emit(f"missing_production_count: {len(missing)}\n" + "".join(f"{p}\n" for p in missing), rc.output)
    elif args.action == "coverage":
        g = read_grammar(args.grammar)
        with open(args.sentences, "r", encoding="utf-8") as f:
            sentences = read_sentences(f.read())
        _emit(format_coverage(coverage_parse_report(g, sentences, jobs=rc.jobs, progress=not args.quiet)), rc.output)
    else:
        if args.train and args.test:
            train, test = read_corpus(args.train), read_corpus(args.test)
        elif args.train or args.test:
            raise LcgramError("give both training and test trees, or neither for the mini-treebank")
        else:
            mini = cfg.get("mini_treebank", {})
            trees = mini_treebank(mini.get("size", 200), rc.seed, mini.get("max_depth", 10))
            train, test = split_corpus(trees, np.random.default_rng(rc.seed), mini.get("test_fraction", 0.1))
        if rc.L.startswith("file:"):
            raise LcgramError("eval pipeline selects L per corpus; use all, non-pos, l0 or none")
        mode = None if rc.L == "none" else L_MODES[rc.L]
        if rc.pos:
            pos = load_pos(rc.pos)
        else:
            pos = mini_grammar().pos_tags if not args.train else ()
        report = transform_detransform_eval(train, test, mode, rc.options, pos, jobs=rc.jobs, progress=not args.quiet)
        _emit(format_report(report, args.per_sentence), rc.output)
    return 0


def cmd_oracle(args, rc: RunConfig, cfg: Dict) -> int:
    g = read_grammar(args.grammar)
    if args.action == "claims":
        failures = check_claims(remove_unary_cycles(g))
        _emit("".join(f"FAIL {f}\n" for f in failures) or "CLAIMS HOLD\n", rc.output)
        return 1 if failures else 0
    if args.action == "equiv":
        other = read_grammar(args.other)
        a, b = enumerate_strings(g, rc.max_len), enumerate_strings(other, rc.max_len)
        if a == b:
            _emit(f"EQUIVALENT ({len(a)} strings of length <= {rc.max_len})\n", rc.output)
            return 0
        diff = sorted(a ^ b, key=lambda s: (len(s), s))
        _emit(f"NOT EQUIVALENT: {' '.join(diff[0]) or '<empty>'} is in only one language\n", rc.output)
        return 1
    max_len = min(rc.max_len, cfg.get("prob_max_len", 5))
    probs = string_probabilities(g, max_len)
    if args.other is None:
        _emit("".join(f"{' '.join(s)}\t{p!r}\n" for s, p in probs.items()), rc.output)
        return 0
    theirs = string_probabilities(read_grammar(args.other), max_len)
    bad = [s for s in sorted(set(probs) | set(theirs)) if abs(probs.get(s, 0.0) - theirs.get(s, 0.0)) > 1e-12]
    if bad:
        _emit(f"PROBABILITIES DIFFER on {len(bad)} string(s), e.g. {' '.join(bad[0])}\n", rc.output)
        return 1
    _emit(f"SAME PROBABILITIES ({len(probs)} strings of length <= {max_len})\n", rc.output)
    return 0


def cmd_sample(args, rc: RunConfig, cfg: Dict) -> int:
    rng = np.random.default_rng(rc.seed)
    if args.action == "mini":
        out = write_trees(mini_treebank(args.n, rc.seed, cfg.get("mini_treebank", {}).get("max_depth", 10)))
    elif args.action == "grammar":
        rcfg = cfg.get("random_grammar", {})
        out = write_grammar(random_grammar(
            rng,
            max_nonterminals=rcfg.get("nonterminals", 8),
            max_productions=rcfg.get("productions", 25),
            n_terminals=rcfg.get("terminals", 3),
        ))
    else:
        out = write_trees(random_trees(read_grammar(args.grammar), rng, args.n))
    _emit(out, rc.output)
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "transform": cmd_transform,
    "trees": cmd_trees,
    "estimate": cmd_estimate,
    "parse": cmd_parse,
    "eval": cmd_eval,
    "oracle": cmd_oracle,
    "sample": cmd_sample,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    cfg = load_config()
    try:
        args = build_parser(cfg).parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    inputs = [getattr(args, k) for k in ("grammar", "other", "trees", "sentences", "gold", "test", "train") if getattr(args, k, None)]
    rc = RunConfig(
        command=" ".join(filter(None, [args.command, getattr(args, "action", None)])),
        inputs=inputs,
        output=args.output,
        L=args.L,
        factor=args.factor,
        epsilon=args.epsilon,
        prune_links=args.prune_links,
        moore=args.moore,
        pos=args.pos,
        weighted=args.weighted,
        jobs=args.jobs,
        seed=args.seed,
        max_len=args.max_len,
    )
    if not args.quiet:
        print(rc.echo(), file=sys.stderr)
    try:
        return COMMANDS[args.command](args, rc, cfg)
    except (LcgramError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
