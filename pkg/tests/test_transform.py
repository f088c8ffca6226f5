import numpy as np
import pytest
from conftest import CYCLIC, GRAMMARS, WEIGHTED

from lcgram.analysis import AllProductions, is_left_recursive, left_corner_set, prune_useless, select_L
from lcgram.grammar import Production, nonterminal, parse_grammar, terminal
from lcgram.oracle import check_claims, enumerate_strings, random_grammar, string_probabilities
from lcgram.stats import format_size_table, size_table
from lcgram.transform import (
    EPSILON_MODES,
    FACTORS,
    TransformError,
    TransformOptions,
    format_provenance,
    lc_transform,
)
from lcgram.treebank import mini_grammar
from lcgram.unary import remove_unary_cycles

ALL_OPTIONS = [TransformOptions(factor=f, epsilon=e) for f in FACTORS for e in EPSILON_MODES]


def _ids(value):
    if isinstance(value, TransformOptions):
        return f"{value.factor}-{value.epsilon}"
    return None


def l0(g):
    return select_L(g, "l0")


@pytest.mark.parametrize(
    "opts, expected",
    [
        (
            TransformOptions(),
            "%start S\nS -> b LC(S;S)\nLC(S;S) -> a LC(S;S)\nLC(S;S) ->\n",
        ),
        (
            TransformOptions(epsilon="one_step"),
            "%start S\nS -> b LC(S;S)\nS -> b\nLC(S;S) -> a LC(S;S)\nLC(S;S) -> a\n",
        ),
        (
            TransformOptions(epsilon="full"),
            "%start S\nS -> b LC(S;S)\nS -> b\nLC(S;S) -> a LC(S;S)\nLC(S;S) -> a\n",
        ),
        (
            TransformOptions(factor="td"),
            "%start S\nS -> TD(S) LC(S;S)\nTD(S) -> b\nLC(S;S) -> a LC(S;S)\nLC(S;S) ->\n",
        ),
        (
            TransformOptions(factor="lc"),
            "%start S\nS -> b LC(S;S)\nLC(S;S) -> PT(S;S) LC(S;S)\nPT(S;S) -> a\nLC(S;S) ->\n",
        ),
    ],
    ids=_ids,
)
def test_left_branching_transform(left_branching, opts, expected):
    out = lc_transform(left_branching, l0(left_branching), opts).grammar
    assert out.production_set == parse_grammar(expected).production_set


def test_np_pp_full_epsilon_removal(np_pp):
    out = lc_transform(np_pp, l0(np_pp), TransformOptions(epsilon="full")).grammar
    expected = parse_grammar(
        "%start NP\n"
        "NP -> d n LC(NP;NP)\n"
        "NP -> d n\n"
        "LC(NP;NP) -> PP LC(NP;NP)\n"
        "LC(NP;NP) -> PP\n"
        "PP -> p NP\n"
    )
    assert out.production_set == expected.production_set
    assert not any(p.is_epsilon for p in out.productions)


def test_full_mode_schema_ids(np_pp):
    result = lc_transform(np_pp, l0(np_pp), TransformOptions(epsilon="full"))
    ids = {str(i.production): i.schema_id for i in result.instances}
    assert ids["NP -> d n LC(NP;NP)"] == "eps_b1"
    assert ids["NP -> d n"] == "eps_b2"
    assert ids["LC(NP;NP) -> PP"] == "eps_c2"
    assert ids["PP -> p NP"] == "eps_b2"


def test_output_is_sorted(fixture_grammar):
    out = lc_transform(fixture_grammar, AllProductions(), TransformOptions(factor="td_lc")).grammar
    keys = [(p.lhs.label, tuple(s.label for s in p.rhs)) for p in out.productions]
    assert keys == sorted(keys)


def test_empty_L_one_step_is_identity(fixture_grammar):
    out = lc_transform(fixture_grammar, frozenset(), TransformOptions(epsilon="one_step")).grammar
    assert out.production_set == fixture_grammar.production_set


def test_empty_L_full_is_identity(fixture_grammar):
    out = lc_transform(fixture_grammar, frozenset(), TransformOptions(epsilon="full")).grammar
    assert out.production_set == fixture_grammar.production_set


@pytest.mark.parametrize("opts", ALL_OPTIONS, ids=_ids)
def test_output_is_already_pruned(fixture_grammar, opts):
    out = lc_transform(fixture_grammar, AllProductions(), opts).grammar
    assert prune_useless(out) == out


@pytest.mark.parametrize("epsilon", EPSILON_MODES)
def test_link_and_prediction_constraints_do_not_change_output(fixture_grammar, epsilon):
    L = l0(fixture_grammar)
    pruned = lc_transform(fixture_grammar, L, TransformOptions(epsilon=epsilon)).grammar
    unpruned = lc_transform(fixture_grammar, L, TransformOptions(epsilon=epsilon, prune_links=False)).grammar
    moore = lc_transform(fixture_grammar, L, TransformOptions(epsilon=epsilon, moore_constraint=True)).grammar
    assert unpruned.production_set == pruned.production_set == moore.production_set


@pytest.mark.parametrize("opts", ALL_OPTIONS, ids=_ids)
@pytest.mark.parametrize("which", ["l0", "all", "empty"])
def test_weak_equivalence(fixture_grammar, opts, which):
    g = fixture_grammar
    L = {"l0": l0(g), "all": AllProductions(), "empty": frozenset()}[which]
    out = lc_transform(g, L, opts).grammar
    assert enumerate_strings(out, 8) == enumerate_strings(g, 8)


@pytest.mark.parametrize("opts", ALL_OPTIONS, ids=_ids)
@pytest.mark.parametrize("mode", ["l0", "all", "non_pos_initial"])
def test_weighted_transform_preserves_string_probabilities(weighted_grammar, mode, opts):
    g = weighted_grammar
    if mode == "non_pos_initial" and not g.pos_tags:
        pytest.skip("grammar has no POS tags")
    weighted_opts = TransformOptions(factor=opts.factor, epsilon=opts.epsilon, weighted=True)
    out = lc_transform(g, left_corner_set(g, mode), weighted_opts).grammar
    want = string_probabilities(g, 5)
    got = string_probabilities(out, 5)
    assert set(got) == set(want)
    for s, p in want.items():
        assert got[s] == pytest.approx(p, abs=1e-12)


@pytest.mark.parametrize("opts", ALL_OPTIONS, ids=_ids)
@pytest.mark.parametrize("which", ["l0", "all", "empty"])
def test_transform_after_breaking_unary_cycles(opts, which):
    g = remove_unary_cycles(parse_grammar(CYCLIC), weighted=True)
    L = {"l0": l0(g), "all": AllProductions(), "empty": frozenset()}[which]
    weighted_opts = TransformOptions(factor=opts.factor, epsilon=opts.epsilon, weighted=True)
    out = lc_transform(g, L, weighted_opts).grammar
    assert enumerate_strings(out, 8) == enumerate_strings(g, 8)
    want = string_probabilities(g, 5)
    got = string_probabilities(out, 5)
    assert set(got) == set(want)
    for s, p in want.items():
        assert got[s] == pytest.approx(p, abs=1e-12)


@pytest.mark.parametrize("opts", ALL_OPTIONS, ids=_ids)
def test_output_size_grows_with_left_corner_set(fixture_grammar, opts):
    g = fixture_grammar
    sizes = [len(lc_transform(g, L, opts).grammar) for L in (frozenset(), l0(g), AllProductions())]
    assert sizes == sorted(sizes)


def test_unweighted_mode_sets_unit_weights():
    g = parse_grammar(WEIGHTED["np_pp"])
    out = lc_transform(g, l0(g), TransformOptions(epsilon="full")).grammar
    assert {p.weight for p in out.productions} == {1.0}


@pytest.mark.parametrize("opts", ALL_OPTIONS, ids=_ids)
def test_l0_output_is_not_left_recursive(fixture_grammar, opts):
    out = lc_transform(fixture_grammar, l0(fixture_grammar), opts).grammar
    assert not is_left_recursive(out)


def test_random_grammars_lose_left_recursion():
    rng = np.random.default_rng(7)
    for _ in range(100):
        g = random_grammar(rng)
        L = l0(g)
        for opts in ALL_OPTIONS:
            out = lc_transform(g, L, opts).grammar
            assert not is_left_recursive(out), f"{opts} on\n{g.productions}"


@pytest.mark.parametrize("name", sorted(GRAMMARS))
def test_l0_is_minimal(name):
    assert check_claims(parse_grammar(GRAMMARS[name])) == []


def test_dropping_from_l0_leaves_left_recursion(left_branching):
    out = lc_transform(left_branching, frozenset(), TransformOptions()).grammar
    assert is_left_recursive(out)


def test_epsilon_input_is_rejected():
    g = parse_grammar("S -> a\nS ->\n")
    with pytest.raises(TransformError, match="epsilon"):
        lc_transform(g, frozenset(), TransformOptions())


def test_foreign_left_corner_set_is_rejected(left_branching):
    bogus = frozenset({Production(nonterminal("S"), (terminal("c"),))})
    with pytest.raises(TransformError, match="not a subset"):
        lc_transform(left_branching, bogus, TransformOptions())


def test_bad_options():
    with pytest.raises(TransformError):
        TransformOptions(factor="both")
    with pytest.raises(TransformError):
        TransformOptions(epsilon="some")


def test_provenance_lines(left_branching):
    result = lc_transform(left_branching, l0(left_branching), TransformOptions())
    assert format_provenance(result) == (
        "1d\tLC(S;S) ->\t-\n"
        "1c\tLC(S;S) -> a LC(S;S)\tS -> S a\n"
        "1b\tS -> b LC(S;S)\tS -> b\n"
    )


def test_provenance_is_deterministic(fixture_grammar):
    L = AllProductions()
    opts = TransformOptions(factor="td_lc", epsilon="full")
    a = format_provenance(lc_transform(fixture_grammar, L, opts))
    b = format_provenance(lc_transform(fixture_grammar, L, opts))
    assert a == b


# ------------ Sizes on the bundled grammar ------------

@pytest.fixture(scope="module")
def mini():
    return prune_useless(remove_unary_cycles(mini_grammar()))


def test_mini_grammar_shape(mini):
    assert len(mini) == 33
    assert len(l0(mini)) == 17


def test_mini_size_ordering(mini):
    L = l0(mini)
    sizes = {f: len(lc_transform(mini, L, TransformOptions(factor=f)).grammar) for f in FACTORS}
    full = len(lc_transform(mini, AllProductions(), TransformOptions()).grammar)
    assert sizes["none"] == 89
    assert sizes["td"] == 84
    assert sizes["td_lc"] == 79
    assert full > sizes["none"] > sizes["td"] > sizes["td_lc"]


def test_mini_schema_bounds(mini):
    L = l0(mini)
    nts = {p.lhs for p in mini.productions}
    td = lc_transform(mini, L, TransformOptions(factor="td")).schema_counts()
    assert td["2a"] == 15
    assert td["2a"] <= len(nts) ** 2
    assert td["2b"] == len(mini) - len(L) == 16
    td_lc = lc_transform(mini, L, TransformOptions(factor="td_lc")).schema_counts()
    assert td_lc["3b"] == len(L) == 17


def test_size_table(mini):
    rows = size_table(mini, modes=("all", "l0"))
    names = [r.name for r in rows]
    assert names[0] == "none"
    assert "LC_L0(td,lc)" in names
    by_name = {r.name: r.grammar_size for r in rows}
    assert by_name["none"] == 33
    assert by_name["LC_L0"] == 89
    text = format_size_table(rows)
    assert text.startswith("transform\tgrammar\n")
    assert "LC_L0(td,lc)\t79\n" in text
