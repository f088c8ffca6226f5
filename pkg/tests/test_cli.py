import pytest
from conftest import GRAMMARS

from lcgram.cli import build_parser, load_config, run


@pytest.fixture
def grammar_file(tmp_path):
    def write(name, text=None):
        path = tmp_path / f"{name}.gr"
        path.write_text(GRAMMARS[name] if text is None else text, encoding="utf-8")
        return str(path)

    return write


def test_analyze(grammar_file, capsys):
    assert run(["analyze", grammar_file("np_pp"), "--quiet"]) == 0
    out = capsys.readouterr().out
    assert "production_count: 3\n" in out
    assert "cyclic_nonterminals: -\n" in out
    assert "unary_cycles: 0\n" in out
    assert "L0: 1\n  NP -> NP PP\n" in out


def test_analyze_sizes(grammar_file, capsys):
    assert run(["analyze", grammar_file("left_branching"), "--sizes", "--quiet"]) == 0
    out = capsys.readouterr().out
    assert "transform\tgrammar\n" in out
    assert "LC_L0\t3\n" in out


def test_transform_is_equivalent(grammar_file, tmp_path, capsys):
    src = grammar_file("expr")
    out = str(tmp_path / "out.gr")
    assert run(["transform", src, "--factor", "td-lc", "--epsilon", "full", "-o", out, "--quiet"]) == 0
    assert run(["oracle", "equiv", src, out, "--max-len", "7", "--quiet"]) == 0
    assert capsys.readouterr().out.startswith("EQUIVALENT")


def test_transform_reruns_are_identical(grammar_file, tmp_path):
    src = grammar_file("mutual")
    paths = [str(tmp_path / f"run{i}.gr") for i in range(2)]
    prov = [str(tmp_path / f"run{i}.prov") for i in range(2)]
    for path, pv in zip(paths, prov):
        assert run(["transform", src, "--L", "all", "--factor", "td", "-o", path, "--provenance", pv, "--quiet"]) == 0
    with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
        assert a.read() == b.read()
    with open(prov[0], "rb") as a, open(prov[1], "rb") as b:
        assert a.read() == b.read()


def test_not_equivalent(grammar_file, capsys):
    a = grammar_file("left_branching")
    b = grammar_file("np_pp")
    assert run(["oracle", "equiv", a, b, "--quiet"]) == 1
    assert capsys.readouterr().out.startswith("NOT EQUIVALENT")


def test_claims(grammar_file, capsys):
    assert run(["oracle", "claims", grammar_file("expr"), "--quiet"]) == 0
    assert capsys.readouterr().out == "CLAIMS HOLD\n"


def test_tree_round_trip(tmp_path, capsys):
    trees = tmp_path / "trees.mrg"
    trees.write_text("(S (S (S b) a) a)\n(S b)\n", encoding="utf-8")
    fwd = str(tmp_path / "fwd.mrg")
    back = str(tmp_path / "back.mrg")
    assert run(["trees", "transform", str(trees), "-o", fwd, "--quiet"]) == 0
    with open(fwd, encoding="utf-8") as f:
        assert f.readline() == "(S b (LC(S;S) a (LC(S;S) a (LC(S;S) EPS))))\n"
    assert run(["trees", "detransform", fwd, "-o", back, "--quiet"]) == 0
    with open(back, encoding="utf-8") as f:
        assert f.read() == "(S (S (S b) a) a)\n(S b)\n"


def test_parse_and_parseval(tmp_path, capsys):
    g = tmp_path / "g.gr"
    g.write_text("0.4 S -> S a\n0.6 S -> b\n", encoding="utf-8")
    sents = tmp_path / "s.txt"
    sents.write_text("b a\na\n", encoding="utf-8")
    parsed = str(tmp_path / "parsed.txt")
    assert run(["parse", str(g), str(sents), "-o", parsed, "--quiet"]) == 0
    with open(parsed, encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0].startswith("(S (S b) a)\t")
    assert lines[1] == "(())"
    gold = tmp_path / "gold.mrg"
    gold.write_text("(S (S b) a)\n(S a)\n", encoding="utf-8")
    assert run(["eval", "parseval", str(gold), parsed, "--quiet"]) == 0
    out = capsys.readouterr().out
    assert "no_parse_count: 1\n" in out
    assert "labelled_precision: 1.0000\n" in out


def test_usage_error(capsys):
    assert run(["transform"]) == 2
    assert run(["transform", "x.gr", "--factor", "sideways"]) == 2


def test_domain_error(grammar_file, capsys):
    path = grammar_file("eps", "S -> a\nS ->\n")
    assert run(["transform", path, "--quiet"]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert run(["analyze", str(tmp_path / "nope.gr"), "--quiet"]) == 1
    assert "error:" in capsys.readouterr().err


def test_config_echo(grammar_file, capsys):
    assert run(["analyze", grammar_file("np_pp")]) == 0
    err = capsys.readouterr().err
    assert err.startswith("config: command=analyze ")
    assert "factor=none" in err


def test_config_defaults_feed_the_parser():
    cfg = load_config()
    args = build_parser(cfg).parse_args(["transform", "g.gr"])
    assert args.L == cfg["transform"]["L"]
    assert args.jobs == cfg["jobs"]
    assert args.max_len == cfg["max_len"]


def test_unreadable_config_is_ignored(tmp_path, caplog):
    bad = tmp_path / "config.yaml"
    bad.write_text("jobs: [1,\n", encoding="utf-8")
    cfg = load_config(str(bad))
    assert cfg["jobs"] == 1
    assert "ignoring config" in caplog.text


def test_sample_mini(capsys):
    assert run(["sample", "mini", "-n", "3", "--quiet"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_underscore_factor_spelling(grammar_file, tmp_path):
    path = grammar_file("expr")
    dashed, underscored = tmp_path / "dashed.gr", tmp_path / "underscored.gr"
    assert run(["transform", path, "--factor", "td-lc", "--epsilon", "one-step", "-o", str(dashed), "--quiet"]) == 0
    assert run(["transform", path, "--factor", "td_lc", "--epsilon", "one_step", "-o", str(underscored), "--quiet"]) == 0
    assert underscored.read_text(encoding="utf-8") == dashed.read_text(encoding="utf-8")


def test_bad_split_fraction_is_a_domain_error(monkeypatch, capsys):
    cfg = load_config()
    cfg["mini_treebank"] = {"size": 20, "max_depth": 6, "test_fraction": 1.5}
    monkeypatch.setattr("lcgram.cli.load_config", lambda: cfg)
    assert run(["eval", "pipeline", "--quiet"]) == 1
    assert "test_fraction" in capsys.readouterr().err
