import pytest
from hypothesis import HealthCheck, assume, event, given, settings
from hypothesis import strategies as st

from modelcc import GrammarError, LexicalError, ModelBuilder, ParseError, Parser, validate_model
from modelcc.parser import enumerate_trees, format_tree, tree_at

from oracles import catalan, count_all_paths

RIGHT = """language R;
abstract element E @start;
element Sum : E { left : One; plus : "\\\\+"; right : E; }
basic element One : E @pattern("1");
"""
LEFT = RIGHT.replace("left : One;", "left : E;").replace("right : E;", "right : One;")

LEXAMB = """language Lex;
element Seq @start { items : Tok @multiplicity(1,*); }
abstract element Tok;
basic element Int : Tok @pattern("[0-9]+");
basic element Real : Tok @pattern("[0-9]+\\\\.[0-9]+");
basic element Dot : Tok @pattern("\\\\.");
"""

EMPTY = """language Empty;
element L @start { xs : X @multiplicity(0,*); }
basic element X @pattern("x");
"""


def chain(n):
    return "1" + "+1" * n


def test_paper_input_parses(arith):
    forest = arith.parse_forest("10/(2+3)*0.5+1")
    assert forest.count_trees() == 1
    assert forest.root.symbol == "Expression"
    assert (forest.root.start, forest.root.end) == (0, 14)


@pytest.mark.parametrize("text, n", [("1+2*3", 2), ("1+2+3+4", 5), ("7", 1), ("1-2*3/4+5", 14)])
def test_unfiltered_counts(arith_free, text, n):
    forest = arith_free.parse_forest(text)
    assert forest.count_trees() == n
    assert count_all_paths(arith_free.grammar, text) == n


@pytest.mark.parametrize("n", range(1, 8))
def test_catalan_chains(arith_free, n):
    assert arith_free.parse_forest(chain(n)).count_trees() == catalan(n)


def test_truncated_input(arith):
    with pytest.raises(ParseError) as info:
        arith.parse_forest("1+")
    err = info.value
    assert err.offset == 2
    assert "<Literal>" in err.expected and '"\\("' in err.expected
    assert "offset 2" in str(err)


def test_error_on_unexpected_token(arith):
    with pytest.raises(ParseError) as info:
        arith.parse_forest("(1+2")
    assert info.value.offset == 4
    with pytest.raises(ParseError) as info:
        arith.parse_forest("1 2")
    assert info.value.offset == 2


def test_enumerate(arith_free):
    forest = arith_free.parse_forest("1+2*3")
    trees, more = enumerate_trees(forest, 10)
    assert len(trees) == 2 and not more
    assert len({t.key() for t in trees}) == 2
    trees, more = enumerate_trees(forest, 1)
    assert len(trees) == 1 and more
    assert enumerate_trees(forest, 10)[0] == enumerate_trees(forest, 10)[0]
    with pytest.raises(ValueError):
        enumerate_trees(forest, 0)


def test_enumerate_unambiguous(arith):
    forest = arith.parse_forest("5")
    for limit in (1, 5):
        trees, more = enumerate_trees(forest, limit)
        assert len(trees) == 1 and not more


def test_enumerated_trees_are_distinct_and_complete(arith_free):
    forest = arith_free.parse_forest(chain(5))
    trees, more = enumerate_trees(forest, 100)
    assert len(trees) == 42 and not more
    assert len({t.key() for t in trees}) == 42
    for t in trees:
        assert "".join(c.text for c in t.leaves()) == chain(5)


def test_tree_tiles_span(arith):
    tree = arith.parse_tree(" ( 1 + 2 ) ")
    for t in tree.subtrees():
        leaves = t.leaves()
        assert leaves[0].start == t.start
        assert leaves[-1].end == t.end
        for a, b in zip(leaves, leaves[1:]):
            assert a.end <= b.start


def test_format_tree(arith):
    text = format_tree(arith.parse_tree("1+2"))
    assert text.splitlines()[0] == "Expression [0,3)"
    assert "    Literal '1'" in text


def test_epsilon_grammar():
    p = Parser.from_text(EMPTY)
    assert p.parse_forest("").count_trees() == 1
    assert p.parse_forest("x x x").count_trees() == 1
    graph = p.parse("")
    assert graph.root["xs"] == []


def test_empty_input_needs_nullable_start(arith):
    with pytest.raises(ParseError) as info:
        arith.parse_forest("   ")
    assert info.value.offset == 3


def test_lexical_ambiguity_is_explored():
    p = Parser.from_text(LEXAMB)
    forest = p.parse_forest("3.14")
    assert forest.count_trees() == 2
    shapes = {tuple(c.cls.id for c in t.leaves()) for t in enumerate_trees(forest, 10)[0]}
    assert shapes == {("Real",), ("Int", "Dot", "Int")}
    assert count_all_paths(p.grammar, "3.14") == 2


def test_interning():
    forest = Parser.from_text(LEXAMB, constraints=False).parse_forest("1.2.3")
    keys = [(n.symbol, n.start, n.end) for n in forest.topological()]
    assert len(keys) == len(set(keys))


def test_dump_forest(arith_free):
    dump = arith_free.parse_forest("1+2*3").dump()
    assert "<Expression>[0,5) derivations=1" in dump
    assert "<BinaryExpression>[0,5) derivations=2" in dump


@pytest.mark.parametrize("model", [LEFT, RIGHT], ids=["left", "right"])
@pytest.mark.parametrize("constraints", [True, False])
def test_long_recursive_chains(model, constraints):
    p = Parser.from_text(model, constraints=constraints)
    text = chain(5000)          # 10001 tokens
    forest = p.parse_forest(text)
    assert forest.count_trees() == 1
    tree = tree_at(forest, 0)
    assert len(tree.leaves()) == 10001


def test_long_list():
    p = Parser.from_text(EMPTY)
    assert len(p.parse("x " * 10000).root["xs"]) == 10000


def test_concurrent_parses_do_not_interfere(arith):
    from concurrent.futures import ThreadPoolExecutor
    texts = [chain(n) for n in range(1, 30)] * 3
    with ThreadPoolExecutor(4) as ex:
        counts = list(ex.map(lambda t: arith.parse_forest(t).count_trees(), texts))
    assert counts == [1] * len(texts)


# -- forest size equals the brute-force count on random grammars -------------

WORDS = {"A": "a", "B": "b", "AB": "ab", "C": "c+"}
SAMPLES = {"A": "a", "B": "b", "AB": "ab", "C": "cc", "Z": "z", '";"': ";", '","': ","}


def derive(grammar, rnd, max_tokens=8):
    """A random sentence of the grammar (token texts), or None."""
    by_lhs = {}
    for p in grammar.productions:
        by_lhs.setdefault(p.lhs, []).append(p.rhs)
    inf = float("inf")
    size = {t: 1 for t in grammar.terminals}
    changed = True
    while changed:
        changed = False
        for lhs, rhss in by_lhs.items():
            best = min(sum(size.get(x, inf) for x in rhs) for rhs in rhss)
            if best < size.get(lhs, inf):
                size[lhs], changed = best, True
    if size.get(grammar.start, inf) > max_tokens:
        return None
    out, stack, budget = [], [grammar.start], max_tokens
    while stack:
        sym = stack.pop()
        if sym in grammar.terminals:
            out.append(SAMPLES[sym])
            continue
        pending = sum(size[x] for x in stack)
        options = [r for r in by_lhs[sym] if sum(size[x] for x in r) + pending + len(out) <= budget]
        rhs = rnd.choice(options)
        stack.extend(reversed(rhs))
    return out


@st.composite
def random_models(draw):
    b = ModelBuilder("Rand")
    basics = draw(st.lists(st.sampled_from(sorted(WORDS)), min_size=1, max_size=4, unique=True))
    b.add_element("Top", "selection")
    for name in basics:
        b.add_element(name, "basic", "Top" if draw(st.booleans()) else None)
        b.set_constraint(name, "pattern", WORDS[name])
    names = list(basics) + ["Top"]
    comps = [f"K{i}" for i in range(draw(st.integers(1, 3)))]
    names += comps
    for c in comps:
        b.add_element(c, "composite", "Top" if draw(st.booleans()) else None)
        for k in range(draw(st.integers(1, 3))):
            if draw(st.integers(0, 5)) == 0:
                b.add_member(c, f"m{k}", literal=draw(st.sampled_from([";", ","])))
                continue
            b.add_member(c, f"m{k}", draw(st.sampled_from(names)))
            mode = draw(st.integers(0, 5))
            if mode == 1:
                b.set_constraint(f"{c}.m{k}", "optional")
            elif mode == 2:
                b.set_constraint(f"{c}.m{k}", "multiplicity", (draw(st.integers(0, 2)), None))
                if draw(st.booleans()):
                    b.set_constraint(f"{c}.m{k}", "separator", ",")
            elif mode == 3:
                b.set_constraint(f"{c}.m{k}", "multiplicity", (1, draw(st.integers(1, 3))))
    if not any(s == "Top" for _, s in b._elements.values()):
        b.add_element("Z", "basic", "Top")
        b.set_constraint("Z", "pattern", "z")
    b.set_constraint(draw(st.sampled_from(["Top"] + comps)), "start")
    return b.build(validate=False)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
@given(random_models(), st.lists(st.sampled_from(["a", "b", "ab", "c", "cc", ";", ",", "z"]), max_size=7),
       st.booleans(), st.randoms(use_true_random=False))
def test_tree_count_matches_bruteforce(model, words, spaced, rnd):
    assume(validate_model(model).ok)
    try:
        p = Parser(model, constraints=False)
    except GrammarError:
        assume(False)
    text = (" " if spaced else "").join(words)
    expected = count_all_paths(p.grammar, text)
    try:
        got = p.parse_forest(text).count_trees()
    except (LexicalError, ParseError):
        got = 0
    event("accepted" if expected else "rejected")
    assert got == expected

    sentence = derive(p.grammar, rnd)
    event("derived" if sentence is not None else "underivable")
    if sentence is not None:
        text = " ".join(sentence)
        expected = count_all_paths(p.grammar, text)
        assert expected >= 1
        assert p.parse_forest(text).count_trees() == expected


@settings(max_examples=150, deadline=None)
@given(st.lists(st.sampled_from(["1", "2", "1.5", ".", "3.25"]), min_size=1, max_size=6))
def test_lexically_ambiguous_counts(words):
    p = Parser.from_text(LEXAMB, constraints=False)
    text = "".join(words)
    expected = count_all_paths(p.grammar, text)
    try:
        got = p.parse_forest(text).count_trees()
    except (LexicalError, ParseError):
        got = 0
    assert got == expected
