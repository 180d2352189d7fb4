import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modelcc import (
    ConversionError, CyclicEvaluationError, DuplicateIdError, MissingHookError, Parser,
    UnresolvedReferenceError,
)
from modelcc.binder import (
    ElementInstance, Reference, SymbolTable, apply_semantics, convert_value, instantiate,
    new_instance, register_instance,
)
from modelcc.gallery import ARITH_HOOKS, JSON_HOOKS, graph_adjacency, load_model, model_path
from modelcc.model import ValueType


@pytest.fixture()
def constants():
    return Parser.from_file(model_path("constants"))


@pytest.fixture(scope="module")
def graph_parser():
    return Parser.from_file(model_path("graph"))


def test_literal_instance(arith):
    g = arith.parse("5")
    assert g.root.type.name == "Literal"
    assert g.root["value"] == 5.0 and isinstance(g.root["value"], float)
    assert g.root.node_id == "n0" and g.root.span == (0, 1)


def test_paper_expression(arith):
    g = arith.parse("10/(2+3)*0.5+1")
    assert g.root.type.name == "BinaryExpression"
    assert g.root["op"].type.name == "AdditionOperator"
    assert apply_semantics(g, ARITH_HOOKS) == 2.0


def test_delimiters_not_stored(arith):
    g = arith.parse("(7)")
    assert g.root.type.name == "ExpressionGroup"
    assert list(g.root.fields) == ["e"]
    assert g.root.span == (0, 3) and g.root["e"].span == (1, 2)


def test_json_structure(json_parser):
    g = json_parser.parse('{"a": [1, true, null]}')
    obj = g.root["value"]
    assert obj.type.name == "JSONObject"
    (pair,) = obj["pairs"]
    assert pair["name"]["value"] == '"a"'
    arr = pair["value"]
    assert [v.type.name for v in arr["values"]] == ["JSONNumber", "JSONBoolean", "JSONNull"]
    assert arr["values"][1]["value"] is True
    assert apply_semantics(g, JSON_HOOKS) == json.loads('{"a": [1, true, null]}')


def test_empty_list_and_absent_optional(json_parser):
    assert json_parser.parse("{}").root["value"]["pairs"] == []
    ifelse = Parser.from_file(model_path("ifelse"))
    assert ifelse.parse("if c1 then s1").root["elsePart"] is None


def test_conversions():
    assert convert_value(ValueType.NUMBER, "0.5", (0, 3)) == 0.5
    assert convert_value(ValueType.NUMBER, "-12", (0, 3)) == -12.0
    assert convert_value(ValueType.BOOLEAN, "true", (0, 4)) is True
    assert convert_value(ValueType.BOOLEAN, "no", (0, 2)) is False
    assert convert_value(ValueType.TEXT, "x", (0, 1)) == "x"
    with pytest.raises(ConversionError) as info:
        convert_value(ValueType.NUMBER, "1e999", (3, 8))
    assert info.value.span == (3, 8)
    with pytest.raises(ConversionError):
        convert_value(ValueType.BOOLEAN, "maybe", (0, 5))


def test_number_overflow_in_input(json_parser):
    with pytest.raises(ConversionError):
        json_parser.parse("[1e999]")


# -- references ------------------------------------------------------------------

def test_predefined_constant(constants):
    constants.define("Constant", name="pi", value=3.1415927)
    assert abs(constants.evaluate("pi", ARITH_HOOKS) - 3.1415927) <= 1e-9
    assert abs(constants.evaluate("2*pi", ARITH_HOOKS) - 6.2831854) <= 1e-9


def test_predefined_separation_pair(constants):
    with pytest.raises(UnresolvedReferenceError) as info:
        constants.parse("pi")
    assert info.value.id_text == "pi" and info.value.exit_code == 5
    constants.define("Constant", name="pi", value=3.1415927)
    g = constants.parse("pi")
    target = g.root["constant"].target
    assert target.span == "predefined" and target.node_id.startswith("p")
    assert g.resolved[(g.root.node_id, "constant", None)] == target.node_id


def test_case_sensitive_ids(constants):
    constants.define("Constant", name="pi", value=3.0)
    with pytest.raises(UnresolvedReferenceError):
        constants.parse("PI")


def test_symbol_table():
    model = load_model("constants")
    table = SymbolTable(model)
    pi = new_instance(model, "Constant", name="pi", value=3.1415927)
    register_instance(table, pi)
    assert table.lookup("Constant", "pi") is pi
    assert table.lookup("Constant", "e") is None
    with pytest.raises(DuplicateIdError):
        register_instance(table, new_instance(model, "Constant", name="pi", value=3.0))
    copy = table.copy()
    copy.register(new_instance(model, "Constant", name="e", value=2.7), predefined=True)
    assert table.lookup("Constant", "e") is None


SUBTYPED = """language Sub;
element Prog @start { decls : Decl @multiplicity(0,*); uses : Use @multiplicity(0,*); }
abstract element Decl;
element VarDecl : Decl @prefix("var") { name : Name @id; }
element FunDecl : Decl @prefix("fun") { name : Name @id; }
element Use @prefix("use") { target : Decl @reference; }
basic element Name @pattern("[a-z]+") @value(text);
"""


def test_subtype_lookup():
    p = Parser.from_text(SUBTYPED)
    g = p.parse("var x fun f use f use x")
    targets = [u["target"].target.type.name for u in g.root["uses"]]
    assert targets == ["FunDecl", "VarDecl"]
    table = SymbolTable(p.model)
    table.register(new_instance(p.model, "VarDecl", name="v"))
    assert table.lookup("Decl", "v").type.name == "VarDecl"


def test_duplicate_ids_in_input():
    p = Parser.from_text(SUBTYPED)
    with pytest.raises(DuplicateIdError):
        p.parse("var x var x")


def test_predefined_collision(constants):
    constants.define("Constant", name="pi", value=3.0)
    with pytest.raises(DuplicateIdError):
        constants.define("Constant", name="pi", value=4.0)


def test_cyclic_graph(graph_parser):
    g = graph_parser.parse("node a -> b; node b -> a;")
    a, b = g.root["nodes"]
    assert a["edges"][0]["target"].target is b
    assert b["edges"][0]["target"].target is a
    doc = json.loads(g.to_json())
    assert doc["nodes"][a["edges"][0].node_id]["fields"]["target"] == {"ref": b.node_id}
    with pytest.raises(CyclicEvaluationError):
        apply_semantics(g, {"Graph": lambda i, v: v, "Node": lambda i, v: v,
                            "Edge": lambda i, v: v, "Name": lambda i, v: v})


def test_self_reference(graph_parser):
    g = graph_parser.parse("node a -> a;")
    (a,) = g.root["nodes"]
    assert a["edges"][0]["target"].target is a


def canonical(graph):
    """Order-free description of a graph-model ASG."""
    return sorted((name, sorted(targets)) for name, targets in graph_adjacency(graph).items())


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=6, unique=True), st.data())
def test_reference_order_independence(names, data):
    edges = {n: data.draw(st.lists(st.sampled_from(names), max_size=3)) for n in names}
    decl = {n: f"node {n}" + "".join(f" -> {t}" for t in edges[n]) + ";" for n in names}
    shuffled = data.draw(st.permutations(names))
    p = Parser.from_file(model_path("graph"))
    one = p.parse(" ".join(decl[n] for n in names))
    two = p.parse(" ".join(decl[n] for n in shuffled))
    assert canonical(one) == canonical(two)
    assert len(one.instances) == len(two.instances)


# -- instantiation is structure preserving -------------------------------------

def element_nodes(tree):
    """Composite nodes plus basic-element leaves of a tree (no references here)."""
    count = 0
    for t in tree.subtrees():
        if t.production.origin.rule == "composite":
            count += 1
        for c in t.children:
            if not hasattr(c, "production") and c.cls.origin_element:
                count += 1
    return count


@pytest.mark.parametrize("text", ["5", "10/(2+3)*0.5+1", "((1))", "1*2-3/4"])
def test_bijection_arith(arith, text):
    tree = arith.parse_tree(text)
    g = arith.bind(tree)
    assert len(g.instances) == element_nodes(tree)
    assert len({i.node_id for i in g.instances}) == len(g.instances)


@pytest.mark.parametrize("text", ['{"a": [1, true, null], "b": {}}', "[[], [[]], 3]", '"s"'])
def test_bijection_json(json_parser, text):
    tree = json_parser.parse_tree(text)
    assert len(json_parser.bind(tree).instances) == element_nodes(tree)


def test_node_ids_are_preorder(arith):
    g = arith.parse("1+2")
    assert [i.node_id for i in g.instances] == ["n0", "n1", "n2", "n3"]
    assert [i.type.name for i in g.instances] == [
        "BinaryExpression", "Literal", "AdditionOperator", "Literal"]


def test_instantiate_directly(arith, arith_model):
    inst = instantiate(arith.parse_tree("4"), arith_model)
    assert isinstance(inst, ElementInstance) and inst["value"] == 4.0


# -- semantics -------------------------------------------------------------------

def test_fold_values(arith):
    assert arith.evaluate("0.5", ARITH_HOOKS) == 0.5
    assert arith.evaluate("1-2-3", ARITH_HOOKS) == -4.0
    assert math.isinf(arith.evaluate("1/0", ARITH_HOOKS))
    assert math.isnan(arith.evaluate("0/0", ARITH_HOOKS))


def test_missing_hook(arith):
    hooks = dict(ARITH_HOOKS)
    del hooks["Literal"]
    with pytest.raises(MissingHookError):
        arith.evaluate("1+2", hooks)


def test_supertype_hook(arith):
    hooks = {k: v for k, v in ARITH_HOOKS.items() if not k.endswith("Operator")}
    hooks["Operator"] = lambda inst, v: (lambda a, b: inst.type.name)
    assert arith.evaluate("1*2", hooks) == "MultiplicationOperator"


def test_shared_instances_fold_once(constants):
    constants.define("Constant", name="k", value=2.0)
    calls = []
    hooks = dict(ARITH_HOOKS)
    hooks["Constant"] = lambda inst, v: calls.append(inst) or v["value"]
    assert constants.evaluate("k*k+k", hooks) == 6.0
    assert len(calls) == 1


def test_asg_json_format(constants):
    constants.define("Constant", name="pi", value=3.1415927)
    doc = json.loads(constants.parse("2*pi").to_json())
    assert doc["root"] == "n0"
    root = doc["nodes"]["n0"]
    assert root["type"] == "BinaryExpression" and root["span"] == [0, 4]
    assert list(root["fields"]) == ["e1", "op", "e2"]
    assert doc["nodes"]["n1"]["fields"]["value"] == 2
    assert isinstance(doc["nodes"]["n1"]["fields"]["value"], int)
    const = doc["nodes"][doc["nodes"]["n3"]["fields"]["constant"]["ref"]]
    assert const["span"] == "predefined"
    assert doc["nodes"][const["fields"]["value"]["ref"]]["fields"]["value"] == 3.1415927


def test_reference_repr():
    r = Reference("Constant", "pi", (0, 2))
    assert r.target is None and "pi" in repr(r)
