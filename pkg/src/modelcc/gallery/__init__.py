"""Example languages shipped with the package.

Each entry bundles a ``.mcc`` model, optional semantic hook sets and a small
corpus of inputs with expected results.  The JSON, S-expression, AWK and
PROLOG models are reconstructions following the usual grammars of those
languages; arith follows the classic four-operator interpreter layout.
"""

from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..binder import apply_semantics
from ..errors import ModelCCError, ParseError, UnresolvedReferenceError
from ..modeltext import read_model

GALLERY_DIR = Path(__file__).resolve().parent
NAMES = ("arith", "constants", "json", "ifelse", "awk", "sexpr", "prolog", "graph")


def model_path(name) -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown gallery model {name!r} (available: {', '.join(NAMES)})")
    return GALLERY_DIR / f"{name}.mcc"


def model_text(name) -> str:
    return model_path(name).read_text(encoding="utf-8")


def load_model(name):
    return read_model(model_text(name)).model


# -- hooks -----------------------------------------------------------------

def ieee_div(a, b):
    """Division with IEEE-754 semantics for a zero divisor."""
    if b == 0:
        if a == 0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


ARITH_HOOKS = {
    "Literal": lambda inst, v: v["value"],
    "ExpressionGroup": lambda inst, v: v["e"],
    "BinaryExpression": lambda inst, v: v["op"](v["e1"], v["e2"]),
    "AdditionOperator": lambda inst, v: operator.add,
    "SubtractionOperator": lambda inst, v: operator.sub,
    "MultiplicationOperator": lambda inst, v: operator.mul,
    "DivisionOperator": lambda inst, v: ieee_div,
    "ConstantReference": lambda inst, v: v["constant"],
    "Constant": lambda inst, v: v["value"],
    "Identifier": lambda inst, v: v["value"],
}

JSON_HOOKS = {
    "JSONDocument": lambda inst, v: v["value"],
    "JSONObject": lambda inst, v: dict(v["pairs"]),
    "JSONArray": lambda inst, v: list(v["values"]),
    "JSONPair": lambda inst, v: (v["name"], v["value"]),
    "JSONString": lambda inst, v: json.loads(v["value"]),
    "JSONNumber": lambda inst, v: v["value"],
    "JSONBoolean": lambda inst, v: v["value"],
    "JSONNull": lambda inst, v: None,
}

SEXPR_HOOKS = {
    "SList": lambda inst, v: list(v["items"]),
    "SNumber": lambda inst, v: v["value"],
    "SString": lambda inst, v: v["value"],
    "SSymbol": lambda inst, v: v["value"],
}

IFELSE_HOOKS = {
    "IfStatement": lambda inst, v: (
        f"(if {v['condition']} then {v['thenPart']}"
        + (f" else {v['elsePart']})" if v["elsePart"] is not None else ")")),
    "ThenPart": lambda inst, v: v["body"],
    "ElsePart": lambda inst, v: v["body"],
    "Condition": lambda inst, v: v["value"],
    "Action": lambda inst, v: v["value"],
}

AWK_HOOKS = {
    "Program": lambda inst, v: list(v["rules"]),
    "PatternRule": lambda inst, v: ("pattern", v["pattern"], v["action"]),
    "ActionRule": lambda inst, v: ("action", v["action"]),
    "Action": lambda inst, v: list(v["statements"]),
    "Pattern": lambda inst, v: v["value"],
    "Statement": lambda inst, v: v["value"],
}


def _fmt_num(x):
    return str(int(x)) if x == int(x) else repr(x)


PROLOG_HOOKS = {
    "Program": lambda inst, v: list(v["clauses"]),
    "Fact": lambda inst, v: f"{v['head']}.",
    "Rule": lambda inst, v: f"{v['head']} :- {', '.join(v['body'])}.",
    "Compound": lambda inst, v: v["functor"] + (f"({', '.join(v['arguments'])})" if v["arguments"] else ""),
    "Arguments": lambda inst, v: list(v["terms"]),
    "Atom": lambda inst, v: v["value"],
    "Variable": lambda inst, v: v["value"],
    "Number": lambda inst, v: _fmt_num(v["value"]),
}

HOOK_SETS = {
    "arith": {"eval": ARITH_HOOKS},
    "constants": {"eval": ARITH_HOOKS},
    "json": {"python": JSON_HOOKS},
    "ifelse": {"shape": IFELSE_HOOKS},
    "awk": {"shape": AWK_HOOKS},
    "sexpr": {"python": SEXPR_HOOKS},
    "prolog": {"shape": PROLOG_HOOKS},
    "graph": {},
}


def graph_adjacency(graph):
    """{node name: [target names]} for the graph model (cyclic, so no fold)."""
    out = {}
    for inst in graph.instances:
        if inst.type.name == "Node":
            out[inst["name"]["value"]] = [e["target"].target["name"]["value"] for e in inst["edges"]]
    return out


# -- entries ---------------------------------------------------------------

@dataclass(frozen=True)
class CorpusItem:
    input: str
    expected: object = None
    error: type | None = None
    provenance: str = "trivial"       # paper | derived | trivial
    predefined: tuple = ()            # (type name, {field: value}) pairs


@dataclass
class GalleryEntry:
    name: str
    model_file: Path
    hooks: dict
    summarize: Callable
    corpus: list = field(default_factory=list)


@dataclass
class CorpusResult:
    input: str
    ok: bool
    expected: object
    actual: object

    def diff(self):
        return f"{self.input!r}: expected {self.expected!r}, got {self.actual!r}"


@dataclass
class GalleryReport:
    name: str
    results: list

    @property
    def ok(self):
        return all(r.ok for r in self.results)

    def format(self):
        lines = []
        for r in self.results:
            lines.append(f"{'PASS' if r.ok else 'FAIL'} {self.name}: {r.input!r}"
                         + ("" if r.ok else f"\n    {r.diff()}"))
        return "\n".join(lines)


def _fold(hooks):
    def summarize(parser, graph):
        return apply_semantics(graph, hooks, parser.model)
    return summarize


def _close(a, b):
    if isinstance(a, float) and isinstance(b, (int, float)):
        return a == b or (math.isnan(a) and math.isnan(b)) or abs(a - b) <= 1e-9
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_close(x, y) for x, y in zip(a, b))
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(_close(x, y) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k]) for k in a)
    return a == b


PI = (("Constant", {"name": "pi", "value": 3.1415927}),)

ENTRIES = {
    "arith": GalleryEntry("arith", model_path("arith"), HOOK_SETS["arith"], _fold(ARITH_HOOKS), [
        CorpusItem("10/(2+3)*0.5+1", 2.0, provenance="paper"),
        CorpusItem("1+2*3", 7.0, provenance="derived"),
        CorpusItem("1-2-3", -4.0, provenance="derived"),
        CorpusItem("(1-2)-3", -4.0, provenance="derived"),
        CorpusItem("1-(2-3)", 2.0, provenance="derived"),
        CorpusItem("5", 5.0),
        CorpusItem("0.5", 0.5),
        CorpusItem("1+", error=ParseError),
    ]),
    "constants": GalleryEntry("constants", model_path("constants"), HOOK_SETS["constants"],
                              _fold(ARITH_HOOKS), [
        CorpusItem("pi", 3.1415927, provenance="paper", predefined=PI),
        CorpusItem("2*pi", 6.2831854, provenance="paper", predefined=PI),
        CorpusItem("pi", error=UnresolvedReferenceError),
    ]),
    "json": GalleryEntry("json", model_path("json"), HOOK_SETS["json"], _fold(JSON_HOOKS), [
        CorpusItem("{}", {}),
        CorpusItem('{"a": [1, true, null]}', {"a": [1.0, True, None]}, provenance="derived"),
        CorpusItem('[1, "two", {"three": 3.5e0}, [], -0.25]',
                   [1.0, "two", {"three": 3.5}, [], -0.25], provenance="derived"),
        CorpusItem('"caf\\u00e9 \\"x\\""', 'café "x"', provenance="derived"),
        CorpusItem("[1,]", error=ParseError),
        CorpusItem('{"a" 1}', error=ParseError),
    ]),
    "ifelse": GalleryEntry("ifelse", model_path("ifelse"), HOOK_SETS["ifelse"], _fold(IFELSE_HOOKS), [
        CorpusItem("if c1 then s1", "(if c1 then s1)"),
        CorpusItem("if c1 then if c2 then s1 else s2", "(if c1 then (if c2 then s1 else s2))",
                   provenance="paper"),
        CorpusItem("if c1 then if c2 then s1 else s2 else s3",
                   "(if c1 then (if c2 then s1 else s2) else s3)", provenance="derived"),
    ]),
    "awk": GalleryEntry("awk", model_path("awk"), HOOK_SETS["awk"], _fold(AWK_HOOKS), [
        CorpusItem("/x/ { print } { next }",
                   [("pattern", "/x/", ["print"]), ("action", ["next"])], provenance="derived"),
        CorpusItem("/a/ /b/ {print;exit}",
                   [("pattern", "/a/", None), ("pattern", "/b/", ["print", "exit"])], provenance="derived"),
    ]),
    "sexpr": GalleryEntry("sexpr", model_path("sexpr"), HOOK_SETS["sexpr"], _fold(SEXPR_HOOKS), [
        CorpusItem("(a (b c) d)", ["a", ["b", "c"], "d"], provenance="derived"),
        CorpusItem("()", []),
        CorpusItem('(define (sq x) (* x x) "doc" 2)',
                   ["define", ["sq", "x"], ["*", "x", "x"], '"doc"', 2.0], provenance="derived"),
        CorpusItem("(a", error=ParseError),
    ]),
    "prolog": GalleryEntry("prolog", model_path("prolog"), HOOK_SETS["prolog"], _fold(PROLOG_HOOKS), [
        CorpusItem("parent(tom, bob). ancestor(X, Y) :- parent(X, Z), ancestor(Z, Y).",
                   ["parent(tom, bob).", "ancestor(X, Y) :- parent(X, Z), ancestor(Z, Y)."],
                   provenance="derived"),
        CorpusItem("halt.", ["halt."]),
        CorpusItem("p(f(1, X)).", ["p(f(1, X))."], provenance="derived"),
    ]),
    "graph": GalleryEntry("graph", model_path("graph"), {}, lambda parser, g: graph_adjacency(g), [
        CorpusItem("node a -> b; node b -> a;", {"a": ["b"], "b": ["a"]}, provenance="derived"),
        CorpusItem("node a -> a;", {"a": ["a"]}, provenance="derived"),
        CorpusItem("node a -> c;", error=UnresolvedReferenceError),
    ]),
}


def run_gallery(entry: GalleryEntry) -> GalleryReport:
    """Run the full pipeline on every corpus item of `entry`."""
    from ..pipeline import Parser

    results = []
    for item in entry.corpus:
        try:
            parser = Parser.from_file(entry.model_file)
            for type_name, fields in item.predefined:
                parser.define(type_name, **fields)
            actual = entry.summarize(parser, parser.parse(item.input))
        except ModelCCError as exc:
            ok = item.error is not None and isinstance(exc, item.error)
            results.append(CorpusResult(item.input, ok, item.error or item.expected,
                                        f"{type(exc).__name__}: {exc}"))
            continue
        ok = item.error is None and _close(actual, item.expected)
        results.append(CorpusResult(item.input, ok, item.error or item.expected, actual))
    return GalleryReport(entry.name, results)
