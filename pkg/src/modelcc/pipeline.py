"""The whole chain in one object: model -> grammar -> lexer -> parser -> graph."""

from __future__ import annotations

from pathlib import Path

from .binder import (
    AbstractSyntaxGraph, SymbolTable, apply_semantics, instantiate, new_instance,
    resolve_references,
)
from .disambiguation import ConstraintSet, unique_tree
from .grammar import generate_grammar
from .lexer import tokenize
from .model import Model
from .modeltext import read_model
from .parser import enumerate_trees, parse


class Parser:
    """A parser generated from a model.

    >>> p = Parser.from_file("arith.mcc")              # doctest: +SKIP
    >>> p.evaluate("10/(2+3)*0.5+1", ARITH_HOOKS)      # doctest: +SKIP
    2.0

    With ``constraints=False`` the evaluation-order rules and custom hooks
    are switched off and every interpretation the grammar allows is kept.
    Predefined instances added with `add` are visible to every later parse;
    each parse works on its own copy of the symbol table.
    """

    def __init__(self, model: Model, constraints=True, predicates=None):
        self.model = model
        self.grammar = generate_grammar(model)
        self.constraints = ConstraintSet(model, self.grammar, predicates) if constraints else None
        self.table = SymbolTable(model)
        self._classes = list(self.grammar.terminals.values())

    @classmethod
    def from_text(cls, text, **kw):
        return cls(read_model(text).model, **kw)

    @classmethod
    def from_file(cls, path, **kw):
        return cls.from_text(Path(path).read_text(encoding="utf-8"), **kw)

    def add(self, instance):
        """Register a predefined instance (see `new_instance`)."""
        self.table.register(instance, predefined=True)
        return instance

    def define(self, type_name, **fields):
        return self.add(new_instance(self.model, type_name, **fields))

    def tokenize(self, text):
        return tokenize(text, self._classes, self.grammar.skip)

    def parse_forest(self, text):
        return parse(self.tokenize(text), self.grammar, self.constraints)

    def trees(self, text, limit=100):
        return enumerate_trees(self.parse_forest(text), limit)

    def parse_tree(self, text):
        return unique_tree(self.parse_forest(text))

    def bind(self, tree) -> AbstractSyntaxGraph:
        root = instantiate(tree, self.model)
        return resolve_references(root, self.table.copy())

    def parse(self, text) -> AbstractSyntaxGraph:
        return self.bind(self.parse_tree(text))

    def evaluate(self, text, hooks):
        return apply_semantics(self.parse(text), hooks, self.model)


def create_parser(model, **kw) -> Parser:
    """A Parser from a Model, model text, or path to a ``.mcc`` file."""
    if isinstance(model, Model):
        return Parser(model, **kw)
    if isinstance(model, Path) or (isinstance(model, str) and model.endswith(".mcc") and "\n" not in model):
        return Parser.from_file(model, **kw)
    return Parser.from_text(model, **kw)
