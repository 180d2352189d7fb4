"""modelcc: parsers generated from annotated abstract syntax models.

A language is described as a model of element types (composite, selection,
basic) plus constraints; the package derives a grammar, tokenizes into a
token graph, parses every interpretation into a packed forest, filters it
with evaluation-order constraints and binds the result into an abstract
syntax graph with resolved references.
"""

from .binder import (
    AbstractSyntaxGraph, ElementInstance, Reference, SymbolTable, apply_semantics, instantiate,
    new_instance, register_instance, resolve_references,
)
from .disambiguation import ConstraintSet, filter_forest, unique_tree
from .errors import (
    AmbiguityError, BuilderError, ConflictingConstraintError, ConversionError, CyclicEvaluationError,
    DuplicateIdError, GrammarError, InputError, LexicalError, MissingHookError, ModelCCError,
    ModelError, ModelSyntaxError, ModelValidationError, OverConstrainedError, ParseError,
    ReferenceResolutionError, SemanticError, UnresolvedReferenceError,
)
from .grammar import Grammar, Production, dump_grammar, generate_grammar
from .lexer import TokenCandidate, TokenClass, TokenGraph, tokenize
from .model import (
    Associativity, Composition, ElementType, Kind, MemberSpec, Model, ModelBuilder, Multiplicity,
    ValidationReport, ValueType, validate_model,
)
from .modeltext import ModelDocument, read_model, write_model
from .parser import Derivation, ForestNode, ParseForest, ParseTree, enumerate_trees, parse
from .pipeline import Parser, create_parser

__version__ = "0.1.0"

__all__ = [
    "AbstractSyntaxGraph", "AmbiguityError", "Associativity", "BuilderError", "Composition",
    "ConflictingConstraintError", "ConstraintSet", "ConversionError", "CyclicEvaluationError",
    "Derivation", "DuplicateIdError", "ElementInstance", "ElementType", "ForestNode", "Grammar",
    "GrammarError", "InputError", "Kind", "LexicalError", "MemberSpec", "MissingHookError", "Model",
    "ModelBuilder", "ModelCCError", "ModelDocument", "ModelError", "ModelSyntaxError",
    "ModelValidationError", "Multiplicity", "OverConstrainedError", "ParseError", "ParseForest",
    "ParseTree", "Parser", "Production", "Reference", "ReferenceResolutionError", "SemanticError",
    "SymbolTable", "TokenCandidate", "TokenClass", "TokenGraph", "UnresolvedReferenceError",
    "ValidationReport", "ValueType", "apply_semantics", "create_parser", "dump_grammar",
    "enumerate_trees", "filter_forest", "generate_grammar", "instantiate", "new_instance", "parse",
    "read_model", "register_instance", "resolve_references", "tokenize", "unique_tree",
    "validate_model", "write_model",
]
