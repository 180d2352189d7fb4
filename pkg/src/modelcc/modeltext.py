"""Reader and writer for ``.mcc`` model files.

    language Arith;
    abstract element Expression @start;
    element ExpressionGroup : Expression @prefix("\\(") @suffix("\\)") {
        e : Expression;
    }
    basic element Literal : Expression @pattern("[0-9]+(\\.[0-9]+)?") @value(number);

Strings use ``\\\\`` and ``\\"`` as escapes; any other backslash is kept
verbatim so regex escapes can be written either way.  ``//`` starts a
comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import BuilderError, ModelSyntaxError, ModelValidationError
from .model import (
    DEFAULT_SKIP, Associativity, Composition, Kind, Model, ModelBuilder, Multiplicity,
    ValueType, validate_model,
)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>-?[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>[{}();:,@*])
""", re.VERBOSE)


@dataclass
class ModelDocument:
    source_text: str
    model: Model
    source_spans: dict = field(default_factory=dict)  # name or Element.member -> (line, col, end_line, end_col)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    end_line: int
    end_col: int


def _lex(text):
    toks, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        s = m.group()
        kind = m.lastgroup
        nl = s.count("\n")
        end_line = line + nl
        end_col = (len(s) - s.rfind("\n")) if nl else col + len(s)
        if kind != "ws":
            toks.append(_Tok(kind, s, line, col, end_line, end_col))
        line, col, pos = end_line, end_col, m.end()
    toks.append(_Tok("eof", "", line, col, line, col))
    return toks


def _unquote(s):
    body = s[1:-1]
    return re.sub(r'\\([\\"])', r"\1", body)


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


_ELEMENT_ARGS = {
    "prefix": "strings", "suffix": "strings", "associativity": "word", "priority": "int",
    "composition": "word", "freeorder": "none", "constraint": "string", "start": "none",
    "pattern": "string", "value": "word",
}
_MEMBER_ARGS = {
    "optional": "none", "multiplicity": "range", "separator": "strings",
    "position": "int", "id": "none", "reference": "none",
}
_WORDS = {
    "associativity": {a.value for a in Associativity} - {"unspecified"},
    "composition": {c.value for c in Composition} - {"unspecified"},
    "value": {v.value for v in ValueType} - {"none"},
}


class _Reader:
    def __init__(self, text):
        self.toks = _lex(text)
        self.i = 0
        self.spans = {}

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ModelSyntaxError(message, tok.line, tok.col)

    def take(self, kind=None, text=None, what=None):
        t = self.tok
        if (kind and t.kind != kind) or (text and t.text != text):
            found = t.text or "end of input"
            raise self.error(f"expected {what or text or kind}, found {found!r}")
        self.i += 1
        return t

    def peek(self, text):
        return self.tok.kind in ("ident", "punct") and self.tok.text == text

    def read(self):
        if not self.peek("language"):
            raise self.error("expected 'language' header")
        self.take()
        name = self.take("ident", what="language name").text
        builder = ModelBuilder(name)
        for ann, args, t in self.annotations():
            if ann != "skip":
                raise self.error(f"@{ann} is not a language annotation", t)
            if len(args) != 1 or not isinstance(args[0], str) or args[0] is None:
                raise self.error("@skip takes one string", t)
            builder.set_skip(args[0])
        self.take("punct", ";")
        while self.tok.kind != "eof":
            self.element(builder)
        declared = set(builder._elements)
        for owner, (_, sup) in builder._elements.items():
            if sup is not None and sup not in declared:
                line, col = self.spans[owner][:2]
                raise ModelSyntaxError(f"unknown element name {sup!r} (supertype of {owner})", line, col)
            for fname, etype, _ in builder._members[owner]:
                if etype is not None and etype not in declared:
                    line, col = self.spans[f"{owner}.{fname}"][:2]
                    raise ModelSyntaxError(f"unknown element name {etype!r}", line, col)
        try:
            model = builder.build(validate=False)
        except BuilderError as exc:
            raise ModelSyntaxError(str(exc), 0, 0) from exc
        return model

    def element(self, builder):
        first = self.tok
        kind = Kind.COMPOSITE
        if self.peek("abstract"):
            self.take()
            kind = Kind.SELECTION
        elif self.peek("basic"):
            self.take()
            kind = Kind.BASIC
        self.take("ident", "element", what="'element'")
        name_tok = self.take("ident", what="element name")
        name = name_tok.text
        sup = None
        if self.peek(":"):
            self.take()
            sup = self.take("ident", what="supertype name").text
        try:
            builder.add_element(name, kind, sup)
        except BuilderError as exc:
            raise self.error(str(exc), name_tok) from exc
        for ann, args, t in self.annotations():
            self.apply(builder, name, ann, args, t, _ELEMENT_ARGS)
        if self.peek("{"):
            if kind is not Kind.COMPOSITE:
                raise self.error(f"{kind.value} element {name} cannot have members")
            self.take()
            while not self.peek("}"):
                if self.tok.kind == "eof":
                    raise self.error("expected '}'")
                self.member(builder, name)
            end = self.take()
        else:
            end = self.take("punct", ";", what="'{' or ';'")
        self.spans[name] = (first.line, first.col, end.end_line, end.end_col)

    def member(self, builder, owner):
        ftok = self.take("ident", what="member name")
        self.take("punct", ":", what="':'")
        if self.tok.kind == "string":
            builder.add_member(owner, ftok.text, literal=_unquote(self.take().text))
        else:
            try:
                builder.add_member(owner, ftok.text, self.take("ident", what="type name or token").text)
            except BuilderError as exc:
                raise self.error(str(exc), ftok) from exc
        target = f"{owner}.{ftok.text}"
        for ann, args, t in self.annotations():
            self.apply(builder, target, ann, args, t, _MEMBER_ARGS)
        end = self.take("punct", ";")
        self.spans[target] = (ftok.line, ftok.col, end.end_line, end.end_col)

    def annotations(self):
        out = []
        while self.peek("@"):
            at = self.take()
            name = self.take("ident", what="annotation name").text
            args = []
            if self.peek("("):
                self.take()
                while True:
                    t = self.tok
                    if t.kind == "string":
                        args.append(_unquote(t.text))
                    elif t.kind == "int":
                        args.append(int(t.text))
                    elif t.kind == "ident":
                        args.append(("word", t.text))
                    elif t.kind == "punct" and t.text == "*":
                        args.append(("star", "*"))
                    else:
                        raise self.error("expected annotation argument")
                    self.i += 1
                    if self.peek(","):
                        self.take()
                        continue
                    self.take("punct", ")", what="')'")
                    break
            out.append((name, args, at))
        return out

    def apply(self, builder, target, ann, args, tok, table):
        shape = table.get(ann)
        if shape is None:
            raise self.error(f"unknown annotation @{ann} on {target}", tok)
        bad = self.error(f"bad arguments for @{ann}", tok)
        if shape == "none":
            if args:
                raise bad
            value = True
        elif shape == "int":
            if len(args) != 1 or not isinstance(args[0], int):
                raise bad
            value = args[0]
        elif shape == "string":
            if len(args) != 1 or not isinstance(args[0], str):
                raise bad
            value = args[0]
        elif shape == "strings":
            if not args or not all(isinstance(a, str) for a in args):
                raise bad
            value = tuple(args)
        elif shape == "word":
            if len(args) != 1 or not isinstance(args[0], tuple) or args[0][0] != "word":
                raise bad
            value = args[0][1]
            if value not in _WORDS[ann]:
                raise self.error(f"@{ann}({value}): expected one of {sorted(_WORDS[ann])}", tok)
        else:  # range
            if len(args) != 2 or not isinstance(args[0], int):
                raise bad
            hi = args[1]
            if isinstance(hi, tuple) and hi[0] == "star":
                hi = None
            elif not isinstance(hi, int):
                raise bad
            value = Multiplicity(args[0], hi)
        try:
            builder.set_constraint(target, ann, value)
        except BuilderError as exc:
            raise self.error(str(exc), tok) from exc


def read_model(text: str) -> ModelDocument:
    """Parse and validate a model file.

    Raises ModelSyntaxError (with line/column) or ModelValidationError (with
    the full report); no other exception escapes for string input.
    """
    if not isinstance(text, str):
        raise TypeError("read_model expects a string")
    reader = _Reader(text)
    try:
        model = reader.read()
    except ModelSyntaxError:
        raise
    except (ValueError, TypeError, KeyError, RecursionError) as exc:  # defensive: keep read total
        tok = reader.tok
        raise ModelSyntaxError(f"malformed model: {exc}", tok.line, tok.col) from exc
    report = validate_model(model)
    if not report.ok:
        raise ModelValidationError(report, reader.spans)
    return ModelDocument(text, model, reader.spans)


def write_model(model: Model) -> str:
    """Canonical text for `model`; `read_model` of the result is equal to it."""
    head = f"language {model.name}"
    if model.skip != DEFAULT_SKIP:
        head += f" @skip({_quote(model.skip)})"
    lines = [head + ";", ""]
    for e in model.elements:
        parts = []
        if e.kind is Kind.SELECTION:
            parts.append("abstract element")
        elif e.kind is Kind.BASIC:
            parts.append("basic element")
        else:
            parts.append("element")
        parts.append(e.name)
        if e.supertype:
            parts += [":", e.supertype]
        if e.pattern is not None:
            parts.append(f"@pattern({_quote(e.pattern.regexp)})")
            if e.pattern.value_type is not ValueType.NONE:
                parts.append(f"@value({e.pattern.value_type.value})")
        if e.name == model.start:
            parts.append("@start")
        if e.delimiters.prefixes:
            parts.append(f"@prefix({', '.join(map(_quote, e.delimiters.prefixes))})")
        if e.delimiters.suffixes:
            parts.append(f"@suffix({', '.join(map(_quote, e.delimiters.suffixes))})")
        ev = e.evaluation
        if ev.associativity is not Associativity.UNSPECIFIED:
            parts.append(f"@associativity({ev.associativity.value})")
        if ev.priority is not None:
            parts.append(f"@priority({ev.priority})")
        if ev.composition is not Composition.UNSPECIFIED:
            parts.append(f"@composition({ev.composition.value})")
        if ev.free_order:
            parts.append("@freeorder")
        if e.custom is not None:
            parts.append(f"@constraint({_quote(e.custom)})")
        if e.kind is Kind.COMPOSITE:
            lines.append(" ".join(parts) + " {")
            for m in e.members:
                lines.append("    " + _member_text(m) + ";")
            lines.append("}")
        else:
            lines.append(" ".join(parts) + ";")
    return "\n".join(lines) + "\n"


def _member_text(m):
    parts = [m.field_name, ":", m.element_type if m.literal is None else _quote(m.literal)]
    if m.optional:
        parts.append("@optional")
    if m.multiplicity is not None:
        parts.append(f"@multiplicity({m.multiplicity.min},{'*' if m.multiplicity.max is None else m.multiplicity.max})")
    if m.separator:
        parts.append(f"@separator({', '.join(map(_quote, m.separator))})")
    if m.position is not None:
        parts.append(f"@position({m.position})")
    if m.is_id:
        parts.append("@id")
    if m.is_reference:
        parts.append("@reference")
    return " ".join(parts)


def format_diagnostic(filename, line, col, severity, message):
    return f"{filename}:{line}:{col}: {severity}: {message}"
