"""Exception hierarchy shared by every stage of the pipeline.

Each family maps onto one CLI exit code (see ``modelcc.cli``).
"""

from __future__ import annotations


class ModelCCError(Exception):
    exit_code = 1


# -- model / grammar definition problems --------------------------------

class ModelError(ModelCCError):
    exit_code = 2


class BuilderError(ModelError):
    pass


class ConflictingConstraintError(BuilderError):
    pass


class ModelSyntaxError(ModelError):
    def __init__(self, message, line=0, column=0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def format(self, filename="<model>"):
        return f"{filename}:{self.line}:{self.column}: error: {self.message}"


class ModelValidationError(ModelError):
    def __init__(self, report, spans=None):
        self.report = report
        self.spans = spans or {}
        super().__init__("; ".join(d.message for d in report.diagnostics))

    def format(self, filename="<model>"):
        lines = []
        for d in self.report.diagnostics:
            line, col = self.spans.get(d.element, (0, 0))[:2]
            lines.append(f"{filename}:{line}:{col}: {d.severity}: {d.message}")
        return "\n".join(lines)


class GrammarError(ModelError):
    pass


# -- input text problems -------------------------------------------------

class InputError(ModelCCError):
    exit_code = 3

    def __init__(self, message, offset=0):
        super().__init__(message)
        self.message = message
        self.offset = offset


class LexicalError(InputError):
    def __init__(self, offset, char):
        shown = repr(char) if char else "end of input"
        super().__init__(f"offset {offset}: no token matches at {shown}", offset)
        self.char = char


class ParseError(InputError):
    def __init__(self, offset, expected, found=None):
        exp = ", ".join(expected) if expected else "end of input"
        got = f"unexpected {found!r}" if found else "unexpected end of input"
        super().__init__(f"offset {offset}: {got}; expected one of: {exp}", offset)
        self.expected = tuple(expected)
        self.found = found


class OverConstrainedError(InputError):
    def __init__(self, rule, offset=0):
        super().__init__(
            f"over-constrained: every interpretation was eliminated (last rule applied: {rule})",
            offset)
        self.rule = rule


class ConversionError(InputError):
    def __init__(self, message, span):
        super().__init__(f"{message} at [{span[0]},{span[1]})", span[0])
        self.span = span


# -- residual ambiguity --------------------------------------------------

class AmbiguityError(ModelCCError):
    exit_code = 4

    def __init__(self, count, trees):
        super().__init__(f"ambiguous input: {count} interpretations remain")
        self.count = count
        self.trees = trees


# -- references ----------------------------------------------------------

class ReferenceResolutionError(ModelCCError):
    exit_code = 5


class UnresolvedReferenceError(ReferenceResolutionError):
    def __init__(self, expected, id_text, span=None):
        where = f" at [{span[0]},{span[1]})" if span else ""
        super().__init__(f"unresolved reference to {expected} {id_text!r}{where}")
        self.expected = expected
        self.id_text = id_text
        self.span = span


class DuplicateIdError(ReferenceResolutionError):
    def __init__(self, type_name, id_text):
        super().__init__(f"duplicate id {id_text!r} for {type_name}")
        self.type_name = type_name
        self.id_text = id_text


# -- semantic folds ------------------------------------------------------

class SemanticError(ModelCCError):
    exit_code = 1


class MissingHookError(SemanticError):
    pass


class CyclicEvaluationError(SemanticError):
    pass
