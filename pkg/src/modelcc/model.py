"""Abstract syntax models: element types, constraint records, builder, validation.

A model is plain immutable data.  Composite elements concatenate members,
selection elements choose among their subelements, and basic elements are
matched by a regular expression.  Constraints that shape the concrete
syntax hang off elements (delimiters, evaluation order, custom hooks) and
members (cardinality, separators, position, identifiers, references).
"""

from __future__ import annotations

import enum
import regex
from dataclasses import dataclass, field, replace
from functools import cached_property

from .errors import BuilderError, ConflictingConstraintError, ModelValidationError

DEFAULT_SKIP = r"[ \t\r\n]+"


class Kind(enum.Enum):
    COMPOSITE = "composite"
    SELECTION = "selection"
    BASIC = "basic"


class ValueType(enum.Enum):
    TEXT = "text"
    NUMBER = "number"
    BOOLEAN = "boolean"
    NONE = "none"


class Associativity(enum.Enum):
    LEFT_TO_RIGHT = "ltr"
    RIGHT_TO_LEFT = "rtl"
    NON_ASSOCIATIVE = "non"
    UNSPECIFIED = "unspecified"


class Composition(enum.Enum):
    EAGER = "eager"
    LAZY = "lazy"
    UNSPECIFIED = "unspecified"


class ReferenceKind(enum.Enum):
    NONE = "none"
    ID = "id"
    REFERENCE = "reference"


@dataclass(frozen=True)
class Multiplicity:
    min: int = 1
    max: int | None = 1  # None means unbounded

    def __str__(self):
        return f"{self.min},{'*' if self.max is None else self.max}"


@dataclass(frozen=True)
class MemberSpec:
    field_name: str
    element_type: str | None = None
    literal: str | None = None  # token member: a fixed pattern instead of an element
    optional: bool = False
    multiplicity: Multiplicity | None = None
    separator: tuple[str, ...] = ()
    position: int | None = None
    reference_kind: ReferenceKind = ReferenceKind.NONE

    @property
    def bounds(self) -> Multiplicity:
        if self.multiplicity is not None:
            return self.multiplicity
        if self.optional:
            return Multiplicity(0, 1)
        return Multiplicity(1, 1)

    @property
    def is_reference(self):
        return self.reference_kind is ReferenceKind.REFERENCE

    @property
    def is_id(self):
        return self.reference_kind is ReferenceKind.ID


@dataclass(frozen=True)
class PatternSpec:
    regexp: str
    value_type: ValueType = ValueType.NONE


@dataclass(frozen=True)
class DelimiterSpec:
    prefixes: tuple[str, ...] = ()
    suffixes: tuple[str, ...] = ()

    def __bool__(self):
        return bool(self.prefixes or self.suffixes)


@dataclass(frozen=True)
class EvaluationSpec:
    associativity: Associativity = Associativity.UNSPECIFIED
    priority: int | None = None
    composition: Composition = Composition.UNSPECIFIED
    free_order: bool = False


@dataclass(frozen=True)
class ReferenceSpec:
    id_field: str | None = None

    @property
    def referenceable(self):
        return self.id_field is not None


@dataclass(frozen=True)
class ElementType:
    name: str
    kind: Kind
    supertype: str | None = None
    members: tuple[MemberSpec, ...] = ()
    pattern: PatternSpec | None = None
    delimiters: DelimiterSpec = DelimiterSpec()
    evaluation: EvaluationSpec = EvaluationSpec()
    reference: ReferenceSpec = ReferenceSpec()
    custom: str | None = None

    def member(self, name):
        for m in self.members:
            if m.field_name == name:
                return m
        raise KeyError(f"{self.name} has no member {name!r}")

    def ordered_members(self):
        """Members in concrete-syntax order: explicit positions first claim
        their slot, the rest fill the gaps in declaration order."""
        slots = [None] * len(self.members)
        rest = []
        for m in self.members:
            if m.position is not None and m.position < len(slots) and slots[m.position] is None:
                slots[m.position] = m
            else:
                rest.append(m)
        it = iter(rest)
        return tuple(s if s is not None else next(it) for s in slots)

    @property
    def value_type(self):
        return self.pattern.value_type if self.pattern else ValueType.NONE


@dataclass(frozen=True)
class Model:
    name: str
    elements: tuple[ElementType, ...]
    start: str
    skip: str = DEFAULT_SKIP

    @cached_property
    def by_name(self) -> dict[str, ElementType]:
        return {e.name: e for e in self.elements}

    def __getitem__(self, name) -> ElementType:
        return self.by_name[name]

    def __contains__(self, name):
        return name in self.by_name

    @cached_property
    def _subtypes(self):
        subs = {e.name: [] for e in self.elements}
        for e in self.elements:
            if e.supertype in subs:
                subs[e.supertype].append(e.name)
        return {k: tuple(v) for k, v in subs.items()}

    def subtypes(self, name) -> tuple[str, ...]:
        """Direct subelements, in declaration order."""
        return self._subtypes.get(name, ())

    def ancestors(self, name) -> tuple[str, ...]:
        """Supertype chain, nearest first (stops on cycles)."""
        out, seen = [], {name}
        cur = self.by_name.get(name)
        while cur is not None and cur.supertype and cur.supertype not in seen:
            out.append(cur.supertype)
            seen.add(cur.supertype)
            cur = self.by_name.get(cur.supertype)
        return tuple(out)

    def is_subtype(self, name, of):
        return name == of or of in self.ancestors(name)

    def effective_evaluation(self, name) -> EvaluationSpec:
        """Evaluation constraints with unset entries inherited from supertypes."""
        ev = self.by_name[name].evaluation
        assoc, prio = ev.associativity, ev.priority
        for sup in self.ancestors(name):
            sev = self.by_name[sup].evaluation
            if assoc is Associativity.UNSPECIFIED:
                assoc = sev.associativity
            if prio is None:
                prio = sev.priority
        return replace(ev, associativity=assoc, priority=prio)


# -- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    element: str
    constraint: str
    message: str
    severity: str = "error"


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self):
        return not any(d.severity == "error" for d in self.diagnostics)

    def add(self, element, constraint, message):
        self.diagnostics.append(Diagnostic(element, constraint, message))

    def __len__(self):
        return len(self.diagnostics)

    def __iter__(self):
        return iter(self.diagnostics)


def pattern_problem(regexp):
    """Return a message if `regexp` is unusable as a token pattern."""
    try:
        compiled = regex.compile(regexp, regex.POSIX | regex.V0)
    except (regex.error, TypeError) as exc:
        return f"invalid pattern {regexp!r}: {exc}"
    if compiled.fullmatch("") is not None:
        return f"pattern {regexp!r} matches the empty string"
    return None


def validate_model(model: Model) -> ValidationReport:
    report = ValidationReport()
    names = {}
    for e in model.elements:
        if e.name in names:
            report.add(e.name, "name", f"duplicate element name {e.name!r}")
        names[e.name] = e
    if model.start not in names:
        report.add(model.start, "start", f"start element {model.start!r} is not declared")
    problem = pattern_problem(model.skip)
    if problem:
        report.add(model.name, "skip", problem)

    for e in model.elements:
        _check_element(model, e, names, report)

    _check_supertype_cycles(model, names, report)
    _check_finite(model, names, report)
    return report


def _check_element(model, e, names, report):
    n = e.name
    if e.supertype is not None:
        sup = names.get(e.supertype)
        if sup is None:
            report.add(n, "supertype", f"{n}: unknown supertype {e.supertype!r}")
        elif sup.kind is not Kind.SELECTION:
            report.add(n, "supertype", f"{n}: supertype {e.supertype!r} is not an abstract (selection) element")

    if e.kind is Kind.BASIC:
        if e.pattern is None:
            report.add(n, "pattern", f"{n}: basic element needs exactly one @pattern")
        else:
            problem = pattern_problem(e.pattern.regexp)
            if problem:
                report.add(n, "pattern", f"{n}: {problem}")
        if e.members:
            report.add(n, "members", f"{n}: basic elements have no members")
    else:
        if e.pattern is not None:
            report.add(n, "pattern", f"{n}: only basic elements carry @pattern")
    if e.kind is Kind.SELECTION:
        if e.members:
            report.add(n, "members", f"{n}: abstract elements have no members")
        if not model.subtypes(n):
            report.add(n, "subtypes", f"{n}: abstract element has no subelements")
    if e.kind is Kind.COMPOSITE and not e.members:
        report.add(n, "members", f"{n}: composite element needs at least one member")

    for p in e.delimiters.prefixes + e.delimiters.suffixes:
        problem = pattern_problem(p)
        if problem:
            report.add(n, "delimiter", f"{n}: {problem}")

    ev = e.evaluation
    if ev.free_order and (e.kind is not Kind.COMPOSITE or len(e.members) < 2):
        report.add(n, "freeorder", f"{n}: @freeorder needs a composite with at least two members")
    if ev.priority is not None and not isinstance(ev.priority, int):
        report.add(n, "priority", f"{n}: priority must be an integer")
    if ev.composition is not Composition.UNSPECIFIED:
        ordered = e.ordered_members() if e.kind is Kind.COMPOSITE else ()
        if not ordered or ordered[-1].bounds != Multiplicity(0, 1):
            report.add(n, "composition", f"{n}: @composition needs an optional trailing member")

    if e.custom is not None and not e.custom.isidentifier():
        report.add(n, "constraint", f"{n}: hook name {e.custom!r} is not an identifier")

    seen_fields, positions, ids = set(), set(), []
    for m in e.members:
        where = f"{n}.{m.field_name}"
        if m.field_name in seen_fields:
            report.add(n, "member", f"{where}: duplicate member name")
        seen_fields.add(m.field_name)
        if (m.element_type is None) == (m.literal is None):
            report.add(n, "member", f"{where}: member needs exactly one of element type or token")
        if m.element_type is not None and m.element_type not in names:
            report.add(n, "member", f"{where}: unknown element {m.element_type!r}")
        if m.literal is not None:
            problem = pattern_problem(m.literal)
            if problem:
                report.add(n, "member", f"{where}: {problem}")
            if m.reference_kind is not ReferenceKind.NONE:
                report.add(n, "member", f"{where}: token members cannot be @id or @reference")
        mult = m.multiplicity
        if mult is not None:
            if mult.min < 0 or (mult.max is not None and mult.max < 1):
                report.add(n, "multiplicity", f"{where}: multiplicity bounds out of range")
            elif mult.max is not None and mult.min > mult.max:
                report.add(n, "multiplicity", f"{where}: multiplicity min exceeds max")
            if m.optional and mult != Multiplicity(0, 1):
                report.add(n, "optional", f"{where}: @optional contradicts @multiplicity({mult})")
        if m.separator:
            if m.bounds.max == 1:
                report.add(n, "separator", f"{where}: @separator needs a repeating member")
            for s in m.separator:
                problem = pattern_problem(s)
                if problem:
                    report.add(n, "separator", f"{where}: {problem}")
        if m.position is not None:
            if m.position < 0 or m.position >= len(e.members):
                report.add(n, "position", f"{where}: position {m.position} out of range")
            elif m.position in positions:
                report.add(n, "position", f"{where}: position {m.position} used twice")
            positions.add(m.position)
        if m.is_id:
            ids.append(m)
            target = names.get(m.element_type)
            if target is not None and (target.kind is not Kind.BASIC or target.value_type is not ValueType.TEXT):
                report.add(n, "id", f"{where}: @id member must be a basic element with @value(text)")
            if m.bounds != Multiplicity(1, 1):
                report.add(n, "id", f"{where}: @id member must be mandatory and single")
        if m.is_reference:
            target = names.get(m.element_type)
            if target is not None and not _referenceable(model, names, m.element_type):
                report.add(n, "reference", f"{where}: {m.element_type} has no @id member to reference")
    if len(ids) > 1:
        report.add(n, "id", f"{n}: more than one @id member")
    if e.reference.id_field is not None:
        if not any(m.field_name == e.reference.id_field and m.is_id for m in e.members):
            report.add(n, "id", f"{n}: id field {e.reference.id_field!r} is not an @id member")


def _referenceable(model, names, name):
    """Referenceable types: the element itself or, for selections, all subtypes."""
    e = names.get(name)
    if e is None:
        return False
    if e.reference.referenceable:
        return True
    if e.kind is Kind.SELECTION:
        subs = model.subtypes(name)
        return bool(subs) and all(_referenceable(model, names, s) for s in subs)
    return False


def _check_supertype_cycles(model, names, report):
    for e in model.elements:
        seen, cur = {e.name}, e
        while cur is not None and cur.supertype is not None:
            if cur.supertype in seen:
                report.add(e.name, "supertype", f"{e.name}: cyclic supertype chain")
                break
            seen.add(cur.supertype)
            cur = names.get(cur.supertype)


def reference_token_type(model, name):
    """Element whose token stands in for a reference to `name`."""
    e = model[name]
    if e.reference.referenceable:
        return e.member(e.reference.id_field).element_type
    subs = model.subtypes(name)
    kinds = {reference_token_type(model, s) for s in subs}
    if len(kinds) != 1:
        raise BuilderError(f"subtypes of {name} use different identifier types")
    return kinds.pop()


def _check_finite(model, names, report):
    """Fixpoint over 'can derive a finite sentence'."""
    productive = set()
    changed = True

    def member_ok(m):
        if m.bounds.min == 0 or m.literal is not None:
            return True
        if m.is_reference:
            try:
                return reference_token_type(model, m.element_type) in productive
            except (BuilderError, KeyError):
                return True  # reported elsewhere
        return m.element_type in productive

    while changed:
        changed = False
        for e in model.elements:
            if e.name in productive:
                continue
            if e.kind is Kind.BASIC:
                ok = True
            elif e.kind is Kind.SELECTION:
                ok = any(s in productive for s in model.subtypes(e.name))
            else:
                ok = bool(e.members) and all(member_ok(m) for m in e.members)
            if ok:
                productive.add(e.name)
                changed = True
    for e in model.elements:
        if e.name not in productive and (e.kind is not Kind.SELECTION or model.subtypes(e.name)):
            report.add(e.name, "finite", f"{e.name}: no finite derivation")


# -- builder ---------------------------------------------------------------

ELEMENT_ANNOTATIONS = (
    "pattern", "value", "prefix", "suffix", "associativity", "priority",
    "composition", "freeorder", "constraint", "start",
)
MEMBER_ANNOTATIONS = ("optional", "multiplicity", "separator", "position", "id", "reference")


class ModelBuilder:
    """Incremental construction of a Model.

    >>> b = ModelBuilder("Tiny")
    >>> b.add_element("Expression", "selection")
    >>> b.add_element("Literal", "basic", supertype="Expression")
    >>> b.set_constraint("Literal", "pattern", "[0-9]+")
    >>> b.build().start
    'Expression'

    Member types may name elements declared later; they are checked by
    `build`.  Setting the same constraint twice is an error.
    """

    def __init__(self, name):
        self.name = name
        self._order = []
        self._elements = {}
        self._members = {}
        self._constraints = {}
        self._start = None
        self._skip = None

    def add_element(self, name, kind, supertype=None):
        kind = Kind(kind) if not isinstance(kind, Kind) else kind
        if name in self._elements:
            raise BuilderError(f"element {name!r} declared twice")
        self._order.append(name)
        self._elements[name] = (kind, supertype)
        self._members[name] = []
        self._constraints[name] = {}

    def add_member(self, element, field_name, element_type=None, literal=None):
        self._require(element)
        if any(f == field_name for f, *_ in self._members[element]):
            raise BuilderError(f"member {element}.{field_name} declared twice")
        self._members[element].append((field_name, element_type, literal))
        self._constraints[f"{element}.{field_name}"] = {}

    def set_constraint(self, target, annotation, value=True):
        element, _, member = target.partition(".")
        self._require(element)
        allowed = MEMBER_ANNOTATIONS if member else ELEMENT_ANNOTATIONS
        if annotation not in allowed:
            raise BuilderError(f"@{annotation} does not apply to {target}")
        if member and target not in self._constraints:
            raise BuilderError(f"unknown member {target!r}")
        slot = self._constraints[target]
        if annotation in slot:
            raise ConflictingConstraintError(f"conflicting constraint: @{annotation} set twice on {target}")
        slot[annotation] = value
        if annotation == "start":
            if self._start is not None:
                raise ConflictingConstraintError(
                    f"conflicting constraint: @start on both {self._start} and {element}")
            self._start = element

    def set_skip(self, pattern):
        if self._skip is not None:
            raise ConflictingConstraintError("conflicting constraint: @skip set twice")
        self._skip = pattern

    def _require(self, name):
        if name not in self._elements:
            raise BuilderError(f"unknown element name {name!r}")

    def build(self, validate=True) -> Model:
        for owner, members in self._members.items():
            for fname, etype, _ in members:
                if etype is not None and etype not in self._elements:
                    raise BuilderError(f"unknown element name {etype!r} (member {owner}.{fname})")
        for name, (kind, sup) in self._elements.items():
            if sup is not None and sup not in self._elements:
                raise BuilderError(f"unknown element name {sup!r} (supertype of {name})")
        if not self._order:
            raise BuilderError("a model needs at least one element")
        elements = tuple(self._make_element(n) for n in self._order)
        model = Model(self.name, elements, self._start or self._order[0],
                      self._skip if self._skip is not None else DEFAULT_SKIP)
        if validate:
            report = validate_model(model)
            if not report.ok:
                raise ModelValidationError(report)
        return model

    def _make_element(self, name):
        kind, sup = self._elements[name]
        c = self._constraints[name]
        pattern = None
        if "pattern" in c:
            pattern = PatternSpec(c["pattern"], _enum(ValueType, c.get("value", "none")))
        elif "value" in c:
            raise BuilderError(f"{name}: @value needs @pattern")
        members, id_field = [], None
        for fname, etype, literal in self._members[name]:
            mc = self._constraints[f"{name}.{fname}"]
            ref = ReferenceKind.NONE
            if mc.get("id") and mc.get("reference"):
                raise ConflictingConstraintError(f"conflicting constraint: {name}.{fname} is both @id and @reference")
            if mc.get("id"):
                ref = ReferenceKind.ID
                id_field = fname
            elif mc.get("reference"):
                ref = ReferenceKind.REFERENCE
            mult = mc.get("multiplicity")
            if mult is not None and not isinstance(mult, Multiplicity):
                mult = Multiplicity(*mult)
            members.append(MemberSpec(
                field_name=fname, element_type=etype, literal=literal,
                optional=bool(mc.get("optional", False)), multiplicity=mult,
                separator=_strings(mc.get("separator", ())), position=mc.get("position"),
                reference_kind=ref))
        return ElementType(
            name=name, kind=kind, supertype=sup, members=tuple(members), pattern=pattern,
            delimiters=DelimiterSpec(_strings(c.get("prefix", ())), _strings(c.get("suffix", ()))),
            evaluation=EvaluationSpec(
                associativity=_enum(Associativity, c.get("associativity", "unspecified")),
                priority=c.get("priority"),
                composition=_enum(Composition, c.get("composition", "unspecified")),
                free_order=bool(c.get("freeorder", False))),
            reference=ReferenceSpec(id_field),
            custom=c.get("constraint"))


def _enum(cls, value):
    return value if isinstance(value, cls) else cls(value)


def _strings(value):
    if isinstance(value, str):
        return (value,)
    return tuple(value)
