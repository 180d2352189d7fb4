"""From a parse tree to an abstract syntax graph.

`instantiate` turns a tree into element instances, `resolve_references`
links @reference sites to the instances owning matching @id values, and
`apply_semantics` folds the resulting graph with user hooks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import (
    BuilderError, ConversionError, CyclicEvaluationError, DuplicateIdError, MissingHookError,
    UnresolvedReferenceError,
)
from .grammar import ITEM, PASS, REST
from .lexer import TokenCandidate
from .model import Kind, Model, Multiplicity, ValueType
from .parser import ParseTree

PREDEFINED = "predefined"
VALUE = "value"


class ElementInstance:
    """An instance of a model element.  Identity-compared; may sit in cycles."""

    __slots__ = ("type", "fields", "node_id", "span")

    def __init__(self, type, fields=None, node_id=None, span=None):
        self.type = type
        self.fields = fields if fields is not None else {}
        self.node_id = node_id
        self.span = span

    @property
    def type_name(self):
        return self.type.name

    def __getitem__(self, name):
        return self.fields[name]

    def __repr__(self):
        return f"<{self.type.name} {self.node_id}>"


@dataclass(eq=False)
class Reference:
    target_type: str
    id_text: str
    span: tuple | None
    target: ElementInstance | None = None

    def __repr__(self):
        return f"Reference({self.target_type} {self.id_text!r})"


def convert_value(value_type, text, span):
    if value_type is ValueType.NUMBER:
        try:
            v = float(text)
        except ValueError:
            raise ConversionError(f"cannot read {text!r} as a number", span) from None
        if math.isinf(v) and "inf" not in text.lower():
            raise ConversionError(f"number {text!r} overflows", span)
        return v
    if value_type is ValueType.BOOLEAN:
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConversionError(f"cannot read {text!r} as a boolean", span)
    return text


def _leaf_instance(model, cand: TokenCandidate):
    e = model[cand.cls.origin_element]
    span = (cand.start, cand.end)
    fields = {}
    if e.value_type is not ValueType.NONE:
        fields[VALUE] = convert_value(e.value_type, cand.text, span)
    return ElementInstance(e, fields, span=span)


def instantiate(tree: ParseTree, model: Model) -> ElementInstance:
    """Instances for every element node of `tree`; returns the root instance.

    Lists are flattened, delimiters dropped, absent optional members become
    None (or [] for repeating members).  Reference sites hold unresolved
    `Reference` objects.
    """
    values = {}

    def value_of(child, member=None):
        if isinstance(child, ParseTree):
            return values[id(child)]
        if member is not None:
            if member.literal is not None:
                return child.text
            if member.is_reference:
                return Reference(member.element_type, child.text, (child.start, child.end))
        return _leaf_instance(model, child)

    for t in _postorder(tree):
        p = t.production
        rule = p.origin.rule
        if rule == "selection":
            values[id(t)] = value_of(t.children[p.binding_index(PASS)])
        elif rule == "list":
            owner = model[p.origin.element]
            member = owner.member(p.origin.member)
            items = []
            rest = []
            for i, name in p.bindings:
                if name == ITEM:
                    items.append(value_of(t.children[i], member))
                elif name == REST:
                    rest = values[id(t.children[i])]
            values[id(t)] = items + rest
        else:
            e = model[p.origin.element]
            bound = {name: i for i, name in p.bindings}
            fields = {}
            for m in e.members:
                i = bound.get(m.field_name)
                if i is None:
                    fields[m.field_name] = [] if m.bounds.max != 1 else None
                elif m.bounds.max != 1:
                    fields[m.field_name] = values[id(t.children[i])]
                else:
                    fields[m.field_name] = value_of(t.children[i], m)
            values[id(t)] = ElementInstance(e, fields, span=(t.start, t.end))
    root = values[id(tree)]
    if isinstance(root, TokenCandidate):
        root = _leaf_instance(model, root)
    assign_ids(root, "n")
    return root


def _postorder(tree):
    out, stack = [], [(tree, False)]
    while stack:
        t, done = stack.pop()
        if done:
            out.append(t)
            continue
        stack.append((t, True))
        for c in t.children:
            if isinstance(c, ParseTree):
                stack.append((c, False))
    return out


def children_of(value):
    """Instances and references directly held in a field value."""
    if isinstance(value, (ElementInstance, Reference)):
        return [value]
    if isinstance(value, list):
        return [v for v in value if isinstance(v, (ElementInstance, Reference))]
    return []


def owned_instances(root):
    """Preorder over the containment tree (references are not followed)."""
    out, stack = [], [root]
    while stack:
        inst = stack.pop()
        out.append(inst)
        kids = []
        for v in inst.fields.values():
            kids.extend(c for c in children_of(v) if isinstance(c, ElementInstance))
        stack.extend(reversed(kids))
    return out


def assign_ids(root, prefix, start=0):
    n = start
    for inst in owned_instances(root):
        inst.node_id = f"{prefix}{n}"
        n += 1
    return n


def id_text(inst: ElementInstance):
    """The identifier value of a referenceable instance."""
    fname = inst.type.reference.id_field
    if fname is None:
        return None
    v = inst.fields.get(fname)
    if isinstance(v, ElementInstance):
        v = v.fields.get(VALUE)
    return v


class SymbolTable:
    """Referenceable instances keyed by (element type, id text)."""

    def __init__(self, model: Model):
        self.model = model
        self.entries = {}
        self.predefined = []
        self._next = 0

    def copy(self):
        t = SymbolTable(self.model)
        t.entries = dict(self.entries)
        t.predefined = list(self.predefined)
        t._next = self._next
        return t

    def register(self, inst: ElementInstance, predefined=False):
        key_text = id_text(inst)
        if key_text is None:
            raise BuilderError(f"{inst.type.name} has no @id value to register")
        key = (inst.type.name, key_text)
        if key in self.entries:
            raise DuplicateIdError(inst.type.name, key_text)
        self.entries[key] = inst
        if predefined:
            self.predefined.append(inst)
            self._next = assign_ids(inst, "p", self._next)
            for sub in owned_instances(inst):
                sub.span = PREDEFINED
        return self

    def lookup(self, expected, text):
        hits = [inst for (name, t), inst in self.entries.items()
                if t == text and self.model.is_subtype(name, expected)]
        if len(hits) > 1:
            raise DuplicateIdError(expected, text)
        return hits[0] if hits else None


def register_instance(table: SymbolTable, inst: ElementInstance) -> SymbolTable:
    return table.register(inst, predefined=True)


def new_instance(model: Model, type_name: str, **fields) -> ElementInstance:
    """Build an instance by hand, e.g. ``new_instance(m, "Constant", name="pi", value=3.14)``.

    Scalars given for members typed by a basic element are wrapped in an
    instance of that element.
    """
    e = model[type_name]
    if e.kind is Kind.SELECTION:
        raise BuilderError(f"{type_name} is abstract")
    if e.kind is Kind.BASIC:
        unknown = set(fields) - {VALUE}
        if unknown:
            raise BuilderError(f"{type_name} has no members {sorted(unknown)}")
        return ElementInstance(e, dict(fields))
    out = {}
    for m in e.members:
        v = fields.pop(m.field_name, None)
        if m.bounds.max != 1:
            v = [_wrap(model, m, x) for x in (v or [])]
        elif v is not None:
            v = _wrap(model, m, v)
        elif m.bounds.min > 0:
            raise BuilderError(f"{type_name}.{m.field_name} is mandatory")
        out[m.field_name] = v
    if fields:
        raise BuilderError(f"{type_name} has no members {sorted(fields)}")
    return ElementInstance(e, out)


def _wrap(model, m, v):
    if isinstance(v, ElementInstance) or m.literal is not None:
        return v
    target = model[m.element_type]
    if target.kind is Kind.BASIC:
        return ElementInstance(target, {VALUE: v})
    raise BuilderError(f"{m.field_name} needs an instance of {m.element_type}")


@dataclass
class AbstractSyntaxGraph:
    root: ElementInstance
    instances: list = field(default_factory=list)
    resolved: dict = field(default_factory=dict)   # (node id, field, list index or None) -> node id

    def by_id(self, node_id):
        for inst in self.instances:
            if inst.node_id == node_id:
                return inst
        raise KeyError(node_id)

    def to_dict(self):
        nodes = {}
        for inst in self.instances:
            nodes[inst.node_id] = {
                "type": inst.type.name,
                "span": inst.span if inst.span == PREDEFINED else list(inst.span or (0, 0)),
                "fields": {name: _jsonable(v) for name, v in inst.fields.items()},
            }
        return {"root": self.root.node_id, "nodes": nodes}

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)


def _jsonable(v):
    if isinstance(v, ElementInstance):
        return {"ref": v.node_id}
    if isinstance(v, Reference):
        return {"ref": v.target.node_id if v.target is not None else None}
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, float):
        return format_number(v)
    return v


def format_number(x):
    """Integral floats as ints; everything else unchanged (repr is shortest round-trip)."""
    if isinstance(x, float) and math.isfinite(x) and x == int(x) and abs(x) < 2 ** 53:
        return int(x)
    return x


def resolve_references(root: ElementInstance, table: SymbolTable) -> AbstractSyntaxGraph:
    """Bind every reference site; earlier and later declarations are equivalent."""
    owned = owned_instances(root)
    for inst in owned:                       # pass 1: declarations
        if inst.type.reference.referenceable:
            table.register(inst)
    resolved = {}
    for inst in owned:                       # pass 2: uses
        for name, v in inst.fields.items():
            seq = v if isinstance(v, list) else [v]
            for k, r in enumerate(seq):
                if not isinstance(r, Reference):
                    continue
                target = table.lookup(r.target_type, r.id_text)
                if target is None:
                    raise UnresolvedReferenceError(r.target_type, r.id_text, r.span)
                r.target = target
                resolved[(inst.node_id, name, k if isinstance(v, list) else None)] = target.node_id
    instances = list(owned)
    seen = {id(i) for i in instances}
    frontier = [r.target for i in owned for v in i.fields.values() for r in children_of(v)
                if isinstance(r, Reference)]
    while frontier:   # predefined instances reached through references
        inst = frontier.pop()
        if id(inst) in seen:
            continue
        for sub in owned_instances(inst):
            if id(sub) not in seen:
                seen.add(id(sub))
                instances.append(sub)
                for v in sub.fields.values():
                    frontier.extend(r.target for r in children_of(v) if isinstance(r, Reference))
    instances.sort(key=_id_order)
    return AbstractSyntaxGraph(root, instances, resolved)


def _id_order(inst):
    nid = inst.node_id or "z"
    return (nid[0] != "n", nid[0], int(nid[1:]) if nid[1:].isdigit() else 0)


def _deps(value):
    out = []
    for c in children_of(value):
        if isinstance(c, Reference):
            if c.target is not None:
                out.append(c.target)
        else:
            out.append(c)
    return out


def apply_semantics(graph, hooks, model: Model | None = None):
    """Bottom-up fold of the graph rooted at `graph` (an AbstractSyntaxGraph or
    an instance).

    ``hooks[type_name](instance, values)`` receives the folded values of the
    instance's fields (references replaced by their targets' values).  A type
    without its own hook uses its nearest supertype's.
    """
    root = graph.root if isinstance(graph, AbstractSyntaxGraph) else graph
    done = {}
    state = {}
    stack = [(root, False)]
    while stack:
        inst, expanded = stack.pop()
        key = id(inst)
        if key in done:
            continue
        if not expanded:
            if state.get(key) == "active":
                raise CyclicEvaluationError(f"cyclic dependency through {inst.type.name} {inst.node_id}")
            state[key] = "active"
            stack.append((inst, True))
            for v in inst.fields.values():
                for dep in _deps(v):
                    if id(dep) not in done:
                        if state.get(id(dep)) == "active":
                            raise CyclicEvaluationError(
                                f"cyclic dependency through {dep.type.name} {dep.node_id}")
                        stack.append((dep, False))
            continue
        hook = _find_hook(inst, hooks, model)
        values = {name: _fold_value(v, done) for name, v in inst.fields.items()}
        done[key] = hook(inst, values)
        state[key] = "done"
    return done[id(root)]


def _fold_value(v, done):
    if isinstance(v, ElementInstance):
        return done[id(v)]
    if isinstance(v, Reference):
        return done[id(v.target)]
    if isinstance(v, list):
        return [_fold_value(x, done) for x in v]
    return v


def _find_hook(inst, hooks, model):
    name = inst.type.name
    if name in hooks:
        return hooks[name]
    chain = model.ancestors(name) if model is not None else _chain(inst)
    for sup in chain:
        if sup in hooks:
            return hooks[sup]
    raise MissingHookError(f"no semantic hook for {name}")


def _chain(inst):
    # without a model only the direct supertype name is known
    return (inst.type.supertype,) if inst.type.supertype else ()
