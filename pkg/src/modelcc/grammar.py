"""Derivation of a context-free grammar from a model.

* a composite element yields ``C ::= prefixes members suffixes``;
* a selection with k subelements yields k unit productions;
* a repeating member gets its own list nonterminal, ``L ::= E L`` (or
  ``L ::= E sep L``) plus a base case;
* an optional member doubles the productions of its composite;
* a basic element is a terminal; its prefixes/suffixes become adjacent
  terminals wherever it is used.

Left recursion is left alone; the chart parser handles it directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import GrammarError
from .lexer import TokenClass
from .model import Kind, Model, Multiplicity, reference_token_type

MAX_FREE_ORDER = 6
MAX_UNROLL = 64

EPSILON = "ε"
ITEM = "[item]"
REST = "[rest]"
PASS = "[pass]"


@dataclass(frozen=True, order=True)
class Origin:
    element: str
    rule: str          # composite | selection | list
    member: str = ""
    index: int = 0

    def __str__(self):
        tail = f".{self.member}" if self.member else ""
        return f"{self.rule}:{self.element}{tail}#{self.index}"


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[str, ...]
    origin: Origin
    bindings: tuple[tuple[int, str], ...] = ()
    omitted: frozenset = frozenset()

    def binding(self, index):
        for i, name in self.bindings:
            if i == index:
                return name
        return None

    def binding_index(self, name):
        for i, n in self.bindings:
            if n == name:
                return i
        return None


@dataclass(frozen=True)
class ListInfo:
    owner: str
    member: str
    item: str | None      # element type of the items; None for token members


@dataclass
class Grammar:
    nonterminals: tuple[str, ...]
    terminals: dict[str, TokenClass]
    productions: list[Production]
    start: str
    skip: str
    lists: dict[str, ListInfo] = field(default_factory=dict)

    def __post_init__(self):
        self.by_lhs = {}
        for i, p in enumerate(self.productions):
            self.by_lhs.setdefault(p.lhs, []).append(i)
        self.index = {id(p): i for i, p in enumerate(self.productions)}
        self.nullable = _nullable(self)

    def is_terminal(self, symbol):
        return symbol in self.terminals

    def productions_for(self, symbol):
        return [self.productions[i] for i in self.by_lhs.get(symbol, ())]


def fixed_terminal_name(regexp):
    return '"' + regexp + '"'


def render_symbol(grammar, symbol):
    t = grammar.terminals.get(symbol)
    if t is not None and t.fixed_text:
        return symbol
    return f"<{symbol}>"


class _Generator:
    def __init__(self, model: Model):
        self.model = model
        self.terminals = {}
        self.productions = []
        self.nonterminals = []
        self.lists = {}
        self.taken = {e.name for e in model.elements}

    def fixed(self, regexp):
        name = fixed_terminal_name(regexp)
        if name not in self.terminals:
            self.terminals[name] = TokenClass(name, regexp, fixed_text=True)
        return name

    def expand(self, element):
        """Symbols standing for one occurrence of `element`, and the index of
        the symbol carrying it."""
        e = self.model[element]
        if e.kind is not Kind.BASIC:
            return [element], 0
        pre = [self.fixed(p) for p in e.delimiters.prefixes]
        suf = [self.fixed(s) for s in e.delimiters.suffixes]
        return pre + [element] + suf, len(pre)

    def member_core(self, owner, m):
        if m.literal is not None:
            return [self.fixed(m.literal)], 0
        if m.is_reference:
            return self.expand(reference_token_type(self.model, m.element_type))
        return self.expand(m.element_type)

    def generate(self):
        m = self.model
        for e in m.elements:
            if e.kind is Kind.BASIC:
                self.terminals[e.name] = TokenClass(e.name, e.pattern.regexp, origin_element=e.name)
        for e in m.elements:
            if e.kind is Kind.SELECTION:
                self.nonterminals.append(e.name)
                for k, sub in enumerate(m.subtypes(e.name)):
                    rhs, core = self.expand(sub)
                    self.productions.append(Production(
                        e.name, tuple(rhs), Origin(e.name, "selection", sub, k), ((core, PASS),)))
            elif e.kind is Kind.COMPOSITE:
                self.nonterminals.append(e.name)
                self.composite(e)
        return Grammar(tuple(self.nonterminals), self.terminals, self.productions,
                       m.start, m.skip, self.lists)

    def composite(self, e):
        shapes = []  # (member, symbols, core index, optional?)
        for m in e.ordered_members():
            b = m.bounds
            if b == Multiplicity(1, 1):
                syms, core = self.member_core(e.name, m)
                shapes.append((m, syms, core, False))
            elif b == Multiplicity(0, 1):
                syms, core = self.member_core(e.name, m)
                shapes.append((m, syms, core, True))
            else:
                lst, optional = self.list_symbol(e.name, m)
                shapes.append((m, [lst], 0, optional))
        optional_idx = [i for i, s in enumerate(shapes) if s[3]]
        pre = [self.fixed(p) for p in e.delimiters.prefixes]
        suf = [self.fixed(s) for s in e.delimiters.suffixes]
        variant = 0
        for absent in itertools.product((False, True), repeat=len(optional_idx)):
            omitted = {optional_idx[i] for i, a in enumerate(absent) if a}
            present = [s for i, s in enumerate(shapes) if i not in omitted]
            orders = [present]
            if e.evaluation.free_order:
                if len(shapes) > MAX_FREE_ORDER:
                    raise GrammarError(
                        f"{e.name}: @freeorder over {len(shapes)} members exceeds the bound of {MAX_FREE_ORDER}")
                orders = list(itertools.permutations(present))
            for order in orders:
                rhs, bindings = list(pre), []
                for m, syms, core, _ in order:
                    bindings.append((len(rhs) + core, m.field_name))
                    rhs.extend(syms)
                rhs.extend(suf)
                self.productions.append(Production(
                    e.name, tuple(rhs), Origin(e.name, "composite", "", variant),
                    tuple(bindings), frozenset(shapes[i][0].field_name for i in omitted)))
                variant += 1

    def list_symbol(self, owner, m):
        """Create the list nonterminal for a repeating member.

        Returns (symbol, optional).  An unbounded separated list that may be
        empty is realised as an optional non-empty list, since the plain
        ``L ::= E sep L | ε`` form would accept a trailing separator.
        """
        b = m.bounds
        base_name = (m.element_type or "Token") + "List"
        name, k = base_name, 2
        while name in self.taken:
            name, k = f"{base_name}{k}", k + 1
        self.taken.add(name)
        self.nonterminals.append(name)
        self.lists[name] = ListInfo(owner, m.field_name, m.element_type)
        item, core = self.member_core(owner, m)
        sep = [self.fixed(s) for s in m.separator]
        org = lambda i: Origin(owner, "list", m.field_name, i)  # noqa: E731

        def seq(n):
            rhs, bindings = [], []
            for j in range(n):
                if j:
                    rhs.extend(sep)
                bindings.append((len(rhs) + core, ITEM))
                rhs.extend(item)
            return rhs, bindings

        if b.max is None:
            optional = b.min == 0 and bool(sep)
            lo = 1 if optional else b.min
            rec = item + sep + [name]
            self.productions.append(Production(
                name, tuple(rec), org(0), ((core, ITEM), (len(rec) - 1, REST))))
            rhs, bindings = seq(lo)
            self.productions.append(Production(name, tuple(rhs), org(1), tuple(bindings)))
            return name, optional
        if b.max - b.min > MAX_UNROLL:
            raise GrammarError(
                f"{owner}.{m.field_name}: multiplicity({b}) unrolls past the bound of {MAX_UNROLL}")
        for i, n in enumerate(range(b.min, b.max + 1)):
            rhs, bindings = seq(n)
            self.productions.append(Production(name, tuple(rhs), org(i), tuple(bindings)))
        return name, False


def generate_grammar(model: Model) -> Grammar:
    grammar = _Generator(model).generate()
    _reject_cycles(grammar)
    return grammar


def _nullable(grammar):
    nullable = set()
    changed = True
    while changed:
        changed = False
        for p in grammar.productions:
            if p.lhs not in nullable and all(s in nullable for s in p.rhs):
                nullable.add(p.lhs)
                changed = True
    return nullable


def _reject_cycles(grammar):
    """Reject A =>+ A derivations (unit chains, possibly through nullables)."""
    edges = {}
    for p in grammar.productions:
        for i, s in enumerate(p.rhs):
            if s in grammar.terminals:
                continue
            others = p.rhs[:i] + p.rhs[i + 1:]
            if all(o in grammar.nullable for o in others):
                edges.setdefault(p.lhs, set()).add(s)
    state = {}
    for root in sorted(edges):
        if root in state:
            continue
        stack = [(root, iter(sorted(edges.get(root, ()))))]
        state[root] = 1
        path = [root]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
                continue
            if state.get(nxt) == 1:
                cyc = path[path.index(nxt):] + [nxt]
                raise GrammarError("cyclic derivation: " + " => ".join(cyc))
            if nxt not in state:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(sorted(edges.get(nxt, ())))))


def dump_grammar(grammar: Grammar) -> str:
    lines = []
    for p in sorted(grammar.productions, key=lambda p: (p.lhs, p.origin)):
        rhs = " ".join(render_symbol(grammar, s) for s in p.rhs) if p.rhs else EPSILON
        lines.append(f"<{p.lhs}> ::= {rhs}")
    return "\n".join(lines) + "\n"
