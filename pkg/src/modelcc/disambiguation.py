"""Evaluation-order constraints: priority, associativity, composition, custom hooks.

Every constituent is summarised by a small signature:

``op``
    operator data of an undelimited operator composite (``kind="op"``) or of
    an operator token (``kind="tok"``): ``(kind, priority, scope, assoc)``.
    Selection unit productions pass the child's ``op`` through; delimited
    constituents (``( ... )``) have none, which exempts them from the rules.
``open`` / ``closed``
    composites with a trailing optional member found along the right edge,
    in their short (member omitted) or full form respectively.
``left``
    element names found along the left edge, restricted to the types that
    can fill some trailing optional member.

Rules, checked whenever a child is appended to a partial derivation:

* priority: an edge child carrying an operator of looser priority (larger
  number) than its parent's operator is rejected;
* associativity: on equal priority, ``ltr`` rejects a right-edge operator
  child, ``rtl`` a left-edge one, ``non`` both;
* eager composition: a short ``C`` directly followed by something that
  starts with the type of ``C``'s trailing member is rejected (that member
  should have been attached to the nearer ``C``);
* lazy composition: a short ``C`` whose right edge ends in a full ``C`` is
  rejected (the member should have gone to the outer one).

Priorities only compare within a scope: an operator's own element plus its
selection ancestors; two operators interact when their scopes intersect.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import AmbiguityError, MissingHookError, OverConstrainedError
from .grammar import PASS, Grammar
from .lexer import TokenCandidate
from .model import Associativity, Composition, Kind, Model
from .parser import Derivation, ForestNode, ParseForest, enumerate_trees, postorder_nodes

PRIORITY = "priority"
ASSOCIATIVITY = "associativity"
COMPOSITION = "composition"
CUSTOM = "custom"

_EMPTY = frozenset()


class Sig(NamedTuple):
    op: tuple | None
    open: frozenset
    closed: frozenset
    left: frozenset
    empty: bool


@dataclass(frozen=True)
class Candidate:
    """What a custom hook sees: the element being built and its text."""
    element: str
    text: str
    span: tuple
    fields: dict


@dataclass
class _Plan:
    n: int
    unit_pass: bool
    opcomp: bool
    own: tuple | None          # (priority, scope, assoc) declared on the composite itself
    marks: frozenset
    eager_mark: str | None
    lazy_mark: str | None
    lazy_short: str | None
    element: str
    custom: str | None
    bindings: dict


def _scope(model, name):
    return frozenset((name,) + tuple(a for a in model.ancestors(name)
                                      if model[a].kind is Kind.SELECTION))


class ConstraintSet:
    """Constraint data derived from a model for one grammar.

    `predicates` maps @constraint hook names to ``fn(Candidate) -> bool``.
    """

    def __init__(self, model: Model, grammar: Grammar, predicates=None):
        self.model = model
        self.grammar = grammar
        self.predicates = dict(predicates or {})
        for e in model.elements:
            if e.custom is not None and e.custom not in self.predicates:
                raise MissingHookError(f"constraint hook {e.custom!r} (on {e.name}) is not registered")
        self.eager_target = {}
        self.lazy = set()
        for e in model.elements:
            comp = e.evaluation.composition
            if comp is Composition.UNSPECIFIED or e.kind is not Kind.COMPOSITE:
                continue
            last = e.ordered_members()[-1]
            target = last.element_type if last.literal is None else '"' + last.literal + '"'
            if comp is Composition.EAGER:
                self.eager_target[e.name] = target
            else:
                self.lazy.add(e.name)
        self.targets = frozenset(self.eager_target.values())
        self._sigs = {}
        self.table = []     # signature id -> Sig; the chart works with the ids
        self._leaf = {}
        self._viable = {}
        self._complete = {}
        self.plans = [self._plan(p) for p in grammar.productions]

    # -- setup ---------------------------------------------------------------

    def _op_of(self, name):
        ev = self.model.effective_evaluation(name)
        if ev.priority is None and ev.associativity is Associativity.UNSPECIFIED:
            return None
        return (ev.priority, _scope(self.model, name), ev.associativity)

    def _plan(self, p):
        model = self.model
        el = p.origin.element
        e = model.by_name.get(el)
        marks = frozenset(x for x in (p.lhs,) if x in self.targets)
        unit = p.origin.rule == "selection" and len(p.rhs) == 1 and p.bindings == ((0, PASS),)
        opcomp = own = None
        eager_mark = lazy_mark = lazy_short = None
        if p.origin.rule == "composite" and e is not None:
            opcomp = not e.delimiters
            own = self._op_of(el)
            comp = e.evaluation.composition
            trailing = e.ordered_members()[-1].field_name
            short = trailing in p.omitted
            if comp is Composition.EAGER and short:
                eager_mark = el
            elif comp is Composition.LAZY:
                if short:
                    lazy_short = el
                else:
                    lazy_mark = el
        custom = None
        if e is not None and e.custom is not None and p.origin.rule in ("composite", "selection"):
            custom = e.custom
        return _Plan(len(p.rhs), unit, bool(opcomp), own, marks, eager_mark, lazy_mark,
                     lazy_short, el, custom, dict(p.bindings))

    def _sig(self, *fields):
        s = Sig(*fields)
        got = self._sigs.get(s)
        if got is None:
            got = self._sigs[s] = len(self.table)
            self.table.append(s)
        return got

    # -- signatures ------------------------------------------------------------

    def leaf_sig(self, cand: TokenCandidate) -> int:
        cls = cand.cls
        got = self._leaf.get(cls.id)
        if got is None:
            op = None
            if cls.origin_element is not None:
                o = self._op_of(cls.origin_element)
                if o is not None:
                    op = ("tok",) + o
            left = frozenset(x for x in (cls.id,) if x in self.targets)
            got = self._leaf[cls.id] = self._sig(op, _EMPTY, _EMPTY, left, False)
        return got

    def _parent_op(self, plan, sigs):
        """Operator data of a composite, or None when not (yet) known."""
        own = plan.own
        if own is not None and own[0] is not None and own[2] is not Associativity.UNSPECIFIED:
            return own
        tok = None
        for s in sigs:
            if s.op is not None and s.op[0] == "tok":
                tok = s.op
                break
        if own is None:
            return tok[1:] if tok else None
        if tok is None:
            return own
        prio = own[0] if own[0] is not None else tok[1]
        scope = own[1] if own[0] is not None else tok[2]
        assoc = own[2] if own[2] is not Associativity.UNSPECIFIED else tok[3]
        return (prio, scope, assoc)

    @staticmethod
    def _edge_rule(parent, child, side):
        """Rule name violated by operator `child` on `side` of `parent`."""
        p, pscope, assoc = parent
        _, q, cscope, _ = child
        if not (pscope & cscope):
            return None
        if p is not None and q is not None and q > p:
            return PRIORITY
        if p == q:
            if assoc is Associativity.NON_ASSOCIATIVE:
                return ASSOCIATIVITY
            if assoc is Associativity.LEFT_TO_RIGHT and side == "right":
                return ASSOCIATIVITY
            if assoc is Associativity.RIGHT_TO_LEFT and side == "left":
                return ASSOCIATIVITY
        return None

    def viable(self, prod, sigs):
        """None if the partial derivation `sigs` may continue, else the rule it breaks."""
        key = (prod, sigs)
        got = self._viable.get(key, 0)
        if got != 0:
            return got
        got = self._check(self.plans[prod], tuple(self.table[i] for i in sigs))
        self._viable[key] = got
        return got

    def _check(self, plan, sigs):
        k = len(sigs)
        if plan.opcomp:
            parent = self._parent_op(plan, sigs)
            if parent is not None:
                first = sigs[0].op
                if first is not None and first[0] == "op":
                    r = self._edge_rule(parent, first, "left")
                    if r:
                        return r
                if k == plan.n and k > 1:
                    last = sigs[-1].op
                    if last is not None and last[0] == "op":
                        r = self._edge_rule(parent, last, "right")
                        if r:
                            return r
        if self.eager_target and k > 1:
            new = sigs[-1]
            if not new.empty:
                j = k - 2
                while j >= 0 and sigs[j].empty:
                    j -= 1
                if j >= 0:
                    for c in sigs[j].open:
                        if self.eager_target[c] in new.left:
                            return COMPOSITION
        if plan.lazy_short is not None and k == plan.n:
            right = _right_edge(sigs)
            if right is not None and plan.lazy_short in right.closed:
                return COMPOSITION
        return None

    def complete(self, prod, sigs):
        """(signature, None) for a finished derivation, or (None, rule)."""
        key = (prod, sigs)
        got = self._complete.get(key)
        if got is not None:
            return got
        plan = self.plans[prod]
        sigs = tuple(self.table[i] for i in sigs)
        rule = self._check(plan, sigs) if plan.n == 0 else None
        if rule is not None:
            got = (None, rule)
        else:
            op = None
            if plan.unit_pass:
                op = sigs[0].op
            elif plan.opcomp:
                parent = self._parent_op(plan, sigs)
                if parent is not None:
                    op = ("op",) + tuple(parent)
            right = _right_edge(sigs)
            first = next((s for s in sigs if not s.empty), None)
            opn = right.open if right else _EMPTY
            closed = right.closed if right else _EMPTY
            if plan.eager_mark:
                opn = opn | {plan.eager_mark}
            if plan.lazy_mark:
                closed = closed | {plan.lazy_mark}
            left = plan.marks | (first.left if first else _EMPTY)
            got = (self._sig(op, frozenset(opn), frozenset(closed), left, first is None), None)
        self._complete[key] = got
        return got

    # -- custom hooks ----------------------------------------------------------

    def leaf_ok(self, cand, text):
        el = cand.cls.origin_element
        if el is None:
            return True
        hook = self.model[el].custom
        if hook is None:
            return True
        return bool(self.predicates[hook](Candidate(el, cand.text, (cand.start, cand.end), {"value": cand.text})))

    def derivation_ok(self, production, children, text):
        plan = self.plans[self.grammar.index[id(production)]]
        if plan.custom is None:
            return True
        spans = [_span(c) for c in children]
        nonempty = [s for s in spans if s[1] > s[0]]
        start = nonempty[0][0] if nonempty else (spans[0][0] if spans else 0)
        end = max((s[1] for s in nonempty), default=start)
        fields = {}
        for i, name in plan.bindings.items():
            s, e = spans[i]
            fields[name] = text[s:e]
        e = self.model[plan.element]
        for m in e.members:
            fields.setdefault(m.field_name, None)
        cand = Candidate(plan.element, text[start:end], (start, end), fields)
        return bool(self.predicates[plan.custom](cand))


def _span(child):
    if isinstance(child, ForestNode):
        return (child.start, child.text_end)
    return (child.start, child.end)


def _right_edge(sigs):
    for s in reversed(sigs):
        if not s.empty:
            return s
    return None


def filter_forest(forest: ParseForest, constraints: ConstraintSet) -> ParseForest:
    """Apply all constraint rules to an unfiltered forest.

    Nodes are split by signature bottom-up, exactly as the inline filter does
    during parsing, so both routes keep the same trees.
    """
    variants = {}   # id(original node) -> list of ForestNode (one per signature)
    text = forest.graph.text
    last_rule = None
    leaf_cache = {}
    cs = constraints
    for node in postorder_nodes(forest.root):
        by_sig = {}
        for d in node.derivations:
            pi = forest.grammar.index[id(d.production)]
            partial = [((), ())]
            for ch in d.children:
                if isinstance(ch, ForestNode):
                    opts = variants.get(id(ch), ())
                else:
                    ok = leaf_cache.get(id(ch))
                    if ok is None:
                        ok = leaf_cache[id(ch)] = cs.leaf_ok(ch, text)
                    opts = [(cs.leaf_sig(ch), ch)] if ok else []
                    if not ok:
                        last_rule = CUSTOM
                nxt = []
                for sigs, kids in partial:
                    for sig, v in opts:
                        s2 = sigs + (sig,)
                        rule = cs.viable(pi, s2)
                        if rule is not None:
                            last_rule = rule
                            continue
                        nxt.append((s2, kids + (v,)))
                partial = nxt
            for sigs, kids in partial:
                sig, rule = cs.complete(pi, sigs)
                if rule is not None:
                    last_rule = rule
                    continue
                if not cs.derivation_ok(d.production, kids, text):
                    last_rule = CUSTOM
                    continue
                v = by_sig.get(sig)
                if v is None:
                    v = by_sig[sig] = ForestNode(node.symbol, node.start, node.end, cs.table[sig], [],
                                                 node.text_end)
                v.derivations.append(Derivation(d.production, kids))
        variants[id(node)] = list(by_sig.items())
    roots = [v for _, v in variants.get(id(forest.root), ())]
    if not roots:
        raise OverConstrainedError(last_rule or "evaluation order")
    if len(roots) == 1:
        root = roots[0]
    else:
        root = ForestNode(forest.root.symbol, forest.root.start, forest.root.end, None,
                          [d for r in roots for d in r.derivations], forest.root.text_end)
    nodes = {}
    for vs in variants.values():
        for _, v in vs:
            nodes[(v.symbol, v.start, v.end, v.sig)] = v
    return ParseForest(root, nodes, forest.graph, forest.grammar)


def unique_tree(forest: ParseForest):
    """The only tree of `forest`; AmbiguityError when there are several."""
    count = forest.count_trees()
    if count == 1:
        return enumerate_trees(forest, 1)[0][0]
    trees = enumerate_trees(forest, 2)[0] if count else []
    raise AmbiguityError(count, trees)
