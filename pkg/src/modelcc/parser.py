"""Earley chart parsing over a token graph, producing a shared packed forest.

Scanning follows token-graph edges instead of a flat token list, so every
tokenization path is explored at once.  Completed constituents are interned
by ``(symbol, start, end, signature)``; without constraints the signature is
always ``None`` and a node is identified by symbol and span alone.

When a constraint set is supplied, each constituent additionally carries a
small signature (operator priority, dangling-member state, ...) and items
whose children violate an evaluation-order rule are dropped as soon as the
violation is visible.  This is the same filtering as
``disambiguation.filter_forest``, applied while the chart is built.

Right recursion uses Leo's shortcut: when a set holds exactly one item
waiting on a symbol in final position, a completion jumps straight to the
top of the resulting chain of completions.  The skipped intermediate nodes
are rebuilt at extraction time, and only where they are reachable, so long
lists stay linear in time and memory.

The parser is a worklist algorithm; nothing here recurses on input length.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OverConstrainedError, ParseError
from .grammar import Grammar, Production, render_symbol
from .lexer import TokenCandidate, TokenGraph


@dataclass(eq=False)
class ForestNode:
    symbol: str
    start: int
    end: int
    sig: object
    derivations: list
    text_end: int = 0   # end offset of the last token (spans exclude trailing skip)

    @property
    def span(self):
        return (self.start, self.end)

    def __repr__(self):
        return f"ForestNode({self.symbol}, {self.start}, {self.end}, {len(self.derivations)} derivations)"


@dataclass(frozen=True, eq=False)
class Derivation:
    production: Production
    children: tuple   # ForestNode | TokenCandidate


class ParseForest:
    def __init__(self, root, nodes, graph, grammar):
        self.root = root
        self.nodes = nodes
        self.graph = graph
        self.grammar = grammar
        self._counts = None

    def topological(self):
        """Nodes reachable from the root, children before parents."""
        return postorder_nodes(self.root)

    def counts(self):
        if self._counts is None:
            counts = {}
            for node in self.topological():
                total = 0
                for d in node.derivations:
                    c = 1
                    for ch in d.children:
                        if isinstance(ch, ForestNode):
                            c *= counts[id(ch)]
                    total += c
                counts[id(node)] = total
            self._counts = counts
        return self._counts

    def count_trees(self):
        return self.counts()[id(self.root)]

    def dump(self):
        lines = []
        for node in sorted(self.topological(), key=lambda n: (n.start, n.end, n.symbol, str(n.sig))):
            sig = "" if node.sig is None else f" {format_sig(node.sig)}"
            lines.append(f"<{node.symbol}>[{node.start},{node.end}){sig} derivations={len(node.derivations)}")
        return "\n".join(lines)


def format_sig(sig):
    parts = []
    if sig.op:
        parts.append(f"op={sig.op[1]}")
    if sig.open:
        parts.append("open=" + ",".join(sorted(sig.open)))
    if sig.closed:
        parts.append("closed=" + ",".join(sorted(sig.closed)))
    return "{" + " ".join(parts) + "}"


def postorder_nodes(root):
    out, seen = [], {id(root)}
    stack = [(root, iter(_child_nodes(root)))]
    while stack:
        node, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            out.append(node)
        elif id(nxt) not in seen:
            seen.add(id(nxt))
            stack.append((nxt, iter(_child_nodes(nxt))))
    return out


def _child_nodes(node):
    for d in node.derivations:
        for ch in d.children:
            if isinstance(ch, ForestNode):
                yield ch


# -- chart -----------------------------------------------------------------

class _Item:
    __slots__ = ("prod", "dot", "origin", "sigs", "pairs")

    def __init__(self, prod, dot, origin, sigs):
        self.prod = prod
        self.dot = dot
        self.origin = origin
        self.sigs = sigs
        self.pairs = []


class _Node:
    __slots__ = ("symbol", "start", "end", "sig", "items")

    def __init__(self, symbol, start, end, sig):
        self.symbol = symbol
        self.start = start
        self.end = end
        self.sig = sig
        self.items = []


class _LeoRef:
    """Stand-in child for a chain of completions skipped by the Leo shortcut;
    the intermediate nodes are built on demand during extraction."""
    __slots__ = ("desc", "bottom", "end", "node")

    def __init__(self, desc, bottom, end):
        self.desc = desc
        self.bottom = bottom
        self.end = end
        self.node = None


class _Set:
    __slots__ = ("items", "waiting", "predicted", "eps", "agenda")

    def __init__(self):
        self.items = {}
        self.waiting = {}
        self.predicted = set()
        self.eps = {}
        self.agenda = []


class _Chart:
    def __init__(self, graph: TokenGraph, grammar: Grammar, constraints):
        self.graph = graph
        self.grammar = grammar
        self.cs = constraints
        self.lhs = [p.lhs for p in grammar.productions]
        self.rhs = [p.rhs for p in grammar.productions]
        self.by_lhs = grammar.by_lhs
        self.terminals = grammar.terminals
        self.sets = {}
        self.nodes = {}
        self.last_rule = None
        self.waiters = {}
        self.climbs = {}
        self.leo_items = {}

    def add(self, target, prod, dot, origin, sigs, prev, child):
        # a (prev, child) pair reaches an item at most once: every node is
        # created once and every waiting item is registered once
        key = (prod, dot, origin, sigs)
        item = target.items.get(key)
        if item is None:
            item = target.items[key] = _Item(prod, dot, origin, sigs)
            target.agenda.append(item)
        item.pairs.append((prev, child))

    def advance_bucket(self, bkey, waiting, child, sig, target):
        prod, dot, sigs = bkey
        newsigs = sigs + (sig,)
        cs = self.cs
        if cs is not None:
            rule = self.vmemo.get((prod, newsigs), 0)
            if rule == 0:
                rule = cs.viable(prod, newsigs)
            if rule is not None:
                self.last_rule = rule
                return
        dot += 1
        items, agenda = target.items, target.agenda
        for w in waiting:
            key = (prod, dot, w.origin, newsigs)
            item = items.get(key)
            if item is None:
                item = items[key] = _Item(prod, dot, w.origin, newsigs)
                agenda.append(item)
            item.pairs.append((w, child))

    def leo_waiter(self, pos, symbol):
        """The single item of set `pos` waiting on `symbol` as its last
        symbol, else None.  Only asked once set `pos` is complete."""
        key = (pos, symbol)
        got = self.waiters.get(key, 0)
        if got != 0:
            return got
        got = None
        buckets = self.sets[pos].waiting.get(symbol)
        if buckets is not None and len(buckets) == 1:
            (bucket,) = buckets.values()
            if len(bucket) == 1:
                w = bucket[0]
                if w.dot == len(self.rhs[w.prod]) - 1:
                    got = w
        self.waiters[key] = got
        return got

    def climb(self, w, sig):
        """Follow the deterministic chain above waiter `w` for a child of
        signature `sig`.

        Returns (top waiter, its advanced sigs, chain) or None when a rule
        vetoes some level.  The chain links (waiter, sigs, node sig, next)
        from the bottom level up to, but excluding, the top.
        """
        cs, climbs = self.cs, self.climbs
        start, origin = self.grammar.start, self.graph.origin
        path = []
        result = None
        while True:
            got = climbs.get((w, sig), 0)
            if got != 0:
                result = got
                break
            newsigs = w.sigs + (sig,)
            if cs is not None:
                rule = cs.viable(w.prod, newsigs)
                if rule is not None:
                    self.last_rule = rule
                    result = None
                    break
            lhs = self.lhs[w.prod]
            up = None
            if not (lhs == start and w.origin == origin):
                up = self.leo_waiter(w.origin, lhs)
            if up is None:
                result = (w, newsigs, None)
                climbs[(w, sig)] = result
                break
            psig = None
            if cs is not None:
                psig, rule = cs.complete(w.prod, newsigs)
                if rule is not None:
                    self.last_rule = rule
                    result = None
                    break
            path.append((w, sig, newsigs, psig))
            w, sig = up, psig
        for w, sig, newsigs, psig in reversed(path):
            if result is not None:
                top, topsigs, desc = result
                result = (top, topsigs, (w, newsigs, psig, desc))
            climbs[(w, sig)] = result
        return result

    def materialize(self, ref):
        """Build the nodes of a skipped chain; returns the uppermost one."""
        if ref.node is not None:
            return ref.node
        child, desc, end = ref.bottom, ref.desc, ref.end
        nodes, leo_items, lhs_of = self.nodes, self.leo_items, self.lhs
        new_items = []
        while desc is not None:
            w, newsigs, psig, desc = desc
            lhs = lhs_of[w.prod]
            nkey = (lhs, w.origin, end, psig)
            node = nodes.get(nkey)
            if node is None:
                node = nodes[nkey] = _Node(lhs, w.origin, end, psig)
            ikey = (id(w), id(child))
            if ikey not in leo_items:
                item = _Item(w.prod, w.dot + 1, w.origin, newsigs)
                item.pairs.append((w, child))
                leo_items[ikey] = item
                node.items.append(item)
                new_items.append((node, item))
            child = node
        ref.node = child
        self.fresh.extend(new_items)
        return child

    def run(self):
        graph, grammar = self.graph, self.grammar
        cs = self.cs
        self.vmemo = cs._viable if cs is not None else None
        cmemo = cs._complete if cs is not None else None
        rhs_len = [len(r) for r in self.rhs]
        rhs_of, lhs_of, by_lhs, terminals = self.rhs, self.lhs, self.by_lhs, self.terminals
        sets, nodes = self.sets, self.nodes
        advance = self.advance_bucket
        origin = graph.origin
        s0 = sets[origin] = _Set()
        s0.predicted.add(grammar.start)
        for p in by_lhs.get(grammar.start, ()):
            self.add(s0, p, 0, origin, (), None, None)

        for pos in graph.positions:
            S = sets.get(pos)
            if S is None:
                continue
            agenda = S.agenda
            waiting_of = S.waiting
            i = 0
            while i < len(agenda):
                it = agenda[i]
                i += 1
                prod = it.prod
                if it.dot == rhs_len[prod]:
                    if cs is not None:
                        got = cmemo.get((prod, it.sigs))
                        sig, rule = got if got is not None else cs.complete(prod, it.sigs)
                        if rule is not None:
                            self.last_rule = rule
                            continue
                    else:
                        sig = None
                    lhs = lhs_of[prod]
                    nkey = (lhs, it.origin, pos, sig)
                    node = nodes.get(nkey)
                    if node is not None:
                        node.items.append(it)
                        continue
                    node = nodes[nkey] = _Node(lhs, it.origin, pos, sig)
                    node.items.append(it)
                    if it.origin == pos:
                        S.eps.setdefault(lhs, []).append(node)
                        buckets = waiting_of.get(lhs)
                        if buckets:
                            for bkey, waiting in list(buckets.items()):
                                advance(bkey, list(waiting), node, sig, S)
                    else:
                        w = self.leo_waiter(it.origin, lhs)
                        if w is not None:
                            got = self.climb(w, sig)
                            if got is not None:
                                top, topsigs, desc = got
                                child = node if desc is None else _LeoRef(desc, node, pos)
                                key = (top.prod, top.dot + 1, top.origin, topsigs)
                                item = S.items.get(key)
                                if item is None:
                                    item = S.items[key] = _Item(top.prod, top.dot + 1, top.origin, topsigs)
                                    agenda.append(item)
                                item.pairs.append((top, child))
                            continue
                        buckets = sets[it.origin].waiting.get(lhs)
                        if buckets:
                            for bkey, waiting in buckets.items():
                                advance(bkey, waiting, node, sig, S)
                    continue
                sym = rhs_of[prod][it.dot]
                bkey = (prod, it.dot, it.sigs)
                wmap = waiting_of.get(sym)
                if wmap is None:
                    wmap = waiting_of[sym] = {}
                bucket = wmap.get(bkey)
                if bucket is None:
                    wmap[bkey] = [it]
                else:
                    bucket.append(it)
                if sym in terminals:
                    continue
                if sym not in S.predicted:
                    S.predicted.add(sym)
                    for p in by_lhs.get(sym, ()):
                        self.add(S, p, 0, pos, (), None, None)
                eps = S.eps.get(sym)
                if eps:
                    for node in eps:
                        advance(bkey, (it,), node, node.sig, S)

            for cand in graph.by_start.get(pos, ()):
                buckets = S.waiting.get(cand.cls.id)
                if not buckets:
                    continue
                sig = cs.leaf_sig(cand) if cs is not None else None
                nxt = graph.resume[cand.end]
                T = sets.get(nxt)
                if T is None:
                    T = sets[nxt] = _Set()
                for bkey, waiting in buckets.items():
                    advance(bkey, waiting, cand, sig, T)

    def roots(self):
        g = self.graph
        return [n for (sym, s, e, _), n in self.nodes.items()
                if sym == self.grammar.start and s == g.origin and e == g.end]

    def error(self):
        g = self.graph
        pos = max((p for p, s in self.sets.items() if s.items), default=g.origin)
        S = self.sets.get(pos)
        expected = sorted(render_symbol(self.grammar, s) for s in (S.waiting if S else ())
                          if s in self.terminals)
        found = None
        if pos < g.end:
            cands = g.by_start.get(pos)
            found = cands[0].text if cands else g.text[pos]
        return ParseError(pos, expected, found)


def _alts(item, memo):
    """All child tuples of a (completed) item."""
    key = id(item)
    got = memo.get(key)
    if got is not None:
        return got
    if item.dot == 0:
        out = [()]
    else:
        out = []
        for prev, child in item.pairs:
            if type(child) is _LeoRef:
                child = child.node
            for a in _alts(prev, memo):
                out.append(a + (child,))
    memo[key] = out
    return out


def _reach(chart, roots):
    """Materialize every skipped chain reachable from the roots, so that
    each node has its full item list before derivations are collected."""
    chart.fresh = []
    seen_nodes, seen_items = set(), set()
    todo = []
    for r in roots:
        seen_nodes.add(id(r))
        todo.extend(r.items)
    while True:
        while todo:
            it = todo.pop()
            if id(it) in seen_items:
                continue
            seen_items.add(id(it))
            for prev, child in it.pairs:
                if prev is not None and id(prev) not in seen_items:
                    todo.append(prev)
                if type(child) is _LeoRef:
                    child = chart.materialize(child)
                if type(child) is _Node and id(child) not in seen_nodes:
                    seen_nodes.add(id(child))
                    todo.extend(child.items)
        if not chart.fresh:
            break
        for node, item in chart.fresh:
            if id(node) in seen_nodes:
                todo.append(item)
        chart.fresh = []


def _extract(chart: _Chart, roots, cs=None):
    """Build ForestNodes for everything reachable from the roots, dropping
    derivations vetoed by custom hooks and nodes left without derivations."""
    grammar, graph = chart.grammar, chart.graph
    prods = grammar.productions
    memo = {}
    raw = {}
    _reach(chart, roots)

    def derivs(n):
        got = raw.get(id(n))
        if got is None:
            got = []
            seen = set()
            for it in n.items:
                for children in _alts(it, memo):
                    k = (it.prod, tuple(id(c) for c in children))
                    if k not in seen:
                        seen.add(k)
                        got.append((prods[it.prod], children))
            raw[id(n)] = got
        return got

    # iterative postorder over raw nodes
    order, seen = [], set()
    for r in roots:
        if id(r) in seen:
            continue
        seen.add(id(r))
        stack = [(r, iter([c for _, ch in derivs(r) for c in ch if isinstance(c, _Node)]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                order.append(node)
            elif id(nxt) not in seen:
                seen.add(id(nxt))
                stack.append((nxt, iter([c for _, ch in derivs(nxt) for c in ch if isinstance(c, _Node)])))

    built = {}
    last_rule = None
    leaf_ok = {}
    for n in order:
        sig = cs.table[n.sig] if cs is not None else None
        fn = ForestNode(n.symbol, n.start, n.end, sig, [], n.start)
        for prod, children in derivs(n):
            kids = []
            ok = True
            for c in children:
                if isinstance(c, _Node):
                    b = built.get(id(c))
                    if b is None:
                        ok = False
                        break
                    kids.append(b)
                else:
                    if cs is not None:
                        v = leaf_ok.get(id(c))
                        if v is None:
                            v = leaf_ok[id(c)] = cs.leaf_ok(c, graph.text)
                        if not v:
                            ok = False
                            last_rule = "custom"
                            break
                    kids.append(c)
            if not ok:
                continue
            if cs is not None and not cs.derivation_ok(prod, kids, graph.text):
                last_rule = "custom"
                continue
            fn.derivations.append(Derivation(prod, tuple(kids)))
            if kids:
                last = kids[-1]
                fn.text_end = max(fn.text_end, last.text_end if isinstance(last, ForestNode) else last.end)
        if fn.derivations:
            built[id(n)] = fn
    live_roots = [built[id(r)] for r in roots if id(r) in built]
    return live_roots, built, last_rule


def parse(tokens: TokenGraph, grammar: Grammar, constraints=None) -> ParseForest:
    """Parse every path of `tokens`; return the (optionally filtered) forest.

    With `constraints` (a ``disambiguation.ConstraintSet``) evaluation-order
    rules and custom hooks are applied; otherwise the forest holds every
    parse tree of the grammar.
    """
    chart = _Chart(tokens, grammar, constraints)
    chart.run()
    roots = chart.roots()
    if not roots:
        if constraints is not None:
            plain = _Chart(tokens, grammar, None)
            plain.run()
            if plain.roots():
                raise OverConstrainedError(chart.last_rule or "evaluation order")
        raise chart.error()
    live, built, custom_rule = _extract(chart, roots, constraints)
    if not live:
        raise OverConstrainedError(custom_rule or chart.last_rule or "custom")
    if len(live) == 1:
        root = live[0]
    else:
        root = ForestNode(grammar.start, tokens.origin, tokens.end, None,
                          [d for r in live for d in r.derivations],
                          max(r.text_end for r in live))
    nodes = {(n.symbol, n.start, n.end, n.sig): n for n in built.values()}
    return ParseForest(root, nodes, tokens, grammar)


# -- trees -----------------------------------------------------------------

class ParseTree:
    __slots__ = ("symbol", "production", "children", "start", "end", "_key")

    def __init__(self, symbol, production, children, start, end):
        self.symbol = symbol
        self.production = production
        self.children = children
        self.start = start
        self.end = end
        self._key = None

    def key(self):
        """Canonical bracketed rendering, e.g. ``(Expression (Literal 1))``."""
        if self._key is None:
            self._key = render_tree(self)
        return self._key

    def __eq__(self, other):
        return isinstance(other, ParseTree) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"ParseTree{self.key()}"

    def leaves(self):
        out, stack = [], [self]
        while stack:
            t = stack.pop()
            if isinstance(t, ParseTree):
                stack.extend(reversed(t.children))
            else:
                out.append(t)
        return out

    def subtrees(self):
        """All tree nodes, preorder."""
        out, stack = [], [self]
        while stack:
            t = stack.pop()
            if isinstance(t, ParseTree):
                out.append(t)
                stack.extend(reversed(t.children))
        return out


def render_tree(tree):
    parts, stack = [], [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, str):
            parts.append(t)
        elif isinstance(t, ParseTree):
            parts.append("(" + t.symbol)
            stack.append(")")
            for c in reversed(t.children):
                stack.append(c)
                stack.append(" ")
        else:
            parts.append(repr(t.text))
    return "".join(parts)


def format_tree(tree, indent="  "):
    """Indented multi-line rendering (the CLI's tree-text format)."""
    lines, stack = [], [(tree, 0)]
    while stack:
        t, depth = stack.pop()
        pad = indent * depth
        if isinstance(t, ParseTree):
            lines.append(f"{pad}{t.symbol} [{t.start},{t.end})")
            for c in reversed(t.children):
                stack.append((c, depth + 1))
        else:
            lines.append(f"{pad}{t.cls.id} {t.text!r}")
    return "\n".join(lines)


def tree_at(forest: ParseForest, k: int) -> ParseTree:
    """The k-th tree in derivation-index lexicographic order."""
    counts = forest.counts()

    def count(ch):
        return counts[id(ch)] if isinstance(ch, ForestNode) else 1

    holder = [None]
    tasks = [(forest.root, k, holder, 0)]
    while tasks:
        node, k, plist, idx = tasks.pop()
        if not isinstance(node, ForestNode):
            plist[idx] = node
            continue
        chosen = None
        for d in node.derivations:
            c = 1
            for ch in d.children:
                c *= count(ch)
            if k < c:
                chosen = d
                break
            k -= c
        tree = ParseTree(node.symbol, chosen.production, [None] * len(chosen.children),
                         node.start, node.text_end)
        plist[idx] = tree
        digits = []
        for ch in reversed(chosen.children):
            cc = count(ch)
            digits.append(k % cc)
            k //= cc
        digits.reverse()
        for j in range(len(chosen.children) - 1, -1, -1):
            tasks.append((chosen.children[j], digits[j], tree.children, j))
    return holder[0]


def enumerate_trees(forest: ParseForest, limit: int):
    """First `limit` trees and whether more remain."""
    if limit < 1:
        raise ValueError("limit must be positive")
    total = forest.count_trees()
    n = min(total, limit)
    return [tree_at(forest, k) for k in range(n)], total > n
