"""Ambiguity-tolerant tokenization into a token graph.

Every token class contributes its longest match at every reachable position
(POSIX leftmost-longest semantics, so ``a|ab`` matches ``ab`` in full),
so overlapping interpretations such as ``3`` / ``3.14`` coexist.  A
fixed-text class (delimiters, separators, token members) suppresses a
pattern class only when both produce exactly the same span.
"""

from __future__ import annotations

import regex
from dataclasses import dataclass, field
from functools import cached_property

from .errors import LexicalError
from .model import DEFAULT_SKIP


def compile_pattern(regexp):
    """Token patterns use the `regex` dialect with POSIX longest matching."""
    return regex.compile(regexp, regex.POSIX | regex.V0)


@dataclass(frozen=True)
class TokenClass:
    id: str
    regexp: str
    fixed_text: bool = False
    origin_element: str | None = None

    @cached_property
    def pattern(self):
        return compile_pattern(self.regexp)

    def __repr__(self):
        return f"TokenClass({self.id})"


@dataclass(frozen=True, eq=False)
class TokenCandidate:
    cls: TokenClass
    start: int
    end: int
    text: str

    def __repr__(self):
        return f'{self.cls.id}@[{self.start},{self.end}) {self.text!r}'

    def describe(self):
        return f'{self.cls.id}@[{self.start},{self.end}) "{self.text}"'


@dataclass
class TokenGraph:
    """All token candidates of an input.

    Positions are character offsets after skipping; a candidate spans
    ``[start, end)`` and leads to position ``resume[end]``.
    """
    text: str
    origin: int                          # first position after leading skip
    all_candidates: list                 # every maximal match, before path pruning
    candidates: list                     # candidates on some complete path
    resume: dict = field(default_factory=dict)

    @cached_property
    def by_start(self):
        out = {}
        for c in self.candidates:
            out.setdefault(c.start, []).append(c)
        return out

    @property
    def end(self):
        return len(self.text)

    def next_position(self, cand):
        return self.resume[cand.end]

    def successors(self, cand):
        return self.by_start.get(self.resume[cand.end], [])

    @property
    def start_set(self):
        return list(self.by_start.get(self.origin, []))

    @property
    def end_set(self):
        return [c for c in self.candidates if self.resume[c.end] == self.end]

    @property
    def accepts_empty(self):
        return self.origin == self.end

    @cached_property
    def positions(self):
        return sorted(set(self.by_start) | {self.end})

    def paths(self, limit=None):
        """Enumerate tokenization paths (for small inputs and tests)."""
        if self.accepts_empty:
            return [[]]
        out = []
        stack = [(c, [c]) for c in reversed(self.start_set)]
        while stack:
            cand, path = stack.pop()
            if self.resume[cand.end] == self.end:
                out.append(path)
                if limit is not None and len(out) >= limit:
                    break
                continue
            for nxt in reversed(self.successors(cand)):
                stack.append((nxt, path + [nxt]))
        return out

    def dump(self):
        return "\n".join(c.describe() for c in self.candidates)


def tokenize(text: str, classes, skip: str = DEFAULT_SKIP) -> TokenGraph:
    classes = sorted(classes, key=lambda c: c.id)
    skip_re = compile_pattern(skip) if skip else None
    n = len(text)

    def skip_from(pos):
        if skip_re is not None and pos < n:
            m = skip_re.match(text, pos)
            if m and m.end() > pos:
                return m.end()
        return pos

    origin = skip_from(0)
    resume = {}
    by_pos = {}
    todo = [origin]
    seen = {origin}
    while todo:
        pos = todo.pop()
        if pos >= n:
            continue
        found = {}
        for cls in classes:
            m = cls.pattern.match(text, pos)
            if m is None or m.end() <= pos:
                continue
            found.setdefault(m.end(), []).append(cls)
        cands = []
        for end in sorted(found):
            group = found[end]
            if any(c.fixed_text for c in group):
                group = [c for c in group if c.fixed_text]
            for cls in group:
                cands.append(TokenCandidate(cls, pos, end, text[pos:end]))
            if end not in resume:
                resume[end] = skip_from(end)
            nxt = resume[end]
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
        by_pos[pos] = cands

    all_candidates = [c for p in sorted(by_pos) for c in by_pos[p]]

    # keep candidates lying on some path that reaches the end of input
    live_pos = {n}
    for pos in sorted(by_pos, reverse=True):
        if any(resume[c.end] in live_pos for c in by_pos[pos]):
            live_pos.add(pos)
    candidates = [c for c in all_candidates if resume[c.end] in live_pos and c.start in live_pos]

    if origin not in live_pos:
        dead = [p for p in seen if p < n and not by_pos.get(p)]
        offset = max(dead) if dead else max(seen)
        raise LexicalError(offset, text[offset] if offset < n else "")
    return TokenGraph(text, origin, all_candidates, candidates, resume)
