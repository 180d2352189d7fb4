"""Overlapping token classes stay in the token graph until the parser decides."""

from modelcc import Parser

MODEL = r'''
language Lex;
element Seq @start { items : Tok @multiplicity(1,*); }
abstract element Tok;
basic element Int : Tok @pattern("[0-9]+") @value(number);
basic element Real : Tok @pattern("[0-9]+\\.[0-9]+") @value(number);
basic element Dot : Tok @pattern("\\.");
'''

parser = Parser.from_text(MODEL, constraints=False)
graph = parser.tokenize("3.14")
print(graph.dump())
for path in graph.paths():
    print(" ".join(f"{c.cls.id}({c.text})" for c in path))
trees, _ = parser.trees("3.14")
print(len(trees), "parse trees")
