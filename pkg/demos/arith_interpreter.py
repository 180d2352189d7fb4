"""Build an interpreter for four-operator arithmetic from its model.

    python3 demos/arith_interpreter.py "10/(2+3)*0.5+1"
"""

import sys

from modelcc import Parser, apply_semantics, dump_grammar
from modelcc.gallery import ARITH_HOOKS, model_path

parser = Parser.from_file(model_path("arith"))

print("Generated grammar:")
print(dump_grammar(parser.grammar))

text = sys.argv[1] if len(sys.argv) > 1 else "10/(2+3)*0.5+1"
print(f"{text} = {parser.evaluate(text, ARITH_HOOKS)}")

# Without the priority/associativity annotations every bracketing survives.
free = Parser.from_file(model_path("arith"), constraints=False)
trees, _ = free.trees("1-2-3", limit=10)
print(f"\nwith constraints off, 1-2-3 has {len(trees)} readings:")
for tree in trees:
    print("  ", apply_semantics(free.bind(tree), ARITH_HOOKS))
