"""One annotation decides where a dangling else attaches."""

from modelcc import Parser
from modelcc.gallery import IFELSE_HOOKS, model_text

text = "if c1 then if c2 then s1 else s2"
eager = model_text("ifelse")
lazy = eager.replace("@composition(eager)", "@composition(lazy)")

for label, model in (("eager", eager), ("lazy", lazy)):
    print(f"{label:5}", Parser.from_text(model).evaluate(text, IFELSE_HOOKS))
