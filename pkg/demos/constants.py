"""Named constants resolved through a symbol table filled before parsing."""

from modelcc import Parser, UnresolvedReferenceError
from modelcc.gallery import ARITH_HOOKS, model_path

parser = Parser.from_file(model_path("constants"))

try:
    parser.parse("2*pi")
except UnresolvedReferenceError as exc:
    print("before registration:", exc)

parser.define("Constant", name="pi", value=3.1415927)
print("2*pi =", parser.evaluate("2*pi", ARITH_HOOKS))
print(parser.parse("pi").to_json())
