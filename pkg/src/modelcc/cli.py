"""Command-line interface.

    modelcc parse --builtin arith --eval eval -e "10/(2+3)*0.5+1"
    modelcc grammar --model my.mcc
    modelcc tokens --builtin json input.json
    modelcc gallery
    modelcc validate --model my.mcc

Exit codes: 0 success, 1 usage or other error, 2 model error, 3 lexical or
syntax error, 4 residual ambiguity, 5 unresolved reference.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import gallery
from .binder import apply_semantics, format_number
from .disambiguation import unique_tree
from .errors import AmbiguityError, ModelCCError, ModelError, ModelSyntaxError, ModelValidationError
from .grammar import dump_grammar, generate_grammar
from .modeltext import read_model
from .parser import enumerate_trees, format_tree
from .pipeline import Parser


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_argparser():
    ap = _ArgumentParser(prog="modelcc", description="Model-driven parser generator.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def model_args(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--model", metavar="PATH", help="model file (.mcc)")
        g.add_argument("--builtin", metavar="NAME", help=f"gallery model: {', '.join(gallery.NAMES)}")

    def input_args(p):
        p.add_argument("input", nargs="?", help="input file (default: standard input)")
        p.add_argument("-e", dest="inline", metavar="TEXT", help="inline input text")

    p = sub.add_parser("parse", help="parse input and print the abstract syntax graph")
    model_args(p)
    input_args(p)
    p.add_argument("--format", choices=("asg-json", "tree-text"), default="asg-json")
    p.add_argument("--all", action="store_true", help="print every surviving interpretation")
    p.add_argument("--limit", type=int, default=100, help="maximum interpretations with --all")
    p.add_argument("--dump-forest", action="store_true", help="print the parse forest to stderr")
    p.add_argument("--dump-tokens", action="store_true", help="print token candidates to stderr")
    p.add_argument("--eval", metavar="HOOKS", help="fold the graph with a named hook set")
    p.add_argument("--define", action="append", default=[], metavar="NAME=VALUE",
                   help="predefine a Constant before parsing (repeatable)")
    p.add_argument("--no-constraints", action="store_true",
                   help="disable evaluation-order constraints and custom hooks")

    p = sub.add_parser("grammar", help="print the generated grammar")
    model_args(p)

    p = sub.add_parser("tokens", help="print the token graph of an input")
    model_args(p)
    input_args(p)

    p = sub.add_parser("gallery", help="run the gallery corpora")
    p.add_argument("names", nargs="*", metavar="NAME")

    p = sub.add_parser("validate", help="check a model file")
    model_args(p)
    return ap


def _load_model(args):
    if args.builtin is not None:
        if args.builtin not in gallery.NAMES:
            raise UsageError(f"unknown builtin model {args.builtin!r} (available: {', '.join(gallery.NAMES)})")
        name, text = f"{args.builtin}.mcc", gallery.model_text(args.builtin)
    else:
        name = args.model
        try:
            text = Path(args.model).read_text(encoding="utf-8")
        except OSError as exc:
            raise ModelError(f"cannot read model file: {exc}") from None
    try:
        return read_model(text).model
    except (ModelSyntaxError, ModelValidationError) as exc:
        exc.cli_message = exc.format(name)
        raise


def _read_input(args):
    if args.inline is not None and args.input is not None:
        raise UsageError("give either -e TEXT or an input file, not both")
    if args.inline is not None:
        return args.inline
    if args.input is not None:
        return Path(args.input).read_text(encoding="utf-8")
    return sys.stdin.read()


def _hooks(args):
    sets = gallery.HOOK_SETS.get(args.builtin or "", {})
    if args.eval in sets:
        return sets[args.eval]
    for name in sorted(gallery.HOOK_SETS):
        if args.eval in gallery.HOOK_SETS[name]:
            return gallery.HOOK_SETS[name][args.eval]
    raise UsageError(f"unknown hook set {args.eval!r}")


def _format_value(v):
    v = format_number(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, ensure_ascii=False, default=str)
    return str(v)


def _cmd_parse(args, out, err):
    model = _load_model(args)
    hooks = _hooks(args) if args.eval else None
    if args.limit < 1:
        raise UsageError("--limit must be positive")
    parser = Parser(model, constraints=not args.no_constraints)
    for d in args.define:
        name, sep, value = d.partition("=")
        if not sep or not name:
            raise UsageError(f"--define expects NAME=VALUE, got {d!r}")
        try:
            number = float(value)
        except ValueError:
            raise UsageError(f"--define value {value!r} is not a number") from None
        parser.define("Constant", name=name, value=number)
    text = _read_input(args)
    if args.dump_tokens:
        err.write(parser.tokenize(text).dump() + "\n")
    forest = parser.parse_forest(text)
    if args.dump_forest:
        err.write(forest.dump() + "\n")
    if args.all:
        trees, more = enumerate_trees(forest, args.limit)
    else:
        trees, more = [unique_tree(forest)], False

    outputs = []
    for tree in trees:
        if hooks is not None:
            outputs.append(_format_value(apply_semantics(parser.bind(tree), hooks, model)))
        elif args.format == "tree-text":
            outputs.append(format_tree(tree))
        else:
            outputs.append(parser.bind(tree).to_dict())
    if hooks is not None or args.format == "tree-text":
        sep = "\n" if hooks is not None else "\n\n"
        out.write(sep.join(outputs) + "\n")
    elif args.all:
        out.write(json.dumps(outputs, indent=2, ensure_ascii=False) + "\n")
    else:
        out.write(json.dumps(outputs[0], indent=2, ensure_ascii=False) + "\n")
    if more:
        err.write(f"modelcc: more than {args.limit} interpretations; output truncated\n")
    return 0


def _cmd_grammar(args, out, err):
    out.write(dump_grammar(generate_grammar(_load_model(args))))
    return 0


def _cmd_tokens(args, out, err):
    parser = Parser(_load_model(args), constraints=False)
    graph = parser.tokenize(_read_input(args))
    if graph.candidates:
        out.write(graph.dump() + "\n")
    return 0


def _cmd_gallery(args, out, err):
    names = args.names or list(gallery.NAMES)
    for n in names:
        if n not in gallery.ENTRIES:
            raise UsageError(f"unknown gallery entry {n!r}")
    ok = True
    for n in names:
        report = gallery.run_gallery(gallery.ENTRIES[n])
        out.write(report.format() + "\n")
        ok = ok and report.ok
    return 0 if ok else 1


def _cmd_validate(args, out, err):
    model = _load_model(args)
    out.write(f"{model.name}: {len(model.elements)} elements, ok\n")
    return 0


_COMMANDS = {
    "parse": _cmd_parse, "grammar": _cmd_grammar, "tokens": _cmd_tokens,
    "gallery": _cmd_gallery, "validate": _cmd_validate,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _build_argparser().parse_args(argv)
        return _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"modelcc: usage error: {exc}\n")
        return 1
    except AmbiguityError as exc:
        err.write(f"modelcc: error: {exc}\n")
        for k, t in enumerate(exc.trees, 1):
            err.write(f"interpretation {k}:\n{format_tree(t)}\n")
        return exc.exit_code
    except ModelCCError as exc:
        err.write(f"modelcc: error: {getattr(exc, 'cli_message', exc)}\n")
        return exc.exit_code
    except OSError as exc:
        err.write(f"modelcc: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
