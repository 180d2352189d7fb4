import io
import json
import subprocess
import sys

import pytest

from modelcc.cli import main


def run(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        old = sys.stdin
        sys.stdin = io.StringIO(stdin)
    try:
        code = main(list(argv), out, err)
    finally:
        if stdin is not None:
            sys.stdin = old
    return code, out.getvalue(), err.getvalue()


def test_exit_0_paper_value():
    code, out, err = run("parse", "--builtin", "arith", "--eval", "eval", "-e", "10/(2+3)*0.5+1")
    assert (code, out, err) == (0, "2\n", "")


def test_exit_1_usage():
    assert run()[0] == 1
    assert run("parse", "-e", "1")[0] == 1                                   # no model
    assert run("parse", "--builtin", "arith", "--model", "x.mcc", "-e", "1")[0] == 1
    code, _, err = run("parse", "--builtin", "nope", "-e", "1")
    assert code == 1 and "unknown builtin" in err
    assert run("parse", "--builtin", "arith", "--eval", "nosuch", "-e", "1")[0] == 1


def test_exit_2_model_error(tmp_path):
    bad = tmp_path / "bad.mcc"
    bad.write_text("language X;\nelement A {\n  b : ;\n}\n")
    code, out, err = run("validate", "--model", str(bad))
    assert code == 2 and out == ""
    assert f"{bad}:3:7: error:" in err
    assert run("grammar", "--model", str(tmp_path / "missing.mcc"))[0] == 2


def test_exit_3_syntax_error():
    code, out, err = run("parse", "--builtin", "arith", "-e", "1+")
    assert code == 3 and out == ""
    assert "offset 2" in err


def test_exit_3_lexical_error():
    code, _, err = run("parse", "--builtin", "arith", "-e", "1+$")
    assert code == 3 and "offset 2" in err


def test_exit_4_ambiguity():
    code, out, err = run("parse", "--builtin", "arith", "--no-constraints", "-e", "1+2*3")
    assert code == 4 and out == ""
    assert "2" in err and "interpretation 2:" in err


def test_exit_5_unresolved():
    code, _, err = run("parse", "--builtin", "constants", "--eval", "eval", "-e", "pi")
    assert code == 5 and "pi" in err


def test_define():
    code, out, _ = run("parse", "--builtin", "constants", "--eval", "eval",
                       "--define", "pi=3.1415927", "-e", "2*pi")
    assert code == 0 and out == "6.2831854\n"
    assert run("parse", "--builtin", "constants", "--define", "pi", "-e", "pi")[0] == 1


def test_all_interpretations():
    code, out, err = run("parse", "--builtin", "arith", "--no-constraints", "--all",
                         "--eval", "eval", "-e", "1+2*3")
    assert code == 0 and sorted(out.split()) == ["7", "9"]
    code, out, err = run("parse", "--builtin", "arith", "--no-constraints", "--all",
                         "--limit", "1", "-e", "1+2+3+4")
    assert code == 0 and len(json.loads(out)) == 1 and "truncated" in err


def test_asg_json_output():
    code, out, _ = run("parse", "--builtin", "arith", "-e", "1+2")
    doc = json.loads(out)
    assert doc["root"] == "n0"
    assert doc["nodes"]["n0"]["fields"]["e1"] == {"ref": "n1"}


def test_tree_text_output():
    code, out, _ = run("parse", "--builtin", "arith", "--format", "tree-text", "-e", "1+2")
    assert out.splitlines()[0] == "Expression [0,3)"


def test_dumps_go_to_stderr():
    code, out, err = run("parse", "--builtin", "arith", "--dump-tokens", "--dump-forest",
                         "--eval", "eval", "-e", "1+2")
    assert out == "3\n"
    assert 'Literal@[0,1) "1"' in err and "<Expression>[0,3)" in err


def test_grammar_command():
    code, out, _ = run("grammar", "--builtin", "arith")
    assert code == 0 and "<Expression> ::= <BinaryExpression>" in out


def test_tokens_command(tmp_path):
    f = tmp_path / "in.txt"
    f.write_text("3.5 * 2")
    code, out, _ = run("tokens", "--builtin", "arith", str(f))
    assert code == 0
    assert out.splitlines() == ['Literal@[0,3) "3.5"', 'MultiplicationOperator@[4,5) "*"',
                                'Literal@[6,7) "2"']


def test_stdin_input():
    assert run("parse", "--builtin", "arith", "--eval", "eval", stdin="6/4")[1] == "1.5\n"


def test_gallery_command():
    code, out, _ = run("gallery")
    assert code == 0 and "FAIL" not in out and out.count("PASS") > 20
    assert run("gallery", "json")[0] == 0


def test_validate_command():
    assert run("validate", "--builtin", "json") == (0, "JSON: 9 elements, ok\n", "")


def test_special_values():
    assert run("parse", "--builtin", "arith", "--eval", "eval", "-e", "1/0")[1] == "inf\n"
    assert run("parse", "--builtin", "arith", "--eval", "eval", "-e", "0/0")[1] == "nan\n"
    assert run("parse", "--builtin", "arith", "--eval", "eval", "-e", "1/3")[1] == "0.3333333333333333\n"


@pytest.mark.parametrize("argv", [
    ["parse", "--builtin", "json", "-e", '{"a": [1, 2.5, "x"], "b": null}'],
    ["grammar", "--builtin", "prolog"],
    ["parse", "--builtin", "arith", "--no-constraints", "--all", "-e", "1-2-3-4"],
])
def test_determinism(argv):
    assert run(*argv) == run(*argv)
    first = subprocess.run([sys.executable, "-m", "modelcc.cli", *argv], capture_output=True, text=True)
    second = subprocess.run([sys.executable, "-m", "modelcc.cli", *argv], capture_output=True, text=True)
    assert first.returncode == 0 and first.stdout == second.stdout
    assert first.stdout == run(*argv)[1]
