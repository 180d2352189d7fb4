import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from modelcc import Parser  # noqa: E402
from modelcc.gallery import load_model, model_text  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def arith_model():
    return load_model("arith")


@pytest.fixture(scope="session")
def arith():
    return Parser.from_text(model_text("arith"))


@pytest.fixture(scope="session")
def arith_free():
    """Arith with evaluation-order constraints switched off."""
    return Parser.from_text(model_text("arith"), constraints=False)


@pytest.fixture(scope="session")
def json_parser():
    return Parser.from_text(model_text("json"))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
