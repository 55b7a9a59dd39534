import contextlib
import io
from pathlib import Path

import pytest

from tmkit.cli import main
from tmkit.fixtures import load_fixture

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def vending():
    return load_fixture("vending")


@pytest.fixture(scope="session")
def shopping():
    return load_fixture("shopping")


def run_cli(*argv):
    """Run the CLI in-process; returns (status, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        status = main([str(a) for a in argv])
    return status, out.getvalue(), err.getvalue()
