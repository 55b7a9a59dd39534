"""Rewrite tests/golden from the current CLI output.

    python3 scripts/regen_golden.py

Review the diff before committing; golden files are the reference outputs.
"""

import contextlib
import io
from pathlib import Path

from tmkit.cli import main
from tmkit.fixtures import FIXTURE_NAMES

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"

# file name -> CLI arguments after the fixture name
OUTPUTS = {
    "static.dot": ["export", "{f}", "static"],
    "behavior.dot": ["behavior", "{f}"],
    "carving.dot": ["carve", "{f}"],
    "auto-carving.json": ["carve", "{f}", "--auto", "--format", "json"],
    "report.json": ["validate", "{f}", "--format", "json"],
}


def render(fixture: str, args: list) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        main([a.format(f=fixture) for a in args])
    return buf.getvalue()


def regenerate() -> list:
    written = []
    for fixture in FIXTURE_NAMES:
        out = GOLDEN / fixture
        out.mkdir(parents=True, exist_ok=True)
        for name, args in OUTPUTS.items():
            path = out / name
            path.write_text(render(fixture, args), encoding="utf-8")
            written.append(path)
    return written


if __name__ == "__main__":
    for p in regenerate():
        print(p.relative_to(GOLDEN.parent.parent))
