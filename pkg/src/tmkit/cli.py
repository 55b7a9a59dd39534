"""Command-line entry point.

Every command takes a TARGET: either a shipped fixture name or a path to a
``.tm`` file. For a path, the events, grouping and scenario files are looked
up beside it (``NAME.ev``, ``NAME.grp``, ``*.sc``) unless given explicitly.

Exit status: 0 success, 1 diagnostic or validation failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from tmkit import __version__
from tmkit.carve import CarveError, carve_auto, carve_manual
from tmkit.core import ModelError, check_static, export_dot
from tmkit.dsl import DslError, parse_events, parse_groups, parse_injections, parse_model, serialize_events
from tmkit.dsl.scenario import parse_scenarios
from tmkit.events import EventsError, build_behavior, validate_events
from tmkit.export import dumps, to_json
from tmkit.fixtures import FIXTURE_NAMES, expand_shorthand, fixture_file, scenario_files
from tmkit.harness import run_all
from tmkit.sim import DEFAULT_MAX_STEPS, SimulationError, Trace, UnmappedNode, conforms, project, simulate

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad arguments or unreadable input; exit status 2."""


class Failure(Exception):
    """Diagnostics or failed checks; exit status 1."""


@dataclass
class CliConfig:
    command: str
    inputs: list = field(default_factory=list)
    out: Optional[str] = None
    max_steps: int = DEFAULT_MAX_STEPS
    max_parts: Optional[int] = None
    format: Optional[str] = None
    verbosity: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise UsageError("--max-steps must be at least 1")
        if self.max_parts is not None and self.max_parts < 1:
            raise UsageError("--max-parts must be at least 1")


# --- input resolution ----------------------------------------------------


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None


class Target:
    """Lazily loaded artifacts for one fixture or model file."""

    def __init__(self, name: str, events: Optional[str] = None, groups: Optional[str] = None,
                 scenarios: Optional[list] = None):
        self.fixture: Optional[str] = None
        path = Path(name)
        if name in FIXTURE_NAMES and not path.exists():
            self.fixture = name
            self.tm = fixture_file(name, ".tm")
            self.ev = fixture_file(name, ".ev")
            self.grp = fixture_file(name, ".grp")
            self.sc = scenario_files(name)
        else:
            if not path.is_file():
                known = ", ".join(FIXTURE_NAMES)
                raise UsageError(f"{name}: no such file or fixture (fixtures: {known})")
            self.tm = path
            self.ev = path.with_suffix(".ev")
            self.grp = path.with_suffix(".grp")
            self.sc = sorted(path.parent.glob("*.sc"))
        if events:
            self.ev = Path(events)
        if groups:
            self.grp = Path(groups)
        if scenarios:
            self.sc = [Path(s) for s in scenarios]
        self._model = self._events = None

    @property
    def model(self):
        if self._model is None:
            self._model = parse_model(_read(self.tm), self.tm.name)
        return self._model

    @property
    def events(self):
        if self._events is None:
            self._events = parse_events(_read(self.ev), self.model, self.ev.name)
        return self._events

    def behavior(self):
        return build_behavior(self.events)

    def carving(self, auto: bool = False, max_parts: Optional[int] = None):
        if auto:
            return carve_auto(self.behavior(), max_parts)
        return carve_manual(self.behavior(), parse_groups(_read(self.grp), self.grp.name))

    def scenarios(self):
        if not self.sc:
            raise UsageError(f"{self.tm}: no scenario files found")
        out = []
        for p in self.sc:
            out.extend(parse_scenarios(_read(p), p.name))
        return out


# --- output --------------------------------------------------------------


def _emit(cfg: CliConfig, text: str) -> None:
    if cfg.out:
        try:
            Path(cfg.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"{cfg.out}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)


def _note(cfg: CliConfig, msg: str, level: int = 0) -> None:
    if cfg.verbosity >= level:
        print(msg, file=sys.stderr)


def _render(cfg: CliConfig, obj, default: str = "dot") -> str:
    fmt = cfg.format or default
    return export_dot(obj) if fmt == "dot" else dumps(to_json(obj))


# --- commands ------------------------------------------------------------


def cmd_check(cfg: CliConfig, args) -> int:
    target = Target(args.target)
    diags = check_static(target.model)
    for d in diags:
        print(f"{target.tm.name}: {d}", file=sys.stderr)
    if cfg.format == "json":
        _emit(cfg, dumps([{"code": d.code, "message": d.message, "subject": d.subject} for d in diags]))
    if diags:
        raise Failure(f"{len(diags)} diagnostic(s)")
    _note(cfg, f"{target.tm.name}: ok", 1)
    return OK


def cmd_events(cfg: CliConfig, args) -> int:
    target = Target(args.target, events=args.events)
    diags = validate_events(target.events)
    for d in diags:
        print(f"{target.ev.name}: {d}", file=sys.stderr)
    if cfg.format == "json":
        _emit(cfg, dumps(to_json(target.behavior())["events"]))
    else:
        _emit(cfg, serialize_events(target.events))
    if diags:
        raise Failure(f"{len(diags)} diagnostic(s)")
    return OK


def cmd_behavior(cfg: CliConfig, args) -> int:
    target = Target(args.target, events=args.events)
    _emit(cfg, _render(cfg, target.behavior()))
    return OK


def cmd_carve(cfg: CliConfig, args) -> int:
    if cfg.max_parts is not None and not args.auto:
        raise UsageError("--max-parts needs --auto")
    if args.groups and args.auto:
        raise UsageError("--groups and --auto are exclusive")
    target = Target(args.target, events=args.events, groups=args.groups)
    carving = target.carving(args.auto, cfg.max_parts)
    if carving.notice:
        _note(cfg, f"notice: {carving.notice}")
    _emit(cfg, _render(cfg, carving))
    return OK


def cmd_export(cfg: CliConfig, args) -> int:
    target = Target(args.target, events=args.events, groups=args.groups)
    if args.what == "static":
        obj = target.model
    elif args.what == "behavior":
        obj = target.behavior()
    else:
        obj = target.carving(args.auto, cfg.max_parts)
    _emit(cfg, _render(cfg, obj))
    return OK


def _injections(target: Target, args) -> list:
    out = []
    if args.injections:
        path = Path(args.injections)
        out.extend(parse_injections(_read(path), target.model, path.name))
    for text in args.inject or ():
        if text.lstrip().startswith("inject "):
            out.extend(parse_injections(text, target.model, "--inject"))
        elif target.fixture is not None:
            try:
                out.extend(expand_shorthand(target.fixture, text))
            except ValueError as exc:
                raise UsageError(f"--inject: {exc}") from None
        else:
            raise UsageError(f"--inject {text!r}: expected 'inject NODE THING a=..'")
    return out


def cmd_simulate(cfg: CliConfig, args) -> int:
    target = Target(args.target, events=args.events)
    injections = _injections(target, args)
    error = None
    try:
        trace = simulate(target.model, injections, max_steps=cfg.max_steps)
    except SimulationError as exc:
        trace, error = exc.trace, exc
    if cfg.format == "json":
        data = {
            "status": "failed" if error and trace.status == "quiescent" else trace.status,
            "firings": [f.to_json() for f in trace.firings],
            "stores": {s: [t.to_json() for t in items] for s, items in trace.stores},
        }
        if target.ev.exists():
            data["events"] = project(trace.nodes(), target.behavior())
        _emit(cfg, dumps(data))
    else:
        _emit(cfg, trace.to_jsonl())
    _note(cfg, f"{len(trace.firings)} firing(s), status {trace.status}", 1)
    if error is not None:
        raise Failure(f"simulation: {error}")
    return OK


def cmd_conforms(cfg: CliConfig, args) -> int:
    target = Target(args.target, events=args.events)
    path = Path(args.trace)
    try:
        trace = Trace.from_jsonl(_read(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise Failure(f"{path.name}: malformed trace ({exc})") from None
    try:
        report = conforms(trace, target.behavior())
    except UnmappedNode as exc:
        raise Failure(f"unmapped node: {exc}") from None
    _emit(cfg, dumps(report.to_json()))
    for v in report.violations:
        print(f"violation: {v}", file=sys.stderr)
    if not report.conformant:
        raise Failure("trace does not conform")
    return OK


def cmd_validate(cfg: CliConfig, args) -> int:
    target = Target(args.target, events=args.events, groups=args.groups, scenarios=args.scenarios)
    started = time.perf_counter()
    reports = run_all(target.model, target.events, target.carving(), target.scenarios())
    data = {
        "model": target.model.name,
        "passed": all(r.passed for r in reports),
        "scenarios": [r.to_json(include_time=args.timings) for r in reports],
    }
    if args.timings:
        data["wall_time"] = time.perf_counter() - started
    lines = []
    for r in reports:
        lines.append(r.summary())
        if r.notice:
            lines.append(f"  notice: {r.notice}")
        if cfg.verbosity >= 1:
            for f in r.failures[:5]:
                lines.append(f"  {f.inputs}: {'; '.join(f.messages)}")
    if cfg.format == "json":
        _emit(cfg, dumps(data))
        for line in lines:
            print(line, file=sys.stderr)
    else:
        _emit(cfg, "\n".join(lines) + "\n")
    if args.report:
        try:
            Path(args.report).write_text(dumps(data), encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"{args.report}: {exc.strerror or exc}") from None
    if not data["passed"]:
        raise Failure("some scenario cases failed")
    return OK


# --- argument parsing ----------------------------------------------------


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("target", help="fixture name or path to a .tm model")
    common.add_argument("--out", help="write the result here instead of standard output")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--events", help="events file (default: beside the model)")

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("dot", "json"))

    carving = argparse.ArgumentParser(add_help=False)
    carving.add_argument("--groups", help="grouping file for a manual carving")
    carving.add_argument("--auto", action="store_true", help="search for a carving instead of reading one")
    carving.add_argument("--max-parts", type=_positive)

    p = argparse.ArgumentParser(prog="tmkit", description="Thinging machine models: check, carve, simulate, validate.")
    p.add_argument("--version", action="version", version=f"tmkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("check", parents=[common, fmt], help="static legality diagnostics")
    sub.add_parser("events", parents=[common, fmt], help="validate and print the events")
    sub.add_parser("behavior", parents=[common, fmt], help="derive the behavioral model")
    sub.add_parser("carve", parents=[common, fmt, carving], help="group events into super-events")

    s = sub.add_parser("simulate", parents=[common, fmt], help="run the model and print its trace")
    s.add_argument("--inject", action="append", metavar="INJECTION",
                   help="'inject NODE THING a=..' or a fixture shorthand such as cola+75")
    s.add_argument("--injections", metavar="FILE", help="file of inject lines")
    s.add_argument("--max-steps", type=_positive, default=DEFAULT_MAX_STEPS)

    c = sub.add_parser("conforms", parents=[common], help="check a JSON-lines trace against the events")
    c.add_argument("--trace", required=True, metavar="FILE")

    v = sub.add_parser("validate", parents=[common, fmt], help="run the scenario files")
    v.add_argument("--groups", help="grouping file (default: beside the model)")
    v.add_argument("--scenarios", nargs="+", metavar="FILE")
    v.add_argument("--report", metavar="FILE", help="write the JSON report here")
    v.add_argument("--timings", action="store_true", help="include wall-clock times in the report")

    e = sub.add_parser("export", parents=[common, fmt, carving], help="render one artifact")
    e.add_argument("what", choices=("static", "behavior", "carving"))
    return p


COMMANDS = {
    "check": cmd_check,
    "events": cmd_events,
    "behavior": cmd_behavior,
    "carve": cmd_carve,
    "simulate": cmd_simulate,
    "conforms": cmd_conforms,
    "validate": cmd_validate,
    "export": cmd_export,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        cfg = CliConfig(
            args.command, [args.target], args.out,
            getattr(args, "max_steps", DEFAULT_MAX_STEPS), getattr(args, "max_parts", None),
            getattr(args, "format", None), args.verbose,
        )
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"tmkit: error: {exc}", file=sys.stderr)
        return USAGE
    except Failure as exc:
        print(f"tmkit: {exc}", file=sys.stderr)
        return FAILED
    except DslError as exc:
        print(exc, file=sys.stderr)
        return FAILED
    except (ModelError, EventsError) as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return FAILED
    except CarveError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return FAILED
    except ValueError as exc:
        print(f"tmkit: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
