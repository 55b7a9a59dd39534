"""Run scenarios against the simulator and judge them with oracles."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from tmkit.core.model import ThingInstance
from tmkit.harness.oracle import OracleError
from tmkit.harness.scenario import Scenario, UpstreamOutput, enumerate_inputs
from tmkit.sim import SimulationError, node_event_map, simulate
from tmkit.util import natural_key

EXCERPT_LIMIT = 60
OBSERVED_LIMIT = 20


@dataclass(frozen=True)
class CaseFailure:
    inputs: dict
    expected: dict
    observed: dict
    messages: tuple
    trace: tuple  # "step node event" lines within the target super-event

    def to_json(self) -> dict:
        return {
            "inputs": self.inputs,
            "expected": self.expected,
            "observed": self.observed,
            "messages": list(self.messages),
            "trace": list(self.trace),
        }


@dataclass(frozen=True)
class ValidationReport:
    scenario: str
    super_event: str
    cases_total: int
    cases_passed: int
    failures: tuple = ()
    outputs: dict = field(default_factory=dict)  # output name -> tuple of values
    notice: Optional[str] = None
    wall_time: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.cases_passed <= self.cases_total:
            raise ValueError("cases_passed out of range")
        if len(self.failures) != self.cases_total - self.cases_passed:
            raise ValueError("failure count does not match totals")

    @property
    def passed(self) -> bool:
        return self.cases_passed == self.cases_total

    def summary(self) -> str:
        return f"scenario {self.scenario}: {self.cases_passed}/{self.cases_total} passed"

    def to_json(self, include_time: bool = False) -> dict:
        out = {
            "scenario": self.scenario,
            "super_event": self.super_event,
            "cases_total": self.cases_total,
            "cases_passed": self.cases_passed,
            "failures": [f.to_json() for f in self.failures],
            "outputs": {k: list(v) for k, v in sorted(self.outputs.items())},
            "notice": self.notice,
        }
        if include_time:
            out["wall_time"] = self.wall_time
        return out


def _as_attr(value):
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return value


def _target_nodes(target: str, model, events) -> list[str]:
    if target in model.node_index:
        return [target]
    ev = events.by_name.get(target)
    if ev is None:
        raise ValueError(f"unknown node or event {target!r}")
    return sorted(ev.region)


def check_scenario(scenario: Scenario, model, events, carving) -> None:
    """Raise ValueError if the scenario names things the artifacts lack."""
    if scenario.super_event not in {se.name for se in carving.super_events}:
        raise ValueError(f"scenario {scenario.name}: unknown super-event {scenario.super_event!r}")
    for inj in scenario.injections:
        if inj.node not in model.node_index:
            raise ValueError(f"scenario {scenario.name}: unknown node {inj.node!r}")
    for a in scenario.assertions:
        if a.kind == "stores":
            t = model.thimac_index.get(a.target)
            if t is None or not t.is_store:
                raise ValueError(f"scenario {scenario.name}: unknown store {a.target!r}")
        else:
            _target_nodes(a.target, model, events)
    for o in scenario.outputs:
        if o.node not in model.node_index:
            raise ValueError(f"scenario {scenario.name}: unknown node {o.node!r}")


def _produced(trace, nodes, thing: str) -> list[dict]:
    nodes = set(nodes)
    return [t.as_dict() for f in trace.firings if f.node in nodes for t in f.produced if t.thing_type == thing]


def _judge(assertion, binding, trace, model, events):
    """Return (expected, observed, message or None) for one assertion."""
    if assertion.kind == "stores":
        expected = assertion.bound.evaluate(binding)
        observed = len(dict(trace.stores).get(assertion.target, ())) if trace else None
        ok = observed == expected
        return expected, observed, None if ok else f"store {assertion.target}: expected {expected} items, found {observed}"
    nodes = _target_nodes(assertion.target, model, events)
    counts = {n: trace.count(n) for n in nodes} if trace else {n: 0 for n in nodes}
    if assertion.kind == "never":
        fired = sum(counts.values())
        return 0, fired, None if fired == 0 else f"{assertion.target} fired {fired} time(s), expected never"
    if assertion.kind == "count":
        bound = assertion.bound.evaluate(binding)
        observed = max(counts.values())
        return bound, observed, None if observed <= bound else f"{assertion.target} fired {observed} times, bound {bound}"
    # fires
    if not any(counts.values()):
        return True, False, f"{assertion.target} never fired"
    expected, observed = {}, {}
    problems = []
    for chk in assertion.checks:
        key = f"{chk.thing}.{chk.attr}"
        want = _as_attr(chk.expected.evaluate(binding))
        got = [p.get(chk.attr) for p in _produced(trace, nodes, chk.thing)]
        expected[key] = want
        observed[key] = got[:OBSERVED_LIMIT]
        bad = [v for v in got if v != want]
        if not got:
            problems.append(f"{assertion.target} produced no {chk.thing}")
        elif bad:
            more = f" ({len(bad) - 1} more mismatches)" if len(bad) > 1 else ""
            problems.append(f"{key}: expected {want!r}, got {bad[0]!r}{more}")
    return expected, observed, "; ".join(problems) or None


def _excerpt(trace, nodes_of_super: set, node_event: dict) -> tuple:
    if trace is None:
        return ()
    lines = [
        f"{f.step} {f.node} {node_event.get(f.node, '?')}"
        for f in trace.firings if f.node in nodes_of_super
    ]
    return tuple(lines[:EXCERPT_LIMIT])


def run_scenario(model, events, carving, scenario: Scenario, upstream: Optional[dict] = None) -> ValidationReport:
    """Simulate every binding of the scenario and check each assertion.

    Expected values come only from the binding; the simulator is consulted
    solely for observations.
    """
    started = time.perf_counter()
    check_scenario(scenario, model, events, carving)
    bindings = enumerate_inputs(scenario.generators, model, upstream)
    se = next(s for s in carving.super_events if s.name == scenario.super_event)
    node_event = node_event_map(carving.behavior)
    super_nodes = {n for n, ev in node_event.items() if ev in se.members}

    failures = []
    outputs: dict[str, list] = {o.name: [] for o in scenario.outputs}
    for binding in bindings:
        messages, expected, observed = [], {}, {}
        trace = None
        try:
            injections = [
                (inj.node, ThingInstance.of(inj.thing, {a: _as_attr(o.evaluate(binding)) for a, o in inj.attrs}))
                for inj in scenario.injections
            ]
            trace = simulate(model, injections, max_steps=scenario.max_steps)
        except SimulationError as exc:
            messages.append(f"simulation: {exc}")
            trace = exc.trace
        except (OracleError, ValueError) as exc:
            messages.append(f"injection: {exc}")
        if trace is not None:
            for i, a in enumerate(scenario.assertions):
                try:
                    if a.condition is not None and not a.condition.evaluate(binding):
                        continue
                    want, got, problem = _judge(a, binding, trace, model, events)
                except (OracleError, ValueError) as exc:
                    want, got, problem = None, None, f"oracle: {exc}"
                label = f"{i + 1}: {a}"
                expected[label] = want
                observed[label] = got
                if problem:
                    messages.append(problem)
        if messages:
            failures.append(CaseFailure(
                _jsonable(binding), expected, observed, tuple(messages),
                _excerpt(trace, super_nodes, node_event),
            ))
            continue
        for o in scenario.outputs:
            vals = [p[o.attr] for p in _produced(trace, [o.node], o.thing) if o.attr in p]
            if vals and vals[-1] not in outputs[o.name]:
                outputs[o.name].append(vals[-1])
    out_values = {k: tuple(sorted(v, key=_value_key)) for k, v in outputs.items()}
    return ValidationReport(
        scenario.name, scenario.super_event, len(bindings), len(bindings) - len(failures),
        tuple(failures), out_values, None, time.perf_counter() - started,
    )


def _value_key(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, natural_key(str(v)))


def _jsonable(binding: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in binding.items()}


def chain_scenarios(upstream_reports: Sequence[ValidationReport], downstream: Scenario, model, events, carving) -> ValidationReport:
    """Run ``downstream`` with its upstream generators drawn from earlier reports."""
    available = {(r.scenario, name): vals for r in upstream_reports for name, vals in r.outputs.items()}
    empty = []
    for g in downstream.generators:
        if isinstance(g, UpstreamOutput):
            key = (g.scenario, g.output)
            if key not in available:
                raise ValueError(f"scenario {downstream.name}: no upstream output {g.scenario}.{g.output}")
            if not available[key]:
                empty.append(f"{g.scenario}.{g.output}")
    if empty:
        check_scenario(downstream, model, events, carving)
        return ValidationReport(
            downstream.name, downstream.super_event, 0, 0,
            notice=f"empty upstream output: {', '.join(empty)}", wall_time=0.0,
        )
    return run_scenario(model, events, carving, downstream, available)


def run_all(model, events, carving, scenarios: Sequence[Scenario]) -> list[ValidationReport]:
    """Run scenarios in dependency order; reports come back in input order."""
    by_name = {s.name: s for s in scenarios}
    if len(by_name) != len(scenarios):
        raise ValueError("duplicate scenario names")
    done: dict[str, ValidationReport] = {}
    visiting: set = set()

    def run(s: Scenario):
        if s.name in done:
            return
        if s.name in visiting:
            raise ValueError(f"scenario dependency cycle through {s.name}")
        visiting.add(s.name)
        for up in s.upstream():
            if up not in by_name:
                raise ValueError(f"scenario {s.name}: unknown upstream scenario {up!r}")
            run(by_name[up])
        if s.upstream():
            done[s.name] = chain_scenarios([done[u] for u in s.upstream()], s, model, events, carving)
        else:
            done[s.name] = run_scenario(model, events, carving, s)
        visiting.discard(s.name)

    for s in scenarios:
        run(s)
    return [done[s.name] for s in scenarios]
