"""Event validity: does an observed trace respect the behavioral model?"""

from __future__ import annotations

from dataclasses import dataclass

from tmkit.events import BehavioralModel, components
from tmkit.util import natural_key


class UnmappedNode(Exception):
    pass


@dataclass(frozen=True)
class Violation:
    event: str
    position: int
    reason: str

    def __str__(self) -> str:
        return f"{self.event} at #{self.position}: {self.reason}"


@dataclass(frozen=True)
class ConformanceReport:
    conformant: bool
    projected: tuple
    violations: tuple = ()

    def to_json(self) -> dict:
        return {
            "conformant": self.conformant,
            "projected": list(self.projected),
            "violations": [
                {"event": v.event, "position": v.position, "reason": v.reason} for v in self.violations
            ],
        }


def node_event_map(behavior: BehavioralModel) -> dict[str, str]:
    """Each node's event; a transfer shared by two regions goes to the side
    holding its flow predecessor."""
    model = behavior.model
    owners: dict[str, list[str]] = {}
    for ev in sorted(behavior.events, key=lambda e: natural_key(e.name)):
        for nid in ev.region:
            owners.setdefault(nid, []).append(ev.name)
    out = {}
    for nid, evs in owners.items():
        if len(evs) == 1 or model is None:
            out[nid] = evs[0]
            continue
        preds = {f.src for f in model.flows_in.get(nid, ())}
        side = [e for e in evs if preds & behavior.by_name[e].region]
        out[nid] = side[0] if side else evs[0]
    return out


def project(trace_nodes, behavior: BehavioralModel) -> list[str]:
    mapping = node_event_map(behavior)
    seq = []
    for nid in trace_nodes:
        if nid not in mapping:
            raise UnmappedNode(f"unmapped node {nid!r}: it lies in no event region")
        seq.append(mapping[nid])
    return seq


def conforms(trace, behavior: BehavioralModel) -> ConformanceReport:
    """Check a trace (or a plain list of node ids) against the behavioral model.

    Consecutive distinct events must share a component (store coupling
    counts) unless the later one is an entry; the first occurrence of every
    event that is not an entry must come after one of its predecessors.
    Entries are source events and events entered by an injected firing,
    where the environment stands in for the missing predecessor.
    """
    if hasattr(trace, "firings"):
        nodes = [f.node for f in trace.firings]
        injected = [f.injected for f in trace.firings]
    else:
        nodes = list(trace)
        injected = [False] * len(nodes)
    seq = project(nodes, behavior)
    comp = components(behavior, with_stores=True)
    sources = behavior.sources
    preds = behavior.preds
    violations = []
    seen: set = set()
    for i, ev in enumerate(seq):
        entry = ev in sources or injected[i]
        if i and seq[i - 1] != ev:
            prev = seq[i - 1]
            if comp[prev] != comp[ev] and not entry:
                violations.append(Violation(ev, i, f"no behavioral path connects {prev} and {ev}"))
        if ev not in seen:
            if not entry and not (preds[ev] & seen):
                names = ", ".join(sorted(preds[ev], key=natural_key))
                violations.append(Violation(ev, i, f"first occurrence precedes all of its predecessors ({names})"))
            seen.add(ev)
    return ConformanceReport(not violations, tuple(seq), tuple(violations))
