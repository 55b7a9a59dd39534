"""Events as connected regions of a static model, and the behavioral model
(precedence between events) derived from region adjacency."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from tmkit.core.check import Diagnostic
from tmkit.core.model import FlowEdge, Kind, StaticModel
from tmkit.util import natural_key


@dataclass(frozen=True)
class Event:
    name: str
    description: str
    region: frozenset
    time: Optional[str] = None  # opaque annotation, never simulated


@dataclass(frozen=True)
class EventsModel:
    model: StaticModel
    events: tuple

    @cached_property
    def by_name(self) -> dict[str, Event]:
        return {e.name: e for e in self.events}

    @cached_property
    def node_events(self) -> dict[str, list[str]]:
        """Node id -> names of events whose region holds it (natural order)."""
        out: dict[str, list[str]] = defaultdict(list)
        for ev in sorted(self.events, key=lambda e: natural_key(e.name)):
            for nid in ev.region:
                out[nid].append(ev.name)
        return dict(out)


class EventsError(Exception):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def make_events(model: StaticModel, events) -> EventsModel:
    """Build an EventsModel, rejecting unknown nodes, duplicate names and empty regions."""
    errors = []
    seen = set()
    for ev in events:
        if ev.name in seen:
            errors.append(f"duplicate event {ev.name!r}")
        seen.add(ev.name)
        if not ev.region:
            errors.append(f"event {ev.name!r} has an empty region")
        for nid in sorted(ev.region):
            if nid not in model.node_index:
                errors.append(f"event {ev.name!r}: unknown node {nid!r}")
    if errors:
        raise EventsError(errors)
    return EventsModel(model, tuple(events))


def _region_connected(model: StaticModel, region: frozenset) -> bool:
    if not region:
        return False
    adj = defaultdict(set)
    for e in model.edges():
        if e.src in region and e.dst in region:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    start = min(region)
    seen = {start}
    stack = [start]
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen == set(region)


def validate_events(em: EventsModel) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    model = em.model
    for ev in em.events:
        if not ev.region:
            diags.append(Diagnostic("empty region", f"event {ev.name} has no nodes", ev.name))
        elif not _region_connected(model, ev.region):
            diags.append(Diagnostic(
                "disconnected region", f"event {ev.name} is not connected in the flow/trigger graph", ev.name))
    owners = em.node_events
    for n in model.nodes:
        evs = owners.get(n.id, [])
        if not evs:
            diags.append(Diagnostic("uncovered node", f"node {n.id} belongs to no event", n.id))
        elif len(evs) > 1 and n.kind is not Kind.TRANSFER:
            diags.append(Diagnostic(
                "illegal overlap",
                f"{n.stage} node {n.id} is shared by {', '.join(evs)}; only transfer nodes may be shared",
                n.id,
            ))
    return diags


# --- behavioral model ------------------------------------------------------


@dataclass(frozen=True)
class BehaviorEdge:
    src: str
    dst: str
    kind: str  # "flow" | "trigger"
    static_src: str
    static_dst: str
    transfer: bool = False  # flow from transfer(out) to transfer(in)
    branch: bool = False  # trigger carrying a guard or ``otherwise``

    @property
    def legal_joint(self) -> bool:
        return self.kind == "trigger" or self.transfer


@dataclass(frozen=True)
class BehavioralModel:
    name: str
    events: tuple  # Event, natural order
    edges: tuple  # BehaviorEdge, deterministic order
    model: Optional[StaticModel] = None

    @cached_property
    def event_names(self) -> list[str]:
        return [e.name for e in self.events]

    @cached_property
    def by_name(self) -> dict[str, Event]:
        return {e.name: e for e in self.events}

    @cached_property
    def preds(self) -> dict[str, set]:
        out = {n: set() for n in self.event_names}
        for e in self.edges:
            if e.src != e.dst:
                out[e.dst].add(e.src)
        return out

    @cached_property
    def succs(self) -> dict[str, set]:
        out = {n: set() for n in self.event_names}
        for e in self.edges:
            if e.src != e.dst:
                out[e.src].add(e.dst)
        return out

    @cached_property
    def sources(self) -> frozenset:
        return frozenset(n for n, ps in self.preds.items() if not ps)

    def reachable(self, a: str, b: str) -> bool:
        seen = {a}
        stack = [a]
        while stack:
            for m in self.succs[stack.pop()]:
                if m == b:
                    return True
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return False

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {(e.src, e.dst) for e in self.edges}


def _edge_sort_key(e: BehaviorEdge):
    return (natural_key(e.src), natural_key(e.dst), e.kind, e.static_src, e.static_dst)


def build_behavior(em: EventsModel) -> BehavioralModel:
    """One labeled precedence edge per static edge running between two distinct regions."""
    model = em.model
    owners = em.node_events
    edges = set()
    for e in model.edges():
        is_flow = isinstance(e, FlowEdge)
        transfer = is_flow and model.node(e.src).is_transfer_out and model.node(e.dst).is_transfer_in
        branch = not is_flow and (e.guard is not None or e.otherwise)
        for a in owners.get(e.src, ()):
            for b in owners.get(e.dst, ()):
                if a != b:
                    edges.add(BehaviorEdge(a, b, "flow" if is_flow else "trigger", e.src, e.dst, transfer, branch))
    events = tuple(sorted(em.events, key=lambda ev: natural_key(ev.name)))
    return BehavioralModel(model.name, events, tuple(sorted(edges, key=_edge_sort_key)), model)


def store_links(behavior: BehavioralModel) -> list[tuple[str, str]]:
    """Pairs of events coupled through a shared store thimac (no static edge needed)."""
    model = behavior.model
    if model is None:
        return []
    touches: dict[str, set] = defaultdict(set)
    for ev in behavior.events:
        for nid in ev.region:
            n = model.node(nid)
            if model.thimac_index[n.thimac].is_store:
                touches[n.thimac].add(ev.name)
            if n.effect is not None:
                for s in n.effect.stores():
                    touches[s].add(ev.name)
    links = []
    for names in touches.values():
        ordered = sorted(names, key=natural_key)
        links.extend(zip(ordered, ordered[1:]))
    return links


def components(behavior: BehavioralModel, with_stores: bool = True) -> dict[str, int]:
    """Undirected component id per event (optionally linking store-coupled events)."""
    parent = {n: n for n in behavior.event_names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pairs = [(e.src, e.dst) for e in behavior.edges]
    if with_stores:
        pairs += store_links(behavior)
    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    roots = {}
    return {n: roots.setdefault(find(n), len(roots)) for n in behavior.event_names}
