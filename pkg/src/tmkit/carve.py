"""Carving a behavioral model into super-events at its joints.

A joint is a behavioral edge between two super-events. It is legal only when
the static edge inducing it is a trigger or a transfer(out) -> transfer(in)
flow. Edges induced by any other flow bind their events into one atomic block.

Automatic carving picks, among partitions of the atomic blocks into
``k = min(max_parts, #blocks)`` connected parts, the one minimising in order

1. branch cuts: joints induced by a guarded or ``otherwise`` trigger. A
   decision stays in the same super-event as all of its outcomes.
2. the sum of squared part sizes (in events), favouring parts of similar size.
3. entry events: sources, or events with a predecessor outside their part.
4. joints induced by triggers (cuts at transfers are preferred).
5. the total joint count.
6. the canonical (naturally sorted) member listing, as a final tie-break.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

from tmkit.core.check import Diagnostic
from tmkit.events import BehavioralModel, BehaviorEdge, Event
from tmkit.util import natural_key

SEARCH_NODE_LIMIT = 3_000_000


@dataclass(frozen=True)
class SuperEvent:
    name: str
    members: frozenset

    def ordered_members(self) -> list[str]:
        return sorted(self.members, key=natural_key)


@dataclass(frozen=True)
class Carving:
    behavior: BehavioralModel
    super_events: tuple
    joints: tuple
    notice: Optional[str] = None

    def part_of(self) -> dict[str, str]:
        return {m: se.name for se in self.super_events for m in se.members}

    def partition(self) -> frozenset:
        return frozenset(se.members for se in self.super_events)


class CarveError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def _connected(members: set, behavior: BehavioralModel) -> bool:
    if not members:
        return False
    adj = defaultdict(set)
    for e in behavior.edges:
        if e.src in members and e.dst in members:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    start = next(iter(members))
    seen = {start}
    stack = [start]
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen == members


def crossing_edges(behavior: BehavioralModel, part_of: dict[str, str]) -> list[BehaviorEdge]:
    return [e for e in behavior.edges if part_of[e.src] != part_of[e.dst]]


def carve_manual(behavior: BehavioralModel, grouping) -> Carving:
    """Validate a user grouping [(name, event names), ...] and return its Carving.

    Raises CarveError carrying every diagnostic found.
    """
    diags: list[Diagnostic] = []
    known = set(behavior.event_names)
    part_of: dict[str, str] = {}
    names = set()
    for name, members in grouping:
        if name in names:
            diags.append(Diagnostic("duplicate super-event", f"super-event {name!r} declared twice", name))
        names.add(name)
        if not members:
            diags.append(Diagnostic("empty super-event", f"super-event {name!r} has no events", name))
        for m in members:
            if m not in known:
                diags.append(Diagnostic("unknown event", f"super-event {name!r} names unknown event {m!r}", m))
            elif m in part_of:
                diags.append(Diagnostic(
                    "not a partition", f"event {m} is in both {part_of[m]!r} and {name!r}", m))
            else:
                part_of[m] = name
    for ev in behavior.event_names:
        if ev not in part_of:
            diags.append(Diagnostic("not a partition", f"event {ev} belongs to no super-event", ev))
    if diags:
        raise CarveError(diags)
    for name, members in grouping:
        if not _connected(set(members), behavior):
            diags.append(Diagnostic(
                "disconnected super-event", f"super-event {name!r} is not connected", name))
    joints = crossing_edges(behavior, part_of)
    for j in joints:
        if not j.legal_joint:
            diags.append(Diagnostic(
                "joint is not a transfer/trigger",
                f"{j.src} -> {j.dst} ({part_of[j.src]} -> {part_of[j.dst]}) is induced by "
                f"internal flow {j.static_src} -> {j.static_dst}",
                f"{j.src}->{j.dst}",
            ))
    if diags:
        raise CarveError(diags)
    supers = tuple(SuperEvent(name, frozenset(members)) for name, members in grouping)
    return Carving(behavior, supers, tuple(joints))


# --- automatic carving -------------------------------------------------------


def atomic_blocks(behavior: BehavioralModel) -> list[frozenset]:
    """Contract every edge that can never be a joint; blocks in natural order."""
    parent = {n: n for n in behavior.event_names}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in behavior.edges:
        if not e.legal_joint:
            ra, rb = find(e.src), find(e.dst)
            if ra != rb:
                parent[ra] = rb
    groups = defaultdict(set)
    for n in behavior.event_names:
        groups[find(n)].add(n)
    return sorted((frozenset(g) for g in groups.values()), key=_part_key)


def _part_key(members) -> tuple:
    return tuple(natural_key(m) for m in sorted(members, key=natural_key))


def canonical_key(parts) -> tuple:
    return tuple(sorted(_part_key(p) for p in parts))


def partition_score(behavior: BehavioralModel, parts) -> tuple:
    """Objective tuple (smaller is better) for a partition given as event-name sets."""
    part_of = {}
    for i, p in enumerate(parts):
        for m in p:
            part_of[m] = i
    entries = 0
    for ev in behavior.event_names:
        ps = behavior.preds[ev]
        if not ps or any(part_of[q] != part_of[ev] for q in ps):
            entries += 1
    cut = [e for e in behavior.edges if part_of[e.src] != part_of[e.dst]]
    branches = sum(1 for e in cut if e.branch)
    triggers = sum(1 for e in cut if e.kind == "trigger")
    sumsq = sum(len(p) ** 2 for p in parts)
    return branches, sumsq, entries, triggers, len(cut), canonical_key(parts)


def _components(behavior: BehavioralModel) -> int:
    seen = set()
    adj = defaultdict(set)
    for e in behavior.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)
    count = 0
    for n in behavior.event_names:
        if n in seen:
            continue
        count += 1
        seen.add(n)
        stack = [n]
        while stack:
            for m in adj[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
    return count


class _Search:
    """Exact branch and bound over connected k-partitions of the atomic blocks.

    Every edge of the block graph is either kept (its blocks share a part) or
    cut. Kept edges are merged with an undoable union-find, so only connected
    partitions are generated, each exactly once. Components only ever merge,
    which makes their current sum of squares a lower bound.
    """

    def __init__(self, behavior: BehavioralModel, blocks: list[frozenset], k: int):
        self.behavior = behavior
        self.blocks = blocks
        self.k = k
        n = len(blocks)
        block_of = {m: i for i, b in enumerate(blocks) for m in b}
        branch = defaultdict(int)
        pairs = set()
        for e in behavior.edges:
            a, b = block_of[e.src], block_of[e.dst]
            if a != b:
                pair = (min(a, b), max(a, b))
                pairs.add(pair)
                branch[pair] += e.branch
        self.edges = sorted(pairs)
        self.edge_branch = [branch[p] for p in self.edges]
        self.parent = list(range(n))
        self.size = [len(b) for b in blocks]
        self.count = [1] * n  # blocks per root
        self.best: Optional[tuple] = None
        self.best_parts: Optional[list] = None
        self.nodes = 0
        self.exhausted = False

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def _union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if self.count[ra] < self.count[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count[ra] += self.count[rb]
        return ra, rb

    def _undo(self, ra: int, rb: int):
        self.parent[rb] = rb
        self.size[ra] -= self.size[rb]
        self.count[ra] -= self.count[rb]

    def _min_components(self, i: int) -> int:
        """Components left if every undecided edge from index i on were kept."""
        parent = {}

        def f(x):
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        roots = {self.find(x) for x in range(len(self.blocks))}
        n = len(roots)
        for a, b in self.edges[i:]:
            ra, rb = f(self.find(a)), f(self.find(b))
            if ra != rb:
                parent[ra] = rb
                n -= 1
        return n

    def parts(self) -> list[frozenset]:
        groups = defaultdict(set)
        for i, b in enumerate(self.blocks):
            groups[self.find(i)] |= b
        return [frozenset(g) for g in groups.values()]

    def offer_parts(self, parts):
        s = partition_score(self.behavior, parts)
        if self.best is None or s < self.best:
            self.best = s
            self.best_parts = [frozenset(p) for p in parts]

    def run(self, incumbent: Optional[list] = None):
        if incumbent is not None:
            self.offer_parts(incumbent)
        m = len(self.edges)
        cut: list[int] = []
        components = [len(self.blocks)]

        def sumsq() -> int:
            return sum(self.size[i] ** 2 for i in range(len(self.blocks)) if self.parent[i] == i)

        def rec(i: int, branches: int):
            self.nodes += 1
            if self.nodes > SEARCH_NODE_LIMIT:
                self.exhausted = True
                return
            if components[0] < self.k:
                return
            if self.best is not None and (branches, sumsq()) > self.best[:2]:
                return
            if i == m:
                if components[0] == self.k:
                    self.offer_parts(self.parts())
                return
            if self._min_components(i) > self.k:
                return
            a, b = self.edges[i]
            if self.find(a) == self.find(b):
                rec(i + 1, branches)
                return
            # keep: merge, unless that would swallow an earlier cut edge
            ra, rb = self._union(a, b)
            components[0] -= 1
            if not any(self.find(x) == self.find(y) for x, y in (self.edges[j] for j in cut)):
                rec(i + 1, branches)
            components[0] += 1
            self._undo(ra, rb)
            if self.exhausted:
                return
            cut.append(i)
            rec(i + 1, branches + self.edge_branch[i])
            cut.pop()

        rec(0, 0)


def _greedy(behavior: BehavioralModel, blocks: list[frozenset], k: int) -> list[frozenset]:
    """Merge adjacent parts pairwise, always taking the best-scoring merge."""
    parts = list(blocks)
    adj_pairs = {(e.src, e.dst) for e in behavior.edges}
    while len(parts) > k:
        best = None
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                if not any((a, b) in adj_pairs or (b, a) in adj_pairs for a in parts[i] for b in parts[j]):
                    continue
                merged = [p for x, p in enumerate(parts) if x not in (i, j)] + [parts[i] | parts[j]]
                score = partition_score(behavior, merged)
                if best is None or score < best[0]:
                    best = (score, merged)
        if best is None:
            break
        parts = best[1]
    return parts


def carve_auto(behavior: BehavioralModel, max_parts: Optional[int] = None) -> Carving:
    """Best connected partition into at most ``max_parts`` super-events.

    Parts are named SE1, SE2, ... in natural order of their members.
    """
    if max_parts is not None and max_parts < 1:
        raise ValueError("max_parts must be >= 1")
    blocks = atomic_blocks(behavior)
    notice = None
    if len(blocks) == 1 and len(behavior.event_names) > 1:
        notice = "no legal carving: every cut crosses an internal (non-transfer, non-trigger) edge"
    k = len(blocks) if max_parts is None else min(max_parts, len(blocks))
    ncomp = _components(behavior)
    if k < ncomp:
        notice = f"behavioral model has {ncomp} disconnected components; using {ncomp} parts"
        k = ncomp
    if k == len(blocks):
        parts = blocks
    else:
        greedy = _greedy(behavior, blocks, k)
        search = _Search(behavior, blocks, k)
        search.run(greedy if len(greedy) == k else None)
        if search.exhausted:
            notice = "search budget exhausted; result may not be optimal"
        parts = search.best_parts
    parts = sorted(parts, key=_part_key)
    supers = tuple(SuperEvent(f"SE{i + 1}", frozenset(p)) for i, p in enumerate(parts))
    part_of = {m: se.name for se in supers for m in se.members}
    return Carving(behavior, supers, tuple(crossing_edges(behavior, part_of)), notice)


def contract(carving: Carving) -> BehavioralModel:
    """Behavioral model whose events are the super-events, joined by the joints."""
    b = carving.behavior
    part_of = carving.part_of()
    events = []
    for se in carving.super_events:
        region = frozenset().union(*(b.by_name[m].region for m in se.members))
        events.append(Event(se.name, ", ".join(se.ordered_members()), region))
    edges = {
        BehaviorEdge(part_of[j.src], part_of[j.dst], j.kind, j.static_src, j.static_dst, j.transfer, j.branch)
        for j in carving.joints
    }
    events.sort(key=lambda e: natural_key(e.name))
    return BehavioralModel(
        b.name,
        tuple(events),
        tuple(sorted(edges, key=lambda e: (natural_key(e.src), natural_key(e.dst), e.kind, e.static_src, e.static_dst))),
        b.model,
    )
