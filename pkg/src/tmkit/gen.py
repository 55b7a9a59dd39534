"""Seeded generator of small legal models with events and a legal grouping.

Models are built from *chains*: one thing type created in a thimac, then
handed from thimac to thimac through transfer pairs. Later chains may be
started by triggers from earlier ones, some guarded. Each chain's node
sequence is cut into contiguous event regions.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from typing import Optional

from tmkit.carve import atomic_blocks
from tmkit.core.model import (
    ActionNode,
    Declarations,
    FlowEdge,
    Kind,
    StaticModel,
    Thimac,
    ThingDecl,
    ThingInstance,
    TriggerEdge,
    build_model,
)
from tmkit.events import Event, EventsModel, build_behavior, make_events
from tmkit.expr import Append, BinOp, Effect, Guard, Lit, Ref, SetAttr
from tmkit.util import natural_key

_WORDS = ("order", "coin", "ticket", "request", "record", "parcel", "note", "token", "price", "cart")
_TEXT_CHARS = string.ascii_letters + string.digits + ' -_,.:"\\é→'


@dataclass(frozen=True)
class Generated:
    model: StaticModel
    events: EventsModel
    grouping: tuple  # ((super-event name, (event, ...)), ...)

    @property
    def behavior(self):
        return build_behavior(self.events)


def _text(rng: random.Random, n: int = 8) -> str:
    return "".join(rng.choice(_TEXT_CHARS) for _ in range(rng.randint(0, n)))


class _Builder:
    def __init__(self, rng: random.Random, max_events: int):
        self.rng = rng
        self.max_events = max_events
        self.decls = Declarations()
        self.segments: list[list[str]] = []  # event regions, in creation order
        self.trigger_sources: list[tuple[str, str]] = []  # (node id, thing type)

    def node(self, nid, kind, thing, thimac, direction=None, effect=None) -> str:
        self.decls.nodes.append(ActionNode(nid, kind, thing, thimac, direction, effect))
        return nid

    def effect_for(self, kind: Kind, thing: ThingDecl) -> Optional[Effect]:
        rng = self.rng
        attrs = dict(thing.attrs)
        if rng.random() < 0.5:
            return None
        stmts = []
        if "v" in attrs:
            if kind is Kind.CREATE:
                stmts.append(SetAttr("v", Lit(rng.randint(0, 99))))
            else:
                stmts.append(SetAttr("v", BinOp(rng.choice("+-*"), Ref(thing.name, "v"), Lit(rng.randint(1, 9)))))
        if "label" in attrs and kind is Kind.CREATE and rng.random() < 0.5:
            stmts.append(SetAttr("label", Lit(_text(rng))))
        stores = [t.name for t in self.decls.thimacs if t.is_store]
        if kind is Kind.PROCESS and stores and rng.random() < 0.3:
            stmts.append(Append(rng.choice(stores)))
        return Effect(tuple(stmts)) if stmts else None

    def chain(self, ci: int, thing: ThingDecl, thimacs: list[str], budget: int) -> list[str]:
        """Add one chain; returns its node ids in flow order."""
        rng = self.rng
        hops = rng.randint(0, min(2, len(thimacs) - 1))
        path = [rng.choice(thimacs)]
        for _ in range(hops):
            path.append(rng.choice([t for t in thimacs if t != path[-1]]))
        seq: list[str] = []
        k = 0

        def add(kind, thimac, direction=None):
            nonlocal k
            k += 1
            eff = self.effect_for(kind, thing) if kind in (Kind.CREATE, Kind.PROCESS) else None
            nid = self.node(f"c{ci}_{kind.value}{k}", kind, thing.name, thimac, direction, eff)
            if seq:
                self.decls.flows.append(FlowEdge(seq[-1], nid))
            seq.append(nid)
            if kind in (Kind.CREATE, Kind.PROCESS):
                self.trigger_sources.append((nid, thing.name))
            return nid

        add(Kind.CREATE, path[0])
        if rng.random() < 0.5:
            add(Kind.PROCESS, path[0])
        for i, dst in enumerate(path[1:]):
            add(Kind.RELEASE, path[i])
            add(Kind.TRANSFER, path[i], "out")
            add(Kind.TRANSFER, dst, "in")
            add(Kind.RECEIVE, dst)
            if rng.random() < 0.5:
                add(Kind.PROCESS, dst)
        # cut into contiguous regions, never more than the event budget
        cuts = sorted(rng.sample(range(1, len(seq)), min(len(seq) - 1, rng.randint(0, max(0, budget - 1)))))
        bounds = [0] + cuts + [len(seq)]
        for a, b in zip(bounds, bounds[1:]):
            self.segments.append(seq[a:b])
        return seq

    def trigger_into(self, target: str):
        rng = self.rng
        src, thing = rng.choice(self.trigger_sources)
        td = next(t for t in self.decls.things if t.name == thing)
        guard = None
        if "v" in dict(td.attrs) and rng.random() < 0.4:
            guard = Guard(Ref(thing, "v"), rng.choice(("<", ">=", "=", "!=")), Lit(rng.randint(0, 99)))
            self.decls.triggers.append(TriggerEdge(src, target, guard))
            return src, guard
        self.decls.triggers.append(TriggerEdge(src, target))
        return src, None


def generate(seed: int, max_events: int = 10, max_chains: int = 4) -> Generated:
    """A legal model, its events and a legal grouping; same seed, same result."""
    rng = random.Random(seed)
    b = _Builder(rng, max_events)
    d = b.decls
    d.name = f"gen-{seed}"

    n_things = rng.randint(1, 3)
    for i in range(n_things):
        attrs = [a for a in (("v", "int"), ("label", "text")) if rng.random() < 0.7]
        d.things.append(ThingDecl(f"{rng.choice(_WORDS)}{i + 1}", tuple(attrs)))
    n_thimacs = rng.randint(1, 4)
    names = [f"T{i + 1}" for i in range(n_thimacs)]
    for i, name in enumerate(names):
        parent = names[rng.randrange(i)] if i and rng.random() < 0.3 else None
        d.thimacs.append(Thimac(name, parent))
    if rng.random() < 0.4:
        td = rng.choice(d.things)
        contents = []
        for _ in range(rng.randint(0, 3)):
            vals = {a: (rng.randint(-50, 50) if typ == "int" else _text(rng)) for a, typ in td.attrs}
            contents.append(ThingInstance.of(td.name, vals))
        d.thimacs.append(Thimac("Store", names[0], True, tuple(contents)))

    n_chains = rng.randint(1, max_chains)
    for ci in range(1, n_chains + 1):
        budget = max_events - len(b.segments) - (n_chains - ci)
        if budget < 1:
            break
        thing = rng.choice(d.things)
        seq = b.chain(ci, thing, names, budget)
        if ci > 1 and rng.random() < 0.8:
            src, guard = b.trigger_into(seq[0])
            if guard is not None and rng.random() < 0.5:
                # an alternative branch to a fresh create, taken otherwise
                alt = b.node(f"c{ci}_alt", Kind.CREATE, thing.name, d.nodes[-1].thimac)
                d.triggers.append(TriggerEdge(src, alt, otherwise=True))
                if len(b.segments) < max_events:
                    b.segments.append([alt])
                else:
                    # joined to its trigger source's region, which stays connected
                    next(s for s in b.segments if src in s).append(alt)

    model = build_model(d)
    events = [
        Event(f"E{i + 1}", _description(rng), frozenset(region),
              rng.choice((None, None, f"t{i + 1}")))
        for i, region in enumerate(b.segments)
    ]
    em = make_events(model, events)
    return Generated(model, em, _grouping(rng, em))


def _description(rng: random.Random) -> str:
    words = rng.sample(_WORDS, rng.randint(1, 4))
    text = " ".join(words).capitalize()
    if rng.random() < 0.2:
        text += ' "quoted" \\ end'
    return text


def _grouping(rng: random.Random, em: EventsModel) -> tuple:
    """Random merges of atomic blocks along joints, keeping parts connected."""
    behavior = build_behavior(em)
    blocks = [set(bl) for bl in atomic_blocks(behavior)]
    for _ in range(rng.randint(0, len(blocks))):
        adjacent = [
            (i, j) for i in range(len(blocks)) for j in range(i + 1, len(blocks))
            if any((e.src in blocks[i] and e.dst in blocks[j]) or (e.src in blocks[j] and e.dst in blocks[i])
                   for e in behavior.edges)
        ]
        if not adjacent:
            break
        i, j = rng.choice(adjacent)
        blocks[i] |= blocks.pop(j)
    blocks.sort(key=lambda bl: min(natural_key(m) for m in bl))
    return tuple(
        (f"G{i + 1}", tuple(sorted(bl, key=natural_key))) for i, bl in enumerate(blocks)
    )


__all__ = ["Generated", "generate"]
