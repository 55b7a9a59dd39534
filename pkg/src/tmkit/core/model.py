"""Static thinging-machine models: thimacs, typed action nodes, flows and triggers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Union

from tmkit.expr import Effect, Guard, Value


class Kind(enum.Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"  # arrive + accept


DIRECTIONS = ("in", "out")
ATTR_TYPES = ("int", "text")


@dataclass(frozen=True)
class ThingDecl:
    name: str
    attrs: tuple = ()  # ((attr, "int" | "text"), ...)

    def attr_type(self, attr: str) -> Optional[str]:
        return dict(self.attrs).get(attr)


@dataclass(frozen=True)
class ThingInstance:
    thing_type: str
    attrs: tuple = ()  # sorted ((attr, value), ...)

    @classmethod
    def of(cls, thing_type: str, attrs: Optional[dict] = None) -> "ThingInstance":
        return cls(thing_type, tuple(sorted((attrs or {}).items())))

    def as_dict(self) -> dict:
        return dict(self.attrs)

    def to_json(self) -> dict:
        return {"type": self.thing_type, "attrs": dict(self.attrs)}


@dataclass(frozen=True)
class Thimac:
    name: str
    parent: Optional[str] = None
    is_store: bool = False
    contents: tuple = ()  # ThingInstance, in store order


@dataclass(frozen=True)
class ActionNode:
    id: str
    kind: Kind
    thing_type: str
    thimac: str
    direction: Optional[str] = None  # transfer only
    effect: Optional[Effect] = None

    @property
    def stage(self) -> str:
        if self.kind is Kind.TRANSFER:
            return f"transfer({self.direction})"
        return self.kind.value

    @property
    def is_transfer_in(self) -> bool:
        return self.kind is Kind.TRANSFER and self.direction == "in"

    @property
    def is_transfer_out(self) -> bool:
        return self.kind is Kind.TRANSFER and self.direction == "out"


@dataclass(frozen=True)
class FlowEdge:
    src: str
    dst: str


@dataclass(frozen=True)
class TriggerEdge:
    src: str
    dst: str
    guard: Optional[Guard] = None
    otherwise: bool = False  # fires only when no guarded sibling fired


Edge = Union[FlowEdge, TriggerEdge]


@dataclass(frozen=True)
class StaticModel:
    name: str = "model"
    things: tuple = ()
    thimacs: tuple = ()
    nodes: tuple = ()
    flows: tuple = ()
    triggers: tuple = ()

    @cached_property
    def node_index(self) -> dict[str, ActionNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def thimac_index(self) -> dict[str, Thimac]:
        return {t.name: t for t in self.thimacs}

    @cached_property
    def thing_index(self) -> dict[str, ThingDecl]:
        return {t.name: t for t in self.things}

    @cached_property
    def flows_in(self) -> dict[str, list[FlowEdge]]:
        out: dict[str, list[FlowEdge]] = {n.id: [] for n in self.nodes}
        for f in self.flows:
            out[f.dst].append(f)
        return out

    @cached_property
    def flows_out(self) -> dict[str, list[FlowEdge]]:
        out: dict[str, list[FlowEdge]] = {n.id: [] for n in self.nodes}
        for f in self.flows:
            out[f.src].append(f)
        return out

    @cached_property
    def triggers_in(self) -> dict[str, list[TriggerEdge]]:
        out: dict[str, list[TriggerEdge]] = {n.id: [] for n in self.nodes}
        for t in self.triggers:
            out[t.dst].append(t)
        return out

    @cached_property
    def triggers_out(self) -> dict[str, list[TriggerEdge]]:
        out: dict[str, list[TriggerEdge]] = {n.id: [] for n in self.nodes}
        for t in self.triggers:
            out[t.src].append(t)
        return out

    def node(self, node_id: str) -> ActionNode:
        return self.node_index[node_id]

    def store(self, name: str) -> Thimac:
        t = self.thimac_index[name]
        if not t.is_store:
            raise KeyError(f"{name} is not a store")
        return t

    def edges(self) -> Iterable[Edge]:
        yield from self.flows
        yield from self.triggers


# --- building --------------------------------------------------------------


class ModelError(Exception):
    """All resolution failures found while building a model."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class Declarations:
    """Mutable bag of declarations, resolved all at once by build_model."""

    name: str = "model"
    things: list = field(default_factory=list)
    thimacs: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    flows: list = field(default_factory=list)
    triggers: list = field(default_factory=list)


def build_model(decls: Declarations | None = None) -> StaticModel:
    """Resolve declarations into an immutable model.

    Raises ModelError listing every failure; never returns a partial model.
    """
    decls = decls or Declarations()
    errors: list[str] = []

    def dupes(items, what):
        seen = set()
        for name in items:
            if name in seen:
                errors.append(f"duplicate {what} {name!r}")
            seen.add(name)

    dupes([t.name for t in decls.things], "thing")
    dupes([t.name for t in decls.thimacs], "thimac")
    dupes([n.id for n in decls.nodes], "node id")

    things = {t.name: t for t in decls.things}
    thimacs = {t.name: t for t in decls.thimacs}
    for td in decls.things:
        for attr, typ in td.attrs:
            if typ not in ATTR_TYPES:
                errors.append(f"thing {td.name!r}: unknown attribute type {typ!r}")
    for t in decls.thimacs:
        if t.parent is not None and t.parent not in thimacs:
            errors.append(f"thimac {t.name!r}: unknown parent {t.parent!r}")
        if t.contents and not t.is_store:
            errors.append(f"thimac {t.name!r} holds contents but is not a store")
        for item in t.contents:
            td = things.get(item.thing_type)
            if td is None:
                errors.append(f"store {t.name!r}: unknown thing {item.thing_type!r}")
                continue
            for attr, value in item.attrs:
                if td.attr_type(attr) is None:
                    errors.append(f"store {t.name!r}: thing {td.name!r} has no attribute {attr!r}")
    # nesting must be a tree
    for t in decls.thimacs:
        seen = {t.name}
        cur = t.parent
        while cur is not None and cur in thimacs:
            if cur in seen:
                errors.append(f"thimac nesting cycle through {t.name!r}")
                break
            seen.add(cur)
            cur = thimacs[cur].parent

    for n in decls.nodes:
        if n.thimac not in thimacs:
            errors.append(f"node {n.id!r}: unknown thimac {n.thimac!r}")
        if n.thing_type not in things:
            errors.append(f"node {n.id!r}: unknown thing {n.thing_type!r}")
        if n.kind is Kind.TRANSFER and n.direction not in DIRECTIONS:
            errors.append(f"node {n.id!r}: transfer needs exactly one direction (in|out)")
        if n.kind is not Kind.TRANSFER and n.direction is not None:
            errors.append(f"node {n.id!r}: only transfer nodes carry a direction")
        if n.effect is not None and n.kind not in (Kind.CREATE, Kind.PROCESS):
            errors.append(f"node {n.id!r}: effect on {n.stage} node (only create/process allowed)")

    ids = {n.id for n in decls.nodes}
    for e in list(decls.flows) + list(decls.triggers):
        what = "flow" if isinstance(e, FlowEdge) else "trigger"
        for end in (e.src, e.dst):
            if end not in ids:
                errors.append(f"{what} {e.src} -> {e.dst}: unknown node {end!r}")

    if errors:
        raise ModelError(errors)
    return StaticModel(
        name=decls.name,
        things=tuple(decls.things),
        thimacs=tuple(decls.thimacs),
        nodes=tuple(decls.nodes),
        flows=tuple(decls.flows),
        triggers=tuple(decls.triggers),
    )


def coerce_value(value: Value, typ: str) -> Value:
    if typ == "int":
        if isinstance(value, (list, tuple)):
            raise TypeError("list value for int attribute")
        return int(value)
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)
