"""Deterministic token-driven execution of static models.

Things travel as attribute-carrying tokens along flows; triggers deposit
control tokens carrying the firing's attribute environment. A node fires when
every incoming flow offers a token (or an injection is queued) and, if any
trigger enters it, a control token is waiting. Among enabled nodes the one
enabled longest ago fires first; ties go to the smaller node id.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from tmkit.core.model import Kind, StaticModel, ThingInstance
from tmkit.expr import (
    Append,
    Distribute,
    Emit,
    EvalError,
    Pop,
    SetAttr,
    check_guard,
    evaluate,
    lookup,
    split_list,
)

DEFAULT_MAX_STEPS = 10_000


@dataclass(frozen=True)
class Firing:
    step: int
    node: str
    consumed: tuple = ()
    produced: tuple = ()
    retrieved: tuple = ()  # things popped from stores
    stored: tuple = ()  # ((store, ThingInstance), ...)
    injected: bool = False  # consumed a thing supplied from outside the model

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "node": self.node,
            "injected": self.injected,
            "consumed": [t.to_json() for t in self.consumed],
            "produced": [t.to_json() for t in self.produced],
            "retrieved": [t.to_json() for t in self.retrieved],
            "stored": [{"store": s, "thing": t.to_json()} for s, t in self.stored],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Firing":
        def thing(j):
            return ThingInstance.of(j["type"], j["attrs"])

        return cls(
            d["step"],
            d["node"],
            tuple(thing(t) for t in d.get("consumed", ())),
            tuple(thing(t) for t in d.get("produced", ())),
            tuple(thing(t) for t in d.get("retrieved", ())),
            tuple((s["store"], thing(s["thing"])) for s in d.get("stored", ())),
            bool(d.get("injected", False)),
        )


@dataclass(frozen=True)
class Trace:
    firings: tuple = ()
    status: str = "quiescent"  # quiescent | exhausted | failed
    stores: tuple = ()  # final ((store, (ThingInstance, ...)), ...)

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(f.to_json(), sort_keys=True, separators=(",", ":")) + "\n" for f in self.firings
        )

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        firings = [Firing.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]
        return cls(tuple(firings))

    def nodes(self) -> list[str]:
        return [f.node for f in self.firings]

    def count(self, node_id: str) -> int:
        return sum(1 for f in self.firings if f.node == node_id)


class SimulationError(Exception):
    def __init__(self, message: str, trace: Trace):
        super().__init__(message)
        self.trace = trace


class StepBudgetExhausted(SimulationError):
    pass


class EffectFailure(SimulationError):
    pass


@dataclass
class _Token:
    thing: ThingInstance
    context: dict
    time: int


@dataclass
class _Control:
    context: dict
    time: int


@dataclass
class SimState:
    buffers: dict  # node id -> deque[_Token] of things leaving that node
    injected: dict  # node id -> deque[_Token]
    controls: dict  # node id -> deque[_Control]
    stores: dict  # store -> list[ThingInstance]
    step: int = 0
    firings: list = field(default_factory=list)
    live: set = field(default_factory=set)  # nodes holding some pending input


def _assigned_attrs(node) -> set:
    if node.effect is None:
        return set()
    return {s.attr for s in node.effect.statements if isinstance(s, SetAttr)}


class Simulator:
    def __init__(self, model: StaticModel):
        self.model = model
        self.flow_preds = {n.id: [f.src for f in model.flows_in[n.id]] for n in model.nodes}
        self.flow_succs = {n.id: [f.dst for f in model.flows_out[n.id]] for n in model.nodes}
        self.gated = {n.id: bool(model.triggers_in[n.id]) for n in model.nodes}
        self.has_out = {n.id: bool(model.flows_out[n.id]) for n in model.nodes}
        self.pops = {
            n.id: [s.store for s in n.effect.statements if isinstance(s, Pop)] if n.effect else []
            for n in model.nodes
        }
        # a create node without an injection may only fire if its effect fixes every attribute
        self.self_sufficient = {}
        for n in model.nodes:
            if n.kind is Kind.CREATE:
                declared = {a for a, _ in model.thing_index[n.thing_type].attrs}
                self.self_sufficient[n.id] = declared <= _assigned_attrs(n)
        self.order = sorted(model.node_index)

    def initial_state(self, injections: Iterable) -> SimState:
        m = self.model
        injected = {nid: deque() for nid in self.order}
        for nid, thing in injections:
            if nid not in m.node_index:
                raise ValueError(f"injection into unknown node {nid!r}")
            node = m.node(nid)
            if not (node.kind is Kind.CREATE or node.is_transfer_in):
                raise ValueError(f"injection node {nid} must be create or transfer(in), not {node.stage}")
            if thing.thing_type != node.thing_type:
                raise ValueError(f"node {nid} handles {node.thing_type}, got {thing.thing_type}")
            injected[nid].append(_Token(thing, {}, 0))
        return SimState(
            buffers={nid: deque() for nid in self.order},
            injected=injected,
            controls={nid: deque() for nid in self.order},
            stores={t.name: list(t.contents) for t in m.thimacs if t.is_store},
            live={nid for nid, q in injected.items() if q},
        )

    # -- enabling ---------------------------------------------------------

    def _plan(self, st: SimState, nid: str):
        """Return (enable time, input source) if nid can fire, else None."""
        node = self.model.node(nid)
        times = []
        if self.gated[nid]:
            if not st.controls[nid]:
                return None
            times.append(st.controls[nid][0].time)
        for store in self.pops[nid]:
            if not st.stores.get(store):
                return None
        preds = self.flow_preds[nid]
        if preds and all(st.buffers[p] for p in preds):
            times.extend(st.buffers[p][0].time for p in preds)
            source = "flow"
        elif st.injected[nid]:
            times.append(st.injected[nid][0].time)
            source = "inject"
        elif preds:
            return None
        elif node.kind is Kind.CREATE:
            if not (self.gated[nid] and self.self_sufficient[nid]):
                return None
            source = "none"
        elif self.gated[nid]:
            source = "none"
        else:
            return None
        return (max(times) if times else 0), source

    def _pending(self, st: SimState, nid: str) -> bool:
        return bool(st.controls[nid] or st.injected[nid] or any(st.buffers[p] for p in self.flow_preds[nid]))

    # -- firing -----------------------------------------------------------

    def _fire(self, st: SimState, nid: str, source: str):
        m = self.model
        node = m.node(nid)
        consumed: list[_Token] = []
        if source == "flow":
            consumed = [st.buffers[p].popleft() for p in self.flow_preds[nid]]
        elif source == "inject":
            consumed = [st.injected[nid].popleft()]
        ctrl = st.controls[nid].popleft() if self.gated[nid] else None

        env: dict = {}
        for holder in consumed + ([ctrl] if ctrl else []):
            for t, attrs in holder.context.items():
                env[t] = dict(attrs)
        for tok in consumed:
            env[tok.thing.thing_type] = tok.thing.as_dict()

        carried: Optional[dict] = None
        carried_type = node.thing_type
        if node.kind is Kind.CREATE:
            carried = consumed[0].thing.as_dict() if consumed else {}
        else:
            match = [t for t in consumed if t.thing.thing_type == node.thing_type] or consumed
            if match:
                carried = match[0].thing.as_dict()
                carried_type = match[0].thing.thing_type
        if carried is not None:
            env[carried_type] = carried

        retrieved, stored, emitted = [], [], []
        decl = m.thing_index
        if node.effect is not None:
            for s in node.effect.statements:
                if isinstance(s, SetAttr):
                    if carried is None:
                        raise EvalError(f"no thing to set {s.attr} on")
                    value = evaluate(s.expr, env)
                    _typecheck(decl[carried_type].attr_type(s.attr), value, f"{carried_type}.{s.attr}")
                    carried[s.attr] = value
                elif isinstance(s, Pop):
                    item = st.stores[s.store].pop(0)
                    retrieved.append(item)
                    carried = item.as_dict()
                    carried_type = item.thing_type
                    env[carried_type] = carried
                elif isinstance(s, Append):
                    if carried is None:
                        raise EvalError(f"nothing to append to {s.store}")
                    inst = ThingInstance.of(carried_type, carried)
                    st.stores[s.store].append(inst)
                    stored.append((s.store, inst))
                elif isinstance(s, Distribute):
                    bins = {v: store for store, v in s.targets}
                    for v in split_list(lookup(s.source, env)):
                        if v not in bins:
                            raise EvalError(f"no store accepts {s.item_thing}.{s.item_attr}={v}")
                        inst = ThingInstance.of(s.item_thing, {s.item_attr: v})
                        st.stores[bins[v]].append(inst)
                        stored.append((bins[v], inst))
                elif isinstance(s, Emit):
                    attrs = {a: evaluate(e, env) for a, e in s.assigns}
                    emitted.append(ThingInstance.of(s.thing, attrs))
        if node.kind is Kind.CREATE:
            missing = [a for a, _ in decl[carried_type].attrs if a not in carried]
            if missing:
                raise EvalError(f"created {carried_type} lacks attribute(s) {', '.join(missing)}")

        produced: list[ThingInstance] = []
        if carried is not None and (self.has_out[nid] or node.kind is Kind.CREATE):
            produced.append(ThingInstance.of(carried_type, carried))
        produced.extend(emitted)
        step = st.step
        if self.has_out[nid]:
            for thing in produced:
                st.buffers[nid].append(_Token(thing, env, step))
            if produced:
                st.live.update(self.flow_succs[nid])

        guarded_fired = False
        outs = m.triggers_out[nid]
        for t in outs:
            if t.guard is not None and check_guard(t.guard, env):
                guarded_fired = True
                st.controls[t.dst].append(_Control(env, step))
                st.live.add(t.dst)
        for t in outs:
            if t.guard is None and (not t.otherwise or not guarded_fired):
                st.controls[t.dst].append(_Control(env, step))
                st.live.add(t.dst)

        st.firings.append(Firing(
            step, nid,
            tuple(tok.thing for tok in consumed),
            tuple(produced),
            tuple(retrieved),
            tuple(stored),
            source == "inject",
        ))

    def run(self, injections: Iterable = (), max_steps: int = DEFAULT_MAX_STEPS) -> Trace:
        if max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        st = self.initial_state(injections)
        while True:
            best = None
            for nid in sorted(st.live):
                plan = self._plan(st, nid)
                if plan is not None:
                    if best is None or plan[0] < best[0]:
                        best = (plan[0], nid, plan[1])
                elif not self._pending(st, nid):
                    st.live.discard(nid)
            if best is None:
                return self._trace(st, "quiescent")
            if st.step >= max_steps:
                raise StepBudgetExhausted(
                    f"step budget exhausted after {max_steps} steps", self._trace(st, "exhausted"))
            st.step += 1
            try:
                self._fire(st, best[1], best[2])
            except EvalError as exc:
                raise EffectFailure(
                    f"effect evaluation failure at {best[1]} (step {st.step}): {exc}",
                    self._trace(st, "failed"),
                ) from None

    def _trace(self, st: SimState, status: str) -> Trace:
        stores = tuple((name, tuple(items)) for name, items in sorted(st.stores.items()))
        return Trace(tuple(st.firings), status, stores)


def _typecheck(expected: Optional[str], value, where: str):
    if expected == "int" and not isinstance(value, int):
        raise EvalError(f"{where} expects int, got {value!r}")
    if expected == "text" and not isinstance(value, str):
        raise EvalError(f"{where} expects text, got {value!r}")


def simulate(model: StaticModel, injections: Iterable = (), max_steps: int = DEFAULT_MAX_STEPS) -> Trace:
    """Run the model from its initial stores. Raises StepBudgetExhausted or
    EffectFailure (both carry the partial trace)."""
    return Simulator(model).run(injections, max_steps)
