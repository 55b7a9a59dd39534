"""Structural diagnostics for static models (stage legality, triggers, guards)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from tmkit.core.model import Kind, StaticModel
from tmkit.expr import Distribute, Emit, Guard, Lit, Pop, Ref, SetAttr

# (from stage, to stage) -> required locality
FLOW_LEGALITY = {
    ("create", "process"): "intra",
    ("create", "release"): "intra",
    ("receive", "process"): "intra",
    ("receive", "release"): "intra",
    ("process", "release"): "intra",
    ("release", "transfer(out)"): "intra",
    ("transfer(in)", "receive"): "intra",
    ("transfer(out)", "transfer(in)"): "inter",
}
TRIGGER_SOURCES = (Kind.CREATE, Kind.PROCESS)
TRIGGER_TARGETS = (Kind.CREATE, Kind.PROCESS, Kind.RELEASE, Kind.TRANSFER)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    subject: str = ""

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def flow_is_legal(src_stage: str, dst_stage: str, same_thimac: bool) -> bool:
    need = FLOW_LEGALITY.get((src_stage, dst_stage))
    if need is None:
        return False
    return same_thimac if need == "intra" else not same_thimac


def check_static(model: StaticModel) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    nodes = model.node_index

    for f in model.flows:
        a, b = nodes[f.src], nodes[f.dst]
        same = a.thimac == b.thimac
        if flow_is_legal(a.stage, b.stage, same):
            continue
        subject = f"{f.src} -> {f.dst}"
        if not same and (a.stage, b.stage) != ("transfer(out)", "transfer(in)"):
            diags.append(Diagnostic(
                "illegal cross-thimac flow",
                f"flow {subject} crosses {a.thimac} -> {b.thimac} but is {a.stage} -> {b.stage}; "
                "only transfer(out) -> transfer(in) may cross thimacs",
                subject,
            ))
        else:
            where = "within one thimac" if same else "across thimacs"
            diags.append(Diagnostic(
                "illegal stage succession",
                f"flow {subject}: {a.stage} -> {b.stage} {where}",
                subject,
            ))

    for t in model.triggers:
        a, b = nodes[t.src], nodes[t.dst]
        subject = f"{t.src} -> {t.dst}"
        if a.kind not in TRIGGER_SOURCES:
            diags.append(Diagnostic(
                "illegal trigger source", f"trigger {subject} starts at a {a.stage} node", subject))
        if b.kind not in TRIGGER_TARGETS:
            diags.append(Diagnostic(
                "illegal trigger target", f"trigger {subject} ends at a {b.stage} node", subject))
        if t.otherwise and t.guard is not None:
            diags.append(Diagnostic(
                "malformed trigger", f"trigger {subject} is both guarded and 'otherwise'", subject))

    for n in model.nodes:
        if n.is_transfer_out and not any(nodes[f.dst].is_transfer_in for f in model.flows_out[n.id]):
            diags.append(Diagnostic(
                "unmatched transfer", f"transfer(out) {n.id} has no matching transfer(in)", n.id))

    diags.extend(_flow_cycles(model))
    visible = visible_things(model)
    for t in model.triggers:
        if t.guard is not None:
            diags.extend(_check_guard(model, t.guard, visible[t.src], f"{t.src} -> {t.dst}"))
    for n in model.nodes:
        if n.effect is not None:
            diags.extend(_check_effect(model, n, visible[n.id]))
    return diags


def _flow_cycles(model: StaticModel) -> list[Diagnostic]:
    color: dict[str, int] = {}
    found: list[Diagnostic] = []
    succ = {n.id: [f.dst for f in model.flows_out[n.id]] for n in model.nodes}
    for root in sorted(succ):
        if root in color:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        path = [root]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                path.pop()
            elif color.get(nxt) == 1:
                cyc = path[path.index(nxt):]
                found.append(Diagnostic(
                    "flow cycle",
                    "flows form a cycle " + " -> ".join(cyc + [nxt]) + "; loops must go through triggers or stores",
                    nxt,
                ))
            elif nxt not in color:
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(succ[nxt])))
    return found


def visible_things(model: StaticModel) -> dict[str, frozenset]:
    """Thing types whose attributes may be read when a node fires."""
    base: dict[str, set] = {}
    for n in model.nodes:
        own = {n.thing_type}
        if n.effect is not None:
            for s in n.effect.statements:
                if isinstance(s, Pop) and s.store in model.thimac_index:
                    own.update(i.thing_type for i in model.thimac_index[s.store].contents)
                elif isinstance(s, Emit):
                    own.add(s.thing)
        base[n.id] = own
    preds: dict[str, list[str]] = {n.id: [] for n in model.nodes}
    for e in model.edges():
        preds[e.dst].append(e.src)
    vis = {k: set(v) for k, v in base.items()}
    changed = True
    while changed:
        changed = False
        for nid, ps in preds.items():
            before = len(vis[nid])
            for p in ps:
                vis[nid] |= vis[p]
            if len(vis[nid]) != before:
                changed = True
    return {k: frozenset(v) for k, v in vis.items()}


def _operand_type(model: StaticModel, op, visible, subject, diags) -> Optional[str]:
    if isinstance(op, Lit):
        return "int" if isinstance(op.value, int) else "text"
    td = model.thing_index.get(op.thing)
    if td is None or op.thing not in visible:
        diags.append(Diagnostic(
            "invisible attribute", f"{subject}: {op} is not visible here", subject))
        return None
    typ = td.attr_type(op.attr)
    if typ is None:
        diags.append(Diagnostic(
            "unknown attribute", f"{subject}: thing {op.thing!r} has no attribute {op.attr!r}", subject))
    return typ


def _check_guard(model: StaticModel, g: Guard, visible, subject: str) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    lt = _operand_type(model, g.lhs, visible, subject, diags)
    rt = _operand_type(model, g.rhs, visible, subject, diags)
    if lt and rt and lt != rt:
        diags.append(Diagnostic(
            "ill-typed guard", f"{subject}: guard {g} compares {lt} with {rt}", subject))
    return diags


def _check_effect(model: StaticModel, node, visible) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    subject = node.id
    for store in node.effect.stores():
        t = model.thimac_index.get(store)
        if t is None or not t.is_store:
            diags.append(Diagnostic("unknown store", f"{subject}: {store!r} is not a store thimac", subject))
    for s in node.effect.statements:
        if isinstance(s, SetAttr) and model.thing_index[node.thing_type].attr_type(s.attr) is None:
            diags.append(Diagnostic(
                "unknown attribute", f"{subject}: thing {node.thing_type!r} has no attribute {s.attr!r}", subject))
        if isinstance(s, Distribute):
            td = model.thing_index.get(s.item_thing)
            if td is None or td.attr_type(s.item_attr) is None:
                diags.append(Diagnostic(
                    "unknown attribute", f"{subject}: no attribute {s.item_thing}.{s.item_attr}", subject))
        if isinstance(s, Emit):
            td = model.thing_index.get(s.thing)
            if td is None:
                diags.append(Diagnostic("unknown thing", f"{subject}: emits unknown thing {s.thing!r}", subject))
    for ref in node.effect.refs():
        if isinstance(ref, Ref):
            _operand_type(model, ref, visible, subject, diags)
    return diags
