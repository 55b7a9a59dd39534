"""Graphviz DOT rendering for static models, behavioral models and carvings."""

from __future__ import annotations

from tmkit.core.model import StaticModel


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(obj) -> str:
    # local imports: events/carve depend on core
    from tmkit.carve import Carving
    from tmkit.events import BehavioralModel

    if isinstance(obj, StaticModel):
        return _static_dot(obj)
    if isinstance(obj, Carving):
        return _carving_dot(obj)
    if isinstance(obj, BehavioralModel):
        return _behavior_dot(obj)
    raise TypeError(f"cannot render {type(obj).__name__} as DOT")


def _static_dot(m: StaticModel) -> str:
    lines = [f"digraph {_q(m.name)} {{", "  node [shape=box];"]
    for n in sorted(m.nodes, key=lambda n: n.id):
        lines.append(f'  {_q(n.id)} [label="{n.id}\\n{n.stage} {n.thing_type}\\n[{n.thimac}]"];')
    for f in sorted(m.flows, key=lambda f: (f.src, f.dst)):
        lines.append(f"  {_q(f.src)} -> {_q(f.dst)};")
    for t in sorted(m.triggers, key=lambda t: (t.src, t.dst)):
        attrs = ["style=dashed"]
        if t.guard is not None:
            attrs.append(f"label={_q(str(t.guard))}")
        elif t.otherwise:
            attrs.append('label="otherwise"')
        lines.append(f"  {_q(t.src)} -> {_q(t.dst)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _edge_lines(behavior, indent="  ") -> list[str]:
    out = []
    for e in behavior.edges:
        style = "dashed" if e.kind == "trigger" else "solid"
        label = f"{e.static_src}->{e.static_dst}"
        out.append(f"{indent}{_q(e.src)} -> {_q(e.dst)} [style={style}, label={_q(label)}];")
    return out


def _behavior_dot(b) -> str:
    lines = [f"digraph {_q(b.name + ' behavior')} {{", "  node [shape=ellipse];"]
    for ev in b.events:
        lines.append(f"  {_q(ev.name)};")
    lines.extend(_edge_lines(b))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _carving_dot(c) -> str:
    b = c.behavior
    lines = [f"digraph {_q(b.name + ' carving')} {{", "  node [shape=ellipse];"]
    for i, se in enumerate(c.super_events):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_q(se.name)};")
        for name in se.ordered_members():
            lines.append(f"    {_q(name)};")
        lines.append("  }")
    joints = set(c.joints)
    for e in b.edges:
        style = "dashed" if e.kind == "trigger" else "solid"
        extra = ", penwidth=2, color=red" if e in joints else ""
        label = f"{e.static_src}->{e.static_dst}"
        lines.append(f"  {_q(e.src)} -> {_q(e.dst)} [style={style}, label={_q(label)}{extra}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
