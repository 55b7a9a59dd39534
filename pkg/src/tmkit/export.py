"""JSON renderings of static models, behavioral models and carvings."""

from __future__ import annotations

import json

from tmkit.carve import Carving
from tmkit.core.model import StaticModel
from tmkit.events import BehavioralModel
from tmkit.util import natural_key


def _model_json(m: StaticModel) -> dict:
    return {
        "name": m.name,
        "things": [{"name": t.name, "attrs": [list(a) for a in t.attrs]} for t in m.things],
        "thimacs": [
            {
                "name": t.name,
                "parent": t.parent,
                "store": t.is_store,
                "contents": [c.to_json() for c in t.contents],
            }
            for t in m.thimacs
        ],
        "nodes": [
            {
                "id": n.id,
                "stage": n.stage,
                "thing": n.thing_type,
                "thimac": n.thimac,
                "effect": None if n.effect is None else str(n.effect),
            }
            for n in sorted(m.nodes, key=lambda n: natural_key(n.id))
        ],
        "flows": [[f.src, f.dst] for f in sorted(m.flows, key=lambda f: (f.src, f.dst))],
        "triggers": [
            {
                "src": t.src,
                "dst": t.dst,
                "guard": None if t.guard is None else str(t.guard),
                "otherwise": t.otherwise,
            }
            for t in sorted(m.triggers, key=lambda t: (t.src, t.dst))
        ],
    }


def _edge_json(e) -> dict:
    return {
        "src": e.src,
        "dst": e.dst,
        "kind": e.kind,
        "static": [e.static_src, e.static_dst],
        "transfer": e.transfer,
        "branch": e.branch,
    }


def _behavior_json(b: BehavioralModel) -> dict:
    return {
        "name": b.name,
        "events": [
            {
                "name": ev.name,
                "description": ev.description,
                "nodes": sorted(ev.region, key=natural_key),
                "time": ev.time,
            }
            for ev in b.events
        ],
        "edges": [_edge_json(e) for e in b.edges],
    }


def _carving_json(c: Carving) -> dict:
    return {
        "name": c.behavior.name,
        "super_events": [{"name": se.name, "members": se.ordered_members()} for se in c.super_events],
        "joints": [_edge_json(e) for e in c.joints],
        "notice": c.notice,
    }


def to_json(obj) -> dict:
    if isinstance(obj, StaticModel):
        return _model_json(obj)
    if isinstance(obj, Carving):
        return _carving_json(obj)
    if isinstance(obj, BehavioralModel):
        return _behavior_json(obj)
    raise TypeError(f"cannot render {type(obj).__name__} as JSON")


def dumps(data) -> str:
    """Deterministic JSON text with a trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
