"""Static-model types, legality checking and DOT export."""

from tmkit.core.check import Diagnostic, FLOW_LEGALITY, check_static, flow_is_legal, visible_things
from tmkit.core.dot import export_dot
from tmkit.core.model import (
    ActionNode,
    Declarations,
    FlowEdge,
    Kind,
    ModelError,
    StaticModel,
    Thimac,
    ThingDecl,
    ThingInstance,
    TriggerEdge,
    build_model,
)

__all__ = [
    "ActionNode", "Declarations", "Diagnostic", "FLOW_LEGALITY", "FlowEdge", "Kind",
    "ModelError", "StaticModel", "Thimac", "ThingDecl", "ThingInstance", "TriggerEdge",
    "build_model", "check_static", "export_dot", "flow_is_legal", "visible_things",
]
