from tmkit.dsl.events import (
    parse_events,
    parse_groups,
    parse_injections,
    serialize_events,
    serialize_groups,
    serialize_injections,
)
from tmkit.dsl.lexer import DslError, ParseError, SourceSpan
from tmkit.dsl.model import parse_model, serialize_model

__all__ = [
    "DslError", "ParseError", "SourceSpan", "parse_events", "parse_groups", "parse_injections",
    "parse_model", "serialize_events", "serialize_groups", "serialize_injections", "serialize_model",
]
