"""Oracle expressions: pure arithmetic over a scenario's input binding.

Deliberately separate from the model's own expression language and from the
simulator, so expected values never share code with what they check.
"""

from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.FloorDiv: operator.floordiv,
    ast.Div: operator.floordiv,  # integer money: division truncates toward -inf
    ast.Mod: operator.mod,
}
_CMPOPS = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}


def _count(items, value):
    return list(items).count(value)


_FUNCS = {"sum": sum, "count": _count, "len": len, "min": min, "max": max}


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class Oracle:
    """A parsed oracle expression; call ``evaluate(binding)``."""

    text: str
    tree: ast.Expression = field(compare=False, repr=False)

    def names(self) -> set[str]:
        return {n.id for n in ast.walk(self.tree) if isinstance(n, ast.Name)} - set(_FUNCS)

    def evaluate(self, binding: dict):
        return _eval(self.tree.body, binding)

    def __str__(self) -> str:
        return self.text


def compile_oracle(text: str) -> Oracle:
    text = text.strip()
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise OracleError(f"bad oracle expression {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        _validate(node)
    return Oracle(text, tree)


def _validate(node: ast.AST):
    allowed = (
        ast.Expression, ast.Constant, ast.Name, ast.Load, ast.Attribute, ast.BinOp, ast.UnaryOp,
        ast.USub, ast.Not, ast.BoolOp, ast.And, ast.Or, ast.Compare, ast.Call, ast.Tuple, ast.List,
        *_BINOPS, *_CMPOPS,
    )
    if not isinstance(node, allowed):
        raise OracleError(f"unsupported construct in oracle expression: {type(node).__name__}")
    if isinstance(node, ast.Constant) and not isinstance(node.value, (int, str)):
        raise OracleError(f"unsupported constant {node.value!r}")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
            raise OracleError("only sum, count, len, min and max may be called")
    if isinstance(node, ast.Attribute) and not isinstance(node.value, ast.Name):
        raise OracleError("attribute access must be NAME.attr")


def _eval(node: ast.AST, b: dict):
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in b:
            raise OracleError(f"unbound name {node.id!r}")
        return b[node.id]
    if isinstance(node, ast.Attribute):
        base = _eval(node.value, b)
        if not isinstance(base, dict) or node.attr not in base:
            raise OracleError(f"{node.value.id} has no attribute {node.attr!r}")
        return base[node.attr]
    if isinstance(node, (ast.Tuple, ast.List)):
        return [_eval(e, b) for e in node.elts]
    if isinstance(node, ast.BinOp):
        left, right = _eval(node.left, b), _eval(node.right, b)
        try:
            return _BINOPS[type(node.op)](left, right)
        except (TypeError, ZeroDivisionError) as exc:
            raise OracleError(f"cannot evaluate: {exc}") from None
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, b)
        return -v if isinstance(node.op, ast.USub) else not v
    if isinstance(node, ast.BoolOp):
        vals = (_eval(v, b) for v in node.values)
        return all(vals) if isinstance(node.op, ast.And) else any(vals)
    if isinstance(node, ast.Compare):
        left = _eval(node.left, b)
        for op, comp in zip(node.ops, node.comparators):
            right = _eval(comp, b)
            try:
                if not _CMPOPS[type(op)](left, right):
                    return False
            except TypeError as exc:
                raise OracleError(f"cannot compare: {exc}") from None
            left = right
        return True
    if isinstance(node, ast.Call):
        args = [_eval(a, b) for a in node.args]
        try:
            return _FUNCS[node.func.id](*args)
        except TypeError as exc:
            raise OracleError(f"bad call to {node.func.id}: {exc}") from None
    raise OracleError(f"unsupported construct {type(node).__name__}")
