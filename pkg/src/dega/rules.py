"""Size-dependent parameter rules such as ``(n ln n)^2/3`` or ``500 n^2``.

A rule is either a named alias or an arithmetic expression in ``n`` using
``+ - * / ^ **``, parentheses, ``ln``/``log`` (natural), ``sqrt`` and numbers.
Some rules may also use extra variables, e.g. ``lam`` in an exploitation cap.
"""

from __future__ import annotations

import ast
import math
import operator

ALIASES = {
    "ln": "ln(n)",
    "sqrt-ln": "sqrt(ln(n))",
    "n^1/3": "n^(1/3)",
    "n^1/2": "sqrt(n)",
    "n^2/3": "n^(2/3)",
    "(n ln n)^2/3": "(n*ln(n))^(2/3)",
    "sqrt(n) ln": "sqrt(n)*ln(n)",
}

_FUNCS = {"ln": math.log, "log": math.log, "sqrt": math.sqrt}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _compile(rule: str, names: tuple = ("n",)) -> ast.Expression:
    text = ALIASES.get(rule.strip(), rule).replace("^", "**")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse rule {rule!r}") from exc
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id not in names and node.id not in _FUNCS:
            raise ValueError(f"unknown name {node.id!r} in rule {rule!r}")
        if isinstance(node, ast.Constant) and (
            isinstance(node.value, bool) or not isinstance(node.value, (int, float))
        ):
            raise ValueError(f"rule constants must be numbers in {rule!r}")
        if isinstance(node, ast.Call) and not (
            isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1
        ):
            raise ValueError(f"unsupported call in rule {rule!r}")
        if not isinstance(
            node,
            (ast.Expression, ast.BinOp, ast.UnaryOp, ast.USub, ast.UAdd, ast.Constant,
             ast.Name, ast.Load, ast.Call, *_BINOPS),
        ):
            raise ValueError(f"unsupported syntax in rule {rule!r}")
    return tree


def _eval(node, env: dict) -> float:
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return float(env[node.id])
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    return _FUNCS[node.func.id](_eval(node.args[0], env))


def validate(rule, extra: tuple = ()) -> None:
    """Raise ``ValueError`` unless ``rule`` is a number or a parsable rule."""
    if isinstance(rule, (int, float)):
        return
    _compile(str(rule), ("n", *extra))


def evaluate(rule, n: int, **extra: float) -> float:
    if isinstance(rule, (int, float)):
        return float(rule)
    env = {"n": float(n), **extra}
    return _eval(_compile(str(rule), tuple(env)), env)


def resolve(rule, n: int, minimum: int = 1, **extra: float) -> int:
    """``round(rule(n))``, at least ``minimum``."""
    return max(minimum, int(round(evaluate(rule, n, **extra))))


def resolve_ceil(rule, n: int, minimum: int = 0, **extra: float) -> int:
    """``ceil(rule(n))``, at least ``minimum``; used for counts and budgets."""
    return max(minimum, int(math.ceil(evaluate(rule, n, **extra) - 1e-9)))
