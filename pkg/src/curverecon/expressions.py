"""Safe arithmetic expressions for direction fields, metrics and boundary data.

Expressions are parsed with :mod:`ast` against a whitelist and converted to
sympy, so derivatives are exact and the same expression can be evaluated with
numpy or jax.
"""
import ast

import numpy as np
import sympy as sp

FUNCTIONS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "sqrt": sp.sqrt}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


class ExpressionError(ValueError):
    pass


def parse_expression(text, variables=("x", "y")):
    """Parse ``text`` into a sympy expression over ``variables``.

    Allowed: numbers, the named variables, ``+ - * / ^`` (``**`` also works),
    unary minus and the functions sin, cos, exp, sqrt.
    """
    if not isinstance(text, str):
        raise ExpressionError(f"expression must be a string, got {type(text).__name__}")
    symbols = {name: sp.Symbol(name, real=True) for name in variables}
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc.msg}") from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return sp.nsimplify(node.value) if isinstance(node.value, int) else sp.Float(node.value)
        if isinstance(node, ast.Name):
            if node.id in symbols:
                return symbols[node.id]
            if node.id == "pi":
                return sp.pi
            raise ExpressionError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](build(node.left), build(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = build(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in FUNCTIONS and len(node.args) == 1 and not node.keywords:
            return FUNCTIONS[node.func.id](build(node.args[0]))
        raise ExpressionError(f"unsupported construct {ast.dump(node)[:40]}... in {text!r}")

    return build(tree)


def symbols_for(variables):
    return [sp.Symbol(name, real=True) for name in variables]


class CompiledExpression:
    """Numpy/jax evaluators for a sympy expression, broadcast to the input shape."""

    def __init__(self, expr, variables):
        self.expr = expr
        self.variables = tuple(variables)
        syms = symbols_for(variables)
        self._np = sp.lambdify(syms, expr, modules="numpy")
        self._jax = None
        self._syms = syms
        self.is_constant = not (expr.free_symbols & set(syms))

    def __call__(self, *args, xp=np):
        if xp is np:
            args = [np.asarray(a, dtype=float) for a in args]
            out = self._np(*args)
            shape = np.broadcast_shapes(*[a.shape for a in args]) if args else ()
            return np.broadcast_to(np.asarray(out, dtype=float), shape).copy() if shape \
                else float(out)
        if self._jax is None:
            self._jax = sp.lambdify(self._syms, self.expr, modules="jax")
        out = self._jax(*args)
        return out + 0.0 * args[0]

    def diff(self, variable):
        return CompiledExpression(sp.diff(self.expr, sp.Symbol(variable, real=True)),
                                  self.variables)


def compile_expression(text, variables=("x", "y")):
    return CompiledExpression(parse_expression(text, variables), variables)
