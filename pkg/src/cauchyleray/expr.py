"""A small, safe expression language for data given as text.

Expressions are parsed with :mod:`ast` and only a whitelist of nodes is
accepted.  Variables (1-based): ``z1``, ``x1``, ``y1``, ``zb1`` (the
conjugate of ``z1``).  Functions: ``conj``, ``abs``, ``abs2``, ``sqrt``,
``exp``, ``log``, ``sin``, ``cos``, ``re``, ``im``.  Constants ``pi``,
``e``, ``i``/``j`` (imaginary unit) and Python complex literals like
``2j``.  Operators ``+ - * / **``.
"""

from __future__ import annotations

import ast
import re
from typing import Callable, Dict, Sequence

import numpy as np

from .forms import FormField, index_position, multi_indices


class ExpressionError(ValueError):
    """Malformed or disallowed expression."""


_FUNCS: Dict[str, Callable] = {
    "conj": np.conj,
    "abs": np.abs,
    "abs2": lambda w: np.abs(w) ** 2,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "re": np.real,
    "im": np.imag,
}
_CONSTS = {"pi": np.pi, "e": np.e, "i": 1j, "j": 1j}
_VAR = re.compile(r"^(x|y|z|zb)([1-9][0-9]*)$")
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}


def _validate(node, n):
    if isinstance(node, ast.Expression):
        return _validate(node.body, n)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
            raise ExpressionError(f"unsupported literal {node.value!r}")
        return
    if isinstance(node, ast.Name):
        m = _VAR.match(node.id)
        if m:
            if int(m.group(2)) > n:
                raise ExpressionError(f"variable {node.id} exceeds dimension {n}")
            return
        if node.id not in _CONSTS:
            raise ExpressionError(f"unknown name {node.id!r}")
        return
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _validate(node.left, n)
        _validate(node.right, n)
        return
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        _validate(node.operand, n)
        return
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExpressionError("only the whitelisted functions may be called")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes exactly one argument")
        _validate(node.args[0], n)
        return
    raise ExpressionError(f"unsupported syntax: {type(node).__name__}")


def _eval(node, z):
    if isinstance(node, ast.Constant):
        return complex(node.value)
    if isinstance(node, ast.Name):
        m = _VAR.match(node.id)
        if not m:
            return _CONSTS[node.id]
        w = z[..., int(m.group(2)) - 1]
        kind = m.group(1)
        return {"z": w, "zb": np.conj(w), "x": w.real, "y": w.imag}[kind]
    if isinstance(node, ast.BinOp):
        a, b = _eval(node.left, z), _eval(node.right, z)
        if isinstance(node.op, ast.Pow):
            return _power(a, b)
        return _BINOPS[type(node.op)](a, b)
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, z)
        return -v if isinstance(node.op, ast.USub) else v
    return _FUNCS[node.func.id](_eval(node.args[0], z))


def _power(a, b):
    # integer exponents stay exact; real exponents of real bases use the real branch
    if np.isscalar(b) and complex(b).imag == 0 and float(complex(b).real).is_integer():
        k = int(complex(b).real)
        return a ** k if k >= 0 else 1.0 / (a ** -k)
    a_arr = np.asarray(a)
    if np.all(np.imag(a_arr) == 0) and np.all(np.imag(b) == 0) and np.all(np.real(a_arr) >= 0):
        return np.real(a_arr) ** np.real(b)
    return np.power(a_arr.astype(complex), b)


def compile_expression(text: str, n: int) -> Callable:
    """Compile ``text`` into ``f(z)`` for complex points ``(..., n)``."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression")
    try:
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    _validate(tree, n)
    body = tree.body

    def f(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _eval(body, z)
        return np.broadcast_to(np.asarray(out, dtype=complex), z.shape[:-1])

    f.source = text
    return f


def parse_index(key, n: int):
    """``"1-2"`` or ``[1, 2]`` (1-based) to a sorted 0-based tuple; ``"0"`` or ``""`` is empty."""
    if isinstance(key, (list, tuple)):
        items = [int(k) for k in key]
    else:
        key = str(key).strip()
        items = [] if key in ("", "0") else [int(k) for k in re.split(r"[-,\s]+", key) if k]
    if any(k < 1 or k > n for k in items) or len(set(items)) != len(items):
        raise ExpressionError(f"bad multi-index {key!r} for n={n}")
    return tuple(sorted(k - 1 for k in items))


def form_from_expressions(n: int, q: int, components, name: str = "phi") -> FormField:
    """A (0,q)-form from ``{index: expression}`` (indices 1-based) or a list in index order.

    Indices given out of order pick up the sign of the sorting
    permutation, so ``{"2-1": "z1"}`` means ``z1 dzbar_2 ^ dzbar_1``.
    """
    pos = index_position(n, q)
    if isinstance(components, str):
        if q != 0:
            raise ExpressionError("a single expression only describes a function (q = 0)")
        components = {"0": components}
    if isinstance(components, (list, tuple)):
        if len(components) != len(pos):
            raise ExpressionError(f"expected {len(pos)} components for a (0,{q})-form")
        components = {"-".join(str(j + 1) for j in J) or "0": e
                      for J, e in zip(multi_indices(n, q), components)}
    compiled = []
    for key, text in components.items():
        raw = ([int(k) for k in key] if isinstance(key, (list, tuple))
               else [] if str(key).strip() in ("", "0")
               else [int(k) for k in re.split(r"[-,\s]+", str(key).strip()) if k])
        J = parse_index(key, n)
        if len(J) != q:
            raise ExpressionError(f"index {key!r} has degree {len(J)}, expected {q}")
        inv = sum(1 for a in range(len(raw)) for b in range(a + 1, len(raw)) if raw[a] > raw[b])
        compiled.append((pos[J], -1.0 if inv % 2 else 1.0, compile_expression(text, n)))
    size = len(pos)

    def func(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape[:-1] + (size,), complex)
        for i, s, f in compiled:
            out[..., i] += s * f(z)
        return out

    return FormField(n, q, func, "expression", name=name)
