"""Predicate and arithmetic expressions over finite-domain variables.

Expressions are immutable trees.  Evaluation is vectorised: variables are
looked up in an environment mapping names to numpy arrays (or scalars) of
*raw* values, where booleans are 0/1, bounded integers are their own value
and enumeration labels are their index in the declared label tuple.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np


class ExprTypeError(Exception):
    """Ill-typed or unresolvable expression."""

    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (line {pos[0]}, column {pos[1]})"
        super().__init__(message)


# -- types --------------------------------------------------------------------

@dataclass(frozen=True)
class BoolType:
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class IntType:
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class EnumType:
    labels: tuple

    def __str__(self):
        return "{" + ", ".join(self.labels) + "}"


BOOL = BoolType()
INT = IntType()
Type = Union[BoolType, IntType, EnumType]


# -- nodes --------------------------------------------------------------------
# `pos` is (line, column) of the source token; it never takes part in equality.

def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    value: object
    type: Type
    pos: tuple = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    type: Type
    primed: bool = False
    pos: tuple = _pos()


@dataclass(frozen=True)
class Name:
    """Identifier not yet resolved to a variable or enumeration label."""
    name: str
    primed: bool = False
    pos: tuple = _pos()


@dataclass(frozen=True)
class Not:
    arg: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"
    pos: tuple = _pos()


CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "mod")


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    pos: tuple = _pos()


@dataclass(frozen=True)
class Ite:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    pos: tuple = _pos()


Expr = Union[Const, Var, Name, Not, And, Or, Cmp, BinOp, Neg, Ite]

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)


# -- construction helpers -----------------------------------------------------

def conj(parts):
    """Left-nested conjunction; ``true`` for no parts."""
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts):
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def value_const(value, type_):
    if isinstance(type_, BoolType):
        return Const(bool(value), BOOL)
    if isinstance(type_, IntType):
        return Const(int(value), INT)
    if value not in type_.labels:
        raise ExprTypeError(f"label {value!r} not in {type_}")
    return Const(value, type_)


def equals(var: Var, value):
    """``var = value``; for booleans the bare literal ``var`` / ``not var``."""
    if isinstance(var.type, BoolType):
        return var if value else Not(var)
    return Cmp("=", var, value_const(value, var.type))


# -- queries ------------------------------------------------------------------

def children(e):
    if isinstance(e, (Const, Var, Name)):
        return ()
    if isinstance(e, (Not, Neg)):
        return (e.arg,)
    if isinstance(e, Ite):
        return (e.cond, e.then, e.orelse)
    return (e.left, e.right)


def variables(e, primed=None):
    """Names of variables referenced by ``e`` (optionally only primed/unprimed)."""
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, (Var, Name)):
            if primed is None or node.primed == primed:
                out.add(node.name)
        stack.extend(children(node))
    return out


def mentions_primed(e):
    return bool(variables(e, primed=True))


# -- type checking ------------------------------------------------------------

def typecheck(e, scope: Mapping[str, Type], *, allow_primed=True, expected=None):
    """Resolve names against ``scope`` and check typing rules.

    Returns ``(resolved_expr, type)``.  Bare identifiers that are not variables
    are resolved as enumeration labels, which needs an enumeration type from
    context (the other comparison operand or the assignment target).
    """
    if isinstance(e, Const):
        return e, e.type
    if isinstance(e, Var):
        return e, e.type
    if isinstance(e, Name):
        if e.name in scope:
            if e.primed and not allow_primed:
                raise ExprTypeError(f"primed variable {e.name}' not allowed here", e.pos)
            t = scope[e.name]
            return Var(e.name, t, e.primed, pos=e.pos), t
        if e.primed:
            raise ExprTypeError(f"unknown variable {e.name!r}", e.pos)
        if isinstance(expected, EnumType):
            if e.name not in expected.labels:
                raise ExprTypeError(f"{e.name!r} is not a label of {expected}", e.pos)
            return Const(e.name, expected, pos=e.pos), expected
        raise ExprTypeError(f"unknown identifier {e.name!r}", e.pos)
    if isinstance(e, Not):
        a, ta = typecheck(e.arg, scope, allow_primed=allow_primed, expected=BOOL)
        _want(ta, BOOL, e.arg)
        return Not(a, pos=e.pos), BOOL
    if isinstance(e, (And, Or)):
        a, ta = typecheck(e.left, scope, allow_primed=allow_primed, expected=BOOL)
        b, tb = typecheck(e.right, scope, allow_primed=allow_primed, expected=BOOL)
        _want(ta, BOOL, e.left)
        _want(tb, BOOL, e.right)
        return type(e)(a, b, pos=e.pos), BOOL
    if isinstance(e, Cmp):
        left, right = e.left, e.right
        # resolve the side that can stand alone first so labels get context
        if _is_label_candidate(left, scope) and not _is_label_candidate(right, scope):
            b, tb = typecheck(right, scope, allow_primed=allow_primed)
            a, ta = typecheck(left, scope, allow_primed=allow_primed, expected=tb)
        else:
            a, ta = typecheck(left, scope, allow_primed=allow_primed)
            b, tb = typecheck(right, scope, allow_primed=allow_primed, expected=ta)
        if ta != tb:
            raise ExprTypeError(f"cannot compare {ta} with {tb}", e.pos)
        if e.op not in ("=", "!=") and not isinstance(ta, IntType):
            raise ExprTypeError(f"operator {e.op} needs integer operands, got {ta}", e.pos)
        return Cmp(e.op, a, b, pos=e.pos), BOOL
    if isinstance(e, BinOp):
        a, ta = typecheck(e.left, scope, allow_primed=allow_primed, expected=INT)
        b, tb = typecheck(e.right, scope, allow_primed=allow_primed, expected=INT)
        _want(ta, INT, e.left)
        _want(tb, INT, e.right)
        if e.op == "*" and not (_is_int_literal(a) or _is_int_literal(b)):
            raise ExprTypeError("multiplication needs a constant operand", e.pos)
        if e.op == "mod":
            if not _is_int_literal(b):
                raise ExprTypeError("modulus must be an integer constant", e.pos)
            if b.value == 0:
                raise ExprTypeError("modulo by zero", e.pos)
        return BinOp(e.op, a, b, pos=e.pos), INT
    if isinstance(e, Neg):
        a, ta = typecheck(e.arg, scope, allow_primed=allow_primed, expected=INT)
        _want(ta, INT, e.arg)
        return Neg(a, pos=e.pos), INT
    if isinstance(e, Ite):
        c, tc = typecheck(e.cond, scope, allow_primed=allow_primed, expected=BOOL)
        _want(tc, BOOL, e.cond)
        if _is_label_candidate(e.then, scope) and not _is_label_candidate(e.orelse, scope):
            b, tb = typecheck(e.orelse, scope, allow_primed=allow_primed, expected=expected)
            a, ta = typecheck(e.then, scope, allow_primed=allow_primed, expected=tb)
        else:
            a, ta = typecheck(e.then, scope, allow_primed=allow_primed, expected=expected)
            b, tb = typecheck(e.orelse, scope, allow_primed=allow_primed, expected=ta)
        if ta != tb:
            raise ExprTypeError(f"branches have different types {ta} and {tb}", e.pos)
        return Ite(c, a, b, pos=e.pos), ta
    raise TypeError(f"not an expression: {e!r}")


def _want(actual, wanted, node):
    if actual != wanted:
        raise ExprTypeError(f"expected {wanted} expression, got {actual}", getattr(node, "pos", None))


def _is_label_candidate(e, scope):
    return isinstance(e, Name) and not e.primed and e.name not in scope


def _is_int_literal(e):
    return isinstance(e, Const) and isinstance(e.type, IntType)


# -- evaluation ---------------------------------------------------------------

def raw_value(value, type_):
    """Encode a domain value as the raw integer used during evaluation."""
    if isinstance(type_, EnumType):
        return type_.labels.index(value)
    if isinstance(type_, BoolType):
        return int(bool(value))
    return int(value)


def evaluate(e, env):
    """Evaluate ``e`` over raw values; primed names are looked up as ``x'``."""
    if isinstance(e, Var):
        return env[e.name + "'" if e.primed else e.name]
    if isinstance(e, Const):
        if isinstance(e.type, BoolType):
            return np.bool_(e.value)
        return raw_value(e.value, e.type)
    if isinstance(e, And):
        return np.logical_and(evaluate(e.left, env), evaluate(e.right, env))
    if isinstance(e, Or):
        return np.logical_or(evaluate(e.left, env), evaluate(e.right, env))
    if isinstance(e, Not):
        return np.logical_not(evaluate(e.arg, env))
    if isinstance(e, Cmp):
        a = evaluate(e.left, env)
        b = evaluate(e.right, env)
        return _CMP[e.op](a, b)
    if isinstance(e, BinOp):
        a = evaluate(e.left, env)
        b = evaluate(e.right, env)
        if e.op == "+":
            return np.add(a, b)
        if e.op == "-":
            return np.subtract(a, b)
        if e.op == "*":
            return np.multiply(a, b)
        return np.mod(a, b)
    if isinstance(e, Neg):
        return np.negative(evaluate(e.arg, env))
    if isinstance(e, Ite):
        return np.where(evaluate(e.cond, env), evaluate(e.then, env), evaluate(e.orelse, env))
    if isinstance(e, Name):
        raise ExprTypeError(f"unresolved identifier {e.name!r}", e.pos)
    raise TypeError(f"not an expression: {e!r}")


_CMP = {
    "=": np.equal,
    "!=": np.not_equal,
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
}


# -- rendering ----------------------------------------------------------------

_PREC_ITE, _PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_ATOM = range(1, 10)


def render(e) -> str:
    """Concrete syntax for ``e`` that parses back to a structurally equal tree."""
    return _render(e, 0)


def _render(e, ctx):
    text, prec = _render_node(e)
    return f"({text})" if prec < ctx else text


def _render_node(e):
    if isinstance(e, Const):
        if isinstance(e.type, BoolType):
            return ("true" if e.value else "false"), _PREC_ATOM
        if isinstance(e.type, IntType) and e.value < 0:
            return str(e.value), _PREC_NEG
        return str(e.value), _PREC_ATOM
    if isinstance(e, (Var, Name)):
        return e.name + ("'" if e.primed else ""), _PREC_ATOM
    if isinstance(e, Not):
        return "not " + _render(e.arg, _PREC_NOT), _PREC_NOT
    if isinstance(e, Or):
        return _render(e.left, _PREC_OR) + " or " + _render(e.right, _PREC_OR + 1), _PREC_OR
    if isinstance(e, And):
        return _render(e.left, _PREC_AND) + " and " + _render(e.right, _PREC_AND + 1), _PREC_AND
    if isinstance(e, Cmp):
        return f"{_render(e.left, _PREC_CMP + 1)} {e.op} {_render(e.right, _PREC_CMP + 1)}", _PREC_CMP
    if isinstance(e, BinOp):
        prec = _PREC_ADD if e.op in ("+", "-") else _PREC_MUL
        return f"{_render(e.left, prec)} {e.op} {_render(e.right, prec + 1)}", prec
    if isinstance(e, Neg):
        arg = e.arg
        # "-3" would parse as a negative literal, not as Neg(3)
        if isinstance(arg, Const) and isinstance(arg.type, IntType):
            return f"-({_render(arg, 0)})", _PREC_NEG
        return "-" + _render(arg, _PREC_NEG), _PREC_NEG
    if isinstance(e, Ite):
        return (f"if {_render(e.cond, _PREC_ITE)} then {_render(e.then, _PREC_ITE)} "
                f"else {_render(e.orelse, _PREC_ITE)}"), _PREC_ITE
    raise TypeError(f"not an expression: {e!r}")
