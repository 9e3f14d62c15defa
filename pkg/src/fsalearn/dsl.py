"""The ``.ts-dsl`` text format for transition systems and reference automata.

Example::

    system counter;
    option k = 4;
    state c: int[0..3] observe;
    init c = 0;
    on true { c' = (c + 1) mod 4 }

See ``docs/grammar.md`` for the full grammar.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import re

from . import expr as ex
from .system import (DEFAULT_VALIDATION_BOUND, Command, Domain, SystemDefinitionError,
                     TransitionSystem, VariableDecl)

KEYWORDS = {
    "system", "option", "state", "input", "observe", "init", "on", "else", "if", "then",
    "and", "or", "not", "mod", "true", "false", "bool", "int", "reference", "states", "initial",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\.|->|!=|<=|>=|[(){}\[\],;:=<>+\-*'])
""", re.VERBOSE)


class DslError(SystemDefinitionError):
    """Lexical, syntax or type error in a ``.ts-dsl`` document."""


@dataclass(frozen=True)
class Token:
    kind: str      # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "int":
            tokens.append(Token("int", m.group(), line, col))
        elif kind == "ident":
            word = m.group()
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, line, col))
        elif kind == "op":
            tokens.append(Token("op", m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass(frozen=True)
class SystemFile:
    """Parse result: the system, an optional reference automaton and options."""
    system: TransitionSystem
    reference: object = None
    options: dict = field(default_factory=dict)


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, offset=1):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return DslError(message, tok.line, tok.col)

    def at(self, text):
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def take(self, text=None, kind=None):
        tok = self.tok
        if text is not None and not (tok.kind in ("op", "kw") and tok.text == text):
            found = tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        if kind is not None and tok.kind != kind:
            found = tok.text or "end of input"
            raise self.error(f"expected {kind}, found {found!r}")
        self.i += 1
        return tok

    def accept(self, text):
        if self.at(text):
            return self.take(text)
        return None

    def ident(self):
        return self.take(kind="ident")

    # -- expressions ----------------------------------------------------------

    def expression(self):
        if self.at("if"):
            tok = self.take("if")
            cond = self.expression()
            self.take("then")
            then = self.expression()
            self.take("else")
            orelse = self.expression()
            return ex.Ite(cond, then, orelse, pos=(tok.line, tok.col))
        return self.disjunction()

    def disjunction(self):
        left = self.conjunction()
        while self.at("or"):
            tok = self.take("or")
            left = ex.Or(left, self.conjunction(), pos=(tok.line, tok.col))
        return left

    def conjunction(self):
        left = self.negation()
        while self.at("and"):
            tok = self.take("and")
            left = ex.And(left, self.negation(), pos=(tok.line, tok.col))
        return left

    def negation(self):
        if self.at("not"):
            tok = self.take("not")
            return ex.Not(self.negation(), pos=(tok.line, tok.col))
        return self.comparison()

    def comparison(self):
        left = self.additive()
        if self.tok.kind == "op" and self.tok.text in ex.CMP_OPS:
            tok = self.take()
            right = self.additive()
            if self.tok.kind == "op" and self.tok.text in ex.CMP_OPS:
                raise self.error("comparisons do not chain; add parentheses")
            return ex.Cmp(tok.text, left, right, pos=(tok.line, tok.col))
        return left

    def additive(self):
        left = self.multiplicative()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            tok = self.take()
            left = ex.BinOp(tok.text, left, self.multiplicative(), pos=(tok.line, tok.col))
        return left

    def multiplicative(self):
        left = self.unary()
        while self.at("*") or self.at("mod"):
            tok = self.take()
            left = ex.BinOp(tok.text, left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self):
        if self.at("-"):
            tok = self.take("-")
            if self.tok.kind == "int":
                num = self.take()
                return ex.Const(-int(num.text), ex.INT, pos=(tok.line, tok.col))
            return ex.Neg(self.unary(), pos=(tok.line, tok.col))
        return self.atom()

    def atom(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "int":
            self.take()
            return ex.Const(int(tok.text), ex.INT, pos=pos)
        if self.at("true") or self.at("false"):
            self.take()
            return ex.Const(tok.text == "true", ex.BOOL, pos=pos)
        if self.at("("):
            self.take("(")
            inner = self.expression()
            self.take(")")
            return inner
        if tok.kind == "ident":
            self.take()
            primed = bool(self.accept("'"))
            return ex.Name(tok.text, primed, pos=pos)
        found = tok.text or "end of input"
        raise self.error(f"expected an expression, found {found!r}")

    # -- declarations ---------------------------------------------------------

    def signed_int(self):
        neg = bool(self.accept("-"))
        tok = self.take(kind="int")
        return -int(tok.text) if neg else int(tok.text)

    def domain(self):
        tok = self.tok
        try:
            if self.accept("bool"):
                return Domain.boolean()
            if self.accept("int"):
                self.take("[")
                lo = self.signed_int()
                self.take("..")
                hi = self.signed_int()
                self.take("]")
                return Domain.integer(lo, hi)
            if self.accept("{"):
                labels = [self.ident().text]
                while self.accept(","):
                    labels.append(self.ident().text)
                self.take("}")
                return Domain.enumeration(labels)
        except SystemDefinitionError as err:
            if isinstance(err, DslError):
                raise
            raise DslError(str(err), tok.line, tok.col) from None
        raise self.error("expected a domain: bool, int[lo..hi] or {Label, ...}")

    def typed(self, e, scope, allow_primed=False, expected=ex.BOOL):
        try:
            resolved, t = ex.typecheck(e, scope, allow_primed=allow_primed, expected=expected)
        except ex.ExprTypeError as err:
            line, col = err.pos if err.pos else (None, None)
            raise DslError(str(err).split(" (line")[0], line, col) from None
        if expected is not None and t != expected:
            line, col = getattr(e, "pos", None) or (None, None)
            raise DslError(f"expected {expected} expression, got {t}", line, col)
        return resolved

    def assignments(self, scope, variables):
        self.take("{")
        out = []
        seen = set()
        while not self.at("}"):
            target = self.ident()
            decl = variables.get(target.text)
            if decl is None:
                raise self.error(f"unknown variable {target.text!r}", target)
            if decl.role != "state":
                raise self.error(f"cannot assign input variable {target.text!r}", target)
            if target.text in seen:
                raise self.error(f"{target.text} assigned twice", target)
            seen.add(target.text)
            self.take("'")
            self.take("=")
            rhs = self.typed(self.expression(), scope, expected=decl.type)
            out.append((target.text, rhs))
            if not self.accept(";"):
                break
        self.take("}")
        return tuple(out)

    def reference(self, observed_scope):
        from .automaton import SymbolicNFA, Transition
        start = self.take("reference")
        self.take("{")
        states, initial, transitions = [], [], []
        while not self.at("}"):
            if self.accept("states"):
                states.append(self.ident().text)
                while self.accept(","):
                    states.append(self.ident().text)
                self.take(";")
            elif self.accept("initial"):
                initial.append(self.ident())
                while self.accept(","):
                    initial.append(self.ident())
                self.take(";")
            else:
                src = self.ident()
                self.take("->")
                dst = self.ident()
                self.take(":")
                label = self.typed(self.expression(), observed_scope)
                self.take(";")
                for t in (src, dst):
                    if t.text not in states:
                        raise self.error(f"undeclared reference state {t.text!r}", t)
                transitions.append(Transition(src.text, label, dst.text))
        self.take("}")
        for t in initial:
            if t.text not in states:
                raise self.error(f"undeclared reference state {t.text!r}", t)
        try:
            return SymbolicNFA(tuple(states), tuple(t.text for t in initial), tuple(transitions))
        except ValueError as err:
            raise DslError(f"invalid reference automaton: {err}", start.line, start.col) from None

    def document(self, bound):
        name = ""
        options = {}
        variables = {}
        init = None
        init_tok = None
        commands = []
        reference = None
        ref_tok = None
        while self.tok.kind != "eof":
            tok = self.tok
            if self.accept("system"):
                name = self.ident().text
                self.take(";")
            elif self.accept("option"):
                key = self.ident().text
                self.take("=")
                options[key] = self.signed_int()
                self.take(";")
            elif self.at("state") or self.at("input"):
                role = self.take().text
                ident = self.ident()
                if ident.text in variables:
                    raise self.error(f"duplicate variable {ident.text!r}", ident)
                self.take(":")
                dom = self.domain()
                observe = bool(self.accept("observe"))
                self.take(";")
                variables[ident.text] = VariableDecl(ident.text, dom, role, observe)
            elif self.accept("init"):
                if init is not None:
                    raise self.error("init declared twice", tok)
                scope = {n: v.type for n, v in variables.items() if v.role == "state"}
                init = self.typed(self.expression(), scope)
                init_tok = tok
                self.take(";")
            elif self.accept("on"):
                scope = {n: v.type for n, v in variables.items()}
                guard = self.typed(self.expression(), scope)
                commands.append(Command(guard, self.assignments(scope, variables), line=tok.line))
            elif self.accept("else"):
                scope = {n: v.type for n, v in variables.items()}
                commands.append(Command(None, self.assignments(scope, variables), line=tok.line))
            elif self.at("reference"):
                if reference is not None:
                    raise self.error("reference declared twice", tok)
                scope = {n: v.type for n, v in variables.items() if v.observe}
                ref_tok = tok
                reference = self.reference(scope)
            else:
                raise self.error(f"unexpected {tok.text!r}")
        if not variables:
            raise DslError("no variables declared", 1, 1)
        if init is None:
            raise DslError("missing init declaration", self.tok.line, self.tok.col)
        if not commands:
            raise DslError("no guarded commands", self.tok.line, self.tok.col)
        for v in variables.values():
            if isinstance(v.type, ex.EnumType):
                clash = set(v.type.labels) & set(variables)
                if clash:
                    raise DslError(f"labels {sorted(clash)} of {v.name} clash with variable names")
        try:
            sys = TransitionSystem(tuple(variables.values()), init, tuple(commands), name)
            sys.validate(bound)
        except DslError:
            raise
        except SystemDefinitionError as err:
            line = err.line if err.line is not None else (init_tok.line if "init" in str(err) else None)
            msg = str(err)
            if err.line is not None:
                msg = msg.split(": ", 1)[1]
            raise DslError(msg, line, err.column) from None
        if reference is not None:
            reference = reference.with_variables(sys.observed)
        return SystemFile(sys, reference, options)


def parse_system(text, bound=DEFAULT_VALIDATION_BOUND):
    """Parse and validate a ``.ts-dsl`` document into a :class:`SystemFile`."""
    return _Parser(text).document(bound)


def load_system(path, bound=DEFAULT_VALIDATION_BOUND):
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read(), bound)


def parse_expr(text, variables, allow_primed=True, expected=ex.BOOL):
    """Parse one expression typed against ``variables`` (VariableDecls or a name->type map)."""
    if isinstance(variables, dict):
        scope = dict(variables)
    else:
        scope = {v.name: v.type for v in variables}
    p = _Parser(text)
    e = p.expression()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    return p.typed(e, scope, allow_primed=allow_primed, expected=expected)


def render_system(sys, reference=None, options=None):
    """Canonical text for a system; ``parse_system`` inverts it up to formatting."""
    lines = []
    if sys.name:
        lines.append(f"system {sys.name};")
    for key, value in (options or {}).items():
        lines.append(f"option {key} = {value};")
    for v in sys.variables:
        obs = " observe" if v.observe else ""
        lines.append(f"{v.role} {v.name}: {v.domain}{obs};")
    lines.append(f"init {ex.render(sys.init)};")
    for c in sys.commands:
        body = "; ".join(f"{t}' = {ex.render(rhs)}" for t, rhs in c.assignments)
        head = "else" if c.is_default else f"on {ex.render(c.guard)}"
        lines.append(f"{head} {{ {body} }}" if body else f"{head} {{ }}")
    if reference is not None:
        lines.append("reference {")
        lines.append("  states " + ", ".join(reference.states) + ";")
        lines.append("  initial " + ", ".join(reference.initial) + ";")
        for t in reference.transitions:
            lines.append(f"  {t.src} -> {t.dst} : {ex.render(t.label)};")
        lines.append("}")
    return "\n".join(lines) + "\n"
