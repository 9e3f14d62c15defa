"""Symbolic NFAs: predicate-labelled edges, every state accepting.

A trace is rejected only by running into a dead end, so the language of a
:class:`SymbolicNFA` is prefix-closed by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import json

import numpy as np

from . import expr as ex
from .system import Domain, VarSpace, VariableDecl


@dataclass(frozen=True)
class Transition:
    src: str
    label: object
    dst: str


@dataclass(frozen=True)
class SymbolicNFA:
    states: tuple
    initial: tuple
    transitions: tuple
    variables: tuple = ()     # observed VariableDecls the labels range over

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state ids")
        if not self.states:
            raise ValueError("an automaton needs at least one state")
        known = set(self.states)
        if not self.initial:
            raise ValueError("no initial state")
        for q in self.initial:
            if q not in known:
                raise ValueError(f"unknown initial state {q!r}")
        for t in self.transitions:
            if t.src not in known or t.dst not in known:
                raise ValueError(f"transition {t.src}->{t.dst} uses an unknown state")
            if ex.mentions_primed(t.label):
                raise ValueError("transition labels range over the consumed observation; no primes")
        unreachable = known - self.reachable()
        if unreachable:
            raise ValueError(f"states unreachable from the initial states: {sorted(unreachable)}")

    def reachable(self):
        seen = set(self.initial)
        stack = list(self.initial)
        while stack:
            q = stack.pop()
            for t in self.transitions:
                if t.src == q and t.dst not in seen:
                    seen.add(t.dst)
                    stack.append(t.dst)
        return seen

    def with_variables(self, variables):
        return replace(self, variables=tuple(variables))

    @property
    def observation_space(self):
        return VarSpace(self.variables)

    def outgoing(self, q):
        return [t for t in self.transitions if t.src == q]

    def incoming(self, q):
        return [t for t in self.transitions if t.dst == q]

    # -- acceptance -----------------------------------------------------------

    def label_matrix(self, rows):
        """``(len(rows), n_transitions)`` truth table of edge labels on raw observation rows."""
        space = self.observation_space
        rows = np.asarray(rows, dtype=np.int64).reshape(len(rows), len(space))
        env = space.env(rows)
        n = rows.shape[0]
        cols = [np.broadcast_to(np.asarray(ex.evaluate(t.label, env), dtype=bool), (n,))
                for t in self.transitions]
        if not cols:
            return np.zeros((n, 0), dtype=bool)
        return np.stack(cols, axis=1)

    def _edge_arrays(self):
        index = {q: i for i, q in enumerate(self.states)}
        src = np.array([index[t.src] for t in self.transitions], dtype=np.int64)
        dst = np.array([index[t.dst] for t in self.transitions], dtype=np.int64)
        init = np.zeros(len(self.states), dtype=bool)
        init[[index[q] for q in self.initial]] = True
        return src, dst, init

    def accepts_rows(self, traces):
        """Acceptance for a batch of equal-length traces, shape ``(n, length, n_obs_vars)``."""
        traces = np.asarray(traces, dtype=np.int64)
        n, length = traces.shape[:2]
        src, dst, init = self._edge_arrays()
        alive = np.tile(init, (n, 1))
        if length == 0:
            return np.ones(n, dtype=bool)
        labels = self.label_matrix(traces.reshape(n * length, traces.shape[2])).reshape(n, length, -1)
        for t in range(length):
            fire = alive[:, src] & labels[:, t, :]
            nxt = np.zeros_like(alive)
            for e in range(len(src)):
                nxt[:, dst[e]] |= fire[:, e]
            alive = nxt
        return alive.any(axis=1)

    def run_rows(self, rows):
        """Sets of alive states after each prefix of a single trace; empty set means dead end."""
        rows = np.asarray(rows, dtype=np.int64)
        src, dst, init = self._edge_arrays()
        labels = self.label_matrix(rows) if len(rows) else np.zeros((0, len(src)), dtype=bool)
        alive = init.copy()
        out = []
        for t in range(len(rows)):
            fire = alive[src] & labels[t]
            nxt = np.zeros_like(alive)
            nxt[dst[fire]] = True
            alive = nxt
            out.append(frozenset(self.states[i] for i in np.flatnonzero(alive)))
            if not alive.any():
                break
        return out


def accepts(m, trace):
    """True iff ``m`` has a run over every observation of ``trace`` (a sequence of valuations)."""
    if len(trace) == 0:
        return True
    rows = m.observation_space.encode_many(list(trace))
    return bool(m.accepts_rows(rows[None, :, :])[0])


# -- export / import ----------------------------------------------------------

def to_json(m):
    return {
        "format": "fsalearn-automaton",
        "version": 1,
        "variables": [{"name": v.name, "domain": str(v.domain)} for v in m.variables],
        "states": list(m.states),
        "initial": list(m.initial),
        "transitions": [
            {"id": i, "from": t.src, "to": t.dst, "label": ex.render(t.label)}
            for i, t in enumerate(m.transitions)
        ],
    }


def dumps(m):
    return json.dumps(to_json(m), indent=2) + "\n"


def parse_domain(text):
    from .dsl import _Parser
    p = _Parser(text)
    d = p.domain()
    if p.tok.kind != "eof":
        raise ValueError(f"trailing text in domain {text!r}")
    return d


def from_json(doc, variables=None):
    """Rebuild an automaton; labels are parsed against ``variables`` or the document's own."""
    from .dsl import parse_expr
    if isinstance(doc, str):
        doc = json.loads(doc)
    declared = tuple(VariableDecl(v["name"], parse_domain(v["domain"]), "state", True)
                     for v in doc.get("variables", []))
    if variables is None:
        variables = declared
    transitions = tuple(
        Transition(t["from"], parse_expr(t["label"], variables, allow_primed=False), t["to"])
        for t in doc["transitions"])
    return SymbolicNFA(tuple(doc["states"]), tuple(doc["initial"]), transitions, tuple(variables))


def load(path, variables=None):
    with open(path, encoding="utf-8") as fh:
        return from_json(json.load(fh), variables)


def _dot_quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', r'\"') + '"'


def to_dot(m, name="abstraction"):
    lines = [f"digraph {_dot_quote(name)} {{", "  rankdir=LR;", '  node [shape=circle];']
    for i, q in enumerate(m.initial):
        lines.append(f'  __init{i} [shape=point, label=""];')
        lines.append(f"  __init{i} -> {_dot_quote(q)};")
    for q in m.states:
        lines.append(f"  {_dot_quote(q)} [shape=doublecircle];")
    for t in m.transitions:
        lines.append(f"  {_dot_quote(t.src)} -> {_dot_quote(t.dst)} [label={_dot_quote(ex.render(t.label))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def equivalent_labels(a, b, variables):
    """Semantic equivalence of two labels by enumerating the observation space."""
    space = VarSpace(variables)
    for chunk in space.chunks():
        env = space.env(space.rows(chunk))
        n = len(chunk)
        va = np.broadcast_to(np.asarray(ex.evaluate(a, env), dtype=bool), (n,))
        vb = np.broadcast_to(np.asarray(ex.evaluate(b, env), dtype=bool), (n,))
        if (va != vb).any():
            return False
    return True


__all__ = ["Transition", "SymbolicNFA", "accepts", "to_json", "from_json", "dumps", "load",
           "to_dot", "equivalent_labels", "Domain"]
