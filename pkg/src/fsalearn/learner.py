"""Passive learning of symbolic NFAs from trace sets.

Observations are first mapped to a finite alphabet of mutually exclusive,
jointly exhaustive predicates (:func:`abstract_alphabet`).  Two strategies
build an automaton over that alphabet:

``pta-exact``
    the prefix-tree acceptor of the abstracted traces.
``ktails``
    prefix-tree nodes are folded by their last ``k`` letters; folded states
    whose observed futures of length up to ``k`` coincide are merged.  Parallel
    edges of the quotient are joined into one label.

Both accept every input trace and return states in breadth-first order from
the initial state, so identical inputs give identical automata.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
import math

import numpy as np

from . import expr as ex
from .automaton import SymbolicNFA, Transition
from .system import VarSpace


@dataclass(frozen=True)
class LearnerConfig:
    strategy: str = "ktails"          # "ktails" or "pta-exact"
    k_merge: int = 1
    abstraction: str = "value"        # "value" (value equality) or "interval"
    max_splits: int = 2

    def __post_init__(self):
        if self.strategy not in ("ktails", "pta-exact"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.abstraction not in ("value", "interval"):
            raise ValueError(f"unknown abstraction {self.abstraction!r}")
        if self.k_merge < 1:
            raise ValueError("k_merge must be at least 1")
        if self.max_splits < 1:
            raise ValueError("max_splits must be at least 1")

    def to_json(self):
        return {"strategy": self.strategy, "k_merge": self.k_merge,
                "abstraction": self.abstraction, "max_splits": self.max_splits}


class _VarPartition:
    """Classes of one variable: value classes, or integer intervals ``(lo, hi]``."""

    def __init__(self, decl, observed_raw, cfg):
        self.decl = decl
        self.var = decl.var()
        values = sorted(set(int(v) for v in observed_raw))
        d = decl.domain
        if cfg.abstraction == "interval" and d.kind == "int":
            cuts = _interval_cuts(values, cfg.max_splits)
            self.kind = "interval"
            self.cuts = np.array(cuts, dtype=np.int64)
            self.size = len(cuts) + 1
            self.full = True
        else:
            self.kind = "value"
            self.values = np.array(values, dtype=np.int64)
            self.size = len(values)
            self.full = len(values) == d.size

    def classify(self, column):
        if self.kind == "interval":
            return np.searchsorted(self.cuts, column, side="left")
        idx = np.searchsorted(self.values, column)
        hit = idx < len(self.values)
        hit[hit] = self.values[idx[hit]] == column[hit]
        return np.where(hit, idx, -1)

    def predicate(self, i):
        if self.kind == "interval":
            if self.size == 1:
                return ex.TRUE
            parts = []
            if i > 0:
                parts.append(ex.Cmp(">", self.var, ex.Const(int(self.cuts[i - 1]), ex.INT)))
            if i < len(self.cuts):
                parts.append(ex.Cmp("<=", self.var, ex.Const(int(self.cuts[i]), ex.INT)))
            return ex.conj(parts)
        value = self.decl.domain.from_raw(self.values[i])
        return ex.equals(self.var, value)

    @property
    def trivial(self):
        return self.kind == "interval" and self.size == 1


def _interval_cuts(values, max_splits):
    """Cut points at the widest gaps between consecutive observed values (ties: lowest)."""
    if len(values) < 2 or max_splits < 2:
        return []
    gaps = [(-(b - a), a) for a, b in zip(values, values[1:])]
    chosen = sorted(gaps)[:max_splits - 1]
    return sorted(a for _, a in chosen)


class Alphabet:
    """Cells of the product partition that contain observations, plus a complement class."""

    def __init__(self, variables, rows, cfg):
        self.variables = tuple(variables)
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, len(self.variables))
        self.parts = [_VarPartition(d, rows[:, i], cfg) for i, d in enumerate(self.variables)]
        digits = self._digits(rows)
        cells = sorted(set(map(tuple, digits.tolist())))
        self.cells = cells
        self._cell_index = {c: i for i, c in enumerate(cells)}
        product = math.prod(p.size for p in self.parts)
        self.has_complement = not (all(p.full for p in self.parts) and len(cells) == product)

    def _digits(self, rows):
        if not self.parts:
            return np.zeros((rows.shape[0], 0), dtype=np.int64)
        return np.stack([p.classify(rows[:, i]) for i, p in enumerate(self.parts)], axis=1)

    def __len__(self):
        return len(self.cells) + int(self.has_complement)

    def classify(self, rows):
        """Letter index of each raw observation row (complement class is ``len(cells)``)."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, len(self.variables))
        digits = self._digits(rows)
        out = np.full(rows.shape[0], len(self.cells), dtype=np.int64)
        for i, d in enumerate(map(tuple, digits.tolist())):
            j = self._cell_index.get(d)
            if j is not None:
                out[i] = j
        return out

    def cell_predicate(self, cell):
        return ex.conj(p.predicate(i) for p, i in zip(self.parts, cell) if not p.trivial)

    def predicates(self):
        preds = [self.cell_predicate(c) for c in self.cells]
        if self.has_complement:
            preds.append(ex.Not(ex.disj(preds)) if preds else ex.TRUE)
        return preds

    def union_predicate(self, letters):
        """Label for a set of letters; a product of per-variable class sets is rendered as a conjunction."""
        cells = sorted(self.cells[i] for i in letters)
        if len(cells) == 1:
            return self.cell_predicate(cells[0])
        per_var = [sorted({c[i] for c in cells}) for i in range(len(self.parts))]
        if len(cells) == math.prod(len(s) for s in per_var):
            conjuncts = []
            for p, classes in zip(self.parts, per_var):
                if p.trivial or (p.full and len(classes) == p.size):
                    continue
                conjuncts.append(ex.disj(p.predicate(i) for i in classes))
            return ex.conj(conjuncts)
        return ex.disj(self.cell_predicate(c) for c in cells)


def _observation_rows(trace_set):
    space = VarSpace(trace_set.variables)
    return [space.encode_many(list(t)) for t in trace_set.traces]


def build_alphabet(trace_set, cfg=LearnerConfig()):
    rows = _observation_rows(trace_set)
    stacked = np.concatenate(rows) if rows else np.zeros((0, len(trace_set.variables)), dtype=np.int64)
    return Alphabet(trace_set.variables, stacked, cfg)


def abstract_alphabet(trace_set, cfg=LearnerConfig()):
    """Mutually exclusive, exhaustive predicates; every observation satisfies exactly one."""
    if len(trace_set) == 0:
        raise ValueError("abstract_alphabet needs a nonempty trace set")
    return build_alphabet(trace_set, cfg).predicates()


def learn(trace_set, cfg=LearnerConfig()):
    """A symbolic NFA accepting every trace of ``trace_set``."""
    if len(trace_set) == 0:
        raise ValueError("learn needs a nonempty trace set")
    alphabet = build_alphabet(trace_set, cfg)
    words = [tuple(alphabet.classify(r).tolist()) for r in _observation_rows(trace_set)]
    if cfg.strategy == "pta-exact":
        block_of, edges = _prefix_tree(words)
    else:
        block_of, edges = _ktails(words, cfg.k_merge)
    return _assemble(alphabet, block_of, edges, trace_set.variables)


def _prefix_tree(words):
    nodes = {(): 0}
    edges = set()
    for w in words:
        for i in range(len(w)):
            prefix, child = w[:i], w[:i + 1]
            if child not in nodes:
                nodes[child] = len(nodes)
            edges.add((nodes[prefix], w[i], nodes[child]))
    return {n: n for n in nodes.values()}, edges


def _ktails(words, k):
    # fold prefix-tree nodes by their last k letters
    futures = defaultdict(set)
    hist_edges = set()
    histories = {(): 0}
    for w in words:
        for i in range(len(w) + 1):
            h = w[max(0, i - k):i]
            if h not in histories:
                histories[h] = len(histories)
            tail = w[i:i + k]
            for j in range(len(tail) + 1):
                futures[h].add(tail[:j])
            if i < len(w):
                nxt = w[max(0, i + 1 - k):i + 1]
                if nxt not in histories:
                    histories[nxt] = len(histories)
                hist_edges.add((histories[h], w[i], histories[nxt]))
    # merge folded states with equal k-futures
    block_of = {}
    blocks = {}
    for h, hid in histories.items():
        key = frozenset(futures[h])
        block_of[hid] = blocks.setdefault(key, len(blocks))
    edges = {(block_of[a], letter, block_of[b]) for a, letter, b in hist_edges}
    return {hid: block_of[hid] for hid in histories.values()}, edges


def _assemble(alphabet, block_of, edges, variables):
    """Renumber blocks breadth-first from the initial block and join parallel edges."""
    init = block_of[0]
    succ = defaultdict(lambda: defaultdict(set))
    for a, letter, b in edges:
        succ[a][b].add(letter)
    order = {init: 0}
    queue = [init]
    while queue:
        a = queue.pop(0)
        # visit targets in order of their smallest letter, then block number
        for b in sorted(succ[a], key=lambda b: (min(succ[a][b]), b)):
            if b not in order:
                order[b] = len(order)
                queue.append(b)
    name = {b: f"q{i}" for b, i in order.items()}
    transitions = []
    for a in sorted(order, key=order.get):
        for b in sorted(succ[a], key=lambda b: (min(succ[a][b]), b)):
            label = alphabet.union_predicate(sorted(succ[a][b]))
            transitions.append(Transition(name[a], label, name[b]))
    states = tuple(name[b] for b in sorted(order, key=order.get))
    return SymbolicNFA(states, (name[init],), tuple(transitions), tuple(variables))
