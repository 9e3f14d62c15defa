"""Exhaustive checking of completeness conditions and spuriousness triage.

Conditions are checked from *arbitrary* configurations satisfying the
antecedent, like a one-step inductive proof.  A violating configuration that
may be unreachable is triaged with k-induction over the window of ``k``
consecutive configurations ending in it: the base case explores every path of
``k`` configurations from an initial one; the step case looks for ``k - 1``
configurations different from the target followed by the target.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditions import Holds, Vacuous, Violated
from .system import CapacityError, DEFAULT_ENUM_CAP, product_chunks


@dataclass(frozen=True)
class CheckerConfig:
    k: int = 2
    enum_cap: int = DEFAULT_ENUM_CAP
    oracle_cap: int = 10 ** 6

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("spuriousness checks need k >= 2")
        if self.enum_cap < 1 or self.oracle_cap < 1:
            raise ValueError("caps must be positive")

    def to_json(self):
        return {"k": self.k, "enum_cap": self.enum_cap, "oracle_cap": self.oracle_cap}


def default_k(sys):
    """Twice the widest bounded-integer domain, at least 2."""
    widths = [v.domain.size for v in sys.variables if v.domain.kind == "int"]
    return max([2] + [2 * w for w in widths])


# -- spuriousness verdicts ------------------------------------------------------

@dataclass(frozen=True)
class Spurious:
    kind = "spurious"


@dataclass(frozen=True)
class Reachable:
    witness: tuple      # configurations from an initial one to the target
    kind = "reachable"


@dataclass(frozen=True)
class Inconclusive:
    path: tuple         # step-case path: k - 1 non-target configurations, then the target
    kind = "inconclusive"


# -- transition relation ----------------------------------------------------------

class Relation:
    """All (configuration, successor) pairs, ordered by source then first input producing them."""

    def __init__(self, sys, cap):
        cs, ins = sys.config_space, sys.input_space
        if cs.size > cap:
            raise CapacityError(f"state space too large: {cs.size} configurations exceed the enumeration cap {cap}")
        sys.check_input_cap(cap)
        n = cs.size
        codes, firsts = [], []
        for ci, ii in product_chunks(cs.size, ins.size):
            nxt = cs.flat(sys.step_rows(cs.rows(ci), ins.rows(ii)))
            code = ci * n + nxt
            u, idx = np.unique(code, return_index=True)
            codes.append(u)
            firsts.append(ci[idx] * ins.size + ii[idx])
        code = np.concatenate(codes)
        first = np.concatenate(firsts)
        u, idx = np.unique(code, return_index=True)
        order = np.argsort(first[idx], kind="stable")
        u = u[order]
        self.src = u // n
        self.dst = u % n
        self.size = n
        self._offsets = np.searchsorted(self.src, np.arange(n + 1))

    def successors_of(self, flat):
        a, b = self._offsets[flat], self._offsets[flat + 1]
        return self.dst[a:b]

    def post(self, flats):
        return np.unique(self.dst[np.isin(self.src, flats)])

    def pre(self, flats):
        return np.unique(self.src[np.isin(self.dst, flats)])


def relation(sys, cfg=None):
    cap = cfg.enum_cap if cfg is not None else DEFAULT_ENUM_CAP
    cache = sys.cache
    rel = cache.get("relation")
    if rel is None:
        rel = cache["relation"] = Relation(sys, cap)
    elif rel.size > cap:
        raise CapacityError(f"state space too large: {rel.size} configurations exceed the enumeration cap {cap}")
    return rel


# -- condition checking ---------------------------------------------------------

def antecedent_flats(sys, cond, cfg=CheckerConfig()):
    """Sorted configurations satisfying the effective antecedent."""
    cs = sys.config_space
    if cs.size > cfg.enum_cap:
        raise CapacityError(f"state space too large: {cs.size} configurations exceed the enumeration cap {cfg.enum_cap}")
    hits = []
    for chunk in cs.chunks():
        hits.append(chunk[sys.eval_rows(cond.antecedent, cs.rows(chunk))])
    flats = np.concatenate(hits) if hits else np.zeros(0, dtype=np.int64)
    if cond.strengthenings:
        excluded = cs.flat(cs.encode_many(list(cond.strengthenings)))
        flats = flats[~np.isin(flats, excluded)]
    return flats


def violations(sys, cond, cfg=CheckerConfig(), flats=None):
    """``(pre, post)`` flat pairs: the first violating successor of each violating configuration, in order."""
    rel = relation(sys, cfg)
    cs = sys.config_space
    if flats is None:
        flats = antecedent_flats(sys, cond, cfg)
    sel = np.isin(rel.src, flats)
    src, dst = rel.src[sel], rel.dst[sel]
    if len(src) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    targets, inverse = np.unique(dst, return_inverse=True)
    rows = cs.rows(targets)
    ok = np.zeros(len(targets), dtype=bool)
    for p in cond.consequent:
        ok |= sys.eval_rows(p, rows)
    bad = ~ok[inverse]
    src, dst = src[bad], dst[bad]
    _, first = np.unique(src, return_index=True)
    first.sort()
    return src[first], dst[first]


def check_condition(sys, cond, cfg=CheckerConfig()):
    """``Holds``, ``Vacuous`` or the first ``Violated(v_t, v_t+1)`` in enumeration order."""
    flats = antecedent_flats(sys, cond, cfg)
    if len(flats) == 0:
        return Vacuous()
    pre, post = violations(sys, cond, cfg, flats)
    if len(pre) == 0:
        return Holds()
    cs = sys.config_space
    return Violated(cs.decode(cs.rows(pre[:1])[0]), cs.decode(cs.rows(post[:1])[0]))


# -- spuriousness -----------------------------------------------------------------

def _flat_of(sys, valuation):
    cs = sys.config_space
    return int(cs.flat(cs.encode(valuation)[None, :])[0])


def is_spurious(sys, v_t, cfg=CheckerConfig()):
    """k-induction on "the system never is in configuration ``v_t``"."""
    if cfg.k < 2:
        raise ValueError("spuriousness checks need k >= 2")
    cs = sys.config_space
    rel = relation(sys, cfg)
    target = v_t if isinstance(v_t, (int, np.integer)) else _flat_of(sys, v_t)
    decode = lambda flats: tuple(cs.decode(r) for r in cs.rows(np.asarray(flats, dtype=np.int64)))

    # base case: every path of k configurations from an initial one
    level = sys.initial_flats()
    parent = {int(f): None for f in level}
    for depth in range(cfg.k):
        if target in parent and (level == target).any():
            path = [target]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return Reachable(decode(path[::-1]))
        if depth == cfg.k - 1:
            break
        nxt = []
        for f in level:
            for g in rel.successors_of(int(f)):
                g = int(g)
                if g not in parent:
                    parent[g] = int(f)
                    nxt.append(g)
        level = np.array(sorted(nxt), dtype=np.int64)

    # step case: k - 1 configurations other than the target, then the target
    layers = [np.array([target], dtype=np.int64)]
    for _ in range(cfg.k - 1):
        prev = rel.pre(layers[-1])
        prev = prev[prev != target]
        if len(prev) == 0:
            return Spurious()
        layers.append(prev)
    path = [int(layers[-1][0])]
    for layer in reversed(layers[:-1]):
        succ = rel.successors_of(path[-1])
        path.append(int(np.min(succ[np.isin(succ, layer)])))
    return Inconclusive(decode(path))


def trace_replays(sys, trace, cfg=CheckerConfig()):
    """True iff ``trace`` is a positive trace of ``sys`` (set simulation over the cached relation)."""
    if len(trace) == 0:
        return True
    rel = relation(sys, cfg)
    cs = sys.config_space
    current = sys.initial_flats()
    for o in sys.observation_space.encode_many(list(trace)):
        nxt = rel.post(current)
        current = nxt[(sys.observe_rows(cs.rows(nxt)) == o).all(axis=1)]
        if len(current) == 0:
            return False
    return True


# -- trace inclusion ----------------------------------------------------------------

@dataclass(frozen=True)
class InclusionHolds:
    explored: int
    kind = "holds"


@dataclass(frozen=True)
class InclusionCounterexample:
    trace: tuple
    kind = "counterexample"


def reachable_configurations(sys, cfg=CheckerConfig()):
    rel = relation(sys, cfg)
    seen = sys.initial_flats()
    frontier = seen
    while len(frontier):
        new = np.setdiff1d(rel.post(frontier), seen, assume_unique=False)
        seen = np.union1d(seen, new)
        if len(seen) > cfg.oracle_cap:
            raise CapacityError(f"oracle unavailable at this scale: more than {cfg.oracle_cap} reachable configurations")
        frontier = new
    return seen


def trace_inclusion_oracle(sys, m, cfg=CheckerConfig()):
    """Breadth-first search of (configuration, alive automaton states) pairs.

    Returns the shortest observation sequence that drives ``m`` into a dead end,
    or ``InclusionHolds`` when every reachable pair keeps some state alive.
    """
    cs = sys.config_space
    rel = relation(sys, cfg)
    reach = reachable_configurations(sys, cfg)
    obs_rows = sys.observe_rows(cs.rows(reach))
    labels = m.label_matrix(obs_rows)
    index = {q: i for i, q in enumerate(m.states)}
    src = [index[t.src] for t in m.transitions]
    dst = [index[t.dst] for t in m.transitions]
    pos = {int(f): i for i, f in enumerate(reach)}

    def advance(alive, ci):
        out = 0
        row = labels[ci]
        for e in np.flatnonzero(row):
            if alive >> src[e] & 1:
                out |= 1 << dst[e]
        return out

    init_mask = 0
    for q in m.initial:
        init_mask |= 1 << index[q]
    parent = {}
    queue = []
    for f in sys.initial_flats():
        for g in rel.successors_of(int(f)):
            ci = pos[int(g)]
            node = (ci, advance(init_mask, ci))
            if node not in parent:
                parent[node] = None
                queue.append(node)
    head = 0
    while head < len(queue):
        node = queue[head]
        head += 1
        ci, alive = node
        if alive == 0:
            trace = []
            while node is not None:
                trace.append(node[0])
                node = parent[node]
            space = sys.observation_space
            return InclusionCounterexample(tuple(space.decode(obs_rows[c]) for c in reversed(trace)))
        for g in rel.successors_of(int(reach[ci])):
            cj = pos[int(g)]
            nxt = (cj, advance(alive, cj))
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
                if len(parent) > cfg.oracle_cap:
                    raise CapacityError(f"oracle unavailable at this scale: more than {cfg.oracle_cap} product states")
    return InclusionHolds(len(parent))
