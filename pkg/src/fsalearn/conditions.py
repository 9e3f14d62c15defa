"""Completeness conditions extracted from a candidate automaton.

Each condition reads: from any state satisfying the antecedent, every system
step lands in an observation satisfying one of the consequent predicates.
There is one ``initial`` condition (antecedent ``init``, consequent the labels
leaving the initial states) and one ``step`` condition per automaton state and
distinct incoming label.  If all of them hold, every execution trace of the
system is accepted by the automaton.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from . import expr as ex


@dataclass(frozen=True)
class Condition:
    id: str
    kind: str                   # "initial" or "step"
    antecedent: object
    consequent: tuple
    state: str
    edge: object = "init"       # index of the first incoming edge carrying the antecedent
    strengthenings: tuple = ()  # excluded configurations (Valuations), each adds "not (x = v ...)"

    def strengthening_predicates(self, sys):
        decls = {v.name: v for v in sys.state_vars}
        return [ex.Not(ex.conj(ex.equals(decls[n].var(), value) for n, value in v.items()))
                for v in self.strengthenings]

    def effective_antecedent(self, sys):
        return ex.conj([self.antecedent] + self.strengthening_predicates(sys))

    def render(self):
        rhs = " or ".join(f"({ex.render(p)})" for p in self.consequent) if self.consequent else "false"
        lhs = ex.render(self.antecedent)
        if self.strengthenings:
            lhs = f"({lhs}) and {len(self.strengthenings)} excluded state(s)"
        where = "initial states" if self.kind == "initial" else f"state {self.state}, edge {self.edge}"
        return f"{self.id} [{where}]: {lhs}  ==>  next: {rhs}"


def extract_conditions(m, sys):
    """One initial condition plus one condition per (state, distinct incoming label)."""
    conditions = []
    consequent = []
    for q in m.initial:
        for t in m.outgoing(q):
            if t.label not in consequent:
                consequent.append(t.label)
    conditions.append(Condition("C0", "initial", sys.init, tuple(consequent), ",".join(m.initial)))
    index = {t: i for i, t in enumerate(m.transitions)}
    for q in m.states:
        outgoing = []
        for t in m.outgoing(q):
            if t.label not in outgoing:
                outgoing.append(t.label)
        seen = []
        for t in m.transitions:
            if t.dst != q or t.label in seen:
                continue
            seen.append(t.label)
            cid = f"C{len(conditions)}"
            conditions.append(Condition(cid, "step", t.label, tuple(outgoing), q, index[t]))
    return conditions


def condition_count(m):
    """Structural count: one plus the distinct incoming labels of every state."""
    total = 1
    for q in m.states:
        labels = []
        for t in m.incoming(q):
            if t.label not in labels:
                labels.append(t.label)
        total += len(labels)
    return total


def strengthen(cond, v_t):
    """Exclude configuration ``v_t`` from the antecedent (idempotent)."""
    if v_t in cond.strengthenings:
        return cond
    return replace(cond, strengthenings=cond.strengthenings + (v_t,))


# -- verdicts -----------------------------------------------------------------

@dataclass(frozen=True)
class Holds:
    kind = "holds"


@dataclass(frozen=True)
class Vacuous:
    kind = "vacuous"


@dataclass(frozen=True)
class Violated:
    pre: object     # configuration v_t satisfying the effective antecedent
    post: object    # successor v_{t+1} satisfying no consequent predicate
    kind = "violated"


@dataclass(frozen=True)
class ConditionResult:
    condition: Condition
    verdict: object
    classification: str = None            # "valid", "spurious" or "inconclusive" for violations
    spurious_eliminated: int = 0
    initial_verdict: object = None        # verdict before any strengthening

    @property
    def ok(self):
        return self.verdict.kind in ("holds", "vacuous")

    def to_json(self):
        d = {"id": self.condition.id, "kind": self.condition.kind, "state": self.condition.state,
             "verdict": self.verdict.kind, "strengthenings": len(self.condition.strengthenings)}
        if isinstance(self.verdict, Violated):
            d["classification"] = self.classification
            d["counterexample"] = [dict(self.verdict.pre), dict(self.verdict.post)]
        if self.initial_verdict is not None:
            d["initial_verdict"] = self.initial_verdict.kind
        return d


def alpha(results):
    """Fraction of conditions whose final verdict is holds or vacuous."""
    if not results:
        raise ValueError("alpha of an empty result list")
    verdicts = [r.verdict if isinstance(r, ConditionResult) else r for r in results]
    good = sum(1 for v in verdicts if v.kind in ("holds", "vacuous"))
    return good / len(verdicts)


def invariant_report(conditions, results=None):
    """Human-readable list of implications, one per line."""
    lines = []
    verdicts = {r.condition.id: r for r in results or ()}
    for c in conditions:
        r = verdicts.get(c.id)
        tag = f"  [{r.verdict.kind}]" if r is not None else ""
        lines.append(c.render() + tag)
    return "\n".join(lines) + "\n"
