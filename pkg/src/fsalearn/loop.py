"""The refinement loop: learn, extract conditions, check, triage, add counterexample traces."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import datetime
import time

import numpy as np

from . import expr as ex
from .automaton import accepts, equivalent_labels
from .checker import (CheckerConfig, Spurious, Reachable, antecedent_flats, is_spurious,
                      relation, trace_replays, violations)
from .conditions import (ConditionResult, Holds, Vacuous, Violated, alpha, extract_conditions,
                         strengthen)
from .learner import LearnerConfig, learn
from .system import CapacityError
from .traces import Provenance, TraceSet, generate_trace_set


@dataclass(frozen=True)
class LoopConfig:
    n: int = 50
    length: int = 50
    seed: int = 0
    learner: LearnerConfig = LearnerConfig()
    checker: CheckerConfig = CheckerConfig()
    max_iterations: int = 50
    timeout: float = 60.0
    jobs: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.n < 1 or self.length < 1:
            raise ValueError("n and length must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    def to_json(self):
        return {"n": self.n, "length": self.length, "seed": self.seed,
                "learner": self.learner.to_json(), "checker": self.checker.to_json(),
                "max_iterations": self.max_iterations, "timeout": self.timeout, "jobs": self.jobs}


@dataclass
class LoopReport:
    system: str
    status: str                    # success | incomplete | timeout | capacity
    i: int
    N: int
    alpha: float
    d: float = None
    results: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)
    fallback_traces: int = 0
    traces: int = 0
    config: dict = field(default_factory=dict)
    message: str = ""
    timing: dict = field(default_factory=dict)
    # kept in memory for inspection, not serialized
    models: list = field(default_factory=list, repr=False)
    counterexample_sets: list = field(default_factory=list, repr=False)

    def to_json(self, timing=True):
        doc = {
            "system": self.system, "status": self.status,
            "i": self.i, "N": self.N, "alpha": self.alpha, "d": self.d,
            "traces": self.traces, "fallback_traces": self.fallback_traces,
            "conditions": [r.to_json() for r in self.results],
            "iterations": self.iterations,
            "inconclusive": self.inconclusive,
            "config": self.config,
        }
        if self.message:
            doc["message"] = self.message
        if timing:
            doc["timing"] = self.timing
        return doc


# -- counterexample traces ----------------------------------------------------------

def build_counterexample_traces(sys, T, cond, cex, iteration=0, witness=None, cfg=CheckerConfig()):
    """New traces ending in the violating step ``cex = (v_t, v_t+1)``.

    Each trace of ``T`` contributes its observations before the first one
    satisfying the antecedent, followed by the projections of ``v_t`` and
    ``v_t+1``.  A violated initial condition yields the one-observation trace
    of ``v_t+1``.  When a reachability ``witness`` (configurations from an
    initial one to ``v_t``) is given, spliced traces that the system cannot
    produce are replaced by the observations along the witness.  Returns
    ``(TraceSet, fallback)``; ``fallback`` marks a bare two-observation trace.
    """
    names = sys.observed_names
    pre = cex[0].project(names)
    post = cex[1].project(names)
    if cond.kind == "initial":
        prov = [Provenance.counterexample(iteration, cond.id)]
        return TraceSet.build(sys.observed, [(post,)], prov), False
    space = sys.observation_space
    traces = []
    for t in T.traces:
        if not t:
            continue
        hit = sys_eval_obs(sys, cond.antecedent, space.encode_many(list(t)))
        if hit.any():
            j = int(np.argmax(hit))
            traces.append(tuple(t[:j]) + (pre, post))
    if witness is not None:
        along = tuple(w.project(names) for w in witness[1:]) + (post,)
        traces = [t if trace_replays(sys, t, cfg) else along for t in traces] or [along]
    if traces:
        prov = [Provenance.counterexample(iteration, cond.id)] * len(traces)
        return TraceSet.build(sys.observed, traces, prov), False
    prov = [Provenance.counterexample(iteration, cond.id, fallback=True)]
    return TraceSet.build(sys.observed, [(pre, post)], prov), True


def sys_eval_obs(sys, pred, obs_rows):
    env = sys.observation_space.env(obs_rows)
    return np.broadcast_to(np.asarray(ex.evaluate(pred, env), dtype=bool), (obs_rows.shape[0],))


# -- condition settlement -------------------------------------------------------------

class _Triage:
    """Memo of spuriousness verdicts per configuration (a property of the system, not the condition)."""

    def __init__(self, sys, cfg):
        self.sys, self.cfg = sys, cfg
        self.memo = {}

    def __call__(self, flat):
        r = self.memo.get(flat)
        if r is None:
            r = self.memo[flat] = is_spurious(self.sys, int(flat), self.cfg)
        return r


def settle(sys, cond, cfg, triage):
    """Check ``cond``; strengthen away spurious violations until it holds or a real one remains."""
    cs = sys.config_space
    flats = antecedent_flats(sys, cond, cfg)
    if len(flats) == 0:
        return ConditionResult(cond, Vacuous(), initial_verdict=Vacuous()), None
    pre, post = violations(sys, cond, cfg, flats)
    decode = lambda f: cs.decode(cs.rows(np.array([f]))[0])
    if len(pre) == 0:
        return ConditionResult(cond, Holds(), initial_verdict=Holds()), None
    first = Violated(decode(pre[0]), decode(post[0]))
    eliminated = 0
    for p, q in zip(pre, post):
        r = triage(int(p))
        if isinstance(r, Spurious):
            cond = strengthen(cond, decode(p))
            eliminated += 1
            continue
        cls = "valid" if isinstance(r, Reachable) else "inconclusive"
        return ConditionResult(cond, Violated(decode(p), decode(q)), cls, eliminated, first), r
    final = Vacuous() if eliminated == len(flats) else Holds()
    return ConditionResult(cond, final, None, eliminated, first), None


def _check_all(sys, conditions, cfg, triage, jobs, deadline):
    def one(c):
        if time.monotonic() > deadline:
            raise TimeoutError
        return settle(sys, c, cfg, triage)
    if jobs <= 1:
        return [one(c) for c in conditions]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, conditions))


# -- d score ------------------------------------------------------------------------------

def score_d(m, ref):
    """Fraction of reference transitions matched under a greedy state correspondence."""
    if not ref.transitions:
        return 1.0
    variables = ref.variables or m.variables
    memo = {}

    def same(a, b):
        key = (a, b)
        if key not in memo:
            memo[key] = equivalent_labels(a, b, variables)
        return memo[key]

    order = {q: i for i, q in enumerate(m.states)}
    mapping = {}
    queue = []
    for r, q in zip(ref.initial, m.initial):
        mapping[r] = q
        queue.append(r)
    seen = set(queue)
    matched = 0
    while queue:
        r = queue.pop(0)
        q = mapping[r]
        for e in ref.outgoing(r):
            cands = [t for t in m.outgoing(q) if same(e.label, t.label)]
            if e.dst in mapping:
                cands = [t for t in cands if t.dst == mapping[e.dst]]
            if not cands:
                continue
            matched += 1
            if e.dst not in mapping:
                mapping[e.dst] = min((t.dst for t in cands), key=order.get)
            if e.dst not in seen:
                seen.add(e.dst)
                queue.append(e.dst)
    return matched / len(ref.transitions)


# -- the loop ---------------------------------------------------------------------------

def _tally(results):
    counts = {"conditions": len(results), "holds": 0, "vacuous": 0, "valid": 0, "inconclusive": 0,
              "spurious_eliminated": 0}
    for r in results:
        counts["spurious_eliminated"] += r.spurious_eliminated
        if r.verdict.kind in ("holds", "vacuous"):
            counts[r.verdict.kind] += 1
        else:
            counts[r.classification] += 1
    return counts


def _cex_json(iteration, result, path):
    return {"iteration": iteration, "condition": result.condition.id,
            "counterexample": [dict(result.verdict.pre), dict(result.verdict.post)],
            "step_case_path": [dict(v) for v in path]}


def run(sys, cfg=LoopConfig(), reference=None, initial_traces=None):
    """Learn until every completeness condition holds or a limit is hit."""
    started = time.monotonic()
    deadline = started + cfg.timeout
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    t_learn = t_check = 0.0
    T = initial_traces if initial_traces is not None else generate_trace_set(sys, cfg.n, cfg.length, cfg.seed)
    triage = _Triage(sys, cfg.checker)
    report = LoopReport(sys.name, "incomplete", 0, 0, 0.0, config=cfg.to_json())
    m, results = None, []
    prev_cex = None
    try:
        for it in range(1, cfg.max_iterations + 1):
            t0 = time.monotonic()
            m = learn(T, cfg.learner)
            t_learn += time.monotonic() - t0
            report.models.append(m)
            report.i, report.N = it, len(m.states)
            if prev_cex is not None:
                entry = report.iterations[-1]
                entry["accepted_by_next"] = sum(accepts(m, t) for t in prev_cex)
                entry["growth_witnesses"] = sum(
                    (not accepts(report.models[-2], t)) and accepts(m, t) for t in prev_cex)
            t0 = time.monotonic()
            relation(sys, cfg.checker)
            conditions = extract_conditions(m, sys)
            settled = _check_all(sys, conditions, cfg.checker, triage, cfg.jobs, deadline)
            t_check += time.monotonic() - t0
            results = [r for r, _ in settled]
            report.results = results
            report.alpha = alpha(results)
            entry = {"iteration": it, "states": len(m.states), "transitions": len(m.transitions),
                     "traces": len(T), "alpha": report.alpha}
            entry.update(_tally(results))
            report.iterations.append(entry)
            bad = [(r, s) for r, s in settled if not r.ok]
            if not bad:
                report.status = "success"
                break
            new = TraceSet(sys.observed)
            for r, s in bad:
                if r.classification == "inconclusive":
                    report.inconclusive.append(_cex_json(it, r, s.path))
                witness = s.witness if isinstance(s, Reachable) else None
                ts, fb = build_counterexample_traces(sys, T, r.condition, (r.verdict.pre, r.verdict.post), it,
                                                     witness, cfg.checker)
                report.fallback_traces += int(fb)
                new = new.union(ts)
            entry["new_traces"] = len(new)
            entry["rejected_by_current"] = sum(not accepts(m, t) for t in new)
            report.counterexample_sets.append(new)
            prev_cex = new.traces
            T = T.union(new)
            if time.monotonic() > deadline:
                report.status = "timeout"
                report.message = f"timeout after {cfg.timeout} s"
                break
    except TimeoutError:
        report.status = "timeout"
        report.message = f"timeout after {cfg.timeout} s"
    except CapacityError as err:
        report.status = "capacity"
        report.message = str(err)
    report.traces = len(T)
    if reference is not None and m is not None:
        report.d = score_d(m, reference)
    total = time.monotonic() - started
    report.timing = _timing(stamp, total, t_learn, t_check)
    return m, report


def _timing(stamp, total, t_learn, t_check):
    total = max(total, 1e-9)
    return {"timestamp": stamp, "T": round(total, 4),
            "learning": round(t_learn, 4), "checking": round(t_check, 4),
            "pct_T_m": round(100 * t_learn / total, 2),
            "pct_checking": round(100 * t_check / total, 2),
            "pct_overhead": round(100 * max(0.0, total - t_learn - t_check) / total, 2)}


def baseline_random(sys, n=1000, cfg=LoopConfig(), reference=None):
    """Passive learning from ``n`` random traces, checked once without refinement.

    The learned automaton is ``report.models[0]``.
    """
    started = time.monotonic()
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    T = generate_trace_set(sys, n, cfg.length, cfg.seed)
    t0 = time.monotonic()
    m = learn(T, cfg.learner)
    t_learn = time.monotonic() - t0
    report = LoopReport(sys.name, "incomplete", 1, len(m.states), 0.0, config=dict(cfg.to_json(), n=n),
                        traces=len(T), models=[m])
    t0 = time.monotonic()
    try:
        settled = _check_all(sys, extract_conditions(m, sys), cfg.checker, _Triage(sys, cfg.checker),
                             cfg.jobs, started + cfg.timeout)
        report.results = [r for r, _ in settled]
        report.alpha = alpha(report.results)
        report.status = "success" if report.alpha == 1 else "incomplete"
        for r, s in settled:
            if not r.ok and r.classification == "inconclusive":
                report.inconclusive.append(_cex_json(1, r, s.path))
        entry = {"iteration": 1, "states": len(m.states), "transitions": len(m.transitions),
                 "traces": len(T), "alpha": report.alpha}
        entry.update(_tally(report.results))
        report.iterations.append(entry)
    except TimeoutError:
        report.status, report.message = "timeout", f"timeout after {cfg.timeout} s"
    except CapacityError as err:
        report.status, report.message = "capacity", str(err)
    if reference is not None:
        report.d = score_d(m, reference)
    report.timing = _timing(stamp, time.monotonic() - started, t_learn, time.monotonic() - t0)
    return report
