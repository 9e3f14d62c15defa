"""Execution traces: seeded random simulation and trace-set documents.

A trace of length ``n`` is the sequence of observations ``v_1 .. v_n`` made
after each of ``n`` steps from an initial state; the initial state itself is
not recorded.  Traces hold only observed variables.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import io
import json

import numpy as np

from .automaton import parse_domain
from .system import FsaLearnError, Valuation, VariableDecl


class TraceFormatError(FsaLearnError):
    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Provenance:
    kind: str                 # "random" or "counterexample"
    seed: int = None
    index: int = None
    iteration: int = None
    condition: str = None
    fallback: bool = False

    @classmethod
    def random(cls, seed, index=None):
        return cls("random", seed=seed, index=index)

    @classmethod
    def counterexample(cls, iteration, condition, fallback=False):
        return cls("counterexample", iteration=iteration, condition=condition, fallback=fallback)

    def to_json(self):
        if self.kind == "random":
            d = {"kind": "random", "seed": self.seed}
            if self.index is not None:
                d["index"] = self.index
            return d
        d = {"kind": "counterexample", "iteration": self.iteration, "condition": self.condition}
        if self.fallback:
            d["fallback"] = True
        return d

    @classmethod
    def from_json(cls, d):
        if d.get("kind") == "random":
            return cls.random(d.get("seed"), d.get("index"))
        if d.get("kind") == "counterexample":
            return cls.counterexample(d.get("iteration"), d.get("condition"), bool(d.get("fallback", False)))
        raise TraceFormatError(f"unknown provenance kind {d.get('kind')!r}")

    def __str__(self):
        if self.kind == "random":
            return f"random:{self.seed}" + (f":{self.index}" if self.index is not None else "")
        return f"counterexample:{self.iteration}:{self.condition}" + (":fallback" if self.fallback else "")

    @classmethod
    def parse(cls, text):
        parts = text.split(":")
        try:
            if parts[0] == "random":
                return cls.random(int(parts[1]), int(parts[2]) if len(parts) > 2 else None)
            if parts[0] == "counterexample":
                return cls.counterexample(int(parts[1]), parts[2], len(parts) > 3 and parts[3] == "fallback")
        except (IndexError, ValueError):
            pass
        raise TraceFormatError(f"malformed provenance {text!r}")


@dataclass(frozen=True)
class TraceSet:
    """Deduplicated traces (tuples of Valuations) with per-trace provenance."""
    variables: tuple = ()
    traces: tuple = ()
    provenance: tuple = ()

    def __post_init__(self):
        if len(self.traces) != len(self.provenance):
            raise ValueError("one provenance entry per trace")
        # traces only carry names and domains; roles do not survive serialization
        plain = tuple(VariableDecl(v.name, v.domain, "state", True) for v in self.variables)
        object.__setattr__(self, "variables", plain)

    @classmethod
    def build(cls, variables, traces, provenance):
        seen = set()
        kept, prov = [], []
        for t, p in zip(traces, provenance):
            t = tuple(t)
            if t in seen:
                continue
            seen.add(t)
            kept.append(t)
            prov.append(p)
        return cls(tuple(variables), tuple(kept), tuple(prov))

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __contains__(self, trace):
        return tuple(trace) in set(self.traces)

    def union(self, other):
        variables = self.variables or other.variables
        return TraceSet.build(variables, self.traces + other.traces, self.provenance + other.provenance)

    @property
    def names(self):
        return tuple(v.name for v in self.variables)


# -- simulation -----------------------------------------------------------------

def _rng(seed, index=None):
    return np.random.default_rng(seed if index is None else [seed, index])


def simulate_rows(sys, rngs, length):
    """Lock-step simulation of one run per generator; returns ``(n, length, n_obs)`` raw rows."""
    init = sys.initial_flats()
    cs, ins = sys.config_space, sys.input_space
    n = len(rngs)
    starts = np.array([init[r.integers(len(init))] for r in rngs], dtype=np.int64)
    inputs = np.stack([r.integers(ins.size, size=length) for r in rngs]) if n else np.zeros((0, length), dtype=np.int64)
    state = cs.rows(starts)
    out = np.zeros((n, length, len(sys.observed)), dtype=np.int64)
    for t in range(length):
        state = sys.step_rows(state, ins.rows(inputs[:, t]))
        out[:, t, :] = sys.observe_rows(state)
    return out


def _to_traces(sys, rows):
    space = sys.observation_space
    cache = {}
    traces = []
    for run in rows:
        trace = []
        for r in run:
            key = r.tobytes()
            v = cache.get(key)
            if v is None:
                v = cache[key] = space.decode(r)
            trace.append(v)
        traces.append(tuple(trace))
    return traces


def simulate(sys, seed, length):
    """One run of ``length`` steps with uniformly sampled inputs from a seeded PCG64 generator."""
    if length < 1:
        raise ValueError("length must be at least 1")
    return _to_traces(sys, simulate_rows(sys, [_rng(seed)], length))[0]


def generate_trace_set(sys, count=50, length=50, seed=0):
    """``count`` seeded simulations (trace ``i`` uses seed ``[seed, i]``), deduplicated."""
    if count < 1 or length < 1:
        raise ValueError("count and length must be at least 1")
    rows = simulate_rows(sys, [_rng(seed, i) for i in range(count)], length)
    traces = _to_traces(sys, rows)
    prov = [Provenance.random(seed, i) for i in range(count)]
    return TraceSet.build(sys.observed, traces, prov)


def replays(sys, trace, from_init=True):
    """True iff ``trace`` is a positive trace of ``sys`` (checked by enumeration over configurations)."""
    if len(trace) == 0:
        return True
    cs = sys.config_space
    obs = sys.observation_space.encode_many(list(trace))
    current = sys.initial_flats() if from_init else None
    for i, o in enumerate(obs):
        if current is None:
            allc = np.arange(cs.size, dtype=np.int64)
            rows = cs.rows(allc)
            current = allc[(sys.observe_rows(rows) == o).all(axis=1)]
            continue
        nxt = sys.successor_flats(current)
        rows = cs.rows(nxt)
        current = nxt[(sys.observe_rows(rows) == o).all(axis=1)]
        if len(current) == 0:
            return False
    return len(current) > 0


# -- documents ------------------------------------------------------------------

def _check_value(decl, value, where):
    if not decl.domain.contains(value):
        raise TraceFormatError(f"value {value!r} of {decl.name} outside {decl.domain}", where)
    return value


def write_json(ts):
    doc = {
        "format": "fsalearn-traces",
        "version": 1,
        "variables": [{"name": v.name, "domain": str(v.domain)} for v in ts.variables],
        "traces": [
            {"provenance": p.to_json(), "observations": [dict(o) for o in t]}
            for t, p in zip(ts.traces, ts.provenance)
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def _read_variables(items, where):
    out = []
    for i, v in enumerate(items):
        try:
            out.append(VariableDecl(v["name"], parse_domain(v["domain"]), "state", True))
        except (KeyError, TypeError, ValueError, FsaLearnError) as err:
            raise TraceFormatError(f"bad variable declaration: {err}", f"{where}[{i}]") from None
    return tuple(out)


def read_json(text):
    if not text.strip():
        return TraceSet()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise TraceFormatError(err.msg, f"line {err.lineno}, column {err.colno}") from None
    if not isinstance(doc, dict):
        raise TraceFormatError("expected a JSON object", "document")
    variables = _read_variables(doc.get("variables", []), "variables")
    traces, prov = [], []
    for ti, entry in enumerate(doc.get("traces", [])):
        where = f"traces[{ti}]"
        obs = []
        for oi, o in enumerate(entry.get("observations", [])):
            owhere = f"{where}.observations[{oi}]"
            for v in variables:
                if v.name not in o:
                    raise TraceFormatError(f"missing binding for variable {v.name!r}", owhere)
            extra = set(o) - {v.name for v in variables}
            if extra:
                raise TraceFormatError(f"unknown variables {sorted(extra)}", owhere)
            obs.append(Valuation((v.name, _check_value(v, o[v.name], owhere)) for v in variables))
        traces.append(tuple(obs))
        prov.append(Provenance.from_json(entry.get("provenance", {"kind": "random"})))
    return TraceSet.build(variables, traces, prov)


def write_csv(ts):
    buf = io.StringIO()
    buf.write("# fsalearn-traces v1\n")
    buf.write("# variables: " + json.dumps([{"name": v.name, "domain": str(v.domain)} for v in ts.variables]) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trace", "provenance"] + [v.name for v in ts.variables])
    for i, (t, p) in enumerate(zip(ts.traces, ts.provenance)):
        for o in t:
            w.writerow([i, str(p)] + [_csv_cell(o[v.name]) for v in ts.variables])
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _csv_value(decl, cell, where):
    if decl.domain.kind == "bool":
        if cell not in ("true", "false"):
            raise TraceFormatError(f"expected true/false for {decl.name}, got {cell!r}", where)
        return cell == "true"
    if decl.domain.kind == "int":
        try:
            return _check_value(decl, int(cell), where)
        except ValueError:
            raise TraceFormatError(f"expected an integer for {decl.name}, got {cell!r}", where) from None
    return _check_value(decl, cell, where)


def read_csv(text):
    lines = text.splitlines()
    if not any(l.strip() for l in lines):
        return TraceSet()
    variables = None
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            if line.startswith("# variables:"):
                try:
                    items = json.loads(line[len("# variables:"):])
                except json.JSONDecodeError as err:
                    raise TraceFormatError(err.msg, f"line {i + 1}") from None
                variables = _read_variables(items, f"line {i + 1}")
            body_start = i + 1
        else:
            break
    if variables is None:
        raise TraceFormatError("missing '# variables:' metadata line", "line 1")
    reader = csv.reader(lines[body_start:])
    header = next(reader, None)
    if header is None:
        return TraceSet(variables)
    hline = body_start + 1
    if header[:2] != ["trace", "provenance"]:
        raise TraceFormatError("header must start with trace,provenance", f"line {hline}")
    names = header[2:]
    for v in variables:
        if v.name not in names:
            raise TraceFormatError(f"missing column for variable {v.name!r}", f"line {hline}")
    col = {n: i + 2 for i, n in enumerate(names)}
    groups = {}
    order = []
    for offset, row in enumerate(reader):
        where = f"line {hline + offset + 1}"
        if not row:
            continue
        if len(row) != len(header):
            raise TraceFormatError(f"expected {len(header)} cells, got {len(row)}", where)
        key = row[0]
        if key not in groups:
            groups[key] = (Provenance.parse(row[1]), [])
            order.append(key)
        obs = Valuation((v.name, _csv_value(v, row[col[v.name]], where)) for v in variables)
        groups[key][1].append(obs)
    traces = [tuple(groups[k][1]) for k in order]
    prov = [groups[k][0] for k in order]
    return TraceSet.build(variables, traces, prov)


def write_traces(ts, fmt="json"):
    return write_csv(ts) if fmt == "csv" else write_json(ts)


def read_traces(text, fmt=None):
    if fmt is None:
        fmt = "csv" if text.lstrip().startswith("#") else "json"
    return read_csv(text) if fmt == "csv" else read_json(text)


def traces_to_rows(ts, variables):
    """Raw observation rows per trace, encoded against ``variables``."""
    from .system import VarSpace
    space = VarSpace(variables)
    return [space.encode_many(list(t)) for t in ts.traces]
