"""Finite-domain transition systems with guarded-command updates.

A system has state variables, input variables, an ``init`` predicate over the
state variables and an ordered list of guarded commands.  Exactly one command
fires for every (state, input) pair; the optional ``else`` command fires when
no guard holds.  Inputs model environment nondeterminism.

Observed inputs are *latched*: the input consumed by a step is part of the
resulting state, so that an observation (a projection of the state onto the
observed variables) can record it.  Throughout the package a "state" or
"configuration" is therefore a valuation over :attr:`TransitionSystem.state_vars`,
which are the declared state variables followed by the observed inputs.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import expr as ex
from .expr import BOOL, INT, EnumType

DEFAULT_VALIDATION_BOUND = 2 ** 22
DEFAULT_ENUM_CAP = 2 ** 22
CHUNK = 1 << 18


class FsaLearnError(Exception):
    """Base class for errors raised by this package."""


class SystemDefinitionError(FsaLearnError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", column {column}" if column is not None else "") + f": {message}"
        super().__init__(message)


class CapacityError(FsaLearnError):
    """An explicit enumeration would exceed its configured cap."""


# -- domains and variables ----------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """A finite domain: ``bool``, ``int[lo..hi]`` or an enumeration."""
    kind: str
    lo: int = 0
    hi: int = 1
    labels: tuple = ()

    def __post_init__(self):
        if self.kind == "int":
            if self.lo > self.hi:
                raise SystemDefinitionError(f"empty integer domain int[{self.lo}..{self.hi}]")
        elif self.kind == "enum":
            if not self.labels:
                raise SystemDefinitionError("enumeration needs at least one label")
            if len(set(self.labels)) != len(self.labels):
                raise SystemDefinitionError(f"duplicate labels in enumeration {self.labels}")
        elif self.kind != "bool":
            raise SystemDefinitionError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def boolean(cls):
        return cls("bool", 0, 1)

    @classmethod
    def integer(cls, lo, hi):
        return cls("int", lo, hi)

    @classmethod
    def enumeration(cls, labels):
        labels = tuple(labels)
        return cls("enum", 0, len(labels) - 1, labels)

    @property
    def size(self):
        return self.hi - self.lo + 1

    @property
    def type(self):
        if self.kind == "bool":
            return BOOL
        if self.kind == "int":
            return INT
        return EnumType(self.labels)

    @property
    def raw_lo(self):
        return self.lo if self.kind == "int" else 0

    def values(self):
        if self.kind == "bool":
            return [False, True]
        if self.kind == "int":
            return list(range(self.lo, self.hi + 1))
        return list(self.labels)

    def contains(self, value):
        if self.kind == "bool":
            return isinstance(value, bool)
        if self.kind == "int":
            return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi
        return value in self.labels

    def to_raw(self, value):
        return ex.raw_value(value, self.type)

    def from_raw(self, raw):
        raw = int(raw)
        if self.kind == "bool":
            return bool(raw)
        if self.kind == "int":
            return raw
        return self.labels[raw]

    def __str__(self):
        if self.kind == "bool":
            return "bool"
        if self.kind == "int":
            return f"int[{self.lo}..{self.hi}]"
        return "{" + ", ".join(self.labels) + "}"


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: Domain
    role: str = "state"      # "state" or "input"
    observe: bool = False

    def __post_init__(self):
        if self.role not in ("state", "input"):
            raise SystemDefinitionError(f"variable {self.name}: role must be state or input")

    @property
    def type(self):
        return self.domain.type

    def var(self, primed=False):
        return ex.Var(self.name, self.type, primed)


class Valuation(Mapping):
    """Immutable, hashable total assignment of values to variable names."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, bindings=(), **kw):
        items = dict(bindings)
        items.update(kw)
        self._map = items
        self._items = tuple(items.items())
        self._hash = hash(frozenset(self._items))

    def __getitem__(self, key):
        return self._map[key]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return self._map == dict(other)
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in self._items)
        return "{" + inner + "}"

    def project(self, names):
        return Valuation((n, self._map[n]) for n in names)


# -- variable spaces ----------------------------------------------------------

class VarSpace:
    """Mixed-radix encoding of all valuations of an ordered variable list.

    Rows hold raw values (see :mod:`fsalearn.expr`); flat indices enumerate
    valuations lexicographically in declaration order, then domain order.
    """

    def __init__(self, decls):
        self.decls = tuple(decls)
        self.names = tuple(d.name for d in self.decls)
        self.sizes = tuple(d.domain.size for d in self.decls)
        self.los = np.array([d.domain.raw_lo for d in self.decls], dtype=np.int64)
        self.size = math.prod(self.sizes)
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return len(self.decls)

    def column(self, name):
        return self._index[name]

    def rows(self, flat):
        flat = np.asarray(flat, dtype=np.int64)
        if not self.decls:
            return np.zeros((flat.shape[0], 0), dtype=np.int64)
        digits = np.unravel_index(flat, self.sizes)
        return np.stack(digits, axis=1).astype(np.int64) + self.los

    def flat(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        if not self.decls:
            return np.zeros(rows.shape[0], dtype=np.int64)
        return np.ravel_multi_index(tuple((rows - self.los).T), self.sizes).astype(np.int64)

    def env(self, rows, primed=False):
        suffix = "'" if primed else ""
        return {n + suffix: rows[:, i] for i, n in enumerate(self.names)}

    def encode(self, valuation):
        row = []
        for d in self.decls:
            if d.name not in valuation:
                raise KeyError(d.name)
            v = valuation[d.name]
            if not d.domain.contains(v):
                raise ValueError(f"{v!r} is outside the domain {d.domain} of {d.name}")
            row.append(d.domain.to_raw(v))
        return np.array(row, dtype=np.int64)

    def encode_many(self, valuations):
        if not valuations:
            return np.zeros((0, len(self.decls)), dtype=np.int64)
        return np.stack([self.encode(v) for v in valuations])

    def decode(self, row):
        return Valuation((d.name, d.domain.from_raw(r)) for d, r in zip(self.decls, row))

    def decode_many(self, rows):
        return [self.decode(r) for r in rows]

    def chunks(self, chunk=CHUNK):
        for start in range(0, self.size, chunk):
            yield np.arange(start, min(self.size, start + chunk), dtype=np.int64)

    def all_rows(self):
        return self.rows(np.arange(self.size, dtype=np.int64))


# -- transition system --------------------------------------------------------

@dataclass(frozen=True)
class Command:
    """Guarded command; ``guard is None`` marks the default (``else``) command."""
    guard: object
    assignments: tuple
    line: int = field(default=None, compare=False)

    @property
    def is_default(self):
        return self.guard is None


@dataclass(frozen=True)
class TransitionSystem:
    variables: tuple
    init: object
    commands: tuple
    name: str = ""

    def __post_init__(self):
        names = [v.name for v in self.variables]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise SystemDefinitionError(f"duplicate variable names: {sorted(dup)}")
        defaults = [c for c in self.commands if c.is_default]
        if len(defaults) > 1:
            raise SystemDefinitionError("more than one else command", defaults[1].line)
        if defaults and not self.commands[-1].is_default:
            raise SystemDefinitionError("the else command must come last", defaults[0].line)
        for c in self.commands:
            for target, _ in c.assignments:
                d = self.decl(target)
                if d is None or d.role != "state":
                    raise SystemDefinitionError(f"assignment to non-state variable {target!r}", c.line)

    def decl(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        return None

    @cached_property
    def state_decls(self):
        return tuple(v for v in self.variables if v.role == "state")

    @cached_property
    def input_decls(self):
        return tuple(v for v in self.variables if v.role == "input")

    @cached_property
    def state_vars(self):
        """Configuration variables: state variables plus latched observed inputs."""
        return tuple(v for v in self.variables if v.role == "state" or v.observe)

    @cached_property
    def observed(self):
        return tuple(v for v in self.variables if v.observe)

    @cached_property
    def observed_names(self):
        return tuple(v.name for v in self.observed)

    @cached_property
    def config_space(self):
        return VarSpace(self.state_vars)

    @cached_property
    def input_space(self):
        return VarSpace(self.input_decls)

    @cached_property
    def core_space(self):
        return VarSpace(self.state_decls)

    @cached_property
    def observation_space(self):
        return VarSpace(self.observed)

    @cached_property
    def obs_columns(self):
        return np.array([self.config_space.column(n) for n in self.observed_names], dtype=np.int64)

    @cached_property
    def _latched(self):
        """(config column, input column) pairs for latched inputs."""
        return tuple((self.config_space.column(v.name), self.input_space.column(v.name))
                     for v in self.input_decls if v.observe)

    @cached_property
    def cache(self):
        """Per-system memo for derived artefacts such as the transition relation."""
        return {}

    @cached_property
    def scope(self):
        return {v.name: v.type for v in self.variables}

    # -- vectorised semantics ---------------------------------------------

    def step_rows(self, state_rows, input_rows):
        """Successor configurations for aligned rows of configurations and inputs."""
        cs = self.config_space
        env = cs.env(state_rows)
        env.update(self.input_space.env(input_rows))
        n = state_rows.shape[0]
        out = state_rows.copy()
        taken = np.zeros(n, dtype=bool)
        for cmd in self.commands:
            if cmd.is_default:
                mask = ~taken
            else:
                mask = np.broadcast_to(np.asarray(ex.evaluate(cmd.guard, env), dtype=bool), (n,))
                mask = mask & ~taken
            if not mask.any():
                continue
            taken |= mask
            for target, rhs in cmd.assignments:
                vals = np.broadcast_to(np.asarray(ex.evaluate(rhs, env), dtype=np.int64), (n,))
                col = cs.column(target)
                out[mask, col] = vals[mask]
        for ccol, icol in self._latched:
            out[:, ccol] = input_rows[:, icol]
        return out

    def observe_rows(self, state_rows):
        return state_rows[:, self.obs_columns]

    def eval_rows(self, pred, rows, next_rows=None):
        env = self.config_space.env(rows)
        if next_rows is not None:
            env.update(self.config_space.env(next_rows, primed=True))
        return np.broadcast_to(np.asarray(ex.evaluate(pred, env), dtype=bool), (rows.shape[0],))

    def check_input_cap(self, cap):
        if self.input_space.size > cap:
            raise CapacityError(f"state space too large: {self.input_space.size} input valuations "
                                f"exceed the enumeration cap {cap}")

    def successor_flats(self, flats, cap=DEFAULT_ENUM_CAP, chunk=CHUNK):
        """Flat indices of all successors of the given configurations (deduplicated)."""
        self.check_input_cap(cap)
        flats = np.asarray(flats, dtype=np.int64)
        cs, ins = self.config_space, self.input_space
        found = []
        for ci, ii in product_chunks(len(flats), ins.size, chunk):
            nxt = self.step_rows(cs.rows(flats[ci]), ins.rows(ii))
            found.append(np.unique(cs.flat(nxt)))
        if not found:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(found))

    def initial_flats(self):
        """Flat indices of configurations satisfying ``init`` (latched inputs free)."""
        cs = self.config_space
        hits = []
        for chunk in cs.chunks():
            rows = cs.rows(chunk)
            hits.append(chunk[self.eval_rows(self.init, rows)])
        return np.concatenate(hits) if hits else np.zeros(0, dtype=np.int64)

    # -- validation ---------------------------------------------------------

    def validate(self, bound=DEFAULT_VALIDATION_BOUND):
        """Check guard exhaustiveness/determinism, assignment ranges and init by enumeration."""
        core, ins = self.core_space, self.input_space
        total = core.size * ins.size
        if total > bound:
            raise SystemDefinitionError(
                f"state x input space has {total} elements, above the validation bound {bound}")
        if self.config_space.size > bound:
            raise SystemDefinitionError(
                f"configuration space has {self.config_space.size} elements, above the validation bound {bound}")
        init_count = 0
        for chunk in core.chunks():
            rows = core.rows(chunk)
            init_count += int(np.count_nonzero(
                np.broadcast_to(np.asarray(ex.evaluate(self.init, core.env(rows)), dtype=bool), (len(chunk),))))
        if init_count == 0:
            raise SystemDefinitionError("no state satisfies init")
        has_default = bool(self.commands) and self.commands[-1].is_default
        guarded = [c for c in self.commands if not c.is_default]
        for ci, ii in product_chunks(core.size, ins.size, CHUNK):
            srows = core.rows(ci)
            irows = ins.rows(ii)
            env = core.env(srows)
            env.update(ins.env(irows))
            n = len(ci)
            count = np.zeros(n, dtype=np.int64)
            masks = []
            for c in guarded:
                m = np.broadcast_to(np.asarray(ex.evaluate(c.guard, env), dtype=bool), (n,))
                masks.append(m)
                over = m & (count > 0)
                if over.any():
                    i = int(np.argmax(over))
                    raise SystemDefinitionError(
                        f"guards overlap at {self._describe(srows[i], irows[i])}", c.line)
                count += m
            if not has_default and (count == 0).any():
                i = int(np.argmax(count == 0))
                raise SystemDefinitionError(
                    f"no guard fires at {self._describe(srows[i], irows[i])}",
                    self.commands[-1].line if self.commands else None)
            if has_default:
                masks.append(count == 0)
            for c, m in zip(guarded + ([self.commands[-1]] if has_default else []), masks):
                if not m.any():
                    continue
                for target, rhs in c.assignments:
                    d = self.decl(target).domain
                    vals = np.broadcast_to(np.asarray(ex.evaluate(rhs, env), dtype=np.int64), (n,))
                    bad = m & ((vals < d.raw_lo) | (vals > d.raw_lo + d.size - 1))
                    if bad.any():
                        i = int(np.argmax(bad))
                        raise SystemDefinitionError(
                            f"assignment {target}' = {int(vals[i])} leaves domain {d} "
                            f"at {self._describe(srows[i], irows[i])}", c.line)
        return self

    def _describe(self, srow, irow):
        parts = [f"{d.name}={d.domain.from_raw(r)}" for d, r in zip(self.state_decls, srow)]
        parts += [f"{d.name}={d.domain.from_raw(r)}" for d, r in zip(self.input_decls, irow)]
        return "{" + ", ".join(parts) + "}"


def product_chunks(n_left, n_right, chunk=CHUNK):
    """Index pairs of the product ``range(n_left) x range(n_right)`` in row-major chunks."""
    total = n_left * n_right
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield idx // n_right, idx % n_right


# -- public operations ----------------------------------------------------------

def eval_predicate(p, current, next=None):
    """Evaluate a typed predicate on a valuation (and the primed ``next`` valuation)."""
    env = {}
    for name in ex.variables(p, primed=False):
        env[name] = _raw_of(p, name, current[name], primed=False)
    for name in ex.variables(p, primed=True):
        if next is None:
            raise ValueError(f"predicate mentions {name}' but no next valuation was given")
        env[name + "'"] = _raw_of(p, name, next[name], primed=True)
    return bool(ex.evaluate(p, env))


def _raw_of(p, name, value, primed):
    stack = [p]
    while stack:
        node = stack.pop()
        if isinstance(node, ex.Var) and node.name == name and node.primed == primed:
            return ex.raw_value(value, node.type)
        stack.extend(ex.children(node))
    raise KeyError(name)


def step(sys, state, input):
    """The unique successor of ``state`` under ``input``.

    ``state`` must bind every declared state variable; latched observed inputs
    may be omitted since they are overwritten by the step.
    """
    cs = sys.config_space
    full = dict(state)
    for v in sys.input_decls:
        if v.observe and v.name not in full:
            full[v.name] = v.domain.values()[0]
    srow = cs.encode(full)[None, :]
    irow = sys.input_space.encode(input)[None, :]
    return cs.decode(sys.step_rows(srow, irow)[0])


def successors(sys, state, cap=DEFAULT_ENUM_CAP):
    cs = sys.config_space
    full = dict(state)
    for v in sys.input_decls:
        if v.observe and v.name not in full:
            full[v.name] = v.domain.values()[0]
    flat = cs.flat(cs.encode(full)[None, :])
    return set(cs.decode_many(cs.rows(sys.successor_flats(flat, cap))))


def initial_valuations(sys):
    cs = sys.config_space
    flats = sys.initial_flats()
    if len(flats) == 0:
        raise SystemDefinitionError("no state satisfies init")
    return set(cs.decode_many(cs.rows(flats)))


def reachable_flats(sys, cap, enum_cap=DEFAULT_ENUM_CAP):
    """Sorted flat indices of all reachable configurations (breadth-first fixpoint)."""
    seen = sys.initial_flats()
    if len(seen) > cap:
        raise CapacityError(f"oracle unavailable at this scale: more than {cap} reachable states")
    frontier = seen
    while len(frontier):
        nxt = sys.successor_flats(frontier, enum_cap)
        new = np.setdiff1d(nxt, seen, assume_unique=True)
        seen = np.union1d(seen, new)
        if len(seen) > cap:
            raise CapacityError(f"oracle unavailable at this scale: more than {cap} reachable states")
        frontier = new
    return seen


def reachable_states(sys, cap, enum_cap=DEFAULT_ENUM_CAP):
    if cap < 1:
        raise ValueError("cap must be at least 1")
    cs = sys.config_space
    return set(cs.decode_many(cs.rows(reachable_flats(sys, cap, enum_cap))))
