"""Bundled benchmark systems and their suite manifest."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
import json

from ..checker import CheckerConfig, default_k
from ..dsl import parse_system
from ..learner import LearnerConfig
from ..loop import LoopConfig
from ..system import DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class BenchmarkEntry:
    name: str
    file: str
    k: int
    expected: dict
    rare: bool = False
    capacity_demo: bool = False
    description: str = ""
    learner: dict = field(default_factory=dict)
    checker: dict = field(default_factory=dict)
    budget_seconds: float = 60.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"benchmark {self.name}: declared k must be at least 2")

    def source(self):
        return resources.files(__package__).joinpath(self.file).read_text(encoding="utf-8")

    def load(self):
        """Parse and validate the system file; returns a ``SystemFile``."""
        return parse_system(self.source())

    def loop_config(self, seed=0, **overrides):
        sf = self.load()
        enum_cap = self.checker.get("enum_cap", sf.options.get("enum_cap", DEFAULT_ENUM_CAP))
        checker = CheckerConfig(k=self.k, enum_cap=enum_cap)
        cfg = dict(seed=seed, learner=LearnerConfig(**self.learner), checker=checker,
                   timeout=self.budget_seconds)
        cfg.update(overrides)
        return LoopConfig(**cfg)


def _manifest():
    text = resources.files(__package__).joinpath("suite.json").read_text(encoding="utf-8")
    return json.loads(text)


def list_benchmarks():
    return [BenchmarkEntry(**e) for e in _manifest()["benchmarks"]]


def names():
    return [e.name for e in list_benchmarks()]


def get(name):
    for e in list_benchmarks():
        if e.name == name:
            return e
    raise KeyError(f"unknown benchmark {name!r}; available: {', '.join(names())}")


def load_benchmarks():
    """Every entry with its parsed ``SystemFile``; any invalid entry raises."""
    out = []
    for e in list_benchmarks():
        sf = e.load()
        if sf.reference is None:
            raise ValueError(f"benchmark {e.name} has no reference automaton")
        if "k" in sf.options and sf.options["k"] != e.k:
            raise ValueError(f"benchmark {e.name}: suite k={e.k} disagrees with file option k={sf.options['k']}")
        out.append((e, sf))
    return out


__all__ = ["BenchmarkEntry", "list_benchmarks", "load_benchmarks", "get", "names", "default_k"]
