"""Scenario configuration: dataclasses plus a strict YAML loader.

Example::

    n: 5
    epsilon: 1.0e-4
    seed: 7
    model: {kind: sender_faulty, f: 2, strategy: random}
    rule: {kind: equal_neighbor}
    delay: {delta: 1, policy: zero}
    init: {kind: uniform_random}

Unknown keys are rejected; errors name the offending field path.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from . import algorithms, models
from .engine import POLICIES, DelaySchedule
from .errors import ConfigurationError, DomainError, UnsolvableError

SEED_ENV = "DYNAGREE_SEED"
INIT_KINDS = ("uniform_random", "split_halves", "explicit")


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "complete"
    f: int = 0
    budget: int = 0
    density: float | None = None
    strategy: str = "random"
    m: int | None = None


@dataclass(frozen=True)
class RuleSpec:
    kind: str = "equal_neighbor"
    alpha: tuple | None = None
    f: int | None = None
    block_length: int | None = None


@dataclass(frozen=True)
class DelaySpec:
    delta: int = 1
    policy: str = "zero"


@dataclass(frozen=True)
class InitSpec:
    kind: str = "uniform_random"
    values: tuple | None = None


@dataclass(frozen=True)
class Scenario:
    n: int = 3
    epsilon: float = 1e-3
    seed: int | None = None
    cap: int | None = None
    model: ModelSpec = field(default_factory=ModelSpec)
    rule: RuleSpec = field(default_factory=RuleSpec)
    delay: DelaySpec = field(default_factory=DelaySpec)
    init: InitSpec = field(default_factory=InitSpec)
    full_trace: bool = False

    # -- derived objects --
    def resolved_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                return int(env)
            except ValueError:
                raise ConfigurationError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        return 0

    def network_model(self) -> models.NetworkModel:
        m = self.model
        try:
            return models.NetworkModel(m.kind, self.n, f=m.f, budget=m.budget, density=m.density,
                                       strategy=m.strategy, m=m.m)
        except (DomainError, UnsolvableError) as exc:
            raise ConfigurationError(f"model: {exc}") from None

    def weight_rule(self):
        r = self.rule
        f = r.f if r.f is not None else self.model.f
        if r.kind == "equal_neighbor":
            return algorithms.EqualNeighbor()
        if r.kind == "fixed_weight":
            return algorithms.FixedWeight(tuple(r.alpha) if r.alpha is not None else None)
        if r.kind == "reduce":
            if self.n <= 2 * f:
                raise ConfigurationError(f"rule.f: Reduce needs n > 2f, got n={self.n}, f={f}")
            return algorithms.Reduce(f)
        if r.kind == "center":
            if not 0 <= f < self.n:
                raise ConfigurationError(f"rule.f: Center needs 0 <= f < n, got f={f}")
            return algorithms.Center(f)
        if r.kind == "macro_round":
            return algorithms.MacroRound(r.block_length)
        raise ConfigurationError(f"rule.kind: unknown rule {r.kind!r}")

    def schedule(self) -> DelaySchedule:
        return DelaySchedule(self.delay.delta, self.delay.policy, self.resolved_seed())

    def initial_values(self) -> np.ndarray:
        n, kind = self.n, self.init.kind
        if kind == "uniform_random":
            return models.round_rng(self.resolved_seed(), 0).random(n)
        if kind == "split_halves":
            # even-indexed processes start at 0, odd-indexed at 1
            return (np.arange(n) % 2).astype(np.float64)
        vals = np.array(self.init.values, dtype=np.float64)
        return vals


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path or 'config'}: expected a mapping, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in fields:
            raise ConfigurationError(f"{where}: unknown key (allowed: {', '.join(fields)})")
        sub = _NESTED.get((cls, key))
        if sub is not None:
            kwargs[key] = _build(sub, value, where)
        elif key in _FLOATS and isinstance(value, str):
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ConfigurationError(f"{where}: expected a number, got {value!r}") from None
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


_FLOATS = {"epsilon", "density"}

_NESTED = {
    (Scenario, "model"): ModelSpec,
    (Scenario, "rule"): RuleSpec,
    (Scenario, "delay"): DelaySpec,
    (Scenario, "init"): InitSpec,
}


def _require(cond, where, msg):
    if not cond:
        raise ConfigurationError(f"{where}: {msg}")


def validate(s: Scenario) -> Scenario:
    if s.model.kind == "butterfly" and isinstance(s.model.m, int):
        s = dataclasses.replace(s, n=2 * s.model.m)
    _require(isinstance(s.n, int) and s.n >= 1, "n", f"must be a positive integer, got {s.n!r}")
    _require(isinstance(s.epsilon, (int, float)) and s.epsilon > 0, "epsilon", f"must be > 0, got {s.epsilon!r}")
    _require(s.seed is None or isinstance(s.seed, int) and s.seed >= 0, "seed", "must be a non-negative integer")
    _require(s.cap is None or isinstance(s.cap, int) and s.cap >= 1, "cap", "must be a positive integer")
    _require(s.model.kind in models.KINDS, "model.kind", f"unknown kind {s.model.kind!r}")
    _require(isinstance(s.model.f, int) and s.model.f >= 0, "model.f", "must be a non-negative integer")
    _require(isinstance(s.model.budget, int) and s.model.budget >= 0, "model.budget", "must be a non-negative integer")
    _require(s.model.density is None or 0 <= s.model.density <= 1, "model.density", "must lie in [0, 1]")
    _require(s.rule.kind in algorithms.RULES, "rule.kind", f"unknown rule {s.rule.kind!r}")
    _require(isinstance(s.delay.delta, int) and s.delay.delta >= 1, "delay.delta", "must be an integer >= 1")
    _require(s.delay.policy in POLICIES and s.delay.policy != "explicit", "delay.policy",
             f"unknown policy {s.delay.policy!r}")
    _require(s.init.kind in INIT_KINDS, "init.kind", f"unknown kind {s.init.kind!r}")
    if s.init.kind == "explicit":
        _require(s.init.values is not None and len(s.init.values) == s.n, "init.values",
                 f"needs exactly n={s.n} values")
        _require(all(0 <= v <= 1 for v in s.init.values), "init.values", "values must lie in [0, 1]")
    if s.rule.alpha is not None:
        _require(len(s.rule.alpha) == s.n, "rule.alpha", f"needs exactly n={s.n} values")
    if s.rule.kind == "macro_round":
        _require(s.delay.delta == 1, "delay.delta", "macro rounds run synchronously")
    s.network_model()
    s.weight_rule()
    return s


def from_dict(data: dict) -> Scenario:
    return validate(_build(Scenario, data, ""))


def load(path) -> Scenario:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    return from_dict(data or {})


def to_dict(s: Scenario) -> dict:
    def clean(v):
        if isinstance(v, tuple):
            return list(v)
        return v

    out = {}
    for f in dataclasses.fields(s):
        v = getattr(s, f.name)
        out[f.name] = {k: clean(x) for k, x in dataclasses.asdict(v).items()} if dataclasses.is_dataclass(v) else clean(v)
    return out


def with_value(s: Scenario, dotted: str, value) -> Scenario:
    """Copy of ``s`` with the field at ``dotted`` (e.g. ``model.f``) replaced."""
    data = to_dict(s)
    node = data
    parts = dotted.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigurationError(f"{dotted}: no such field")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigurationError(f"{dotted}: no such field")
    node[parts[-1]] = value
    return from_dict(data)
