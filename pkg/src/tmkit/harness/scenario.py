"""Scenario descriptions and exhaustive input enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

from tmkit.harness.oracle import Oracle

DEFAULT_SCENARIO_STEPS = 10_000


class UnboundedGenerator(ValueError):
    pass


# --- generators ----------------------------------------------------------


@dataclass(frozen=True)
class ValueSet:
    var: str
    values: tuple


@dataclass(frozen=True)
class IntRange:
    var: str
    lo: Optional[int]
    hi: Optional[int]  # inclusive


@dataclass(frozen=True)
class StoreItems:
    """Every thing initially held by a store, bound as an attribute dict."""

    var: str
    store: str


@dataclass(frozen=True)
class Multisets:
    """Sorted lists drawn with repetition from ``items``, sizes lo..hi."""

    var: str
    items: tuple
    lo: Optional[int]
    hi: Optional[int]


@dataclass(frozen=True)
class UpstreamOutput:
    """Values produced by another scenario's passing cases."""

    var: str
    scenario: str
    output: str


Generator = Union[ValueSet, IntRange, StoreItems, Multisets, UpstreamOutput]


# --- templates and assertions -------------------------------------------


@dataclass(frozen=True)
class InjectionTemplate:
    node: str
    thing: str
    attrs: tuple  # ((attr, Oracle), ...)


@dataclass(frozen=True)
class AttrCheck:
    thing: str
    attr: str
    expected: Oracle

    def __str__(self) -> str:
        return f"{self.thing}.{self.attr} = {self.expected}"


@dataclass(frozen=True)
class Assertion:
    kind: str  # fires | never | count | stores
    target: str  # node id, event name, or store name for ``stores``
    checks: tuple = ()  # AttrCheck, only for ``fires``
    bound: Optional[Oracle] = None  # count upper bound or expected store size
    condition: Optional[Oracle] = None

    def __str__(self) -> str:
        head = f"if {self.condition}: " if self.condition is not None else ""
        if self.kind == "fires":
            tail = "".join(f" {c}" if i == 0 else f"; {c}" for i, c in enumerate(self.checks))
            return f"{head}fires {self.target}{tail}"
        if self.kind == "never":
            return f"{head}never {self.target}"
        if self.kind == "count":
            return f"{head}count {self.target} <= {self.bound}"
        return f"{head}stores {self.target} = {self.bound}"


@dataclass(frozen=True)
class OutputSpec:
    name: str
    node: str
    thing: str
    attr: str


@dataclass(frozen=True)
class Scenario:
    name: str
    super_event: str
    generators: tuple = ()
    injections: tuple = ()
    assertions: tuple = ()
    outputs: tuple = ()
    max_steps: int = DEFAULT_SCENARIO_STEPS

    def upstream(self) -> list[str]:
        return [g.scenario for g in self.generators if isinstance(g, UpstreamOutput)]


# --- enumeration ---------------------------------------------------------


def _dimension(gen: Generator, model, upstream) -> list:
    if isinstance(gen, ValueSet):
        return list(gen.values)
    if isinstance(gen, IntRange):
        if gen.lo is None or gen.hi is None:
            raise UnboundedGenerator(f"unbounded generator: {gen.var} has no {'lower' if gen.lo is None else 'upper'} bound")
        return list(range(gen.lo, gen.hi + 1))
    if isinstance(gen, Multisets):
        if gen.lo is None or gen.hi is None:
            raise UnboundedGenerator(f"unbounded generator: multiset {gen.var} has no size bound")
        items = sorted(set(gen.items))
        out = []
        for size in range(gen.lo, gen.hi + 1):
            out.extend(list(c) for c in itertools.combinations_with_replacement(items, size))
        return out
    if isinstance(gen, StoreItems):
        if model is None:
            raise ValueError(f"store generator {gen.var} needs a model")
        thimac = model.thimac_index.get(gen.store)
        if thimac is None or not thimac.is_store:
            raise ValueError(f"unknown store {gen.store!r}")
        return [t.as_dict() for t in thimac.contents]
    if isinstance(gen, UpstreamOutput):
        key = (gen.scenario, gen.output)
        if upstream is None or key not in upstream:
            raise ValueError(f"no upstream output {gen.scenario}.{gen.output}")
        return list(upstream[key])
    raise TypeError(f"not a generator: {gen!r}")


def enumerate_inputs(generators, model=None, upstream: Optional[dict] = None) -> list[dict]:
    """All bindings of the generators' cartesian product, first generator outermost.

    ``generators`` may be a Scenario. ``upstream`` maps (scenario, output) to
    the value sequence an UpstreamOutput generator draws from.
    """
    if isinstance(generators, Scenario):
        generators = generators.generators
    gens = list(generators)
    seen = set()
    for g in gens:
        if g.var in seen:
            raise ValueError(f"variable {g.var!r} bound twice")
        seen.add(g.var)
    dims = [_dimension(g, model, upstream) for g in gens]
    return [dict(zip((g.var for g in gens), combo)) for combo in itertools.product(*dims)]
