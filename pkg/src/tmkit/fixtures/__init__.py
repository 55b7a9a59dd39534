"""Shipped case-study fixtures and their seeded-fault variants.

A fixture directory holds ``NAME.tm``, ``NAME.ev``, ``NAME.grp`` and any
number of ``*.sc`` scenario files. A variant directory only needs its own
``.tm``; the rest is taken from its base fixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from tmkit.carve import Carving, carve_manual
from tmkit.core.model import StaticModel, ThingInstance
from tmkit.dsl import parse_events, parse_groups, parse_model
from tmkit.dsl.scenario import parse_scenarios
from tmkit.events import BehavioralModel, EventsModel, build_behavior

DATA = Path(__file__).parent / "data"

BASES = {
    "vending": "vending",
    "shopping": "shopping",
    "vending-faulty-change": "vending",
    "shopping-no-account-guard": "shopping",
}
FIXTURE_NAMES = tuple(BASES)


class UnknownFixture(KeyError):
    def __str__(self) -> str:
        return f"unknown fixture {self.args[0]!r} (known: {', '.join(FIXTURE_NAMES)})"


@dataclass(frozen=True)
class Fixture:
    name: str
    model: StaticModel
    events: EventsModel
    behavior: BehavioralModel
    carving: Carving
    scenarios: tuple

    def __iter__(self):
        # unpacks as (model, events, carving, scenarios)
        return iter((self.model, self.events, self.carving, self.scenarios))


COINS = (100, 50, 25)


def _vending_purchase(text: str) -> list:
    """``DRINK+AMOUNT``: select DRINK and pay AMOUNT in the fewest coins."""
    drink, sep, amount = text.partition("+")
    if not sep or not drink or not amount.isdigit():
        raise ValueError(f"expected DRINK+AMOUNT, got {text!r}")
    rest, coins = int(amount), []
    for c in COINS:
        n, rest = divmod(rest, c)
        coins.extend([c] * n)
    if rest or not coins:
        raise ValueError(f"{amount} cannot be paid in coins of {', '.join(map(str, COINS))}")
    return [
        ("u_sel_create", ThingInstance.of("selection", {"name": drink})),
        ("u_coins_create", ThingInstance.of("coins", {"values": ",".join(map(str, sorted(coins)))})),
    ]


SHORTHANDS = {"vending": _vending_purchase}


def expand_shorthand(name: str, text: str) -> list:
    """Injections for a fixture-specific shorthand such as ``cola+75``."""
    fn = SHORTHANDS.get(BASES.get(name, ""))
    if fn is None:
        raise ValueError(f"fixture {name!r} has no injection shorthand")
    return fn(text)


def fixture_dir(name: str) -> Path:
    if name not in BASES:
        raise UnknownFixture(name)
    return DATA / name


def fixture_file(name: str, suffix: str) -> Path:
    """Path of the fixture's own file with ``suffix``, falling back to its base."""
    own = fixture_dir(name) / f"{name}{suffix}"
    if own.exists():
        return own
    base = BASES[name]
    return DATA / base / f"{base}{suffix}"


def scenario_files(name: str) -> list[Path]:
    files = sorted(fixture_dir(name).glob("*.sc"))
    return files or sorted((DATA / BASES[name]).glob("*.sc"))


def load_fixture(name: str) -> Fixture:
    tm = fixture_file(name, ".tm")
    model = parse_model(tm.read_text(encoding="utf-8"), str(tm.name))
    ev = fixture_file(name, ".ev")
    events = parse_events(ev.read_text(encoding="utf-8"), model, str(ev.name))
    behavior = build_behavior(events)
    grp = fixture_file(name, ".grp")
    carving = carve_manual(behavior, parse_groups(grp.read_text(encoding="utf-8"), str(grp.name)))
    scenarios = []
    for path in scenario_files(name):
        scenarios.extend(parse_scenarios(path.read_text(encoding="utf-8"), str(path.name)))
    return Fixture(name, model, events, behavior, carving, tuple(scenarios))


__all__ = [
    "DATA", "FIXTURE_NAMES", "Fixture", "UnknownFixture", "expand_shorthand", "fixture_dir",
    "fixture_file", "load_fixture", "scenario_files",
]
