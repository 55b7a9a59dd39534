import pytest

from tmkit.carve import CarveError, atomic_blocks, carve_auto, carve_manual, contract, partition_score
from tmkit.dsl import parse_events, parse_model
from tmkit.events import build_behavior


def parts(carving):
    return [se.ordered_members() for se in carving.super_events]


def _rng(a, b):
    return [f"E{i}" for i in range(a, b + 1)]


def test_vending_auto_three_parts(vending):
    c = carve_auto(vending.behavior, 3)
    assert parts(c) == [_rng(1, 9), _rng(10, 12), _rng(13, 22)]
    assert [se.name for se in c.super_events] == ["SE1", "SE2", "SE3"]
    assert c.notice is None


def test_vending_auto_matches_manual_grouping(vending):
    assert carve_auto(vending.behavior, 3).partition() == vending.carving.partition()


def test_shopping_auto_five_parts(shopping):
    c = carve_auto(shopping.behavior, 5)
    assert parts(c) == [
        _rng(1, 3), _rng(4, 9), _rng(10, 14) + ["E20"], _rng(15, 19), _rng(21, 25),
    ]
    assert c.partition() == shopping.carving.partition()


def test_vending_four_parts_is_connected(vending):
    c = carve_auto(vending.behavior, 4)
    assert len(c.super_events) == 4
    assert all(j.legal_joint for j in c.joints)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_auto_honors_max_parts(vending, k):
    c = carve_auto(vending.behavior, k)
    assert len(c.super_events) == min(k, len(atomic_blocks(vending.behavior)))
    assert all(j.legal_joint for j in c.joints)


def test_default_is_finest_carving(shopping):
    c = carve_auto(shopping.behavior)
    assert sorted(map(sorted, c.partition())) == sorted(map(sorted, atomic_blocks(shopping.behavior)))


def test_max_parts_must_be_positive(vending):
    with pytest.raises(ValueError):
        carve_auto(vending.behavior, 0)


def test_score_orders_branch_cuts_first(vending):
    best = carve_auto(vending.behavior, 3)
    assert partition_score(vending.behavior, best.partition())[0] == 0


def test_manual_errors(vending):
    b = vending.behavior
    with pytest.raises(CarveError) as info:
        carve_manual(b, [("A", _rng(1, 9)), ("B", _rng(9, 12) + ["E99"])])
    codes = sorted({d.code for d in info.value.diagnostics})
    assert codes == ["not a partition", "unknown event"]

    with pytest.raises(CarveError) as info:
        carve_manual(b, [("A", _rng(1, 5)), ("B", _rng(6, 22))])
    assert {d.code for d in info.value.diagnostics} == {"joint is not a transfer/trigger"}

    with pytest.raises(CarveError) as info:
        carve_manual(b, [("A", ["E1", "E13"]), ("B", _rng(2, 12) + _rng(14, 22))])
    assert "disconnected super-event" in {d.code for d in info.value.diagnostics}


def test_contract_gives_super_event_graph(vending):
    g = contract(vending.carving)
    assert {e.name for e in g.events} == {se.name for se in vending.carving.super_events}
    names = [se.name for se in vending.carving.super_events]
    assert {(e.src, e.dst) for e in g.edges} == {(names[0], names[2]), (names[1], names[2])}


SINGLE = """\
model solo
thing t
thimac A
node a: create t in A
node b: release t in A
flow a -> b
"""


def test_no_legal_carving_notice():
    m = parse_model(SINGLE)
    b = build_behavior(parse_events('event E1 "x" nodes a\nevent E2 "y" nodes b\n', m))
    c = carve_auto(b, 2)
    assert len(c.super_events) == 1
    assert "no legal carving" in c.notice


def test_disconnected_components_force_parts():
    m = parse_model(SINGLE + "thimac B\nnode c: create t in B\n")
    b = build_behavior(parse_events('event E1 "x" nodes a, b\nevent E2 "y" nodes c\n', m))
    c = carve_auto(b, 1)
    assert len(c.super_events) == 2
    assert "disconnected" in c.notice
