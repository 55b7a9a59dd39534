import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmkit.dsl import (
    DslError,
    parse_events,
    parse_groups,
    parse_injections,
    parse_model,
    serialize_events,
    serialize_groups,
    serialize_injections,
    serialize_model,
)
from tmkit.dsl.scenario import parse_scenarios, serialize_scenarios
from tmkit.fixtures import FIXTURE_NAMES, fixture_file, load_fixture, scenario_files
from tmkit.gen import generate


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_model_round_trip(name):
    fx = load_fixture(name)
    text = serialize_model(fx.model)
    again = parse_model(text)
    assert again == fx.model
    assert serialize_model(again) == text


@pytest.mark.parametrize("name", ["vending", "shopping"])
def test_fixture_events_and_groups_round_trip(name):
    fx = load_fixture(name)
    text = serialize_events(fx.events)
    assert parse_events(text, fx.model).events == fx.events.events
    grp = serialize_groups(fx.carving)
    assert parse_groups(grp) == [(se.name, se.ordered_members()) for se in fx.carving.super_events]


@pytest.mark.parametrize("name", ["vending", "shopping"])
def test_fixture_scenarios_round_trip(name):
    for path in scenario_files(name):
        parsed = parse_scenarios(path.read_text(encoding="utf-8"))
        text = serialize_scenarios(parsed)
        assert [str(a) for s in parse_scenarios(text) for a in s.assertions] == [
            str(a) for s in parsed for a in s.assertions
        ]
        assert serialize_scenarios(parse_scenarios(text)) == text


def test_fixture_files_resolve_through_base():
    assert fixture_file("vending-faulty-change", ".ev") == fixture_file("vending", ".ev")
    assert fixture_file("vending-faulty-change", ".tm") != fixture_file("vending", ".tm")


def test_parse_error_carries_span():
    with pytest.raises(DslError) as info:
        parse_model("model m\nthing x\nthimac A\nnode n: create x in\n")
    (err,) = info.value.errors
    assert (err.span.line, err.span.start) == (4, 20)
    assert str(err).startswith("<model>:4:20:")


def test_parse_reports_every_bad_line():
    text = "model m\nthing x\nbogus line\nthimac A\nnode n: explode x in A\n"
    with pytest.raises(DslError) as info:
        parse_model(text, "m.tm")
    assert [e.span.line for e in info.value.errors] == [3, 5]
    assert all(e.span.file == "m.tm" for e in info.value.errors)


def test_unknown_reference_is_a_parse_error():
    with pytest.raises(DslError, match="unknown"):
        parse_model("model m\nthing x\nthimac A\nnode n: create x in B\n")


def test_comments_and_blank_lines_ignored():
    text = "# header\nmodel m\n\nthing x  # trailing\nthimac A\nnode n: create x in A\n"
    assert [n.id for n in parse_model(text).nodes] == ["n"]


def test_events_reject_unknown_nodes(vending):
    with pytest.raises(DslError, match="unknown node"):
        parse_events('event E1 "x" nodes nope\n', vending.model)


def test_event_description_escapes_round_trip(vending):
    text = 'event E1 "say \\"hi\\" \\\\ now" nodes u_sel_create time "t0"\n'
    em = parse_events(text, vending.model)
    assert em.events[0].description == 'say "hi" \\ now'
    assert em.events[0].time == "t0"
    assert serialize_events(em) == text


def test_injections_round_trip(vending):
    text = 'inject u_sel_create selection name="cola"\ninject u_coins_create coins values="25,50"\n'
    inj = parse_injections(text, vending.model)
    assert [n for n, _ in inj] == ["u_sel_create", "u_coins_create"]
    assert serialize_injections(inj) == text


def test_groups_syntax_error():
    with pytest.raises(DslError):
        parse_groups("super A E1, E2\n")


def test_scenario_needs_super_line():
    with pytest.raises(DslError, match="no 'super' line"):
        parse_scenarios("scenario s\neach x in {1}\n")


def test_scenario_bad_oracle_is_located():
    with pytest.raises(DslError) as info:
        parse_scenarios("scenario s\nsuper S\nexpect fires n t.a = x +\n")
    assert info.value.errors[0].span.line == 3


def test_scenario_open_range_parses():
    (s,) = parse_scenarios("scenario s\nsuper S\neach x in 1..\n")
    assert (s.generators[0].lo, s.generators[0].hi) == (1, None)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_generated_models_round_trip(seed):
    g = generate(seed)
    text = serialize_model(g.model)
    assert parse_model(text) == g.model
    assert serialize_model(parse_model(text)) == text
    ev = serialize_events(g.events)
    assert parse_events(ev, g.model).events == g.events.events
