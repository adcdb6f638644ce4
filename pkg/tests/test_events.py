import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksikit import events as ev
from ksikit.errors import LogOrderError, LogParseError

from conftest import make_log


def test_encode_decode_pointer_sample_identity():
    e = ev.pointer_sample(0.010, 683.0, 384.0)
    line = ev.encode_event(e)
    assert ev.decode_event(line) == e
    assert '"k":"pointer_sample"' in line


def test_encode_decode_click_identity():
    e = ev.click(1.250, 100.0, 200.0)
    assert ev.decode_event(ev.encode_event(e)) == e


def test_encode_target_shown_preserves_precision():
    # width for difficulty index 3 at 400 px spacing
    w = 400.0 / (2 ** 3 - 1)
    e = ev.target_shown(0.0, 0, 885.0, 384.0, w)
    decoded = ev.decode_event(ev.encode_event(e))
    assert decoded.w == w  # bit-exact, not merely 3 decimals
    assert decoded == e


_FINITE_T = st.floats(min_value=0, max_value=1e6, allow_nan=False)
_COORD = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)
_TEXT = st.text(
    alphabet="abcxyz0189 _-\"\\\t\néü",
    min_size=1,
    max_size=8,
)


@st.composite
def input_events(draw):
    t = draw(_FINITE_T)
    kind = draw(st.sampled_from(ev.EVENT_KINDS))
    if kind == ev.POINTER_SAMPLE:
        return ev.pointer_sample(t, draw(_COORD), draw(_COORD))
    if kind == ev.CLICK:
        return ev.click(t, draw(_COORD), draw(_COORD))
    if kind == ev.KEY_DOWN:
        return ev.key_down(t, draw(_TEXT), draw(st.sampled_from(ev.HANDS)))
    if kind == ev.KEY_UP:
        return ev.key_up(t, draw(_TEXT))
    if kind == ev.MODE_SWITCH:
        return ev.mode_switch(t, draw(st.sampled_from(ev.MODES)))
    if kind == ev.TARGET_SHOWN:
        return ev.target_shown(t, draw(st.integers(0, 10)), draw(_COORD), draw(_COORD),
                               draw(st.floats(min_value=1e-3, max_value=1e3)))
    if kind == ev.WORD_SHOWN:
        return ev.word_shown(t, draw(_TEXT))
    return ev.char_typed(t, draw(_TEXT))


@given(input_events())
@settings(max_examples=300)
def test_roundtrip_property(e):
    assert ev.decode_event(ev.encode_event(e)) == e


def test_decode_session_empty_events(meta):
    log = ev.decode_session([ev.encode_meta(meta)])
    assert log.meta == meta
    assert log.events == []


def test_decode_session_out_of_order(meta):
    lines = [
        ev.encode_meta(meta),
        ev.encode_event(ev.pointer_sample(1.0, 0.0, 0.0)),
        ev.encode_event(ev.pointer_sample(0.5, 0.0, 0.0)),
    ]
    with pytest.raises(LogOrderError) as exc:
        ev.decode_session(lines)
    assert exc.value.index == 1


def test_decode_session_malformed_line_number(meta):
    lines = [ev.encode_meta(meta), '{"k":"pointer_sample","t":0.1']
    with pytest.raises(LogParseError) as exc:
        ev.decode_session(lines)
    assert exc.value.line_no == 2


def test_decode_session_missing_field(meta):
    lines = [ev.encode_meta(meta), '{"k":"pointer_sample","t":0.1,"x":1.0}']
    with pytest.raises(LogParseError, match="missing field"):
        ev.decode_session(lines)


def test_decode_session_requires_meta():
    with pytest.raises(LogParseError, match="meta"):
        ev.decode_session([ev.encode_event(ev.pointer_sample(0.0, 1.0, 1.0))])


def test_session_roundtrip_with_surveys(meta, tmp_path):
    log = make_log(meta, [ev.pointer_sample(0.0, 1.0, 2.0), ev.click(0.5, 1.0, 2.0)])
    log.surveys.append(ev.DiscomfortSurvey((0, 1, 2, 0, 0, 1.5), "baseline"))
    path = tmp_path / "s.ksi.jsonl"
    ev.write_session(log, path)
    back = ev.read_session(path)
    assert back.events == log.events
    assert back.meta == log.meta
    assert back.surveys == log.surveys


def test_validate_click_in_typing_mode(fingers_meta):
    log = make_log(fingers_meta, [ev.click(0.1, 5.0, 5.0)])
    rules = {v.rule for v in ev.validate_session(log)}
    assert "click_in_typing_mode" in rules


def test_validate_char_in_pointing_mode(fingers_meta):
    log = make_log(fingers_meta, [ev.mode_switch(0.0, "pointing"), ev.char_typed(0.1, "a")])
    rules = {v.rule for v in ev.validate_session(log)}
    assert "char_in_pointing_mode" in rules


def test_validate_fingers_click_needs_untracked_space(fingers_meta):
    log = make_log(fingers_meta, [
        ev.mode_switch(0.0, "pointing"),
        ev.key_down(0.1, "space", hand="tracked"),
        ev.click(0.1, 5.0, 5.0),
    ])
    rules = {v.rule for v in ev.validate_session(log)}
    assert "click_without_untracked_space" in rules


def test_validate_mouse_clicks_are_mode_free(meta):
    log = make_log(meta, [ev.click(0.1, 5.0, 5.0), ev.char_typed(0.2, "a")])
    assert ev.validate_session(log) == []


def test_validate_nonpositive_target_width(meta):
    log = make_log(meta, [ev.target_shown(0.0, 0, 10.0, 10.0, 0.0)])
    rules = {v.rule for v in ev.validate_session(log)}
    assert "nonpositive_target_width" in rules


def test_validate_out_of_bounds_pointer(meta):
    log = make_log(meta, [ev.pointer_sample(0.0, -5.0, 10.0)])
    rules = {v.rule for v in ev.validate_session(log)}
    assert "pointer_out_of_bounds" in rules


def test_survey_validation():
    with pytest.raises(ValueError):
        ev.DiscomfortSurvey((1, 2, 3), "baseline")
    with pytest.raises(ValueError):
        ev.DiscomfortSurvey((0, 0, 0, 0, 0, 11.0), "baseline")
    s = ev.DiscomfortSurvey((0, 0, 0, 0, 0, 10.0), "post_device")
    assert math.isclose(sum(s.ratings), 10.0)
