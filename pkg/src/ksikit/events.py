"""Session data model and the .ksi.jsonl line-delimited log codec.

A session file is one JSON object per line: a meta record first, then
events ordered by time, then optional discomfort-survey records. The
field names and units are normative and documented in docs/log-format.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import LogOrderError, LogParseError

DEVICES = ("fingers", "mouse", "trackpad")
COHORTS = ("novice", "expert")
MODES = ("typing", "pointing")
HANDS = ("tracked", "untracked")

SCREEN_W = 1366
SCREEN_H = 768

POINTER_SAMPLE = "pointer_sample"
KEY_DOWN = "key_down"
KEY_UP = "key_up"
CLICK = "click"
MODE_SWITCH = "mode_switch"
TARGET_SHOWN = "target_shown"
WORD_SHOWN = "word_shown"
CHAR_TYPED = "char_typed"

EVENT_KINDS = (
    POINTER_SAMPLE,
    KEY_DOWN,
    KEY_UP,
    CLICK,
    MODE_SWITCH,
    TARGET_SHOWN,
    WORD_SHOWN,
    CHAR_TYPED,
)

BODY_PARTS = ("hand", "wrist", "forearm", "elbow", "upper_arm", "shoulder")


@dataclass(frozen=True, slots=True)
class InputEvent:
    """One timestamped event; unused fields stay None for other kinds.

    t is seconds since session start. Coordinates are screen pixels.
    """

    t: float
    kind: str
    x: float | None = None          # pointer_sample, click
    y: float | None = None
    key: str | None = None          # key_down, key_up
    hand: str | None = None         # key_down only: tracked | untracked
    to: str | None = None           # mode_switch: typing | pointing
    idx: int | None = None          # target_shown
    cx: float | None = None
    cy: float | None = None
    w: float | None = None
    word: str | None = None         # word_shown
    ch: str | None = None           # char_typed


def pointer_sample(t: float, x: float, y: float) -> InputEvent:
    return InputEvent(t, POINTER_SAMPLE, x=x, y=y)


def key_down(t: float, key: str, hand: str = "tracked") -> InputEvent:
    return InputEvent(t, KEY_DOWN, key=key, hand=hand)


def key_up(t: float, key: str) -> InputEvent:
    return InputEvent(t, KEY_UP, key=key)


def click(t: float, x: float, y: float) -> InputEvent:
    return InputEvent(t, CLICK, x=x, y=y)


def mode_switch(t: float, to: str) -> InputEvent:
    return InputEvent(t, MODE_SWITCH, to=to)


def target_shown(t: float, idx: int, cx: float, cy: float, w: float) -> InputEvent:
    return InputEvent(t, TARGET_SHOWN, idx=idx, cx=cx, cy=cy, w=w)


def word_shown(t: float, word: str) -> InputEvent:
    return InputEvent(t, WORD_SHOWN, word=word)


def char_typed(t: float, ch: str) -> InputEvent:
    return InputEvent(t, CHAR_TYPED, ch=ch)


@dataclass(frozen=True, slots=True)
class SessionMeta:
    participant_id: str
    device: str
    cohort: str
    block_count: int
    screen_w: int = SCREEN_W
    screen_h: int = SCREEN_H
    seed: int = 0

    def __post_init__(self):
        if self.device not in DEVICES:
            raise ValueError(f"unknown device {self.device!r}")
        if self.cohort not in COHORTS:
            raise ValueError(f"unknown cohort {self.cohort!r}")
        if self.screen_w <= 0 or self.screen_h <= 0:
            raise ValueError("screen dimensions must be positive")
        if self.block_count < 1:
            raise ValueError("block_count must be >= 1")


@dataclass(frozen=True, slots=True)
class DiscomfortSurvey:
    """Six 0-10 discomfort ratings (hand, wrist, forearm, elbow, upper arm, shoulder)."""

    ratings: tuple[float, ...]
    phase: str  # baseline | post_device

    def __post_init__(self):
        if len(self.ratings) != len(BODY_PARTS):
            raise ValueError(f"expected {len(BODY_PARTS)} ratings, got {len(self.ratings)}")
        if any(not (0.0 <= r <= 10.0) for r in self.ratings):
            raise ValueError("ratings must lie in [0, 10]")
        if self.phase not in ("baseline", "post_device"):
            raise ValueError(f"unknown survey phase {self.phase!r}")


@dataclass(slots=True)
class SessionLog:
    meta: SessionMeta
    events: list[InputEvent] = field(default_factory=list)
    surveys: list[DiscomfortSurvey] = field(default_factory=list)


# --- encoding -----------------------------------------------------------

def _jstr(s: str) -> str:
    return json.dumps(s)


def encode_event(e: InputEvent) -> str:
    """One self-delimiting JSON line; decode_event(encode_event(e)) == e bit-exactly.

    Floats are written with repr, which round-trips exactly through JSON.
    """
    k = e.kind
    if k == POINTER_SAMPLE:
        return f'{{"k":"pointer_sample","t":{e.t!r},"x":{e.x!r},"y":{e.y!r}}}'
    if k == CLICK:
        return f'{{"k":"click","t":{e.t!r},"x":{e.x!r},"y":{e.y!r}}}'
    if k == KEY_DOWN:
        return f'{{"k":"key_down","t":{e.t!r},"key":{_jstr(e.key)},"hand":"{e.hand}"}}'
    if k == KEY_UP:
        return f'{{"k":"key_up","t":{e.t!r},"key":{_jstr(e.key)}}}'
    if k == MODE_SWITCH:
        return f'{{"k":"mode_switch","t":{e.t!r},"to":"{e.to}"}}'
    if k == TARGET_SHOWN:
        return (
            f'{{"k":"target_shown","t":{e.t!r},"idx":{e.idx},'
            f'"cx":{e.cx!r},"cy":{e.cy!r},"w":{e.w!r}}}'
        )
    if k == WORD_SHOWN:
        return f'{{"k":"word_shown","t":{e.t!r},"word":{_jstr(e.word)}}}'
    if k == CHAR_TYPED:
        return f'{{"k":"char_typed","t":{e.t!r},"ch":{_jstr(e.ch)}}}'
    raise ValueError(f"unknown event kind {k!r}")


def encode_meta(m: SessionMeta) -> str:
    return json.dumps(
        {
            "k": "meta",
            "participant_id": m.participant_id,
            "device": m.device,
            "cohort": m.cohort,
            "block_count": m.block_count,
            "screen_w": m.screen_w,
            "screen_h": m.screen_h,
            "seed": m.seed,
        },
        separators=(",", ":"),
    )


def encode_survey(s: DiscomfortSurvey) -> str:
    return json.dumps(
        {"k": "survey", "phase": s.phase, "ratings": list(s.ratings)},
        separators=(",", ":"),
    )


def encode_session(log: SessionLog) -> Iterator[str]:
    yield encode_meta(log.meta)
    for e in log.events:
        yield encode_event(e)
    for s in log.surveys:
        yield encode_survey(s)


def write_session(log: SessionLog, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in encode_session(log):
            f.write(line)
            f.write("\n")


# --- decoding -----------------------------------------------------------

_REQUIRED_FIELDS = {
    POINTER_SAMPLE: ("x", "y"),
    CLICK: ("x", "y"),
    KEY_DOWN: ("key", "hand"),
    KEY_UP: ("key",),
    MODE_SWITCH: ("to",),
    TARGET_SHOWN: ("idx", "cx", "cy", "w"),
    WORD_SHOWN: ("word",),
    CHAR_TYPED: ("ch",),
}


def decode_event(line: str, line_no: int = 0) -> InputEvent:
    try:
        obj = json.loads(line)
        kind = obj.pop("k")
        t = obj.pop("t")
    except (json.JSONDecodeError, KeyError, AttributeError) as exc:
        raise LogParseError(line_no, f"bad event record: {exc}") from None
    if kind not in _REQUIRED_FIELDS:
        raise LogParseError(line_no, f"unknown event kind {kind!r}")
    missing = [f for f in _REQUIRED_FIELDS[kind] if f not in obj]
    if missing:
        raise LogParseError(line_no, f"{kind} record missing fields {missing}")
    try:
        return InputEvent(t=float(t), kind=kind, **obj)
    except TypeError as exc:
        raise LogParseError(line_no, f"bad {kind} record: {exc}") from None


def decode_meta(line: str) -> SessionMeta:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogParseError(1, f"bad meta record: {exc}") from None
    if obj.get("k") != "meta":
        raise LogParseError(1, "first record must be the session meta")
    try:
        return SessionMeta(
            participant_id=str(obj["participant_id"]),
            device=obj["device"],
            cohort=obj["cohort"],
            block_count=int(obj["block_count"]),
            screen_w=int(obj.get("screen_w", SCREEN_W)),
            screen_h=int(obj.get("screen_h", SCREEN_H)),
            seed=int(obj.get("seed", 0)),
        )
    except (KeyError, ValueError) as exc:
        raise LogParseError(1, f"bad meta record: {exc}") from None


def decode_session(lines: Iterable[str]) -> SessionLog:
    """Parse a whole session; raises LogParseError / LogOrderError on bad input."""
    meta = None
    events: list[InputEvent] = []
    surveys: list[DiscomfortSurvey] = []
    prev_t = -1.0
    index = 0
    loads = json.loads
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if meta is None:
            meta = decode_meta(line)
            continue
        try:
            obj = loads(line)
            kind = obj.pop("k")
        except (json.JSONDecodeError, KeyError, AttributeError) as exc:
            raise LogParseError(line_no, f"bad record: {exc}") from None
        if kind == "survey":
            try:
                surveys.append(
                    DiscomfortSurvey(tuple(float(r) for r in obj["ratings"]), obj["phase"])
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise LogParseError(line_no, f"bad survey record: {exc}") from None
            continue
        required = _REQUIRED_FIELDS.get(kind)
        if required is None:
            raise LogParseError(line_no, f"unknown event kind {kind!r}")
        for f in required:
            if f not in obj:
                raise LogParseError(line_no, f"{kind} record missing field {f!r}")
        try:
            t = float(obj.pop("t"))
            e = InputEvent(t=t, kind=kind, **obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise LogParseError(line_no, f"bad {kind} record: {exc}") from None
        if t < 0:
            raise LogOrderError(index, "negative timestamp")
        if t < prev_t:
            raise LogOrderError(index, f"timestamp {t!r} before previous {prev_t!r}")
        prev_t = t
        events.append(e)
        index += 1
    if meta is None:
        raise LogParseError(1, "empty file: missing meta record")
    return SessionLog(meta=meta, events=events, surveys=surveys)


def read_session(path) -> SessionLog:
    with open(path, "r", encoding="utf-8") as f:
        return decode_session(f)


# --- validation ---------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Violation:
    rule: str
    index: int  # offending event index, -1 for whole-log rules
    message: str


def validate_session(log: SessionLog) -> list[Violation]:
    """Check event-ordering and mode invariants; violations are data, not errors.

    Mode rules (clicks only while pointing, typed characters only while
    typing, spacebar clicks only from the untracked hand) are enforced for
    the fingers device, which is the only one with a mode state machine.
    A mouse or trackpad user can move and click while the other hand types.
    """
    v: list[Violation] = []
    meta = log.meta
    strict_modes = meta.device == "fingers"
    mode = "typing"
    prev_t = -1.0
    last_space_untracked_t = None
    for i, e in enumerate(log.events):
        if e.t < prev_t:
            v.append(Violation("non_monotone_timestamp", i, f"t={e.t!r} before {prev_t!r}"))
        prev_t = max(prev_t, e.t)
        if e.kind == MODE_SWITCH:
            if e.to not in MODES:
                v.append(Violation("bad_mode", i, f"mode_switch to {e.to!r}"))
            mode = e.to
        elif e.kind == KEY_DOWN:
            if e.hand not in HANDS:
                v.append(Violation("bad_hand", i, f"key_down hand {e.hand!r}"))
            if e.key == "space" and e.hand == "untracked":
                last_space_untracked_t = e.t
        elif e.kind == CLICK:
            if strict_modes and mode != "pointing":
                v.append(Violation("click_in_typing_mode", i, f"click at t={e.t!r}"))
            if strict_modes and last_space_untracked_t != e.t:
                v.append(
                    Violation(
                        "click_without_untracked_space",
                        i,
                        "fingers click lacks a same-time untracked-hand space press",
                    )
                )
        elif e.kind == CHAR_TYPED:
            if strict_modes and mode != "typing":
                v.append(Violation("char_in_pointing_mode", i, f"char at t={e.t!r}"))
        elif e.kind == TARGET_SHOWN:
            if e.w is None or e.w <= 0:
                v.append(Violation("nonpositive_target_width", i, f"w={e.w!r}"))
        if e.kind in (POINTER_SAMPLE, CLICK):
            if not (0 <= e.x <= meta.screen_w and 0 <= e.y <= meta.screen_h):
                v.append(Violation("pointer_out_of_bounds", i, f"({e.x!r}, {e.y!r})"))
    return v
